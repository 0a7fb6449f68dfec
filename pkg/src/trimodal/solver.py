"""Small-amplitude trimodal solutions by amplitude-pinned Newton iteration.

Unknowns are the full discrete field plus (mu, alpha, xi); lambda stays at
the value of the kernel specification.  The three extra equations pin the
kernel amplitudes of the field to the requested ``t``.  Each Newton step
solves the singular-at-zero Jacobian through a bordered system whose border
spans the discrete cokernel of the linearisation at the bifurcation point.
"""
from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.linalg as sla

from . import operators as op
from .dispersion import Params
from .errors import AdmissibilityViolation, DomainCollapse, NewtonDivergence
from .grid import Grid
from .kernel_finder import KernelSpec
from .modal_classes import region_contains

log = logging.getLogger(__name__)

FREE_PARAMS = ("mu", "alpha", "xi")
DEFAULT_TOL = 1e-10
# a stalled line search below this residual is rounding, not divergence
ACCEPT_RESIDUAL = 1e-8
MAX_ITER = 50
T_MAX = 1e-2
DEFAULT_DELTA = 0.05
JVP_BATCH = 256


@dataclass
class BranchPoint:
    t: tuple
    field: op.WaveField
    params: Params
    residual_norm: float
    newton_iters: int
    admissible: bool = True
    history: list = dc_field(default_factory=list)


@dataclass
class SolverOptions:
    tol: float = DEFAULT_TOL
    max_iter: int = MAX_ITER
    t_max: float = T_MAX
    delta: float = DEFAULT_DELTA
    rank_rtol: float = 1e-9
    min_damping: float = 1.0 / 1024


# -- packing between WaveField and the flat unknown / residual vectors ---------


def _pack(w: op.WaveField) -> np.ndarray:
    return np.concatenate([w.eta, w.phi[:, 1:-1].ravel()])


def _unpack(x: np.ndarray, grid: Grid) -> op.WaveField:
    N = grid.n_modes
    phi = np.zeros(grid.shape)
    phi[:, 1:-1] = x[N:].reshape(N, grid.n_s - 1)
    return op.WaveField(x[:N].copy(), phi)


def _batched_directions(idx: np.ndarray, grid: Grid):
    N, S = grid.shape
    B = len(idx)
    deta = np.zeros((B, N))
    dphi = np.zeros((B, N, S))
    rows = np.arange(B)
    is_eta = idx < N
    deta[rows[is_eta], idx[is_eta]] = 1.0
    j = idx[~is_eta] - N
    dphi[rows[~is_eta], j // (S - 2), 1 + j % (S - 2)] = 1.0
    return deta, dphi


def jacobian_w(w: op.WaveField, params: Params, grid: Grid) -> np.ndarray:
    """Dense derivative of the packed residual in the packed unknowns."""
    st = op._State(w.eta, w.phi, params.mu, params.alpha, params.lam, params.xi, grid)
    n = grid.n_modes * grid.n_s
    J = np.empty((n, n))
    for start in range(0, n, JVP_BATCH):
        idx = np.arange(start, min(n, start + JVP_BATCH))
        deta, dphi = _batched_directions(idx, grid)
        dF1, dF2 = op._linearised(st, deta, dphi, grid)
        r1 = dF1 @ grid.P.T
        r2 = grid.P @ dF2
        J[:, idx] = np.concatenate([r1, r2[:, :, 1:-1].reshape(len(idx), -1)], axis=1).T
    return J


# -- fixed data at the bifurcation point ----------------------------------------


class _KernelData:
    """Kernel lifts, pinning rows and cokernel border at the bifurcation point."""

    def __init__(self, spec: KernelSpec, grid: Grid):
        p = spec.params
        self.kernel = op.kernel_basis(p, spec.wavenumbers, grid)
        self.lifts = []
        for kf in self.kernel:
            phi = np.zeros(grid.shape)
            phi[kf.k] = kf.values
            self.lifts.append(op.apply_T(phi, p, grid))
        self.C = self._pinning_rows(p, grid)
        self.U = self._cokernel(p, grid)

    def _pinning_rows(self, p, grid):
        # rows of the linear map operators.amplitudes; only mode k_j enters row j
        N, S = grid.shape
        n = N * grid.n_s
        C = np.zeros((3, n))
        ps = op.laminar.psi0_s(p, grid.s)
        for j, kf in enumerate(self.kernel):
            tilde = kf.tilde(grid)
            norm2 = op.inner_product_Y(tilde, tilde, grid)
            k, wk = kf.k, grid.mode_weights[kf.k]
            # lifted phi = phi - s psi0_s eta; <., tilde> in mode k only
            wv = grid.weights * kf.values * wk / norm2
            C[j, k] = tilde.eta[k] * wk / norm2 - (grid.s * ps) @ wv
            C[j, N + k * (S - 2): N + (k + 1) * (S - 2)] = wv[1:-1]
        return C

    def _cokernel(self, p, grid):
        N, S = grid.shape
        n = N * grid.n_s
        U = np.zeros((n, 3))
        for j, kf in enumerate(self.kernel):
            k = kf.k
            cols = np.concatenate([[k], N + k * (S - 2) + np.arange(S - 2)])
            block = np.zeros((len(cols), len(cols)))
            for c, col in enumerate(cols):
                e = np.zeros(n)
                e[col] = 1.0
                r = _pack(op.eval_DwF0(_unpack(e, grid), p, grid))
                block[:, c] = r[cols]
            u, sv, _ = np.linalg.svd(block)
            log.debug("mode %d: smallest block singular values %s", k, sv[-2:])
            U[cols, j] = u[:, -1]
        return U

    def initial_field(self, t) -> op.WaveField:
        w = self.lifts[0] * t[0]
        for tj, lj in zip(t[1:], self.lifts[1:]):
            w = w + tj * lj
        return w

    def amplitudes(self, w: op.WaveField) -> np.ndarray:
        return self.C @ _pack(w)


_CACHE: dict = {}


def _kernel_data(spec: KernelSpec, grid: Grid) -> _KernelData:
    key = (spec.wavenumbers, spec.params, grid.key())
    if key not in _CACHE:
        _CACHE.clear()
        _CACHE[key] = _KernelData(spec, grid)
    return _CACHE[key]


def linear_approximation(spec: KernelSpec, t, grid: Grid) -> op.WaveField:
    """The first-order field sum_j t_j w_j*."""
    return _kernel_data(spec, grid).initial_field(t)


# -- Newton ----------------------------------------------------------------------


def _residual(w, params, grid):
    return _pack(op.eval_F(w, params, grid))


def _param_columns(w, params, grid):
    cols = op.dF_dparams(w, params, grid, FREE_PARAMS)
    return np.stack([_pack(c) for c in cols], axis=1)


def _with_params(params: Params, dp) -> Params:
    vals = {name: getattr(params, name) + d for name, d in zip(FREE_PARAMS, dp)}
    return params.replace(**vals)


def _newton_step(w, params, grid, kd: _KernelData, t, opts: SolverOptions):
    r = _residual(w, params, grid)
    c = kd.amplitudes(w) - np.asarray(t)
    A = jacobian_w(w, params, grid)
    B = _param_columns(w, params, grid)
    n = A.shape[0]
    G = np.zeros((n + 3, n + 3))
    G[:n, :n] = A
    G[:n, n:] = kd.U
    G[n:, :n] = kd.C
    lu = sla.lu_factor(G, check_finite=False)
    rhs = np.zeros((n + 3, 4))
    rhs[:n, 0] = -r
    rhs[n:, 0] = -c
    rhs[:n, 1:] = -B
    sol = sla.lu_solve(lu, rhs, check_finite=False)
    y0, Y = sol[:, 0], sol[:, 1:]
    # the border multipliers must vanish: a 3x3 (possibly rank deficient) system
    dp, *_ = np.linalg.lstsq(Y[n:], -y0[n:], rcond=opts.rank_rtol)
    dx = y0[:n] + Y[:n] @ dp
    return dx, dp


def _merit(w, params, grid, kd, t):
    r = _residual(w, params, grid)
    c = kd.amplitudes(w) - np.asarray(t)
    return float(max(np.abs(r).max(), np.abs(c).max()))


def admissible(spec: KernelSpec, t, delta: float = DEFAULT_DELTA) -> bool:
    return region_contains(spec.wavenumbers, t, delta)


def solve_branch_point(spec: KernelSpec, t, grid: Grid, opts: SolverOptions | None = None,
                       initial: BranchPoint | None = None) -> BranchPoint:
    """Solve F(w, mu, alpha, lam*, xi) = 0 with kernel amplitudes pinned to t.

    Raises NewtonDivergence after ``opts.max_iter`` iterations or when the
    line search cannot reduce the residual.
    """
    opts = opts or SolverOptions()
    t = tuple(float(x) for x in t)
    if len(t) != 3:
        raise ValueError("t must have three components")
    tnorm = math.sqrt(sum(x * x for x in t))
    if tnorm > opts.t_max:
        raise ValueError(f"|t| = {tnorm:.3g} exceeds t_max = {opts.t_max:.3g}")
    if tnorm == 0.0:
        return BranchPoint(t, op.WaveField.zeros(grid), spec.params, 0.0, 0)
    ok = admissible(spec, t, opts.delta)
    if not ok:
        warnings.warn(f"t = {t} lies outside the certified region for "
                      f"{spec.wavenumbers}", AdmissibilityViolation, stacklevel=2)

    kd = _kernel_data(spec, grid)
    if initial is not None:
        w, params = initial.field.copy(), initial.params
        # shift the pinned part to the new amplitudes
        w = w + kd.initial_field(np.asarray(t) - np.asarray(initial.t))
    else:
        w, params = kd.initial_field(t), spec.params
    try:
        merit = _merit(w, params, grid, kd, t)
    except DomainCollapse as exc:
        raise NewtonDivergence(f"initial guess is not a valid surface: {exc}") from exc
    history = [merit]
    t0 = time.perf_counter()
    for it in range(1, opts.max_iter + 1):
        dx, dp = _newton_step(w, params, grid, kd, t, opts)
        step, accepted = 1.0, False
        while step >= opts.min_damping:
            try:
                w_new = w + _unpack(step * dx, grid)
                p_new = _with_params(params, step * dp)
                m_new = _merit(w_new, p_new, grid, kd, t)
            except (DomainCollapse, ValueError):
                m_new = math.inf
            if m_new < merit or m_new < opts.tol:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if merit < min(ACCEPT_RESIDUAL, 100 * opts.tol):
                log.info("line search stalled at rounding level %.3e", merit)
                return BranchPoint(t, w, params, merit, it - 1, ok, history)
            raise NewtonDivergence(f"line search stalled at residual {merit:.3e}",
                                   iterations=it, residual=merit)
        w, params, merit = w_new, p_new, m_new
        history.append(merit)
        log.info("newton %d: residual %.3e step %.3g (%.2fs)", it, merit, step,
                 time.perf_counter() - t0)
        if merit < opts.tol:
            return BranchPoint(t, w, params, merit, it, ok, history)
    raise NewtonDivergence(f"no convergence in {opts.max_iter} iterations",
                           iterations=opts.max_iter, residual=merit)


def continue_in_amplitude(spec: KernelSpec, direction, h_max: float, n_steps: int,
                          grid: Grid, opts: SolverOptions | None = None):
    """Branch points along a ray in t, warm-started one from the next.

    Returns ``(points, truncated)``; ``truncated`` is True when a Newton
    failure ended the ray early.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    d = np.asarray(direction, dtype=float)
    if d.shape != (3,) or not math.isclose(np.linalg.norm(d), 1.0, rel_tol=1e-9):
        raise ValueError("direction must be a unit triple")
    points, prev = [], None
    for j in range(1, n_steps + 1):
        t = tuple(j * (h_max / n_steps) * d)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", AdmissibilityViolation)
                bp = solve_branch_point(spec, t, grid, opts, initial=prev)
        except NewtonDivergence as exc:
            log.warning("ray truncated at step %d: %s", j, exc)
            return points, True
        points.append(bp)
        prev = bp
    return points, False


def surface_profile(bp: BranchPoint, n_samples: int = 2048):
    """(q, 1 + eta(q)) at ``n_samples`` equispaced q in [-pi, pi]."""
    q = np.linspace(-np.pi, np.pi, n_samples)
    k = np.arange(len(bp.field.eta))
    return q, 1.0 + np.cos(np.outer(q, k)) @ bp.field.eta
