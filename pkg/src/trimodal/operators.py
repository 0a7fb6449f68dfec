"""Discrete flattened water-wave operator and its linear companions.

A field ``w = (eta, phi)`` is stored as cosine coefficients in q: ``eta`` has
shape ``(n_modes,)`` and ``phi`` has shape ``(n_modes, n_s + 1)`` with one
column per s-node.  Products are formed pseudo-spectrally on the padded
midpoint grid of ``Grid`` and projected back onto the retained modes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import laminar
from .dispersion import Params, ThetaValue, profile, theta
from .errors import DomainCollapse, GridMismatch
from .grid import Grid


@dataclass
class WaveField:
    eta: np.ndarray
    phi: np.ndarray

    @classmethod
    def zeros(cls, grid: Grid) -> "WaveField":
        return cls(np.zeros(grid.n_modes), np.zeros(grid.shape))

    def copy(self) -> "WaveField":
        return WaveField(self.eta.copy(), self.phi.copy())

    def __add__(self, other):
        return WaveField(self.eta + other.eta, self.phi + other.phi)

    def __sub__(self, other):
        return WaveField(self.eta - other.eta, self.phi - other.phi)

    def __mul__(self, c):
        return WaveField(c * self.eta, c * self.phi)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(max(np.abs(self.eta).max(), np.abs(self.phi).max()))

    def check(self, grid: Grid):
        if self.eta.shape != (grid.n_modes,) or self.phi.shape != grid.shape:
            raise GridMismatch(
                f"field shapes {self.eta.shape}, {self.phi.shape} do not match {grid}"
            )


@dataclass(frozen=True)
class KernelFunction:
    """cos(kq) sin*(theta_k s)/theta_k together with its surface trace map."""

    k: int
    theta: ThetaValue
    values: np.ndarray  # vertical profile on the s-nodes
    eta_part: float  # -profile(1)/psi0_s(1)

    def tilde(self, grid: Grid) -> WaveField:
        """(eta_phi, phi): the element of Z (phi need not vanish at s = 1)."""
        w = WaveField.zeros(grid)
        w.eta[self.k] = self.eta_part
        w.phi[self.k] = self.values
        return w


def kernel_function(params: Params, k: int, grid: Grid) -> KernelFunction:
    tv = theta(params, k)
    vals = profile(tv, grid.s)
    ps1 = float(laminar.psi0_s(params, 1.0))
    return KernelFunction(k, tv, vals, -vals[-1] / ps1)


def kernel_basis(params: Params, wavenumbers, grid: Grid) -> list[KernelFunction]:
    if max(wavenumbers) >= grid.n_modes:
        raise GridMismatch(f"n_modes = {grid.n_modes} cannot hold mode {max(wavenumbers)}")
    return [kernel_function(params, k, grid) for k in wavenumbers]


# -- the nonlinear operator ---------------------------------------------------


def _profiles(mu, alpha, lam, s):
    th0 = np.sqrt(-alpha)
    ph = th0 * (s - 1.0) + lam
    p0 = mu * np.cos(ph)
    ps = -mu * th0 * np.sin(ph)
    pss = -mu * th0**2 * np.cos(ph)
    return p0, ps, pss


class _State:
    """Grid quantities at a base point, reused by the linearisation."""

    def __init__(self, eta, phi, mu, alpha, lam, xi, grid: Grid):
        s = grid.s
        self.p0, self.ps, self.pss = _profiles(mu, alpha, lam, s)
        self.Q = 0.5 * mu**2 * (-alpha) * np.sin(lam) ** 2
        self.xi, self.alpha = xi, alpha
        self.h = grid.C @ eta
        self.e = grid.Cq @ eta
        self.g = 1.0 + self.h
        if np.isrealobj(self.g) and self.g.min() <= 0.0:
            raise DomainCollapse(f"min(1 + eta) = {self.g.min():.3e} <= 0")
        phi_s = phi @ grid.D1.T
        self.ph = grid.C @ phi
        self.ph_q = grid.Cq @ phi
        self.P = self.ps + grid.C @ phi_s
        self.Pss = self.pss + grid.C @ (phi @ grid.D2.T)
        g = self.g[:, None]
        se = s[None, :] * self.e[:, None]
        self.V = self.ph_q - se * self.P / g
        self.Vq = grid.Sq @ self.V
        self.Vs = self.V @ grid.D1.T
        self.F2 = (
            xi * self.Vq
            - xi * se / g * self.Vs
            + self.Pss / g**2
            - alpha * (self.p0 + self.ph)
        )
        self.F1 = 0.5 * (xi * self.V[:, -1] ** 2 + self.P[:, -1] ** 2 / self.g**2) + self.h - self.Q


def _to_field(F1, F2, grid: Grid) -> WaveField:
    r2 = grid.P @ F2
    r2[:, 0] = 0.0
    r2[:, -1] = 0.0
    return WaveField(grid.P @ F1, r2)


def eval_F(field: WaveField, params: Params, grid: Grid) -> WaveField:
    """Residual (surface Bernoulli, interior equation) in coefficient layout.

    The interior residual is reported on interior s-nodes only; the boundary
    columns are the Dirichlet rows and are identically zero.
    """
    field.check(grid)
    st = _State(field.eta, field.phi, params.mu, params.alpha, params.lam, params.xi, grid)
    return _to_field(st.F1, st.F2, grid)


def eval_F_raw(eta, phi, mu, alpha, lam, xi, grid: Grid):
    """As ``eval_F`` on bare arrays and scalars (complex input allowed)."""
    st = _State(eta, phi, mu, alpha, lam, xi, grid)
    return _to_field(st.F1, st.F2, grid)


def _linearised(st: _State, deta, dphi, grid: Grid):
    """Exact directional derivative of the discrete operator at ``st``.

    ``deta`` has shape (B, N) and ``dphi`` shape (B, N, S) for a batch of B
    directions; returns grid values (dF1, dF2) of shapes (B, M), (B, M, S).
    """
    s = grid.s
    dh = deta @ grid.C.T
    de = deta @ grid.Cq.T
    dph = grid.C @ dphi
    dph_q = grid.Cq @ dphi
    dP = grid.C @ (dphi @ grid.D1.T)
    dPss = grid.C @ (dphi @ grid.D2.T)
    g = st.g[None, :, None]
    e = st.e[None, :, None]
    dg = dh[:, :, None]
    dee = de[:, :, None]
    sv = s[None, None, :]
    P = st.P[None]
    dV = dph_q - sv * (dee * P / g + e * dP / g - e * P * dg / g**2)
    dVq = grid.Sq @ dV
    dVs = dV @ grid.D1.T
    xi = st.xi
    dF2 = (
        xi * dVq
        - xi * sv * (dee / g - e * dg / g**2) * st.Vs[None]
        - xi * sv * e / g * dVs
        + dPss / g**2
        - 2.0 * st.Pss[None] * dg / g**3
        - st.alpha * dph
    )
    g1 = st.g[None, :]
    P1 = st.P[None, :, -1]
    dF1 = xi * st.V[None, :, -1] * dV[:, :, -1] + P1 * dP[:, :, -1] / g1**2 - P1**2 * dh / g1**3 + dh
    return dF1, dF2


def eval_DwF(field0: WaveField, direction: WaveField, params: Params, grid: Grid,
             method: str = "exact", step: float = 1e-7) -> WaveField:
    """Derivative of ``eval_F`` in w at ``field0`` applied to ``direction``.

    ``method="exact"`` differentiates the discrete operator analytically (the
    closed-form linearisation is used when ``field0`` is zero); ``"fd"`` uses
    a one-sided difference with step ``step`` times the field scale.
    """
    field0.check(grid)
    direction.check(grid)
    if method == "fd":
        scale = max(1.0, field0.max_abs()) / max(direction.max_abs(), 1e-300)
        h = step * scale
        f1 = eval_F(field0 + h * direction, params, grid)
        f0 = eval_F(field0, params, grid)
        return (f1 - f0) * (1.0 / h)
    if not np.any(field0.eta) and not np.any(field0.phi):
        return eval_DwF0(direction, params, grid)
    st = _State(field0.eta, field0.phi, params.mu, params.alpha, params.lam, params.xi, grid)
    dF1, dF2 = _linearised(st, direction.eta[None], direction.phi[None], grid)
    return _to_field(dF1[0], dF2[0], grid)


def eval_DwF0(direction: WaveField, params: Params, grid: Grid) -> WaveField:
    """Closed-form linearisation about the laminar flow (modewise in q)."""
    s = grid.s
    k2 = grid.k.astype(float) ** 2
    _, ps, pss = _profiles(params.mu, params.alpha, params.lam, s)
    eta, phi = direction.eta, direction.phi
    phi_s1 = phi @ grid.D1[-1]
    r1 = ps[-1] * phi_s1 - ps[-1] ** 2 * eta + eta
    r2 = (
        -params.xi * k2[:, None] * phi
        + phi @ grid.D2.T
        - params.alpha * phi
        + params.xi * s[None, :] * ps[None, :] * k2[:, None] * eta[:, None]
        - 2.0 * pss[None, :] * eta[:, None]
    )
    r2[:, 0] = 0.0
    r2[:, -1] = 0.0
    return WaveField(r1, r2)


def dF_dparams(field: WaveField, params: Params, grid: Grid,
               names=("mu", "alpha", "xi"), rel_step: float = 1e-6) -> list[WaveField]:
    """Central differences of ``eval_F`` in the named parameters."""
    out = []
    for name in names:
        v = getattr(params, name)
        h = rel_step * max(abs(v), 1e-3)
        fp = eval_F(field, params.replace(**{name: v + h}), grid)
        fm = eval_F(field, params.replace(**{name: v - h}), grid)
        out.append((fp - fm) * (0.5 / h))
    return out


# -- auxiliary linear maps ----------------------------------------------------


def apply_T(phi: np.ndarray, params: Params, grid: Grid) -> WaveField:
    """Lift phi (vanishing at s = 0) to (eta, phi_hat) with phi_hat(1) = 0."""
    ps = laminar.psi0_s(params, grid.s)
    trace = phi[:, -1]
    eta = -trace / ps[-1]
    return WaveField(eta, phi - np.outer(trace, grid.s * ps) / ps[-1])


def apply_R(field: WaveField, params: Params, grid: Grid) -> WaveField:
    ps = laminar.psi0_s(params, grid.s)
    trace = field.phi[:, -1]
    return WaveField(field.eta.copy(), field.phi - np.outer(trace, grid.s * ps) / ps[-1])


def lift_inverse(field: WaveField, params: Params, grid: Grid) -> np.ndarray:
    """The phi with apply_T(phi) == field."""
    ps = laminar.psi0_s(params, grid.s)
    return field.phi - np.outer(field.eta, grid.s * ps)


def eta_of(phi: np.ndarray, params: Params) -> np.ndarray:
    return -phi[:, -1] / float(laminar.psi0_s(params, 1.0))


def apply_L(phi: np.ndarray, params: Params, grid: Grid) -> WaveField:
    """(surface, interior) components of L phi; interior on all nodes s > 0."""
    ps, pss = laminar.psi0_s(params, 1.0), laminar.psi0_ss(params, 1.0)
    k2 = grid.k.astype(float) ** 2
    surf = ps * (phi @ grid.D1[-1]) - (pss + 1.0 / ps) * phi[:, -1]
    inner = -params.xi * k2[:, None] * phi + phi @ grid.D2.T - params.alpha * phi
    inner[:, 0] = 0.0
    return WaveField(surf, inner)


def kernel_residual(params: Params, k: int, grid: Grid) -> tuple[float, float]:
    """(absolute, relative) max-norm residual of L on the kernel candidate k.

    The relative value divides by max|phi_k|; for hyperbolic modes phi_k is
    O(sinh(theta)/theta) and the absolute residual is limited by rounding.
    """
    kf = kernel_function(params, k, grid)
    phi = np.zeros(grid.shape)
    phi[k] = kf.values
    r = apply_L(phi, params, grid)
    res = max(abs(r.eta[k]), np.abs(r.phi[k]).max())
    return float(res), float(res / np.abs(kf.values).max())


def inner_product_Y(w1: WaveField, w2: WaveField, grid: Grid) -> float:
    w1.check(grid)
    w2.check(grid)
    area = (w1.phi * w2.phi) @ grid.weights
    return float(grid.mode_weights @ (area + w1.eta * w2.eta))


def norm_Y(w: WaveField, grid: Grid) -> float:
    return float(np.sqrt(inner_product_Y(w, w, grid)))


def project_Z(w: WaveField, kernel: list[KernelFunction], grid: Grid):
    """Amplitudes <w, w~_j>/|w~_j|^2 and the remainder w - sum c_j w~_j."""
    if not kernel:
        raise ValueError("empty kernel")
    tildes = [kf.tilde(grid) for kf in kernel]
    coeffs = np.array([inner_product_Y(w, t, grid) / inner_product_Y(t, t, grid) for t in tildes])
    rem = w.copy()
    for c, t in zip(coeffs, tildes):
        rem = rem - c * t
    return coeffs, rem


def amplitudes(field: WaveField, kernel: list[KernelFunction], params: Params,
               grid: Grid) -> np.ndarray:
    """Kernel amplitudes of a field in X: project_Z of its preimage under T."""
    phi = lift_inverse(field, params, grid)
    lifted = WaveField(field.eta.copy(), phi)
    return project_Z(lifted, kernel, grid)[0]
