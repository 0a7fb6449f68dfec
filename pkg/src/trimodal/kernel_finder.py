"""Construction of two- and three-dimensional kernels.

Two trigonometric modes k1 < k2 share a common value ``a`` of theta*cot(theta)
along an analytic curve in the (xi, t) plane, t = |alpha|.  A third,
hyperbolic mode k3 is attached where theta_3*coth(theta_3) reaches the same
value.  Two routes are provided:

* the closed form: theta_1 in (2pi, 5pi/2) and theta_2 in (pi, 3pi/2) solve
  theta*cot(theta) = a, which fixes (t, xi) by a 2x2 linear solve, and ``a``
  is scanned for the third mode;
* curve tracing: RK4 on dt/dxi followed by a Newton correction in t.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .dispersion import (
    Params,
    Regime,
    ThetaValue,
    kernel_condition_residual,
    recover_mu,
    theta,
    theta_cot,
    theta_coth,
)
from .errors import (
    BranchRootFailure,
    CurveEscape,
    NoThirdMode,
    PoleError,
)

log = logging.getLogger(__name__)

RATIO_THRESHOLD = 9.0 / 16.0
A_SCAN = (1.0 + 1e-3, 1e4, 512)
KERNEL_TOL = 1e-9


@dataclass(frozen=True)
class CurvePoint:
    xi: float
    t: float
    a: float
    k1: int
    k2: int

    @property
    def theta1_sq(self) -> float:
        return self.t - self.xi * self.k1**2

    @property
    def theta2_sq(self) -> float:
        return self.t - self.xi * self.k2**2


@dataclass
class KernelSpec:
    wavenumbers: tuple[int, int, int]
    params: Params
    thetas: tuple[ThetaValue, ThetaValue, ThetaValue]
    a: float
    exact_dimension: int | None = None
    residuals: tuple[float, float, float] = field(default=(0.0, 0.0, 0.0))
    route: str = "closed-form"

    @property
    def xi(self) -> float:
        return self.params.xi

    @property
    def alpha(self) -> float:
        return self.params.alpha


@dataclass
class TransversalityReport:
    f_values: tuple[float, float, float]
    ftilde_values: tuple[float, float, float]
    bracketed_sum: float
    nonzero: bool
    margin: float
    ordering: bool
    ftilde3_below_minus_one: bool
    f_negative: bool
    sin_sq_ordering: bool

    @property
    def certified(self) -> bool:
        return (
            self.nonzero
            and self.ordering
            and self.ftilde3_below_minus_one
            and self.f_negative
            and self.bracketed_sum < 0
        )


# -- the two-mode curve -------------------------------------------------------


def _thetas(t, xi, k1, k2):
    s1 = t - xi * k1 * k1
    s2 = t - xi * k2 * k2
    if s1 <= 0 or s2 <= 0:
        raise CurveEscape(f"theta^2 nonpositive at t={t}, xi={xi}")
    return math.sqrt(s1), math.sqrt(s2)


def curve_f(t: float, xi: float, k1: int, k2: int) -> float:
    th1, th2 = _thetas(t, xi, k1, k2)
    return theta_cot(th1) - theta_cot(th2)


def curve_f_t(t: float, xi: float, k1: int, k2: int) -> float:
    """Partial derivative of ``curve_f`` in t (exact, valid off the curve)."""
    th1, th2 = _thetas(t, xi, k1, k2)
    c1 = math.cos(th1) / math.sin(th1)
    c2 = math.cos(th2) / math.sin(th2)
    return 0.5 * ((c1 / th1 - c1 * c1) - (c2 / th2 - c2 * c2))


def curve_slope(t: float, xi: float, k1: int, k2: int) -> float:
    """dt/dxi along f = 0, with a taken from the k1 mode."""
    th1, th2 = _thetas(t, xi, k1, k2)
    a = theta_cot(th1)
    aa = a * a - a
    return (th1**2 * th2**2 + t * aa) / (xi * aa)


def _check_point(t, xi, k1, k2) -> float:
    th1, th2 = _thetas(t, xi, k1, k2)
    if not th1 > th2 > math.pi:
        raise CurveEscape(f"theta ordering lost: theta1={th1}, theta2={th2}")
    a = theta_cot(th1)
    if not a > 1.0:
        raise CurveEscape(f"a = {a} left (1, inf) at xi = {xi}")
    return a


def correct_t(xi: float, t_guess: float, k1: int, k2: int, tol: float = 1e-12,
              maxiter: int = 20) -> float:
    """Newton iteration in t for f(t, xi) = 0 at fixed xi."""
    t = t_guess
    for _ in range(maxiter):
        fv = curve_f(t, xi, k1, k2)
        step = fv / curve_f_t(t, xi, k1, k2)
        t -= step
        if abs(step) <= tol * abs(t) and abs(curve_f(t, xi, k1, k2)) < 1e-10:
            return t
    if abs(curve_f(t, xi, k1, k2)) < 1e-10:
        return t
    raise CurveEscape(f"corrector failed at xi = {xi}")


def _rk4(t, xi, h, k1, k2):
    s1 = curve_slope(t, xi, k1, k2)
    s2 = curve_slope(t + 0.5 * h * s1, xi + 0.5 * h, k1, k2)
    s3 = curve_slope(t + 0.5 * h * s2, xi + 0.5 * h, k1, k2)
    s4 = curve_slope(t + h * s3, xi + h, k1, k2)
    return t + h * (s1 + 2 * s2 + 2 * s3 + s4) / 6.0


def _point(xi, t, k1, k2) -> CurvePoint:
    return CurvePoint(xi=xi, t=t, a=_check_point(t, xi, k1, k2), k1=k1, k2=k2)


def trace_path(k1: int, k2: int, seed: CurvePoint, xi_target: float,
               step: float = 1e-3) -> list[CurvePoint]:
    """All corrected points from ``seed`` to ``xi_target`` (seed included)."""
    if seed.k1 != k1 or seed.k2 != k2:
        raise ValueError("seed belongs to a different wavenumber pair")
    _check_point(seed.t, seed.xi, k1, k2)
    path = [seed]
    span = xi_target - seed.xi
    if span == 0.0:
        return path
    n = max(1, math.ceil(abs(span) / step - 1e-9))
    h = span / n
    xi, t = seed.xi, seed.t
    for i in range(1, n + 1):
        try:
            t_pred = _rk4(t, xi, h, k1, k2)
            xi = seed.xi + i * h if i < n else xi_target
            t = correct_t(xi, t_pred, k1, k2)
            path.append(_point(xi, t, k1, k2))
        except (PoleError, ZeroDivisionError) as exc:
            raise CurveEscape(f"curve left the admissible region near xi = {xi}") from exc
    return path


def trace_curve(k1: int, k2: int, seed: CurvePoint, xi_target: float,
                step: float = 1e-3) -> CurvePoint:
    return trace_path(k1, k2, seed, xi_target, step)[-1]


# -- closed-form seeds --------------------------------------------------------


def branch_root(a: float, lo: float, hi: float) -> float:
    """Root of theta*cot(theta) = a on a branch where sin keeps one sign.

    Solved as theta*cos(theta) - a*sin(theta) = 0, which has no poles.
    """
    g = lambda th: th * math.cos(th) - a * math.sin(th)  # noqa: E731
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if glo * ghi > 0:
        raise BranchRootFailure(f"no sign change for a = {a} on ({lo}, {hi})")
    return brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)


def seed_thetas(a: float) -> tuple[float, float]:
    th1 = branch_root(a, 2 * math.pi, 2.5 * math.pi)
    th2 = branch_root(a, math.pi, 1.5 * math.pi)
    return th1, th2


def find_two_dim_seed(k1: int, k2: int, a_target: float) -> CurvePoint:
    if not a_target > 1.0:
        raise ValueError("a_target must exceed 1")
    if not k2 > k1 >= 1:
        raise ValueError("need k2 > k1 >= 1")
    th1, th2 = seed_thetas(a_target)
    d = k2 * k2 - k1 * k1
    t = (k2 * k2 * th1**2 - k1 * k1 * th2**2) / d
    xi = (th1**2 - th2**2) / d
    return CurvePoint(xi=xi, t=t, a=theta_cot(th1), k1=k1, k2=k2)


def third_mode_gap(a: float, k1: int, k2: int, k3: int) -> float:
    """theta_3*coth(theta_3) - a at the closed-form seed, or nan if theta_3^2 <= 0."""
    th1, th2 = seed_thetas(a)
    sq = ((k3**2 - k2**2) * th1**2 + (k1**2 - k3**2) * th2**2) / (k2**2 - k1**2)
    if sq <= 0:
        return math.nan
    return theta_coth(math.sqrt(sq)) - a


def _third_gap_at(point: CurvePoint, k3: int) -> float:
    sq = point.xi * k3 * k3 - point.t
    if sq <= 0:
        return math.nan
    return theta_coth(math.sqrt(sq)) - point.a


def wavenumber_ratio(k1: int, k2: int, k3: int) -> float:
    return (k3**2 - k2**2) / (k3**2 - k1**2)


def attach_third_mode(k1: int, k2: int, k3: int, lam: float = math.pi / 2,
                      certify: bool = True, route: str = "auto") -> KernelSpec:
    """Kernel spanned by k1, k2 (trigonometric) and k3 (hyperbolic).

    ``route="auto"`` uses the closed form when the 9/16 ratio condition holds
    and curve tracing otherwise; either route can be forced.
    """
    if not k3 > k2 > k1 >= 1:
        raise ValueError(f"need k3 > k2 > k1 >= 1, got {(k1, k2, k3)}")
    if route not in ("auto", "closed-form", "traced"):
        raise ValueError(f"unknown route {route!r}")
    grid = np.geomspace(*A_SCAN)
    closed = wavenumber_ratio(k1, k2, k3) > RATIO_THRESHOLD
    if route == "closed-form" or (route == "auto" and closed):
        a = _scan_closed_form(grid, k1, k2, k3)
        route = "closed-form"
    else:
        a = _scan_traced(grid, k1, k2, k3)
        route = "traced"
    seed = find_two_dim_seed(k1, k2, a)
    if route == "traced":
        seed = _traced_refine(seed, k3)
        a = seed.a
    spec = build_spec((k1, k2, k3), seed.t, seed.xi, a, lam)
    spec.route = route
    if certify:
        spec.exact_dimension = kernel_dimension(spec.params, spec.a)
    return spec


def _scan_closed_form(grid, k1, k2, k3) -> float:
    gaps = np.array([third_mode_gap(a, k1, k2, k3) for a in grid])
    for i in range(len(grid) - 1):
        g0, g1 = gaps[i], gaps[i + 1]
        if np.isfinite(g0) and np.isfinite(g1) and g0 > 0 >= g1:
            return brentq(third_mode_gap, grid[i], grid[i + 1],
                          args=(k1, k2, k3), xtol=1e-12, rtol=1e-15, maxiter=200)
    raise NoThirdMode(f"theta_3 coth(theta_3) - a has no sign change for {(k1, k2, k3)}")


def _scan_traced(grid, k1, k2, k3) -> float:
    """Curve-tracing route for triples outside the 9/16 ratio condition.

    A seed is taken where mode k3 is hyperbolic with theta_3 coth(theta_3) > a;
    the curve is then followed towards larger a (smaller xi) until the gap
    changes sign.  Returns an ``a`` bracketing value refined later.
    """
    seed = None
    for a in grid:
        if third_mode_gap(a, k1, k2, k3) > 0:
            seed = find_two_dim_seed(k1, k2, a)
            break
    if seed is None:
        raise NoThirdMode(f"no hyperbolic seed for k3 = {k3}")
    prev = seed
    while True:
        step = _adaptive_step(prev)
        try:
            nxt = trace_curve(k1, k2, prev, prev.xi - step, step=step)
        except CurveEscape as exc:
            raise NoThirdMode(f"curve escaped before k3 = {k3} attached") from exc
        gap = _third_gap_at(nxt, k3)
        if np.isfinite(gap) and gap <= 0:
            return prev.a
        prev = nxt


def _adaptive_step(p: CurvePoint) -> float:
    # the curve steepens like 1/(a^2 - a) as a -> 1
    slope = abs(curve_slope(p.t, p.xi, p.k1, p.k2))
    return min(1e-3 * p.xi, 1e-3 * p.t / slope)


def _traced_refine(seed: CurvePoint, k3: int) -> CurvePoint:
    k1, k2 = seed.k1, seed.k2
    step = _adaptive_step(seed)
    lo = seed
    hi = trace_curve(k1, k2, seed, seed.xi - step, step=step)

    def gap(xi):
        t = correct_t(xi, lo.t + (xi - lo.xi) * curve_slope(lo.t, lo.xi, k1, k2), k1, k2)
        return _third_gap_at(_point(xi, t, k1, k2), k3)

    xi = brentq(gap, hi.xi, lo.xi, xtol=1e-15, rtol=1e-15)
    t = correct_t(xi, lo.t + (xi - lo.xi) * curve_slope(lo.t, lo.xi, k1, k2), k1, k2)
    return _point(xi, t, k1, k2)


def build_spec(wavenumbers, t: float, xi: float, a: float,
               lam: float = math.pi / 2) -> KernelSpec:
    mu = recover_mu(a, math.sqrt(t), lam)
    params = Params(mu=mu, alpha=-t, lam=lam, xi=xi)
    thetas = tuple(theta(params, k) for k in wavenumbers)
    residuals = tuple(kernel_condition_residual(params, k) for k in wavenumbers)
    return KernelSpec(tuple(wavenumbers), params, thetas, a, None, residuals)


def kernel_k_max(params: Params, a: float) -> int:
    bound = abs(a) + 1.0  # theta*coth(theta) > theta, so the root lies below a + 1
    return math.ceil(math.sqrt((params.t + bound**2) / params.xi)) + 64


def safe_residual(params: Params, k: int) -> float:
    """Kernel residual with poles mapped to +inf."""
    try:
        return kernel_condition_residual(params, k)
    except PoleError:
        return math.inf


def kernel_modes(params: Params, a: float, tol: float = 1e-6) -> list[int]:
    """All k in [1, k_max] whose kernel residual is below ``tol``."""
    return [
        k for k in range(1, kernel_k_max(params, a) + 1)
        if abs(safe_residual(params, k)) < tol
    ]


def kernel_dimension(params: Params, a: float, tol: float = 1e-6) -> int:
    return len(kernel_modes(params, a, tol))


# -- transversality -----------------------------------------------------------


def f_function(tv: ThetaValue) -> float:
    """sign * (pi/2) * (theta - cos*(theta) sin*(theta)) / theta^3."""
    th = tv.theta
    if tv.regime is Regime.DEGENERATE or th < 1e-4:
        return -math.pi / 3.0
    if tv.regime is Regime.HYPERBOLIC:
        return 0.5 * math.pi * (th - math.cosh(th) * math.sinh(th)) / th**3
    return -0.5 * math.pi * (th - math.cos(th) * math.sin(th)) / th**3


def sin_star_sq(tv: ThetaValue) -> float:
    if tv.regime is Regime.HYPERBOLIC:
        return math.sinh(tv.theta) ** 2
    return math.sin(tv.theta) ** 2


def ftilde(tv: ThetaValue, a: float) -> float:
    x = sin_star_sq(tv)
    return a * x / (tv.regime.sign * (a - 1.0) - x)


def transversality(spec: KernelSpec, threshold: float = 1e-8) -> TransversalityReport:
    k1, k2, k3 = spec.wavenumbers
    tv1, tv2, tv3 = spec.thetas
    fv = tuple(f_function(tv) for tv in spec.thetas)
    ft1, ft2, ft3 = (ftilde(tv, spec.a) for tv in spec.thetas)
    bracket = (
        (k2**2 - k1**2) * ft3 + (k1**2 - k3**2) * ft2 + (k3**2 - k2**2) * ft1
    )
    return TransversalityReport(
        f_values=fv,
        ftilde_values=(ft1, ft2, ft3),
        bracketed_sum=bracket,
        nonzero=abs(bracket) > threshold,
        margin=abs(bracket),
        ordering=ft3 < ft1 < ft2 < 0,
        ftilde3_below_minus_one=ft3 < -1,
        f_negative=all(v < 0 for v in fv),
        sin_sq_ordering=sin_star_sq(tv1) > sin_star_sq(tv2),
    )
