"""Scalar functions of the bifurcation condition.

The vertical profile of mode ``k`` is governed by

    theta_k = |alpha + xi k^2|^(1/2),

and lies in the kernel of the linearised problem exactly when
``theta_k cot*(theta_k)`` equals the right-hand side built from the laminar
flow, ``1/(mu^2 theta_0^2 sin^2 lam) + theta_0 cot(lam)``.  The starred
functions switch between trigonometric and hyperbolic versions according to
the sign of ``xi k^2 + alpha``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasiblePhase, PoleError

DEGENERATE_RTOL = 1e-12
POLE_RADIUS = 1e-9
COTH_CUTOFF = 20.0


@dataclass(frozen=True)
class Params:
    """Laminar amplitude, vorticity, phase and squared wavenumber."""

    mu: float
    alpha: float
    lam: float
    xi: float

    def __post_init__(self):
        if self.mu == 0.0:
            raise ValueError("mu must be nonzero")
        if not self.alpha < 0.0:
            raise ValueError(f"alpha must be negative, got {self.alpha}")
        if math.sin(self.lam) == 0.0:
            raise ValueError("sin(lam) must be nonzero")
        if not self.xi > 0.0:
            raise ValueError(f"xi must be positive, got {self.xi}")

    @property
    def t(self) -> float:
        """The vorticity magnitude |alpha|."""
        return -self.alpha

    @property
    def theta0(self) -> float:
        return math.sqrt(-self.alpha)

    def replace(self, **changes) -> "Params":
        d = dict(mu=self.mu, alpha=self.alpha, lam=self.lam, xi=self.xi)
        d.update(changes)
        return Params(**d)


class Regime(enum.Enum):
    TRIGONOMETRIC = "trigonometric"
    HYPERBOLIC = "hyperbolic"
    DEGENERATE = "degenerate"

    @property
    def sign(self) -> int:
        """sgn(xi k^2 + alpha)."""
        return {"trigonometric": -1, "hyperbolic": 1, "degenerate": 0}[self.value]


@dataclass(frozen=True)
class ThetaValue:
    k: int
    theta: float
    regime: Regime


def classify_regime(alpha: float, xi: float, k: int) -> Regime:
    val = alpha + xi * k * k
    if abs(val) < DEGENERATE_RTOL * max(abs(alpha), xi * k * k):
        return Regime.DEGENERATE
    return Regime.TRIGONOMETRIC if val < 0 else Regime.HYPERBOLIC


def theta(params: Params, k: int) -> ThetaValue:
    regime = classify_regime(params.alpha, params.xi, k)
    if regime is Regime.DEGENERATE:
        return ThetaValue(k, 0.0, regime)
    return ThetaValue(k, math.sqrt(abs(params.alpha + params.xi * k * k)), regime)


def theta_of(value: float, regime: Regime, k: int = 0) -> ThetaValue:
    """Build a ThetaValue directly from theta (used by the root finders)."""
    if value == 0.0:
        return ThetaValue(k, 0.0, Regime.DEGENERATE)
    return ThetaValue(k, float(value), regime)


def _near_pole(th: float) -> bool:
    n = round(th / math.pi)
    return n >= 1 and abs(th - n * math.pi) < POLE_RADIUS


def theta_cot(th: float) -> float:
    """theta*cot(theta) with the removable singularity at 0 filled in."""
    if th == 0.0:
        return 1.0
    if _near_pole(th):
        raise PoleError(f"theta = {th!r} is within {POLE_RADIUS} of a pole of cot")
    return th * math.cos(th) / math.sin(th)


def theta_coth(th: float) -> float:
    if th == 0.0:
        return 1.0
    if th > COTH_CUTOFF:
        return th
    # coth = 1 + 2/(e^{2 theta} - 1), stable near 0 through expm1
    return th + 2.0 * th / math.expm1(2.0 * th)


def theta_cot_star(tv: ThetaValue) -> float:
    if tv.regime is Regime.DEGENERATE:
        return 1.0
    if tv.regime is Regime.HYPERBOLIC:
        return theta_coth(tv.theta)
    return theta_cot(tv.theta)


def sin_star(tv: ThetaValue, s):
    """sin*(theta s); numpy arrays accepted for ``s``."""
    if tv.regime is Regime.HYPERBOLIC:
        return np.sinh(tv.theta * np.asarray(s))
    return np.sin(tv.theta * np.asarray(s))


def cos_star(tv: ThetaValue, s):
    if tv.regime is Regime.HYPERBOLIC:
        return np.cosh(tv.theta * np.asarray(s))
    return np.cos(tv.theta * np.asarray(s))


def profile(tv: ThetaValue, s):
    """Vertical kernel profile sin*(theta s)/theta (or s when theta = 0)."""
    s = np.asarray(s, dtype=float)
    if tv.regime is Regime.DEGENERATE:
        return s.copy()
    return sin_star(tv, s) / tv.theta


def bifurcation_rhs(params: Params) -> float:
    th0 = params.theta0
    sl = math.sin(params.lam)
    return 1.0 / (params.mu**2 * th0**2 * sl**2) + th0 * math.cos(params.lam) / sl


def kernel_condition_residual(params: Params, k: int) -> float:
    """Zero exactly when cos(kq) sin*(theta_k s)/theta_k is a kernel mode."""
    return theta_cot_star(theta(params, k)) - bifurcation_rhs(params)


def recover_mu(a: float, theta0: float, lam: float) -> float:
    """Positive mu for which the right-hand side of the condition equals ``a``."""
    sl = math.sin(lam)
    if sl == 0.0 or theta0 <= 0.0:
        raise InfeasiblePhase("need sin(lam) != 0 and theta0 > 0")
    shift = theta0 * math.cos(lam) / sl
    gap = a - shift
    if gap <= 1e-14 * max(abs(a), abs(shift)):
        raise InfeasiblePhase(
            f"a - theta0*cot(lam) = {gap!r} must be positive for a real mu"
        )
    return 1.0 / (theta0 * abs(sl) * math.sqrt(gap))
