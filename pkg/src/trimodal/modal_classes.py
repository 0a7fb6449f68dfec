"""Classification of wavenumber triples by gcd structure, and amplitude cones.

A triple is reduced by its gcd and then sorted into one of ten cases from
the pairwise gcds and divisibility relations among the reduced entries.
Every case carries a cone in amplitude space (t1, t2, t3) on which local
solutions are certified.  The cone inequalities refer to a relabeled triple
(m1, m2, m3); the relabeling is kept as a permutation so that amplitudes
given in the caller's order can be tested directly.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DegenerateTriple


class Case(enum.Enum):
    I = "I"
    IIa = "IIa"
    IIb = "IIb"
    IIc = "IIc"
    IIIa = "IIIa"
    IIIb = "IIIb"
    IIIc = "IIIc"
    IIId = "IIId"
    IVa = "IVa"
    IVb = "IVb"

    def __str__(self):
        return self.value


REGION_TEXT = {
    Case.I: "all t with 0 < |t| < eps",
    Case.IIa: "|t3| >= d|t|",
    Case.IIb: "|t3| >= d|t1|",
    Case.IIc: "|t3| >= d min(|t1|, |t2|)",
    Case.IIIa: "|t3| >= d|t2| >= d^2|t1|",
    Case.IIIb: "min(|t2|, |t3|) >= d|t1|",
    Case.IIIc: "|t3| >= d|t2| >= d^2 min(|t1|, |t3|)",
    Case.IIId: "min(|t2|, |t3|) >= d min(|t1|, max(|t2|, |t3|))",
    Case.IVa: "min(|t3|, |t2|) >= d|t1| >= d^2 min(|t3|, |t2|)",
    Case.IVb: "|tj| >= d min_{i != j} |ti|, j the index of the smallest |ti|",
}


@dataclass(frozen=True)
class ModalClass:
    """``reduced[i] == original[perm[i]] // divisor``, labeled as in the case."""

    case: Case
    reduced: tuple
    divisor: int
    perm: tuple = (0, 1, 2)

    @property
    def region_text(self) -> str:
        return REGION_TEXT[self.case]


@dataclass(frozen=True)
class RegionPredicate:
    case: Case
    delta: float
    perm: tuple = (0, 1, 2)

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")

    def __call__(self, t) -> bool:
        return region_contains(self, t)


def _reduce(m):
    m = tuple(int(x) for x in m)
    if len(m) != 3 or min(m) < 1:
        raise ValueError(f"need three positive integers, got {m}")
    g = math.gcd(*m)
    r = tuple(x // g for x in m)
    if len(set(r)) < 3:
        raise DegenerateTriple(f"entries of {m} coincide")
    return r, g


def _labelled(r, want):
    """First permutation p (in lexicographic order) with want(r[p0], r[p1], r[p2])."""
    for p in itertools.permutations(range(3)):
        if want(*(r[i] for i in p)):
            return p
    raise AssertionError(f"no labeling found for {r}")  # pragma: no cover


def _divides(a, b):
    return b % a == 0


def classify(m) -> ModalClass:
    r, g = _reduce(m)
    gcd = math.gcd
    n_shared = sum(gcd(r[i], r[j]) > 1 for i, j in ((0, 1), (0, 2), (1, 2)))

    if n_shared == 3:
        case, p = Case.I, (0, 1, 2)
    elif n_shared == 2:
        # m3 shares a factor with both others, m1 and m2 are coprime;
        # in the mixed subcase m1 is the one dividing m3
        def shape(a, b, c):
            return gcd(a, b) == 1 and gcd(a, c) > 1 and gcd(b, c) > 1

        p = _labelled(r, lambda a, b, c: shape(a, b, c)
                      and (_divides(a, c) or not _divides(b, c)))
        a, b, c = (r[i] for i in p)
        case = {(True, True): Case.IIa, (True, False): Case.IIb,
                (False, False): Case.IIc}[(_divides(a, c), _divides(b, c))]
    elif n_shared == 1:
        # m2, m3 share a factor and m3 does not divide m2
        p = _labelled(r, lambda a, b, c: gcd(b, c) > 1 and not _divides(c, b))
        a, b, c = (r[i] for i in p)
        case = {(True, True): Case.IIIa, (True, False): Case.IIIb,
                (False, True): Case.IIIc, (False, False): Case.IIId}[(a == 1, _divides(b, c))]
    else:
        if 1 in r:
            p = _labelled(r, lambda a, b, c: a == 1)
            case = Case.IVa
        else:
            p, case = (0, 1, 2), Case.IVb
    return ModalClass(case, tuple(r[i] for i in p), g, tuple(p))


def region(m, delta: float) -> RegionPredicate:
    mc = classify(m)
    return RegionPredicate(mc.case, delta, mc.perm)


def region_contains(pred, t, delta: float | None = None) -> bool:
    """Whether amplitudes ``t`` lie in the certified cone.

    ``pred`` is a RegionPredicate, or a wavenumber triple together with
    ``delta``.  ``t`` is ordered like the original triple; t = 0 is excluded.
    """
    if not isinstance(pred, RegionPredicate):
        if delta is None:
            raise ValueError("delta is required when passing a wavenumber triple")
        pred = region(pred, delta)
    x = tuple(abs(float(t[i])) for i in pred.perm)
    if not any(x):
        return False
    d = pred.delta
    t1, t2, t3 = x
    c = pred.case
    if c is Case.I:
        return True
    if c is Case.IIa:
        return t3 >= d * math.sqrt(t1 * t1 + t2 * t2 + t3 * t3)
    if c is Case.IIb:
        return t3 >= d * t1
    if c is Case.IIc:
        return t3 >= d * min(t1, t2)
    if c is Case.IIIa:
        return t3 >= d * t2 and d * t2 >= d * d * t1
    if c is Case.IIIb:
        return min(t2, t3) >= d * t1
    if c is Case.IIIc:
        return t3 >= d * t2 and d * t2 >= d * d * min(t1, t3)
    if c is Case.IIId:
        return min(t2, t3) >= d * min(t1, max(t2, t3))
    if c is Case.IVa:
        lo = min(t3, t2)
        return lo >= d * t1 and d * t1 >= d * d * lo
    # IVb: j is the smallest magnitude, ties to the lowest index
    j = min(range(3), key=lambda i: (x[i], i))
    return x[j] >= d * min(x[i] for i in range(3) if i != j)


def reduced_period_check(m, active) -> Fraction:
    """Minimal period of the active modes, as a rational multiple of pi."""
    ks = [int(k) for k, on in zip(m, active) if on]
    if not ks:
        raise ValueError("at least one mode must be active")
    return Fraction(2, math.gcd(*ks))
