"""Discretisation of the flattened strip: cosine modes in q, nodes in s."""
from __future__ import annotations

import math

import numpy as np

MIN_NS = 8
MAX_NS = 256
MAX_MODES = 512


def cheb_nodes(n: int) -> np.ndarray:
    """n + 1 Chebyshev-Lobatto nodes on [0, 1], increasing."""
    j = np.arange(n + 1)
    # (1 - cos(pi j/n))/2 written as sin^2 for accuracy near s = 0
    return np.sin(0.5 * np.pi * j / n) ** 2


def cheb_diff(n: int) -> np.ndarray:
    """First-derivative matrix on ``cheb_nodes(n)``."""
    j = np.arange(n + 1)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** j
    # x_i - x_j for x = cos(pi j/n), via the product formula
    ti = 0.5 * np.pi * j[:, None] / n
    tj = 0.5 * np.pi * j[None, :] / n
    dx = -2.0 * np.sin(ti + tj) * np.sin(ti - tj)
    np.fill_diagonal(dx, 1.0)
    D = np.outer(c, 1.0 / c) / dx
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    # s = (1 - x)/2  =>  d/ds = -2 d/dx
    return -2.0 * D


def clenshaw_curtis(n: int) -> np.ndarray:
    """Quadrature weights on ``cheb_nodes(n)`` for the interval [0, 1]."""
    theta = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    v = np.ones(n - 1)
    inner = slice(1, n)
    if n % 2 == 0:
        w[0] = w[n] = 1.0 / (n * n - 1)
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k * k - 1)
        v -= np.cos(n * theta[inner]) / (n * n - 1)
    else:
        w[0] = w[n] = 1.0 / (n * n)
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k * k - 1)
    w[inner] = 2.0 * v / n
    return 0.5 * w


def fornberg(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights for derivatives 0..m at z on nodes x."""
    n = len(x)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def fd_matrices(n: int, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Uniform nodes with D1, D2 of the given (even) order of accuracy."""
    s = np.linspace(0.0, 1.0, n + 1)
    width = order + 2
    if width > n + 1:
        raise ValueError(f"need n_s >= {width - 1} for order {order}")
    D1 = np.zeros((n + 1, n + 1))
    D2 = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        lo = min(max(i - width // 2, 0), n + 1 - width)
        idx = np.arange(lo, lo + width)
        w = fornberg(s[i], s[idx], 2)
        D1[i, idx] = w[:, 1]
        D2[i, idx] = w[:, 2]
    return s, D1, D2


class Grid:
    """Immutable discretisation data shared by all operator evaluations.

    Fields are stored as cosine coefficients in q (``n_modes`` of them) times
    values at ``n_s + 1`` nodes in s.  Nonlinear terms are formed on
    ``n_q`` midpoint collocation points of (0, pi), padded by ``pad``.
    """

    SCHEMES = ("chebyshev", "fd4", "fd6", "fd8")

    def __init__(self, n_modes: int, n_s: int, scheme: str = "chebyshev",
                 pad: float = 1.5):
        if not 1 <= n_modes <= MAX_MODES:
            raise ValueError(f"n_modes must lie in [1, {MAX_MODES}]")
        if not MIN_NS <= n_s <= MAX_NS:
            raise ValueError(f"n_s must lie in [{MIN_NS}, {MAX_NS}]")
        if scheme not in self.SCHEMES:
            raise ValueError(f"unknown vertical scheme {scheme!r}")
        self.n_modes = n_modes
        self.n_s = n_s
        self.scheme = scheme
        if scheme == "chebyshev":
            self.s = cheb_nodes(n_s)
            self.D1 = cheb_diff(n_s)
            D2 = self.D1 @ self.D1
            np.fill_diagonal(D2, 0.0)
            np.fill_diagonal(D2, -D2.sum(axis=1))
            self.D2 = D2
            self.weights = clenshaw_curtis(n_s)
        else:
            order = int(scheme[2:])
            self.s, self.D1, self.D2 = fd_matrices(n_s, order)
            self.weights = np.full(n_s + 1, 1.0 / n_s)
            self.weights[[0, -1]] *= 0.5
        for a in (self.s, self.D1, self.D2, self.weights):
            a.setflags(write=False)

        M = max(n_modes, int(math.ceil(pad * n_modes)))
        self.n_q = M
        q = np.pi * (np.arange(M) + 0.5) / M
        k = np.arange(n_modes)
        self.q = q
        self.k = k
        self.C = np.cos(np.outer(q, k))
        self.Cq = -k * np.sin(np.outer(q, k))
        self.Cqq = -(k**2) * self.C
        proj = (2.0 / M) * self.C.T
        proj[0] *= 0.5
        self.P = proj
        # odd functions on the midpoint grid: sine modes 1..M, then d/dq
        kk = np.arange(1, M + 1)
        psin = (2.0 / M) * np.sin(np.outer(kk, q))
        psin[-1] *= 0.5
        self.Sq = (np.cos(np.outer(q, kk)) * kk) @ psin
        for a in (self.q, self.C, self.Cq, self.Cqq, self.P, self.Sq):
            a.setflags(write=False)
        # Parseval weights for integrals over (-pi, pi)
        self.mode_weights = np.full(n_modes, np.pi)
        self.mode_weights[0] = 2.0 * np.pi

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_modes, self.n_s + 1)

    def key(self) -> tuple:
        return (self.n_modes, self.n_s, self.scheme, self.n_q)

    def __eq__(self, other):
        return isinstance(other, Grid) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Grid(n_modes={self.n_modes}, n_s={self.n_s}, scheme={self.scheme!r})"
