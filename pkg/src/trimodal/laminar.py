"""Laminar (flat-surface, q-independent) solutions and their constants."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import Params


@dataclass(frozen=True)
class LaminarFlow:
    params: Params
    Q: float
    m0: float
    m1: float

    def psi0(self, s):
        return psi0(self.params, s)

    def psi0_s(self, s):
        return psi0_s(self.params, s)

    def psi0_ss(self, s):
        return psi0_ss(self.params, s)


def laminar_constants(params: Params) -> LaminarFlow:
    th0 = params.theta0
    Q = 0.5 * params.mu**2 * th0**2 * math.sin(params.lam) ** 2
    m1 = params.mu * math.cos(params.lam)
    m0 = params.mu * math.cos(params.lam - th0)
    return LaminarFlow(params, Q, m0, m1)


def _phase(params, s):
    return params.theta0 * (np.asarray(s) - 1.0) + params.lam


# Derivatives are closed-form: they feed the linearisation directly.
def psi0(params: Params, s):
    return params.mu * np.cos(_phase(params, s))


def psi0_s(params: Params, s):
    return -params.mu * params.theta0 * np.sin(_phase(params, s))


def psi0_ss(params: Params, s):
    return -params.mu * params.theta0**2 * np.cos(_phase(params, s))


def psi0_sss(params: Params, s):
    return params.mu * params.theta0**3 * np.sin(_phase(params, s))
