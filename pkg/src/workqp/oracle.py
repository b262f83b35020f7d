"""Slow reference implementations used to cross-check the engine.

Nothing here calls into :mod:`workqp.work`; only the validated operator
types are shared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .phasespace import GaussianParams


@dataclass(frozen=True)
class OracleResult:
    value: Any
    method: str  # "triple-loop" | "operator-formula" | "quadrature"


MAX_BRUTE_DIM = 8


def brute_pq(s, q: float) -> OracleResult:
    """Direct triple loop over (i, j, k); atoms keyed by w rounded to 12 decimals."""
    if s.dim > MAX_BRUTE_DIM:
        raise ValueError(f"brute_pq: dimension {s.dim} exceeds {MAX_BRUTE_DIM}")
    rho = s.rho0.entries
    u = s.unitary.entries
    ud = u.conj().T
    bins: dict[float, float] = {}
    for i, (p_i, e_i, _) in enumerate(s.initial.members):
        for j, (p_j, e_j, _) in enumerate(s.initial.members):
            for k, (p_k, e_k, _) in enumerate(s.final.members):
                evolved = ud @ p_k @ u
                term = complex(np.trace(p_i @ evolved @ p_j @ rho))
                w = e_k - q * e_i - (1 - q) * e_j
                key = round(w, 12) + 0.0
                bins[key] = bins.get(key, 0.0) + term.real
    return OracleResult(sorted(bins.items()), "triple-loop")


def brute_moments(s, n: int) -> OracleResult:
    """<w^n> for n <= 2 from explicit operator products."""
    if n not in (0, 1, 2):
        raise ValueError("brute_moments: only n = 0, 1, 2")
    dim = s.dim
    h0 = np.zeros((dim, dim), dtype=complex)
    for p, e, _ in s.initial.members:
        h0 = h0 + e * p
    htau = np.zeros((dim, dim), dtype=complex)
    for p, e, _ in s.final.members:
        htau = htau + e * p
    u = s.unitary.entries
    delta = u.conj().T @ htau @ u - h0
    power = np.eye(dim, dtype=complex)
    for _ in range(n):
        power = power @ delta
    return OracleResult(float(np.trace(power @ s.rho0.entries).real), "operator-formula")


def quadrature_wigner(params: GaussianParams) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Closed-form Wigner function of exp(-a x^2 + b x + c).

    Doing the Gaussian y-integral by hand gives
    W = (1/pi) exp(-2 Re a (x - x0)^2) exp(-(p - b_i + 2 a_i x)^2 / (2 Re a)),
    x0 = Re b / (2 Re a), with a = a_r + i a_i and b_i = Im b.
    """
    ar, ai = params.a.real, params.a.imag
    br, bi = params.b.real, params.b.imag
    x0 = br / (2 * ar)

    def w(x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        return np.exp(-2 * ar * (x - x0) ** 2 - (p - bi + 2 * ai * x) ** 2 / (2 * ar)) / math.pi

    return w
