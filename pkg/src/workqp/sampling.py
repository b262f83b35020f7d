"""Random operators and scenarios for the property suites and scripts."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .operators import DensityMatrix, EvolutionSpec, HermitianOperator, Unitary, dephase
from .work import Scenario


def random_hermitian(dim: int, rng: np.random.Generator, spread: float = 1.0) -> HermitianOperator:
    """GUE-like Hermitian matrix rescaled to the given spectral range."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = 0.5 * (a + a.conj().T)
    ev = np.linalg.eigvalsh(h)
    h = h * (spread / (ev[-1] - ev[0]))
    return HermitianOperator(0.5 * (h + h.conj().T))


def _haar(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim == 1:
        return np.exp(2j * np.pi * rng.uniform(size=(1, 1)))
    return unitary_group.rvs(dim, random_state=rng)


def random_unitary(dim: int, rng: np.random.Generator) -> Unitary:
    return Unitary(_haar(dim, rng))


def random_pure_state(dim: int, rng: np.random.Generator) -> DensityMatrix:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v /= np.linalg.norm(v)
    return DensityMatrix.pure(v)


def random_mixed_state(dim: int, rng: np.random.Generator) -> DensityMatrix:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def random_effect(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Matrix with spectrum drawn uniformly from [0, 1] in a Haar basis."""
    u = _haar(dim, rng)
    m = (u * rng.uniform(0, 1, size=dim)) @ u.conj().T
    return 0.5 * (m + m.conj().T)


def random_scenario(dim: int, rng: np.random.Generator, coherent: bool = True, mixed: bool = False) -> Scenario:
    h0 = random_hermitian(dim, rng)
    htau = random_hermitian(dim, rng)
    rho = random_mixed_state(dim, rng) if mixed else random_pure_state(dim, rng)
    s = Scenario.from_hamiltonians(h0, htau, EvolutionSpec.direct(random_unitary(dim, rng)), rho)
    if not coherent:
        s = s.with_state(dephase(s.rho0, s.initial))
    return s
