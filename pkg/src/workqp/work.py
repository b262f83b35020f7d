"""Work statistics: TPM distribution, the p_q quasiprobability class and its checks.

Conventions: ``initial`` holds the eigenprojectors P_i of H(0) with energies
e_i; ``final`` holds those of H(tau) with energies e'_k; the engine works with
the Heisenberg-pulled family P'_k = U^dag P_k U.  Triple weights are
T[i, k, j] = Tr{P_i P'_k P_j rho}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .operators import (
    DensityMatrix,
    DimensionError,
    EvolutionSpec,
    HermitianOperator,
    ProjectorFamily,
    Unitary,
    ValidationError,
    dephase,
    propagator,
    spectral_decompose,
)

NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Scenario:
    initial: ProjectorFamily
    final: ProjectorFamily
    evolution: EvolutionSpec
    rho0: DensityMatrix
    unitary: Unitary = field(init=False, repr=False)
    evolved_final: ProjectorFamily = field(init=False, repr=False)

    def __post_init__(self):
        dims = {self.initial.dim, self.final.dim, self.evolution.dim, self.rho0.dim}
        if len(dims) != 1:
            raise DimensionError(f"Scenario: inconsistent dimensions {sorted(dims)}")
        u = propagator(self.evolution)
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "evolved_final", self.final.evolve(u))

    @classmethod
    def from_hamiltonians(cls, h0, htau, evolution: EvolutionSpec, rho0: DensityMatrix,
                          degeneracy_tol: float = 1e-10) -> "Scenario":
        h0 = h0 if isinstance(h0, HermitianOperator) else HermitianOperator(h0)
        htau = htau if isinstance(htau, HermitianOperator) else HermitianOperator(htau)
        return cls(spectral_decompose(h0, degeneracy_tol), spectral_decompose(htau, degeneracy_tol),
                   evolution, rho0)

    @property
    def dim(self) -> int:
        return self.rho0.dim

    @property
    def h0(self) -> np.ndarray:
        return self.initial.reconstruct()

    @property
    def htau_heisenberg(self) -> np.ndarray:
        return self.evolved_final.reconstruct()

    @property
    def energy_scale(self) -> float:
        scale = max(self.initial.spectral_range, self.final.spectral_range)
        return scale if scale > 0 else 1.0

    @property
    def default_merge_tol(self) -> float:
        tol = 1e-9 * self.initial.spectral_range + 1e-9 * self.final.spectral_range
        return tol if tol > 0 else 1e-12

    def with_state(self, rho0: DensityMatrix) -> "Scenario":
        return replace(self, rho0=rho0)

    def dephased(self) -> "Scenario":
        return self.with_state(dephase(self.rho0, self.initial))

    def is_incoherent(self, tol: float = 1e-12) -> bool:
        return float(np.max(np.abs(dephase(self.rho0, self.initial).entries - self.rho0.entries))) <= tol


def merge_atoms(w: np.ndarray, weights: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Sort and accumulate weights whose work values chain within ``tol``.

    Merged atoms sit at the mean of their members' work values.
    """
    w = np.asarray(w, dtype=float).ravel()
    weights = np.asarray(weights).ravel()
    if w.size == 0:
        return w, weights
    order = np.argsort(w, kind="stable")
    ws, cs = w[order], weights[order]
    starts = np.concatenate(([0], np.flatnonzero(np.diff(ws) > tol) + 1))
    counts = np.diff(np.append(starts, ws.size))
    return np.add.reduceat(ws, starts) / counts, np.add.reduceat(cs, starts)


@dataclass(frozen=True, eq=False)
class WorkDistribution:
    """Finite set of (work value, real weight) atoms summing to one."""

    w: np.ndarray
    weights: np.ndarray
    merge_tol: float = 1e-9

    def __post_init__(self):
        w = np.array(self.w, dtype=float).ravel()
        c = np.array(self.weights, dtype=float).ravel()
        if w.shape != c.shape or w.size == 0:
            raise ValidationError("WorkDistribution: need matching, non-empty w and weight arrays")
        if np.any(np.diff(w) <= self.merge_tol):
            raise ValidationError("WorkDistribution: atoms must be sorted and separated by more than merge_tol")
        total = c.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValidationError(f"WorkDistribution: weights sum to {total:.15g}, not 1")
        w.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "weights", c)

    @classmethod
    def from_samples(cls, w, weights, merge_tol: float) -> "WorkDistribution":
        mw, mc = merge_atoms(w, weights, merge_tol)
        return cls(mw, mc.real if np.iscomplexobj(mc) else mc, merge_tol)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.w.tolist(), self.weights.tolist()))

    def __len__(self) -> int:
        return self.w.size


def total_variation(a: WorkDistribution, b: WorkDistribution) -> float:
    """Half the L1 distance after aligning atoms within the larger merge tolerance."""
    tol = max(a.merge_tol, b.merge_tol)
    _, diff = merge_atoms(np.concatenate([a.w, b.w]), np.concatenate([a.weights, -b.weights]), tol)
    return 0.5 * float(np.abs(diff).sum())


def triple_weights(initial: np.ndarray, evolved: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Complex T[i, k, j] = Tr{P_i P'_k P_j rho} for any matrix ``rho``."""
    pj_rho = np.einsum("jcd,da->jca", initial, rho)
    return np.einsum("iab,kbc,jca->ikj", initial, evolved, pj_rho)


def _q_work_values(s: Scenario, q: float) -> np.ndarray:
    e = s.initial.eigenvalues
    ep = s.final.eigenvalues
    return ep[None, :, None] - q * e[:, None, None] - (1 - q) * e[None, None, :]


def tpm_distribution(s: Scenario, merge_tol: float | None = None) -> WorkDistribution:
    """Two-projective-measurement statistics, always evaluated on the dephased state."""
    tol = s.default_merge_tol if merge_tol is None else merge_tol
    rho = dephase(s.rho0, s.initial).entries
    # Tr{P_i P'_k Delta(rho)} = Tr{P'_k P_i rho P_i}
    weights = np.einsum("iab,kbc,ica->ik", s.initial.projectors, s.evolved_final.projectors,
                        np.einsum("icd,de,iea->ica", s.initial.projectors, rho, s.initial.projectors)).real
    w = s.final.eigenvalues[None, :] - s.initial.eigenvalues[:, None]
    return WorkDistribution.from_samples(w, weights, tol)


def quasiprob_q(s: Scenario, q: float, merge_tol: float | None = None) -> WorkDistribution:
    """p_q(w): weights Re Tr{P_i P'_k P_j rho0} at w = e'_k - q e_i - (1 - q) e_j."""
    tol = s.default_merge_tol if merge_tol is None else merge_tol
    t = triple_weights(s.initial.projectors, s.evolved_final.projectors, s.rho0.entries).real
    return WorkDistribution.from_samples(_q_work_values(s, q), t, tol)


def mix(distributions: Sequence[WorkDistribution], weights: Sequence[float]) -> WorkDistribution:
    lam = np.asarray(weights, dtype=float)
    if len(distributions) != lam.size or lam.size == 0:
        raise ValidationError("mix: need one weight per distribution")
    if np.any(lam < 0) or abs(lam.sum() - 1.0) > 1e-12:
        raise ValidationError(f"mix: weights must be non-negative and sum to 1, got {lam.tolist()}")
    w = np.concatenate([d.w for d in distributions])
    c = np.concatenate([l * d.weights for d, l in zip(distributions, lam)])
    return WorkDistribution.from_samples(w, c, max(d.merge_tol for d in distributions))


def moment(d: WorkDistribution, n: int) -> float:
    if n < 0 or int(n) != n:
        raise ValueError(f"moment: order must be a non-negative integer, got {n}")
    return float(np.sum(d.weights * d.w ** int(n)))


def energy_change_operator(s: Scenario) -> np.ndarray:
    """H^(H)(tau) - H(0)."""
    return s.htau_heisenberg - s.h0


def mean_energy_change(s: Scenario) -> float:
    return float(np.trace(energy_change_operator(s) @ s.rho0.entries).real)


def second_moment_operator(s: Scenario) -> float:
    dh = energy_change_operator(s)
    return float(np.trace(dh @ dh @ s.rho0.entries).real)


def negativity(d: WorkDistribution) -> float:
    """Total weight carried by negative atoms."""
    return float(np.sum(np.clip(-d.weights, 0.0, None)))


@dataclass(frozen=True)
class ConditionRecord:
    q: float
    w1: float
    w2: float
    w3: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return max(self.w1, self.w2, self.w3) <= self.tolerance


@dataclass(frozen=True)
class ConditionReport:
    records: tuple
    energy_scale: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)


def verify_conditions(s: Scenario, q_grid: Sequence[float], tol: float = 1e-9) -> ConditionReport:
    """Residuals of the TPM-reduction (W1), mean (W2) and second-moment (W3) conditions.

    W2 and W3 residuals are expressed in units of the scenario's energy
    scale (the larger spectral range), so ``tol`` is scale free.
    """
    scale = s.energy_scale
    tpm = tpm_distribution(s)
    dephased = s.dephased()
    mean = mean_energy_change(s)
    second = second_moment_operator(s)
    records = []
    for q in q_grid:
        pq = quasiprob_q(s, q)
        w1 = total_variation(quasiprob_q(dephased, q), tpm)
        w2 = abs(moment(pq, 1) - mean) / scale
        w3 = abs(moment(pq, 2) - second) / scale ** 2
        records.append(ConditionRecord(float(q), w1, w2, w3, tol))
    return ConditionReport(tuple(records), scale)


@dataclass(frozen=True, eq=False)
class FTensor:
    """Work-value shift f_ijk = a_ik - a_jk + c_ij (i, j initial indices, k final)."""

    a: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        c = np.array(self.c, dtype=float)
        if a.ndim != 2 or c.ndim != 2 or c.shape != (a.shape[0], a.shape[0]):
            raise ValidationError(f"FTensor: shapes a {a.shape}, c {c.shape} are inconsistent")
        if np.any(np.diag(c) != 0):
            raise ValidationError("FTensor: c must have an exactly zero diagonal")
        a.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)
        f = self.values()
        if np.any(np.einsum("iik->ik", f) != 0):
            raise ValidationError("FTensor: f_iik does not vanish")

    @classmethod
    def zero(cls, m: int, n: int) -> "FTensor":
        return cls(np.zeros((m, n)), np.zeros((m, m)))

    def values(self) -> np.ndarray:
        """f indexed [i, j, k]."""
        return self.a[:, None, :] - self.a[None, :, :] + self.c[:, :, None]


def f_perturbed_distribution(s: Scenario, q: float, f: FTensor, merge_tol: float | None = None) -> WorkDistribution:
    m, n = len(s.initial), len(s.final)
    if f.a.shape != (m, n):
        raise ValidationError(f"f_perturbed_distribution: FTensor shape {f.a.shape} != ({m}, {n})")
    tol = s.default_merge_tol if merge_tol is None else merge_tol
    t = triple_weights(s.initial.projectors, s.evolved_final.projectors, s.rho0.entries).real
    shift = np.transpose(f.values(), (0, 2, 1))  # [i, j, k] -> [i, k, j]
    return WorkDistribution.from_samples(_q_work_values(s, q) + shift, t, tol)


FAMILIES = ("initial", "final")


@dataclass(frozen=True)
class ChainSpec:
    """Ordered projector product with a linear work function.

    ``slots`` lists (family, index variable) in product order; a variable may
    repeat.  ``coefficients`` maps each variable to its weight in
    w = sum q'_m e'_{k_m} - sum q_l e_{i_l}; weights within a family sum to 1.
    """

    slots: tuple
    coefficients: tuple

    def __post_init__(self):
        slots = tuple((str(fam), str(var)) for fam, var in self.slots)
        coeffs = dict(self.coefficients)
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "coefficients", tuple(sorted(coeffs.items())))
        if not slots:
            raise ValidationError("ChainSpec: empty chain")
        owner: dict = {}
        for fam, var in slots:
            if fam not in FAMILIES:
                raise ValidationError(f"ChainSpec: unknown family {fam!r}")
            if owner.setdefault(var, fam) != fam:
                raise ValidationError(f"ChainSpec: variable {var!r} used in both families")
        if set(coeffs) != set(owner):
            raise ValidationError("ChainSpec: coefficients must cover exactly the chain variables")
        for fam in FAMILIES:
            members = [coeffs[v] for v, f in owner.items() if f == fam]
            if members and abs(sum(members) - 1.0) > 1e-12:
                raise ValidationError(f"ChainSpec: {fam} coefficients sum to {sum(members)}, not 1")

    @property
    def variables(self) -> list[str]:
        seen = []
        for _, var in self.slots:
            if var not in seen:
                seen.append(var)
        return seen

    def family_of(self, var: str) -> str:
        return next(f for f, v in self.slots if v == var)

    @property
    def has_repetition(self) -> bool:
        return len(self.variables) < len(self.slots)

    @classmethod
    def margenau_hill(cls) -> "ChainSpec":
        """X_ik = P_i P'_k, w = e'_k - e_i."""
        return cls((("initial", "i"), ("final", "k")), (("i", 1.0), ("k", 1.0)))

    @classmethod
    def reversed_margenau_hill(cls) -> "ChainSpec":
        """X_ki = P'_k P_i."""
        return cls((("final", "k"), ("initial", "i")), (("i", 1.0), ("k", 1.0)))

    @classmethod
    def triple(cls, q: float) -> "ChainSpec":
        """X_ikj = P_i P'_k P_j, w = e'_k - q e_i - (1 - q) e_j."""
        return cls((("initial", "i"), ("final", "k"), ("initial", "j")),
                   (("i", q), ("j", 1.0 - q), ("k", 1.0)))

    @classmethod
    def repeated_initial(cls) -> "ChainSpec":
        """X_iki = P_i P'_k P_i, w = e'_k - e_i."""
        return cls((("initial", "i"), ("final", "k"), ("initial", "i")), (("i", 1.0), ("k", 1.0)))

    @classmethod
    def repeated_final(cls) -> "ChainSpec":
        """X_kik = P'_k P_i P'_k, w = e'_k - e_i."""
        return cls((("final", "k"), ("initial", "i"), ("final", "k")), (("i", 1.0), ("k", 1.0)))


def chain_terms(s: Scenario, chain: ChainSpec, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unmerged (w, Tr{X rho}) over every index assignment; ``rho`` may be any matrix."""
    variables = chain.variables
    coeffs = dict(chain.coefficients)
    fams = {"initial": s.initial, "final": s.evolved_final}
    energies = {"initial": s.initial.eigenvalues, "final": s.final.eigenvalues}
    sign = {"initial": -1.0, "final": 1.0}
    ranges = [range(len(fams[chain.family_of(v)])) for v in variables]
    ws, cs = [], []
    for combo in itertools.product(*ranges):
        idx = dict(zip(variables, combo))
        x = np.eye(s.dim, dtype=complex)
        for fam, var in chain.slots:
            x = x @ fams[fam].projectors[idx[var]]
        cs.append(np.trace(x @ rho))
        ws.append(sum(sign[chain.family_of(v)] * coeffs[v] * energies[chain.family_of(v)][idx[v]]
                      for v in variables))
    return np.array(ws), np.array(cs, dtype=complex)


@dataclass(frozen=True, eq=False)
class ChainResult:
    w: np.ndarray
    complex_weights: np.ndarray
    real: WorkDistribution


def chain_distribution(s: Scenario, chain: ChainSpec, merge_tol: float | None = None) -> ChainResult:
    tol = s.default_merge_tol if merge_tol is None else merge_tol
    w, c = chain_terms(s, chain, s.rho0.entries)
    mw, mc = merge_atoms(w, c, tol)
    return ChainResult(mw, mc, WorkDistribution(mw, mc.real, tol))


def chain_mean_functional(s: Scenario, chain: ChainSpec, rho: np.ndarray) -> complex:
    """sum Tr{X rho} w, linear in ``rho``."""
    w, c = chain_terms(s, chain, rho)
    return complex(np.sum(c * w))


def energy_change_functional(s: Scenario, rho: np.ndarray) -> complex:
    return complex(np.trace(energy_change_operator(s) @ rho))


FREE_CHAINS = {
    "ik": ChainSpec.margenau_hill(),
    "ki": ChainSpec.reversed_margenau_hill(),
    "ikj(q=0.5)": ChainSpec.triple(0.5),
    "ikj(q=0.25)": ChainSpec.triple(0.25),
}


@dataclass(frozen=True)
class ProbeRecord:
    probe: str
    energy_change: complex
    chain: str
    chain_mean: complex

    @property
    def deviation(self) -> float:
        return abs(self.chain_mean - self.energy_change)


@dataclass(frozen=True)
class NoGoReport:
    status: str  # "confirmed" | "inconclusive" | "failed"
    repeated_deviation: float
    repeated_final_deviation: float
    free_deviation: float
    records: tuple
    deviation_tol: float
    free_tol: float

    @property
    def passed(self) -> bool:
        return self.status == "confirmed"


def _probes(fam: ProjectorFamily, label: str) -> list[tuple[str, np.ndarray]]:
    vecs = [fam.vectors(i)[:, 0] for i in range(len(fam))]
    return [
        (f"|{label}{i}><{label}{j}|", np.outer(vecs[i], vecs[j].conj()))
        for i in range(len(vecs)) for j in range(len(vecs)) if i != j
    ]


def no_go_repetition(s: Scenario, deviation_tol: float = 1e-6, free_tol: float = 1e-10,
                     vacuity_tol: float = 1e-12) -> NoGoReport:
    """Probe the mean condition with off-diagonal operators |e_i><e_j|.

    Chains repeating a projector give zero mean on these probes while the
    energy change does not; repetition-free chains reproduce it exactly.
    """
    if s.dim < 2:
        raise ValidationError("no_go_repetition: needs dimension >= 2")
    records = []
    initial_probes = _probes(s.initial, "e")
    final_probes = _probes(s.evolved_final, "f")
    for name, rho in initial_probes:
        target = energy_change_functional(s, rho)
        records.append(ProbeRecord(name, target, "iki",
                                   chain_mean_functional(s, ChainSpec.repeated_initial(), rho)))
        for label, chain in FREE_CHAINS.items():
            records.append(ProbeRecord(name, target, label, chain_mean_functional(s, chain, rho)))
    for name, rho in final_probes:
        target = energy_change_functional(s, rho)
        records.append(ProbeRecord(name, target, "kik",
                                   chain_mean_functional(s, ChainSpec.repeated_final(), rho)))
    scale = s.energy_scale

    def worst(chains) -> float:
        vals = [r.deviation for r in records if r.chain in chains]
        return max(vals) if vals else 0.0

    rep = worst({"iki"})
    rep_final = worst({"kik"})
    free = worst(set(FREE_CHAINS))
    vacuous = max(abs(energy_change_functional(s, rho)) for _, rho in initial_probes) <= vacuity_tol * scale
    if free > free_tol:
        status = "failed"
    elif vacuous:
        status = "inconclusive"
    elif rep > deviation_tol:
        status = "confirmed"
    else:
        status = "failed"
    return NoGoReport(status, rep, rep_final, free, tuple(records), deviation_tol, free_tol)
