"""Multilinear quasiprobability functional on ordered effect sequences.

The joint value of events E1, ..., En in state rho is Re Tr{E1 E2 ... En rho}
for a chosen ordering.  Checkers below evaluate the defining axioms
numerically and return :class:`AxiomReport` records.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .operators import (
    DensityMatrix,
    DimensionError,
    Effect,
    ProjectorError,
    ProjectorFamily,
    ValidationError,
    commutator,
    max_abs,
)


@dataclass(frozen=True, eq=False)
class EffectSequence:
    effects: tuple

    def __post_init__(self):
        effs = tuple(e if isinstance(e, Effect) else Effect(e) for e in self.effects)
        if not effs:
            raise ValidationError("EffectSequence: needs at least one effect")
        if len({e.dim for e in effs}) != 1:
            raise DimensionError("EffectSequence: effects have different dimensions")
        object.__setattr__(self, "effects", effs)

    @property
    def dim(self) -> int:
        return self.effects[0].dim

    def __len__(self) -> int:
        return len(self.effects)

    def __iter__(self):
        return iter(self.effects)

    def matrices(self) -> list[np.ndarray]:
        return [e.entries for e in self.effects]

    def inserted(self, slot: int, effect: Effect) -> "EffectSequence":
        effs = list(self.effects)
        effs.insert(slot, effect)
        return EffectSequence(tuple(effs))

    def replaced(self, slot: int, effect: Effect) -> "EffectSequence":
        effs = list(self.effects)
        effs[slot] = effect
        return EffectSequence(tuple(effs))

    def reversed(self) -> "EffectSequence":
        return EffectSequence(self.effects[::-1])

    def permuted(self, order: Sequence[int]) -> "EffectSequence":
        return EffectSequence(tuple(self.effects[i] for i in order))


def _as_sequence(seq) -> EffectSequence:
    return seq if isinstance(seq, EffectSequence) else EffectSequence(tuple(seq))


@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


def re_trace_product(matrices: Sequence[np.ndarray], rho: np.ndarray) -> float:
    prod = reduce(np.matmul, matrices)
    return float(np.trace(prod @ rho).real)


def quasi_joint(seq, rho: DensityMatrix) -> float:
    """Re Tr{E1 E2 ... En rho} for the ordering given by ``seq``."""
    seq = _as_sequence(seq)
    if seq.dim != rho.dim:
        raise DimensionError(f"quasi_joint: effect dim {seq.dim} != state dim {rho.dim}")
    return re_trace_product(seq.matrices(), rho.entries)


def ordering_mixture(seq, rho: DensityMatrix, weights: dict) -> float:
    """Convex combination over orderings; keys are permutations of range(n)."""
    seq = _as_sequence(seq)
    w = np.array(list(weights.values()), dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise ValidationError("ordering_mixture: weights must be convex")
    return float(sum(c * quasi_joint(seq.permuted(order), rho) for order, c in weights.items()))


def check_probability_bounds(effect: Effect, rho: DensityMatrix, tol: float = 1e-12) -> AxiomReport:
    """P1: 0 <= v(E) <= 1."""
    v = quasi_joint([effect], rho)
    return AxiomReport("P1", max(0.0, -v, v - 1.0), tol)


def check_normalization(rho: DensityMatrix, n_events: int = 1, tol: float = 1e-12) -> AxiomReport:
    """P2: v(I, ..., I) = 1."""
    ident = Effect.identity(rho.dim)
    return AxiomReport("P2", abs(quasi_joint([ident] * n_events, rho) - 1.0), tol)


def check_unit_reduction(seq, rho: DensityMatrix, slot: int, tol: float = 1e-12) -> AxiomReport:
    """Q2: inserting the identity anywhere leaves the value unchanged."""
    seq = _as_sequence(seq)
    if not 0 <= slot <= len(seq):
        raise IndexError(f"check_unit_reduction: slot {slot} outside 0..{len(seq)}")
    with_unit = seq.inserted(slot, Effect.identity(seq.dim))
    return AxiomReport("Q2", abs(quasi_joint(with_unit, rho) - quasi_joint(seq, rho)), tol)


def check_additivity(
    partition: Sequence,
    context,
    rho: DensityMatrix,
    slot: int = 0,
    tol: float = 1e-10,
    bound_tol: float = 1e-10,
) -> AxiomReport:
    """Q3 (P3 for an empty context): v is additive in the effect at ``slot``."""
    parts = [p if isinstance(p, Effect) else Effect(p) for p in partition]
    total = sum(p.entries for p in parts)
    top = float(np.linalg.eigvalsh(total).max())
    if top > 1 + bound_tol:
        raise ValidationError(f"check_additivity: partition sum exceeds the identity (max eigenvalue {top:.3e})")
    g = Effect(0.5 * (total + total.conj().T))
    ctx = [] if context is None else list(_as_sequence(context).effects)
    if not 0 <= slot <= len(ctx):
        raise IndexError(f"check_additivity: slot {slot} outside 0..{len(ctx)}")

    def value(e: Effect) -> float:
        effs = ctx[:slot] + [e] + ctx[slot:]
        return quasi_joint(effs, rho)

    residual = abs(value(g) - sum(value(p) for p in parts))
    return AxiomReport("Q3" if ctx else "P3", residual, tol)


def check_scaling(effect: Effect, alpha: float, context, rho: DensityMatrix, slot: int = 0, tol: float = 1e-12) -> AxiomReport:
    """Homogeneity v(alpha E, ...) = alpha v(E, ...) for 0 <= alpha <= 1."""
    if not 0 <= alpha <= 1:
        raise ValidationError(f"check_scaling: alpha must lie in [0, 1], got {alpha}")
    ctx = list(_as_sequence(context).effects) if context is not None else []
    scaled = Effect(alpha * effect.entries)
    a = quasi_joint(ctx[:slot] + [scaled] + ctx[slot:], rho)
    b = quasi_joint(ctx[:slot] + [effect] + ctx[slot:], rho)
    return AxiomReport("Q3", abs(a - alpha * b), tol)


def check_reversal_symmetry(seq, rho: DensityMatrix, tol: float = 1e-12) -> AxiomReport:
    seq = _as_sequence(seq)
    return AxiomReport("reversal", abs(quasi_joint(seq, rho) - quasi_joint(seq.reversed(), rho)), tol)


def ordering_variants(
    families: Sequence[ProjectorFamily],
    indices: tuple[int, int, int],
    rho: DensityMatrix,
) -> list[tuple[str, float]]:
    """Values of all six orderings of three projectors.

    Labels list the family positions in product order, e.g. ``"021"`` is
    Re Tr{E_i E''_k E'_j rho}.
    """
    if len(families) != 3 or len(indices) != 3:
        raise ValidationError("ordering_variants: need three families and three indices")
    mats = [fam.projectors[idx] for fam, idx in zip(families, indices)]
    if {m.shape[0] for m in mats} != {rho.dim}:
        raise DimensionError("ordering_variants: dimension mismatch")
    out = []
    for order in itertools.permutations(range(3)):
        label = "".join(str(o) for o in order)
        out.append((label, re_trace_product([mats[o] for o in order], rho.entries)))
    return out


@dataclass(frozen=True)
class NonnegativityCertificate:
    vanishing_commutators: int
    certified: bool
    value: float


class CertificateViolation(AssertionError):
    """A certified sequence produced a negative value (numerical failure)."""


def _is_rank_one_projector(m: np.ndarray, tol: float) -> bool:
    return (
        max_abs(m - m.conj().T) <= tol
        and max_abs(m @ m - m) <= tol
        and abs(np.trace(m).real - 1.0) <= max(tol, 1e-9)
    )


def _reduces_to_nonnegative(mats: list[np.ndarray], rho: np.ndarray, tol: float) -> bool:
    """Search for a collapse of the cyclic word E1...En rho to a manifestly nonnegative trace.

    Moves: adjacent commuting rank-one projectors merge (equal) or annihilate
    (orthogonal); rho drops out next to a projector it commutes with, leaving
    a nonnegative scalar.  Terminal words are Tr{E rho}, Tr{E}, Tr{E F}.
    """
    n = len(mats)
    commutes = [[max_abs(commutator(mats[a], mats[b])) < tol for b in range(n)] for a in range(n)]
    orthogonal = [[max_abs(mats[a] @ mats[b]) < tol for b in range(n)] for a in range(n)]
    with_rho = [max_abs(commutator(m, rho)) < tol for m in mats]
    seen: set = set()

    def search(word: tuple, has_rho: bool) -> bool:
        if (word, has_rho) in seen:
            return False
        seen.add((word, has_rho))
        if (has_rho and len(word) <= 1) or (not has_rho and len(word) <= 2):
            return True
        m = len(word)
        # cyclic adjacency; rho sits between word[-1] and word[0]
        pairs = [(p, p + 1) for p in range(m - 1)]
        if not has_rho and m > 1:
            pairs.append((m - 1, 0))
        for p, q in pairs:
            a, b = word[p], word[q]
            if commutes[a][b]:
                if orthogonal[a][b]:
                    return True
                if search(word[:q] + word[q + 1:], has_rho):
                    return True
        if has_rho and (with_rho[word[0]] or with_rho[word[-1]]):
            if search(word, False):
                return True
        return False

    return search(tuple(range(n)), True)


def nonnegativity_certificate(seq, rho: DensityMatrix, tol: float = 1e-10) -> NonnegativityCertificate:
    """Sufficient condition for Re Tr{E1...En rho} >= 0 with rank-one projective events.

    ``vanishing_commutators`` counts the pairs among {rho, E1, ..., En} that
    commute.  Certification requires at least n-1 of them to act along the
    product (adjacent in the cyclic word), which is checked by exhaustive
    collapse.  An uncertified sequence may still be nonnegative.
    """
    seq = _as_sequence(seq)
    mats = seq.matrices()
    for idx, m in enumerate(mats):
        if not _is_rank_one_projector(m, tol):
            raise ProjectorError(f"nonnegativity_certificate: effect {idx} is not a rank-one projector")
    ops = [rho.entries] + mats
    count = sum(
        max_abs(commutator(ops[a], ops[b])) < tol
        for a, b in itertools.combinations(range(len(ops)), 2)
    )
    certified = count >= len(mats) - 1 and _reduces_to_nonnegative(mats, rho.entries, tol)
    value = quasi_joint(seq, rho)
    if certified and value < -tol:
        raise CertificateViolation(f"certified sequence has value {value:.3e}")
    return NonnegativityCertificate(int(count), bool(certified), value)


def family_sum(families: Iterable[ProjectorFamily], rho: DensityMatrix) -> float:
    """Sum of the joint value over every index combination of complete families."""
    fams = list(families)
    total = 0.0
    for combo in itertools.product(*[range(len(f)) for f in fams]):
        total += re_trace_product([f.projectors[i] for f, i in zip(fams, combo)], rho.entries)
    return total
