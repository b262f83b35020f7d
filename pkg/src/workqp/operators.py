"""Validated dense operators and the spectral / evolution primitives.

Every matrix type here is an immutable wrapper around a complex numpy array
that checks its defining invariant at construction.  Units follow hbar = 1,
so energies and times are reciprocal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np


class ValidationError(ValueError):
    """Raised when a matrix violates the invariant of its role."""

    kind = "validation"


class DimensionError(ValidationError):
    kind = "dimension"


class HermiticityError(ValidationError):
    kind = "hermiticity"


class TraceError(ValidationError):
    kind = "trace"


class PositivityError(ValidationError):
    kind = "positivity"


class UnitarityError(ValidationError):
    kind = "unitarity"


class ProjectorError(ValidationError):
    kind = "projector"


@dataclass(frozen=True)
class Tolerances:
    """Validation thresholds; all are max-abs-entry deviations unless noted."""

    hermitian: float = 1e-12
    trace: float = 1e-12
    eigenvalue: float = 1e-10  # allowed excursion of eigenvalues outside their range
    unitary: float = 1e-10
    projector: float = 1e-10


DEFAULT_TOL = Tolerances()


def _frozen_square(matrix, name: str) -> np.ndarray:
    arr = np.array(matrix, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionError(f"{name}: expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name}: non-finite entries")
    arr.setflags(write=False)
    return arr


def hermiticity_deviation(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _check_hermitian(m: np.ndarray, tol: float, name: str) -> None:
    dev = hermiticity_deviation(m)
    if dev > tol:
        raise HermiticityError(f"{name}: not Hermitian (max deviation {dev:.3e} > {tol:.1e})")


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    entries: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        m = _frozen_square(self.entries, "HermitianOperator")
        _check_hermitian(m, self.tol.hermitian, "HermitianOperator")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        m = _frozen_square(self.entries, "DensityMatrix")
        _check_hermitian(m, self.tol.hermitian, "DensityMatrix")
        tr = np.trace(m)
        if abs(tr - 1.0) > self.tol.trace:
            raise TraceError(f"DensityMatrix: trace {tr.real:.12g} differs from 1")
        lo = float(np.linalg.eigvalsh(m).min())
        if lo < -self.tol.eigenvalue:
            raise PositivityError(f"DensityMatrix: negative eigenvalue {lo:.3e}")
        object.__setattr__(self, "entries", m)

    @classmethod
    def pure(cls, vector, tol: Tolerances = DEFAULT_TOL) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex).ravel()
        return cls(np.outer(v, v.conj()), tol)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class Effect:
    """Hermitian operator with spectrum in [0, 1]."""

    entries: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        m = _frozen_square(self.entries, "Effect")
        _check_hermitian(m, self.tol.hermitian, "Effect")
        ev = np.linalg.eigvalsh(m)
        eps = self.tol.eigenvalue
        if ev.min() < -eps or ev.max() > 1 + eps:
            raise PositivityError(
                f"Effect: spectrum [{ev.min():.3e}, {ev.max():.3e}] outside [0, 1]"
            )
        object.__setattr__(self, "entries", m)

    @classmethod
    def identity(cls, dim: int) -> "Effect":
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class Unitary:
    entries: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        m = _frozen_square(self.entries, "Unitary")
        dev = max_abs(m.conj().T @ m - np.eye(m.shape[0]))
        if dev > self.tol.unitary:
            raise UnitarityError(f"Unitary: U^dag U deviates from I by {dev:.3e}")
        object.__setattr__(self, "entries", m)

    @classmethod
    def identity(cls, dim: int) -> "Unitary":
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class ProjectorFamily:
    """Complete orthogonal family of eigenprojectors with their eigenvalues.

    ``projectors`` has shape (m, dim, dim); ``eigenvalues`` is strictly
    increasing; ``ranks`` holds the eigenspace dimensions.
    """

    projectors: np.ndarray
    eigenvalues: np.ndarray
    ranks: tuple = ()
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        p = np.array(self.projectors, dtype=complex)
        e = np.array(self.eigenvalues, dtype=float).ravel()
        if p.ndim != 3 or p.shape[1] != p.shape[2] or p.shape[0] != e.size or e.size == 0:
            raise DimensionError(f"ProjectorFamily: inconsistent shapes {p.shape}, {e.shape}")
        ptol = self.tol.projector
        for idx, proj in enumerate(p):
            if hermiticity_deviation(proj) > ptol:
                raise ProjectorError(f"ProjectorFamily: member {idx} not Hermitian")
            if max_abs(proj @ proj - proj) > ptol:
                raise ProjectorError(f"ProjectorFamily: member {idx} not idempotent")
        for i in range(len(p)):
            for j in range(i + 1, len(p)):
                if max_abs(p[i] @ p[j]) > ptol:
                    raise ProjectorError(f"ProjectorFamily: members {i}, {j} not orthogonal")
        if max_abs(p.sum(axis=0) - np.eye(p.shape[1])) > ptol:
            raise ProjectorError("ProjectorFamily: projectors do not sum to the identity")
        if np.any(np.diff(e) <= 0):
            raise ProjectorError("ProjectorFamily: eigenvalues must be strictly increasing")
        ranks = tuple(int(round(np.trace(proj).real)) for proj in p)
        if self.ranks and tuple(self.ranks) != ranks:
            raise ProjectorError(f"ProjectorFamily: ranks {self.ranks} disagree with traces {ranks}")
        p.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "projectors", p)
        object.__setattr__(self, "eigenvalues", e)
        object.__setattr__(self, "ranks", ranks)

    @property
    def dim(self) -> int:
        return self.projectors.shape[1]

    def __len__(self) -> int:
        return self.eigenvalues.size

    @property
    def members(self) -> list[tuple[np.ndarray, float, int]]:
        return [(p, float(e), r) for p, e, r in zip(self.projectors, self.eigenvalues, self.ranks)]

    @property
    def spectral_range(self) -> float:
        return float(self.eigenvalues[-1] - self.eigenvalues[0])

    def reconstruct(self) -> np.ndarray:
        """Sum of eigenvalue times projector."""
        return np.einsum("i,iab->ab", self.eigenvalues, self.projectors)

    def evolve(self, u: Unitary) -> "ProjectorFamily":
        """Heisenberg-pulled family U^dag P U (eigenvalues unchanged)."""
        if u.dim != self.dim:
            raise DimensionError(f"evolve: unitary dim {u.dim} != family dim {self.dim}")
        m = u.entries
        rotated = np.einsum("ba,ibc,cd->iad", m.conj(), self.projectors, m)
        rotated = 0.5 * (rotated + np.conj(np.swapaxes(rotated, 1, 2)))
        return ProjectorFamily(rotated, self.eigenvalues, self.ranks, self.tol)

    def vectors(self, index: int) -> np.ndarray:
        """Orthonormal basis (columns) of eigenspace ``index``."""
        vals, vecs = np.linalg.eigh(self.projectors[index])
        return vecs[:, vals > 0.5]


def spectral_decompose(h: HermitianOperator, degeneracy_tol: float = 1e-10) -> ProjectorFamily:
    """Group the spectrum of ``h`` into eigenspace projectors.

    Eigenvalues whose consecutive gaps are within ``degeneracy_tol`` times the
    spectral range (or absolutely, for a flat spectrum) share one projector.
    """
    vals, vecs = np.linalg.eigh(h.entries)
    spread = float(vals[-1] - vals[0])
    cut = degeneracy_tol * (spread if spread > 0 else 1.0)
    breaks = np.flatnonzero(np.diff(vals) > cut) + 1
    groups = np.split(np.arange(vals.size), breaks)
    projectors = []
    eigenvalues = []
    for g in groups:
        v = vecs[:, g]
        projectors.append(v @ v.conj().T)
        eigenvalues.append(vals[g].mean())
    return ProjectorFamily(np.array(projectors), np.array(eigenvalues), tuple(len(g) for g in groups), h.tol)


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) for Hermitian ``h`` through its eigendecomposition."""
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T


HamiltonianLike = Union[HermitianOperator, Callable[[float], np.ndarray]]


@dataclass(frozen=True, eq=False)
class Segment:
    """One leg of a schedule.

    ``hamiltonian`` is either a fixed operator or a callable of the time
    elapsed inside the segment returning a Hermitian matrix; callables are
    sampled at slice midpoints.
    """

    hamiltonian: HamiltonianLike
    duration: float

    def __post_init__(self):
        if not self.duration > 0:
            raise ValidationError(f"Segment: duration must be positive, got {self.duration}")

    def matrix_at(self, t: float) -> np.ndarray:
        if isinstance(self.hamiltonian, HermitianOperator):
            return self.hamiltonian.entries
        return HermitianOperator(self.hamiltonian(t)).entries

    @property
    def is_static(self) -> bool:
        return isinstance(self.hamiltonian, HermitianOperator)


@dataclass(frozen=True, eq=False)
class EvolutionSpec:
    """Either a direct unitary or a piecewise schedule of Hamiltonians."""

    unitary: Unitary | None = None
    segments: tuple = ()
    slices: int = 1

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if (self.unitary is None) == (len(self.segments) == 0):
            raise ValidationError("EvolutionSpec: give exactly one of a unitary or a schedule")
        if int(self.slices) != self.slices or self.slices < 1:
            raise ValidationError(f"EvolutionSpec: slices must be a positive integer, got {self.slices}")
        if self.segments:
            dims = {seg.matrix_at(0.0).shape[0] for seg in self.segments}
            if len(dims) != 1:
                raise DimensionError(f"EvolutionSpec: segment dimensions differ: {sorted(dims)}")

    @classmethod
    def direct(cls, u) -> "EvolutionSpec":
        return cls(unitary=u if isinstance(u, Unitary) else Unitary(u))

    @classmethod
    def schedule(cls, segments: Sequence, slices: int = 1) -> "EvolutionSpec":
        segs = [s if isinstance(s, Segment) else Segment(*s) for s in segments]
        return cls(segments=tuple(segs), slices=slices)

    @property
    def dim(self) -> int:
        if self.unitary is not None:
            return self.unitary.dim
        return self.segments[0].matrix_at(0.0).shape[0]


def propagator(spec: EvolutionSpec) -> Unitary:
    """Time-ordered evolution operator; later slices multiply from the left."""
    if spec.unitary is not None:
        return spec.unitary
    u = np.eye(spec.dim, dtype=complex)
    for seg in spec.segments:
        dt = seg.duration / spec.slices
        if seg.is_static:
            step = expm_hermitian(seg.matrix_at(0.0), dt)
            u = np.linalg.matrix_power(step, spec.slices) @ u
            continue
        for s in range(spec.slices):
            u = expm_hermitian(seg.matrix_at((s + 0.5) * dt), dt) @ u
    return Unitary(u, Tolerances(unitary=1e-9))


def heisenberg(a: HermitianOperator, u: Unitary) -> HermitianOperator:
    """U^dag A U."""
    if a.dim != u.dim:
        raise DimensionError(f"heisenberg: operator dim {a.dim} != unitary dim {u.dim}")
    m = u.entries.conj().T @ a.entries @ u.entries
    _check_hermitian(m, max(a.tol.hermitian, 1e-12 * (1 + max_abs(a.entries))), "heisenberg")
    return HermitianOperator(0.5 * (m + m.conj().T), a.tol)


def dephase_matrix(m: np.ndarray, basis: ProjectorFamily) -> np.ndarray:
    """Sum_i P_i m P_i for an arbitrary matrix ``m``."""
    return np.einsum("iab,bc,icd->ad", basis.projectors, m, basis.projectors)


def dephase(rho: DensityMatrix, basis: ProjectorFamily) -> DensityMatrix:
    if rho.dim != basis.dim:
        raise DimensionError(f"dephase: state dim {rho.dim} != family dim {basis.dim}")
    out = dephase_matrix(rho.entries, basis)
    return DensityMatrix(0.5 * (out + out.conj().T), rho.tol)
