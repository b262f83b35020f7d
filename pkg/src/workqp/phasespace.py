"""One-dimensional phase-space quasiprobabilities on a uniform grid.

Conventions: hbar = 1, <x|p> = exp(ipx) / sqrt(2 pi) and
W(x, p) = (1/pi) int exp(2ipy) psi(x - y) psi*(x + y) dy.

Two momentum axes appear.  ``PhaseGrid.p`` holds the n DFT momenta
2 pi m / (n dx), the natural partner of position for plane-wave overlaps.
The Wigner y-sum on nodes y = s dx is periodic in p with period pi / dx, so
the Wigner field lives on ``PhaseGrid.p_wigner`` = pi m / (n dx), one full
period sampled with n points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .operators import ValidationError

MAX_V_POINTS = 256


class SupportError(ValidationError):
    """The grid box truncates a non-negligible part of the state."""

    kind = "support"


@dataclass(frozen=True)
class PhaseGrid:
    n: int
    x_min: float
    x_max: float

    def __post_init__(self):
        if self.n < 16 or self.n % 2:
            raise ValidationError(f"PhaseGrid: n must be even and >= 16, got {self.n}")
        if not self.x_max > self.x_min:
            raise ValidationError("PhaseGrid: x_max must exceed x_min")

    @classmethod
    def centered(cls, n: int, center: float, half_width: float) -> "PhaseGrid":
        return cls(n, center - half_width, center + half_width)

    @classmethod
    def for_gaussian(cls, params: "GaussianParams", n: int = 128, n_std: float = 8.0) -> "PhaseGrid":
        """Box of +-``n_std`` position standard deviations around the mean."""
        return cls.centered(n, params.mean_position, n_std * params.position_std)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def _m(self) -> np.ndarray:
        return np.arange(-self.n // 2, self.n // 2)

    @property
    def dp(self) -> float:
        return 2 * np.pi / (self.n * self.dx)

    @property
    def p(self) -> np.ndarray:
        return self.dp * self._m

    @property
    def dp_wigner(self) -> float:
        return np.pi / (self.n * self.dx)

    @property
    def p_wigner(self) -> np.ndarray:
        return self.dp_wigner * self._m

    def shifted(self, nodes: int) -> "PhaseGrid":
        d = nodes * self.dx
        return PhaseGrid(self.n, self.x_min + d, self.x_max + d)


@dataclass(frozen=True)
class GaussianParams:
    """psi(x) = exp(-a x^2 + b x + c), Re a > 0; c is fixed by normalization."""

    a: complex
    b: complex = 0.0
    c: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        object.__setattr__(self, "c", complex(self.c))
        if not self.a.real > 0:
            raise ValidationError(f"GaussianParams: Re a must be positive, got {self.a}")

    @property
    def mean_position(self) -> float:
        return self.b.real / (2 * self.a.real)

    @property
    def position_std(self) -> float:
        return 1.0 / (2 * math.sqrt(self.a.real))


def outside_mass(params: GaussianParams, grid: PhaseGrid) -> float:
    """Exact probability of |psi|^2 beyond the box."""
    mu, sd = params.mean_position, params.position_std
    lo = (grid.x_min - mu) / (sd * math.sqrt(2))
    hi = (grid.x_max - mu) / (sd * math.sqrt(2))
    return 0.5 * math.erfc(-lo) + 0.5 * math.erfc(hi)


def _normalize(psi: np.ndarray, dx: float) -> np.ndarray:
    return psi / math.sqrt(float(np.sum(np.abs(psi) ** 2)) * dx)


def gaussian_wavefunction(params: GaussianParams, grid: PhaseGrid, support_tol: float = 1e-10) -> np.ndarray:
    lost = outside_mass(params, grid)
    if lost > support_tol:
        raise SupportError(f"gaussian_wavefunction: {lost:.2e} of the probability lies outside the box")
    x = grid.x
    expo = -params.a * x ** 2 + params.b * x
    expo = expo - expo.real.max()
    return _normalize(np.exp(expo), grid.dx)


def cat_wavefunction(grid: PhaseGrid, separation: float, a: float = 0.5) -> np.ndarray:
    """Normalized superposition of two Gaussians centered at +-separation/2."""
    x = grid.x
    half = separation / 2
    psi = np.exp(-a * (x - half) ** 2) + np.exp(-a * (x + half) ** 2)
    return _normalize(psi.astype(complex), grid.dx)


def norm(psi: np.ndarray, grid: PhaseGrid) -> float:
    return float(np.sum(np.abs(psi) ** 2) * grid.dx)


def _require_normalized(psi: np.ndarray, grid: PhaseGrid, tol: float = 1e-8) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (grid.n,):
        raise ValidationError(f"wavefunction has shape {psi.shape}, grid expects ({grid.n},)")
    nrm = norm(psi, grid)
    if abs(nrm - 1.0) > tol:
        raise ValidationError(f"wavefunction is not normalized (norm {nrm:.12g})")
    return psi


@dataclass(frozen=True, eq=False)
class WignerField:
    """W on (grid.x, grid.p_wigner)."""

    values: np.ndarray
    grid: PhaseGrid

    def __post_init__(self):
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ValidationError("WignerField: values do not match the grid")
        total = self.integral()
        if abs(total - 1.0) > 1e-6:
            raise ValidationError(f"WignerField: integrates to {total:.9g}, not 1")

    @property
    def cell(self) -> float:
        return self.grid.dx * self.grid.dp_wigner

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.dx * self.grid.dp_wigner)

    def purity(self) -> float:
        """int W^2 dx dp, equal to 1/(2 pi) for pure states."""
        return float(np.sum(self.values ** 2) * self.cell)


def _pair_products(psi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """C[k, s] = psi[k - s] conj(psi[k + s]) for |s| < n (zero off the grid)."""
    n = psi.size
    shifts = np.arange(-(n - 1), n)
    k = np.arange(n)[:, None]
    lo, hi = k - shifts[None, :], k + shifts[None, :]
    inside = (lo >= 0) & (lo < n) & (hi >= 0) & (hi < n)
    c = np.where(inside, psi[np.clip(lo, 0, n - 1)] * np.conj(psi[np.clip(hi, 0, n - 1)]), 0)
    return c, shifts


def wigner(psi: np.ndarray, grid: PhaseGrid, imag_tol: float = 1e-10) -> WignerField:
    psi = _require_normalized(psi, grid)
    c, shifts = _pair_products(psi)
    phase = np.exp(2j * np.outer(shifts * grid.dx, grid.p_wigner))
    w = (c @ phase) * grid.dx / np.pi
    resid = float(np.max(np.abs(w.imag)))
    if resid > imag_tol:
        raise ValidationError(f"wigner: imaginary residue {resid:.2e} exceeds {imag_tol:.0e}")
    return WignerField(np.ascontiguousarray(w.real), grid)


def momentum_wavefunction(psi: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """<p|psi> on ``grid.p`` by direct quadrature."""
    kernel = np.exp(-1j * np.outer(grid.p, grid.x)) / math.sqrt(2 * np.pi)
    return kernel @ psi * grid.dx


def kirkwood_dirac(psi: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """Re Tr{P'_p P_x rho} = Re <p|x><x|psi><psi|p> on (grid.x, grid.p)."""
    psi = _require_normalized(psi, grid)
    phi = momentum_wavefunction(psi, grid)
    kernel = np.exp(-1j * np.outer(grid.x, grid.p)) / math.sqrt(2 * np.pi)
    return (kernel * psi[:, None] * np.conj(phi)[None, :]).real


def v_xpy(psi: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """v[x, p, y] = Re{exp(ip(x - y)) psi(y) psi*(x)} / (2 pi)."""
    if grid.n > MAX_V_POINTS:
        raise ValidationError(f"v_xpy: n = {grid.n} exceeds the dense-array limit {MAX_V_POINTS}")
    psi = _require_normalized(psi, grid)
    x, p = grid.x, grid.p
    phase = np.exp(1j * p[None, :, None] * (x[:, None, None] - x[None, None, :]))
    amp = np.conj(psi)[:, None, None] * psi[None, None, :]
    return (phase * amp).real / (2 * np.pi)


POLYNOMIALS: dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {
    "1": lambda x, p: np.ones(np.broadcast(x, p).shape),
    "x": lambda x, p: x + 0 * p,
    "p": lambda x, p: p + 0 * x,
    "x2": lambda x, p: x ** 2 + 0 * p,
    "p2": lambda x, p: p ** 2 + 0 * x,
    "xp": lambda x, p: x * p,
}


def wigner_average(field: WignerField, g: Callable) -> float:
    gr = field.grid
    return float(np.sum(g(gr.x[:, None], gr.p_wigner[None, :]) * field.values) * field.cell)


def v_average(vfield: np.ndarray, grid: PhaseGrid, g: Callable) -> float:
    """int g((x + y)/2, p) v(x, p, y) dx dp dy."""
    x, p = grid.x, grid.p
    mid = 0.5 * (x[:, None, None] + x[None, None, :])
    vals = g(mid, p[None, :, None])
    return float(np.sum(vals * vfield) * grid.dx ** 2 * grid.dp)


def check_wigner_ave(psi: np.ndarray, grid: PhaseGrid, g, vfield: np.ndarray | None = None,
                     field: WignerField | None = None) -> float:
    """|int g W dx dp - int g((x+y)/2, p) v dx dy dp|; ``g`` is a callable or a POLYNOMIALS key."""
    func = POLYNOMIALS[g] if isinstance(g, str) else g
    field = wigner(psi, grid) if field is None else field
    vfield = v_xpy(psi, grid) if vfield is None else vfield
    return abs(wigner_average(field, func) - v_average(vfield, grid, func))


def wigner_marginal(vfield: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """M[x, p] = int v(x + y, p, x - y) dy on (grid.x, grid.p), equal to W / 2.

    y runs over node multiples, so x +- y are grid nodes; points falling off
    the grid contribute zero.
    """
    n = grid.n
    out = np.zeros((n, n))
    for k in range(n):
        s = np.arange(-min(k, n - 1 - k), min(k, n - 1 - k) + 1)
        out[k] = vfield[k + s, :, k - s].sum(axis=0) * grid.dx
    return out


def wigner_marginal_check(vfield: np.ndarray, grid: PhaseGrid) -> float:
    return float(wigner_marginal(vfield, grid).min())


def marginal_sign_agreement(vfield: np.ndarray, field: WignerField, zero_tol: float = 1e-12) -> float:
    """Fraction of interior points where sign(M) matches sign(W).

    Interior means |p| < pi / (2 dx), where ``grid.p`` nodes are also
    Wigner-axis nodes (every second one).
    """
    grid = field.grid
    marg = wigner_marginal(vfield, grid)
    m = np.arange(-grid.n // 2, grid.n // 2)
    inner = np.flatnonzero(np.abs(m) < grid.n // 4)
    w_cols = 2 * m[inner] + grid.n // 2
    a = 2 * marg[:, inner]  # M = W / 2
    b = field.values[:, w_cols]

    def sgn(z):
        return np.where(np.abs(z) <= zero_tol, 0, np.sign(z))

    return float(np.mean(sgn(a) == sgn(b)))


NONCONTEXTUAL_STATEMENT = (
    "The p_1/2 work distribution is non-negative, so it admits a non-negative "
    "description, although individual terms Re Tr{P'_p P_x rho} and v(x, p, y) are negative: "
    "element-wise negativity did not produce distribution negativity."
)
CONTEXTUAL_STATEMENT = "The p_1/2 work distribution has negative bins."


@dataclass(frozen=True, eq=False)
class ContextualityReport:
    alpha: float
    beta: float
    bin_edges: np.ndarray
    histogram: np.ndarray
    min_bin: float
    min_kirkwood_dirac: float
    min_v: float
    histogram_nonnegative: bool
    elementwise_negative: bool
    statement: str
    hist_tol: float = 1e-6
    neg_tol: float = 1e-4

    @property
    def passed(self) -> bool:
        return self.histogram_nonnegative and self.elementwise_negative


def work_histogram(field: WignerField, alpha: float, beta: float, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Bin w = beta p^2 - alpha x with weights W dx dp over the Wigner grid."""
    gr = field.grid
    w = beta * gr.p_wigner[None, :] ** 2 - alpha * gr.x[:, None]
    lo, hi = float(w.min()), float(w.max())
    if hi <= lo:
        hi = lo + 1.0
    hist, edges = np.histogram(w.ravel(), bins=bins, range=(lo, hi), weights=(field.values * field.cell).ravel())
    return hist, edges


def contextuality_demo(alpha: float, beta: float, params: GaussianParams | None, grid: PhaseGrid, bins: int = 64,
                       psi: np.ndarray | None = None, hist_tol: float = 1e-6, neg_tol: float = 1e-4) -> ContextualityReport:
    """Wigner-route p_1/2 histogram for H(0) = alpha x, H(tau) = beta p^2, plus element-wise minima.

    Pass ``psi`` to run on a non-Gaussian state instead of ``params``.
    """
    if psi is None:
        psi = gaussian_wavefunction(params, grid)
    field = wigner(psi, grid)
    hist, edges = work_histogram(field, alpha, beta, bins)
    min_kd = float(kirkwood_dirac(psi, grid).min())
    min_v = float(v_xpy(psi, grid).min()) if grid.n <= MAX_V_POINTS else float("nan")
    nonneg = bool(hist.min() >= -hist_tol)
    elem = bool(min_kd < -neg_tol and min_v < -neg_tol)
    statement = NONCONTEXTUAL_STATEMENT if nonneg and elem else (
        CONTEXTUAL_STATEMENT if not nonneg else "No element-wise negativity beyond tolerance."
    )
    return ContextualityReport(float(alpha), float(beta), edges, hist, float(hist.min()), min_kd, min_v,
                               nonneg, elem, statement, hist_tol, neg_tol)
