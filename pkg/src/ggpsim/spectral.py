"""Periodic-torus discretization of R^n (n = 1, 2) and Fourier-multiplier operators.

The background state u = 1 is carried exactly by the zero Fourier mode
(Delta 1 = 0), so all operators act on the perturbation v.  Homogeneous
norms |D|^s drop the zero mode; the field mean is tracked separately by
the solver ledger.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .exponents import PairPoint

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid on [-L/2, L/2)^n with standard DFT frequency order."""

    n: int
    L: float
    N: int

    def __post_init__(self) -> None:
        if self.n not in (1, 2):
            raise ValueError(f"n must be 1 or 2, got {self.n}")
        if self.N < 8 or self.N % 2:
            raise ValueError(f"N must be even and >= 8, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def dx(self) -> float:
        """Volume element (L/N)^n."""
        return (self.L / self.N) ** self.n

    @property
    def volume(self) -> float:
        return self.L**self.n

    def axis_frequencies(self) -> NDArray[np.float64]:
        """Wavenumbers 2*pi*k/L for k in [-N/2, N/2), DFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.L / self.N)

    def coordinates(self) -> tuple[NDArray[np.float64], ...]:
        """Per-axis coordinate arrays, centered at 0 (meshed for n=2)."""
        ax = -0.5 * self.L + (self.L / self.N) * np.arange(self.N)
        if self.n == 1:
            return (ax,)
        return tuple(np.meshgrid(ax, ax, indexing="ij"))

    def xi_squared(self) -> NDArray[np.float64]:
        xi = self.axis_frequencies()
        if self.n == 1:
            return xi**2
        xx, yy = np.meshgrid(xi, xi, indexing="ij")
        return xx**2 + yy**2

    def radius(self) -> NDArray[np.float64]:
        """|x| on the grid."""
        coords = self.coordinates()
        if self.n == 1:
            return np.abs(coords[0])
        return np.hypot(coords[0], coords[1])

    @property
    def xi_max(self) -> float:
        """Nyquist wavenumber pi*N/L per axis."""
        return np.pi * self.N / self.L


@dataclass(frozen=True)
class Field:
    """Complex samples of v on a TorusGrid."""

    grid: TorusGrid
    values: NDArray[np.complex128]

    def __post_init__(self) -> None:
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def hat(self) -> NDArray[np.complex128]:
        return np.fft.fftn(self.values)

    def __add__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, c: complex) -> "Field":
        return Field(self.grid, self.values * c)

    __rmul__ = __mul__


def _same_grid(a: Field, b: Field) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def _require_finite(f: Field, op: str) -> None:
    if not f.is_finite:
        raise ValueError(f"{op}: input field has non-finite samples")


def zero_field(grid: TorusGrid) -> Field:
    return Field(grid, np.zeros(grid.shape, dtype=np.complex128))


def free_propagate(f: Field, t: float) -> Field:
    """U(t) = e^{it Delta}: multiply each mode by e^{-i |xi|^2 t}."""
    _require_finite(f, "free_propagate")
    if t == 0.0:
        return Field(f.grid, f.values.copy())
    phase = np.exp(-1j * f.grid.xi_squared() * t)
    return Field(f.grid, np.fft.ifftn(phase * np.fft.fftn(f.values)))


def fractional_derivative(f: Field, s: float) -> Field:
    """|D|^s via the multiplier |xi|^s; the zero mode is sent to 0."""
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    _require_finite(f, "fractional_derivative")
    xi2 = f.grid.xi_squared()
    mult = np.zeros_like(xi2)
    nz = xi2 > 0
    mult[nz] = xi2[nz] ** (0.5 * s)
    return Field(f.grid, np.fft.ifftn(mult * np.fft.fftn(f.values)))


def lebesgue_norm(f: Field, q: float) -> float:
    """L^q norm (sum |v|^q dx)^(1/q); sup norm for q = inf."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    a = np.abs(f.values)
    if np.isinf(q):
        return float(a.max()) if a.size else 0.0
    return float((np.sum(a**q) * f.grid.dx) ** (1.0 / q))


def sobolev_norm(f: Field, s: float, q: float) -> float:
    """Homogeneous W^{s,q} norm; H-dot^s when q = 2."""
    if s == 0:
        return lebesgue_norm(f, q)
    return lebesgue_norm(fractional_derivative(f, s), q)


def weighted_l2_norm(f: Field, alpha: float) -> float:
    """(sum |x|^{2 alpha} |v|^2 dx)^(1/2) on the centered grid."""
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if alpha == 0:
        return lebesgue_norm(f, 2)
    w = f.grid.radius() ** (2.0 * alpha)
    return float(np.sqrt(np.sum(w * np.abs(f.values) ** 2) * f.grid.dx))


def time_composite_norm(
    times: NDArray[np.float64], gvals: NDArray[np.float64], r: float
) -> float:
    """Trapezoidal L^r norm in time of sampled g(t) >= 0; sup for r = inf."""
    times = np.asarray(times, dtype=float)
    gvals = np.asarray(gvals, dtype=float)
    if times.size == 0:
        raise ValueError("empty time series")
    if times.size != gvals.size:
        raise ValueError("times and values length mismatch")
    if np.isinf(r):
        return float(gvals.max())
    if times.size == 1:
        return 0.0  # zero-length interval
    return float(np.trapezoid(gvals**r, times) ** (1.0 / r))


def spacetime_norm(times: Sequence[float], fields: Sequence[Field],
                   P: PairPoint, s: float) -> float:
    """L^r(I, W-dot^{s,q}) norm with (1/q, 1/r) = P, trapezoidal in time."""
    if len(times) != len(fields):
        raise ValueError("times and fields length mismatch")
    if len(times) == 0:
        raise ValueError("empty trajectory")
    q = np.inf if P.x == 0 else 1.0 / float(P.x)
    r = np.inf if P.y == 0 else 1.0 / float(P.y)
    g = np.array([sobolev_norm(f, s, q) for f in fields])
    return time_composite_norm(np.asarray(times, dtype=float), g, r)


def xnorm(times: Sequence[float], fields: Sequence[Field],
          P1: PairPoint, P2: PairPoint, s2: float) -> float:
    """X(I) norm: L(P1; I) + W-dot^{s2}(P2; I) (sum of the two components)."""
    return spacetime_norm(times, fields, P1, 0.0) + spacetime_norm(
        times, fields, P2, s2
    )


def boundary_mass_fraction(f: Field) -> float:
    """Fraction of the |v|^2 mass in the outer 10% shell (sup-metric margin)."""
    coords = f.grid.coordinates()
    margin = 0.9 * (f.grid.L / 2.0)
    if f.grid.n == 1:
        shell = np.abs(coords[0]) >= margin
    else:
        shell = np.maximum(np.abs(coords[0]), np.abs(coords[1])) >= margin
    total = float(np.sum(np.abs(f.values) ** 2))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(f.values[shell]) ** 2) / total)


def spectral_tail_fraction(f: Field) -> float:
    """Fraction of Fourier mass carried by modes with |xi| >= xi_max / 2."""
    xi2 = f.grid.xi_squared()
    cut = (0.5 * f.grid.xi_max) ** 2
    power = np.abs(np.fft.fftn(f.values)) ** 2
    total = float(power.sum())
    if total == 0.0:
        return 0.0
    return float(power[xi2 >= cut].sum() / total)


# Initial-data factories (shared by the CLI, diagnostics probes and tests).

def make_gaussian(grid: TorusGrid, amplitude: complex, width: float,
                  center: float = 0.0, carrier: float = 0.0) -> Field:
    """amplitude * exp(i carrier . x) * exp(-|x - center|^2 / (2 width^2))."""
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    coords = grid.coordinates()
    r2 = sum((c - center) ** 2 for c in coords)
    phase = sum(coords)  # carrier applied along each axis equally
    vals = amplitude * np.exp(1j * carrier * phase) * np.exp(-r2 / (2.0 * width**2))
    return Field(grid, vals.astype(np.complex128))


def make_plane_wave(grid: TorusGrid, amplitude: complex, frequency: float) -> Field:
    """amplitude * e^{i xi0 x1} with xi0 snapped to the nearest grid frequency."""
    dxi = 2.0 * np.pi / grid.L
    k = round(frequency / dxi)
    xi0 = k * dxi
    if abs(xi0 - frequency) > 1e-12 * max(1.0, abs(frequency)):
        logger.warning(
            "plane-wave frequency %.6g adjusted to grid frequency %.6g",
            frequency, xi0,
        )
    coords = grid.coordinates()
    vals = amplitude * np.exp(1j * xi0 * coords[0])
    return Field(grid, vals.astype(np.complex128))


def make_theta_constant(grid: TorusGrid, theta: float) -> Field:
    """The background-orbit state v = e^{i theta} - 1 (constant field)."""
    vals = np.full(grid.shape, np.exp(1j * theta) - 1.0, dtype=np.complex128)
    return Field(grid, vals)
