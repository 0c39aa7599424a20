"""Periodic-box discretization and spectral operators.

All fields live on a uniform grid over the box [-L, L)^dim with a
power-of-two number of points per axis.  Derivatives are exact spectral
multiplications; quadratic products are protected by the 2/3 dealiasing
rule.  The DFT convention is the unnormalized forward transform with the
1/n^dim factor on the inverse, so Parseval reads

    sum |f_j|^2 dx^dim  ==  sum |f_hat_k|^2 dx^dim / n^dim.

Wavenumbers are k_j = pi*j/L with j in standard DFT ordering and the
Nyquist index carrying the positive sign (j = 0, 1, ..., n/2, -n/2+1,
..., -1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft


class GridMismatchError(ValueError):
    """Raised when fields from incompatible grids are combined."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform periodic grid on [-half_width, half_width)^dim.

    Derived arrays (spacing, coordinates, wavenumbers, |k|^2, |k|^4 and
    the dealiasing mask) are precomputed once; instances are immutable
    and safe to share between threads.
    """

    dim: int
    half_width: float
    n: int

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if self.n < 8 or not _is_power_of_two(self.n):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")

        n, L = self.n, float(self.half_width)
        dx = 2.0 * L / n
        object.__setattr__(self, "dx", dx)

        # signed DFT indices with positive Nyquist: 0, 1, ..., n/2, -n/2+1, ..., -1
        idx = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
        idx[n // 2] = n // 2
        k1 = idx * (np.pi / L)
        x1 = -L + dx * np.arange(n)

        axis_shape = lambda a: tuple(n if j == a else 1 for j in range(self.dim))
        object.__setattr__(self, "index_axes", tuple(idx.copy() for _ in range(self.dim)))
        object.__setattr__(self, "x_axes", tuple(x1.copy() for _ in range(self.dim)))
        object.__setattr__(self, "k_axes", tuple(k1.copy() for _ in range(self.dim)))
        object.__setattr__(
            self, "k_bcast", tuple(k1.reshape(axis_shape(a)) for a in range(self.dim))
        )

        k2 = np.zeros(self.shape)
        for a in range(self.dim):
            k2 = k2 + self.k_bcast[a] ** 2
        object.__setattr__(self, "k2", k2)
        object.__setattr__(self, "k4", k2 * k2)

        cutoff = n // 3
        keep = np.ones(self.shape, dtype=bool)
        for a in range(self.dim):
            keep &= np.abs(idx).reshape(axis_shape(a)) <= cutoff
        object.__setattr__(self, "dealias_keep", keep)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def cell_volume(self) -> float:
        return self.dx**self.dim

    def radius_sq(self, center=None) -> np.ndarray:
        """|x - center|^2 on the grid (broadcast sum of per-axis squares)."""
        if center is None:
            center = (0.0,) * self.dim
        center = np.broadcast_to(np.asarray(center, dtype=float), (self.dim,))
        r2 = np.zeros(self.shape)
        for a in range(self.dim):
            shape = tuple(self.n if j == a else 1 for j in range(self.dim))
            r2 = r2 + ((self.x_axes[a] - center[a]) ** 2).reshape(shape)
        return r2

    def shell_max_abs(self, values: np.ndarray) -> float:
        """Max of |values| over the outermost index layer of every axis."""
        worst = 0.0
        for a in range(self.dim):
            for edge in (0, -1):
                sl = tuple(edge if j == a else slice(None) for j in range(self.dim))
                worst = max(worst, float(np.abs(values[sl]).max()))
        return worst

    def compatible_with(self, other: "Grid") -> bool:
        return (
            self.dim == other.dim
            and self.n == other.n
            and self.half_width == other.half_width
        )

    def __repr__(self) -> str:  # keep array caches out of reprs
        return f"Grid(dim={self.dim}, half_width={self.half_width}, n={self.n})"


def make_grid(dim: int, half_width: float, n: int) -> Grid:
    """Build a periodic grid; rejects non-power-of-two n and L <= 0."""
    return Grid(dim=int(dim), half_width=float(half_width), n=int(n))


def _require_same_grid(a, b) -> Grid:
    if not a.grid.compatible_with(b.grid):
        raise GridMismatchError(f"grid mismatch: {a.grid!r} vs {b.grid!r}")
    return a.grid


@dataclass(frozen=True, eq=False)
class Field:
    """Real-space samples of one scalar unknown."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise ValueError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a Field under the module's DFT convention."""

    grid: Grid
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients, dtype=np.complex128)
        if c.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {c.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "coefficients", c)


def to_spectral(f: Field) -> SpectralField:
    return SpectralField(f.grid, _fft.fftn(f.values))


def to_physical(sf: SpectralField) -> Field:
    # inputs represent real fields; the imaginary residue is FFT round-off
    return Field(sf.grid, _fft.ifftn(sf.coefficients).real)


def gradient(sf: SpectralField) -> tuple[SpectralField, ...]:
    """Per-axis spectral derivative, multiplication by i*k."""
    g = sf.grid
    return tuple(
        SpectralField(g, 1j * g.k_bcast[a] * sf.coefficients) for a in range(g.dim)
    )


def divergence(components) -> SpectralField:
    """Spectral divergence of a vector of SpectralFields."""
    components = tuple(components)
    g = components[0].grid
    if len(components) != g.dim:
        raise ValueError(f"divergence needs {g.dim} components, got {len(components)}")
    out = np.zeros(g.shape, dtype=np.complex128)
    for a, c in enumerate(components):
        _require_same_grid(components[0], c)
        out += 1j * g.k_bcast[a] * c.coefficients
    return SpectralField(g, out)


def laplacian(sf: SpectralField) -> SpectralField:
    return SpectralField(sf.grid, -sf.grid.k2 * sf.coefficients)


def bilaplacian(sf: SpectralField) -> SpectralField:
    return SpectralField(sf.grid, sf.grid.k4 * sf.coefficients)


def dealias(sf: SpectralField) -> SpectralField:
    """2/3-rule projection: zero modes with any axis index above n//3."""
    return SpectralField(sf.grid, np.where(sf.grid.dealias_keep, sf.coefficients, 0.0))
