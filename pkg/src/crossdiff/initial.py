"""Initial-data descriptors and their realization on a grid.

Descriptors are small value objects so configurations stay serializable
and so the scaling experiment can transform them exactly (a Gaussian of
width w rescales to a Gaussian of width w/lambda, and so on).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid

PROFILE_NAMES = ("bump", "double_gaussian")


def _center_tuple(center, dim: int) -> tuple:
    c = np.broadcast_to(np.asarray(center, dtype=float), (dim,))
    return tuple(float(v) for v in c)


@dataclass(frozen=True)
class GaussianIC:
    """Isotropic Gaussian with prescribed mass, standard deviation and center."""

    mass: float = 1.0
    width: float = 1.0
    center: tuple = (0.0,)

    def __post_init__(self) -> None:
        if self.mass < 0:
            raise ValueError("gaussian mass must be >= 0")
        if not self.width > 0:
            raise ValueError("gaussian width must be positive")

    @property
    def diffusion_time(self) -> float:
        """Time t0 for which this profile equals mass * G(. - center, t0)."""
        return self.width**2 / 2.0

    def realize(self, grid: Grid) -> Field:
        c = _center_tuple(self.center, grid.dim)
        r2 = grid.radius_sq(c)
        amp = self.mass * (2.0 * math.pi * self.width**2) ** (-grid.dim / 2.0)
        return Field(grid, amp * np.exp(-r2 / (2.0 * self.width**2)))

    def scaled(self, lam: float, amplitude_power: int) -> "GaussianIC":
        # lam^N f(lam x) keeps the mass; f(lam x) alone divides it by lam^N
        dim = len(self.center)
        mass = self.mass if amplitude_power == dim else self.mass * lam ** (amplitude_power - dim)
        return GaussianIC(
            mass=mass,
            width=self.width / lam,
            center=tuple(c / lam for c in self.center),
        )


@dataclass(frozen=True)
class NamedProfileIC:
    """A built-in profile shape, normalized to the requested discrete mass."""

    name: str
    mass: float = 1.0
    width: float = 1.0
    center: tuple = (0.0,)

    def __post_init__(self) -> None:
        if self.name not in PROFILE_NAMES:
            raise ValueError(f"unknown profile {self.name!r}; choose from {PROFILE_NAMES}")
        if self.mass < 0:
            raise ValueError("profile mass must be >= 0")
        if not self.width > 0:
            raise ValueError("profile width must be positive")

    def _shape(self, grid: Grid) -> np.ndarray:
        c = _center_tuple(self.center, grid.dim)
        r2 = grid.radius_sq(c)
        if self.name == "bump":
            # smooth compactly supported bump, zero outside radius `width`
            w2 = self.width**2
            vals = np.zeros(grid.shape)
            inside = r2 < w2 * (1.0 - 1e-12)
            vals[inside] = np.exp(-w2 / (w2 - r2[inside]))
            return vals
        if self.name == "double_gaussian":
            # two unequal lobes offset along the first axis
            off = np.zeros(grid.dim)
            off[0] = self.width
            a = np.exp(-grid.radius_sq(tuple(np.add(c, off))) / (2.0 * self.width**2))
            b = np.exp(-grid.radius_sq(tuple(np.subtract(c, off))) / (0.5 * self.width**2))
            return a + 0.6 * b
        raise AssertionError(self.name)

    def realize(self, grid: Grid) -> Field:
        vals = self._shape(grid)
        raw_mass = vals.sum() * grid.cell_volume
        if raw_mass <= 0:
            raise ValueError(f"profile {self.name!r} vanishes on this grid")
        return Field(grid, vals * (self.mass / raw_mass))

    def scaled(self, lam: float, amplitude_power: int) -> "NamedProfileIC":
        dim = len(self.center)
        mass = self.mass if amplitude_power == dim else self.mass * lam ** (amplitude_power - dim)
        return NamedProfileIC(
            name=self.name,
            mass=mass,
            width=self.width / lam,
            center=tuple(c / lam for c in self.center),
        )


@dataclass(frozen=True)
class FileIC:
    """One component (u or v) of a stored snapshot."""

    path: str
    component: str = "u"

    def __post_init__(self) -> None:
        if self.component not in ("u", "v"):
            raise ValueError("snapshot component must be 'u' or 'v'")

    def realize(self, grid: Grid) -> Field:
        from .snapshots import snapshot_load

        state = snapshot_load(self.path)
        f = state.u if self.component == "u" else state.v
        if not f.grid.compatible_with(grid):
            raise ValueError(
                f"snapshot grid {f.grid!r} does not match configured grid {grid!r}"
            )
        return Field(grid, f.values)

    def scaled(self, lam: float, amplitude_power: int):
        raise ValueError("file-based initial data cannot be rescaled exactly")
