"""Right-hand side of the cross-diffusion system in discrete-conservation form.

The system is

    u_t = Lap u - eps*Lap^2 u - chi * div(u grad v)
    v_t = Lap v              + xi  * div(v grad u)

with chi, xi, eps >= 0.  Taxis terms are kept in flux (divergence) form:
the spectral divergence has an exactly vanishing zero mode, so both
tendencies are mass-neutral to machine precision.  Both factors of the
quadratic product are dealiased before multiplication, and the product
again before the divergence.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.fft as _fft

from .grid import Field, Grid, _require_same_grid


@dataclass(frozen=True)
class StepPolicy:
    """Time-step control and output cadence for a run."""

    dt_init: float = 1e-3
    dt_max: float = 0.1
    cfl_safety: float = 0.4
    max_steps: int = 1_000_000
    record_every: float = 0.25

    def __post_init__(self) -> None:
        if not 0 < self.dt_init <= self.dt_max:
            raise ValueError("need 0 < dt_init <= dt_max")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must be in (0, 1]")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if not self.record_every > 0:
            raise ValueError("record_every must be positive")


@dataclass(frozen=True)
class SimParams:
    """Physics coefficients, grid, horizon and initial data for one run."""

    grid: Grid
    chi: float = 0.0
    xi: float = 0.0
    epsilon: float = 0.0
    t_final: float = 1.0
    policy: StepPolicy = dc_field(default_factory=StepPolicy)
    initial_u: object = None
    initial_v: object = None

    def __post_init__(self) -> None:
        if self.chi < 0 or self.xi < 0 or self.epsilon < 0:
            raise ValueError("chi, xi and epsilon must be >= 0")
        if self.t_final < 0:
            raise ValueError("t_final must be >= 0")


@dataclass(frozen=True)
class State:
    """The pair (u, v) at one time instant."""

    u: Field
    v: Field
    t: float

    def __post_init__(self) -> None:
        _require_same_grid(self.u, self.v)
        if self.t < 0:
            raise ValueError("state time must be >= 0")

    @property
    def grid(self) -> Grid:
        return self.u.grid


def _dealiased_physical(grid: Grid, hat: np.ndarray) -> np.ndarray:
    return _fft.ifftn(np.where(grid.dealias_keep, hat, 0.0)).real


def flux_hat(grid: Grid, a_hat: np.ndarray, b_hat: np.ndarray) -> list[np.ndarray]:
    """Spectral components of the dealiased product a * grad b, per axis."""
    a_phys = _dealiased_physical(grid, a_hat)
    out = []
    for axis in range(grid.dim):
        gb = _dealiased_physical(grid, 1j * grid.k_bcast[axis] * b_hat)
        out.append(_fft.fftn(a_phys * gb))
    return out


def divergence_hat(grid: Grid, comps_hat) -> np.ndarray:
    """Spectral divergence of per-axis coefficient arrays, dealiased first."""
    out = np.zeros(grid.shape, dtype=np.complex128)
    for axis, c in enumerate(comps_hat):
        out += 1j * grid.k_bcast[axis] * np.where(grid.dealias_keep, c, 0.0)
    return out


def nonlinear_hat(
    grid: Grid, u_hat: np.ndarray, v_hat: np.ndarray, chi: float, xi: float
) -> tuple[np.ndarray, np.ndarray]:
    """Spectral taxis tendencies (-chi div(u grad v), +xi div(v grad u))."""
    nu = np.zeros(grid.shape, dtype=np.complex128)
    nv = np.zeros(grid.shape, dtype=np.complex128)
    if chi != 0.0:
        nu = -chi * divergence_hat(grid, flux_hat(grid, u_hat, v_hat))
    if xi != 0.0:
        nv = xi * divergence_hat(grid, flux_hat(grid, v_hat, u_hat))
    return nu, nv


def taxis_flux(a: Field, b: Field, coeff: float, sign: int) -> list[Field]:
    """Directed-movement flux sign*coeff*(a grad b), dealiased factors and all."""
    if sign not in (-1, 1):
        raise ValueError("sign must be -1 or +1")
    g = _require_same_grid(a, b)
    comps = flux_hat(g, _fft.fftn(a.values), _fft.fftn(b.values))
    return [Field(g, sign * coeff * _fft.ifftn(c).real) for c in comps]


def rhs(s: State, p: SimParams) -> tuple[Field, Field]:
    """Full tendencies (du/dt, dv/dt) of the (possibly regularized) system."""
    g = s.grid
    if not g.compatible_with(p.grid):
        raise ValueError("state grid does not match params grid")
    u_hat = _fft.fftn(s.u.values)
    v_hat = _fft.fftn(s.v.values)
    nu, nv = nonlinear_hat(g, u_hat, v_hat, p.chi, p.xi)

    du_hat = -g.k2 * u_hat + nu
    if p.epsilon != 0.0:
        du_hat -= p.epsilon * g.k4 * u_hat
    dv_hat = -g.k2 * v_hat + nv

    du = _fft.ifftn(du_hat).real
    dv = _fft.ifftn(dv_hat).real
    if not (np.isfinite(du).all() and np.isfinite(dv).all()):
        raise FloatingPointError("non-finite tendency (state appears to be blowing up)")
    return Field(g, du), Field(g, dv)


__all__ = [
    "SimParams",
    "State",
    "StepPolicy",
    "taxis_flux",
    "rhs",
    "nonlinear_hat",
    "flux_hat",
    "divergence_hat",
]
