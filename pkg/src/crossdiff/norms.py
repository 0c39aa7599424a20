"""Integral quantities over fields: masses, L^p norms, Sobolev norms, moments.

All integrals use the rectangle rule, which is spectrally accurate for
smooth periodic integrands.  The L^infinity norm is the grid max; no
interpolation between samples.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.fft as _fft

from .grid import Field

INF = math.inf


def mass(f: Field) -> float:
    """Discrete integral of f over the box."""
    return float(f.values.sum() * f.grid.cell_volume)


def lp_norm(f: Field, p: float) -> float:
    """(sum |f|^p dx^dim)^(1/p); the grid max for p = inf."""
    if math.isinf(p):
        return float(np.abs(f.values).max())
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if p == 1.0:
        return float(np.abs(f.values).sum() * f.grid.cell_volume)
    if p == 2.0:
        return float(math.sqrt((f.values**2).sum() * f.grid.cell_volume))
    return float((np.abs(f.values) ** p).sum() * f.grid.cell_volume) ** (1.0 / p)


def _sobolev_weight(grid, order: int) -> np.ndarray:
    # sum over derivative orders j <= order of |k|^(2j), i.e. the multi-index
    # sum with multinomial weights collapsed through |k|^2 = sum k_a^2
    w = np.ones(grid.shape)
    if order >= 1:
        w = w + grid.k2
    if order >= 2:
        w = w + grid.k4
    if order >= 3:
        w = w + grid.k2 * grid.k4
    return w


def sobolev_sq(f: Field, order: int) -> float:
    """Squared H^order norm, sum_{j<=order} ||grad^j f||_{L^2}^2.

    Mixed partials carry their multinomial counts, so the spectral weight
    is exactly 1 + |k|^2 + ... + |k|^(2*order).
    """
    if order not in (0, 1, 2, 3):
        raise ValueError(f"unsupported Sobolev order {order}")
    hat = _fft.fftn(f.values)
    w = _sobolev_weight(f.grid, order)
    scale = f.grid.cell_volume / f.grid.size
    return float((w * (hat.real**2 + hat.imag**2)).sum() * scale)


def gradient_sobolev_sq(f: Field, order: int) -> float:
    """Squared H^order norm of grad f, the spectral sum with weight |k|^2*(1+...)."""
    if order not in (0, 1, 2, 3):
        raise ValueError(f"unsupported Sobolev order {order}")
    hat = _fft.fftn(f.values)
    w = f.grid.k2 * _sobolev_weight(f.grid, order)
    scale = f.grid.cell_volume / f.grid.size
    return float((w * (hat.real**2 + hat.imag**2)).sum() * scale)


def weighted_moment(f: Field, r: float) -> float:
    """Spatial moment sum (1+|x|^2)^r f^2 dx^dim with 0 < r <= 1."""
    if not 0.0 < r <= 1.0:
        raise ValueError(f"moment exponent r must be in (0, 1], got {r}")
    w = (1.0 + f.grid.radius_sq()) ** r
    return float((w * f.values**2).sum() * f.grid.cell_volume)
