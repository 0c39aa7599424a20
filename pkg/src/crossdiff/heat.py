"""Heat kernel evaluation, exact diffusion semigroup, and smoothing-bound checks.

The Gaussian kernel is

    G(x, t) = (4*pi*t)^(-dim/2) * exp(-|x|^2 / (4t)),

with unit mass and closed-form L^p norms.  On the grid the semigroup
e^{t*Laplacian} is applied as the exact spectral multiplier exp(-|k|^2 t);
kernel convolution appears only in tests, as an oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from .grid import Field, Grid
from .norms import lp_norm


class TruncationWarning(UserWarning):
    """The box is too small for the requested profile; tails are not negligible."""


@dataclass(frozen=True)
class KernelSpec:
    """Evaluation request for the Gaussian heat kernel."""

    dim: int
    t: float
    center: tuple = ()

    def __post_init__(self) -> None:
        if not self.t > 0:
            raise ValueError(f"kernel time must be positive, got {self.t}")
        c = np.broadcast_to(np.asarray(self.center or 0.0, dtype=float), (self.dim,))
        object.__setattr__(self, "center", tuple(c))


def heat_kernel_field(grid: Grid, spec: KernelSpec, warn_tail: bool = True) -> Field:
    """Samples of G(x - center, t) on the grid.

    Warns (TruncationWarning) when the kernel tail at the box boundary
    exceeds 1e-12 of the peak value.
    """
    if spec.dim != grid.dim:
        raise ValueError(f"kernel dim {spec.dim} does not match grid dim {grid.dim}")
    r2 = grid.radius_sq(spec.center)
    peak = (4.0 * math.pi * spec.t) ** (-grid.dim / 2.0)
    values = peak * np.exp(-r2 / (4.0 * spec.t))
    if warn_tail:
        tail = grid.shell_max_abs(values)
        if tail > 1e-12 * peak:
            warnings.warn(
                f"heat kernel tail at box boundary is {tail / peak:.2e} of the peak "
                f"(t={spec.t}, half_width={grid.half_width})",
                TruncationWarning,
                stacklevel=2,
            )
    return Field(grid, values)


def periodized_heat_kernel_field(grid: Grid, spec: KernelSpec, images: int = 1) -> Field:
    """Box-exact heat kernel: the Gaussian summed over periodic images.

    This is the kernel of the diffusion semigroup actually simulated on
    the torus; `images=1` (nearest neighbours) is enough whenever the
    Gaussian width is below the box size.
    """
    if spec.dim != grid.dim:
        raise ValueError(f"kernel dim {spec.dim} does not match grid dim {grid.dim}")
    period = 2.0 * grid.half_width
    peak = (4.0 * math.pi * spec.t) ** (-grid.dim / 2.0)
    values = np.zeros(grid.shape)
    shifts = range(-images, images + 1)
    import itertools

    for offsets in itertools.product(shifts, repeat=grid.dim):
        c = tuple(spec.center[a] - period * offsets[a] for a in range(grid.dim))
        values += peak * np.exp(-grid.radius_sq(c) / (4.0 * spec.t))
    return Field(grid, values)


def kernel_lp_norm_closed(dim: int, t: float, p: float) -> float:
    """Closed-form ||G(., t)||_{L^p}.

    (4*pi*t)^(-(dim/2)(1-1/p)) * p^(-dim/(2p)) for finite p; the peak
    (4*pi*t)^(-dim/2) for p = inf (the p-dependent factor tends to 1).
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if math.isinf(p):
        return (4.0 * math.pi * t) ** (-dim / 2.0)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return (4.0 * math.pi * t) ** (-(dim / 2.0) * (1.0 - 1.0 / p)) * p ** (-dim / (2.0 * p))


def apply_semigroup(f: Field, t: float) -> Field:
    """Exact grid diffusion: spectral multiplication by exp(-|k|^2 t).

    t = 0 is the identity (the input field is returned unchanged).
    """
    if t < 0:
        raise ValueError(f"semigroup time must be >= 0, got {t}")
    if t == 0.0:
        return f
    hat = _fft.fftn(f.values)
    hat *= np.exp(-f.grid.k2 * t)
    return Field(f.grid, _fft.ifftn(hat).real)


def check_lp_lq_bound(f: Field, t: float, p: float, q: float) -> float:
    """Ratio of ||e^{t*Lap} f||_p to the smoothing bound (4*pi*t)^(-(dim/2)(1/q-1/p)) ||f||_q.

    For nonnegative, grid-resolved f the ratio does not exceed 1 (up to
    1e-8 discretization slack).
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    _check_pq(p, q)
    dim = f.grid.dim
    denom = lp_norm(f, q)
    if denom == 0.0:
        raise ValueError("cannot form ratio for a zero field")
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    bound = (4.0 * math.pi * t) ** (-(dim / 2.0) * (inv_q - inv_p)) * denom
    return lp_norm(apply_semigroup(f, t), p) / bound


def gradient_semigroup_bound(f: Field, t: float, p: float, q: float) -> float:
    """Scaled gradient-smoothing ratio ||grad e^{t*Lap} f||_p * t^((dim/2)(1/q-1/p)+1/2) / ||f||_q.

    The sharp constant is not pinned; over a time sweep the ratio stays
    bounded, which is what callers should assert.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    _check_pq(p, q)
    g = f.grid
    denom = lp_norm(f, q)
    if denom == 0.0:
        raise ValueError("cannot form ratio for a zero field")
    hat = _fft.fftn(f.values) * np.exp(-g.k2 * t)
    mag_sq = np.zeros(g.shape)
    for a in range(g.dim):
        comp = _fft.ifftn(1j * g.k_bcast[a] * hat).real
        mag_sq += comp**2
    grad_norm = lp_norm(Field(g, np.sqrt(mag_sq)), p)
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    return grad_norm * t ** ((g.dim / 2.0) * (inv_q - inv_p) + 0.5) / denom


def _check_pq(p: float, q: float) -> None:
    if q < 1 or (not math.isinf(q) and q < 1):
        raise ValueError(f"q must be >= 1, got {q}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    qv = math.inf if math.isinf(q) else q
    pv = math.inf if math.isinf(p) else p
    if qv > pv:
        raise ValueError(f"smoothing bounds need q <= p, got q={q}, p={p}")
