"""Turn trajectories into quantitative checks.

Covers decay-rate fitting on log-log series, scaled distance to the heat
kernel, the H^2 energy pair (phi, h) with its dissipation inequality,
the algebraic decay bound on phi, the smallness threshold for the
initial energy, scaling-invariance residuals, interpolation-exponent
algebra, and the boundary-tail truncation guard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .grid import Field, make_grid
from .heat import KernelSpec, heat_kernel_field
from .norms import gradient_sobolev_sq, lp_norm, mass, sobolev_sq
from .dynamics import SimParams, State


class ExponentOutOfRange(ValueError):
    """The interpolation identity has no admissible exponent."""


@dataclass(frozen=True)
class DiagnosticsSpec:
    """What to measure at each record instant."""

    p_list: tuple = (1.0, 2.0, math.inf)
    kernel_distance: bool = True
    t_offset: float = 0.0
    moment_r: float | None = None
    c_star: float = 1.0

    def __post_init__(self) -> None:
        if len(self.p_list) == 0:
            raise ValueError("p_list must not be empty")
        for p in self.p_list:
            if not math.isinf(p) and p < 1:
                raise ValueError(f"norm exponent p must be >= 1, got {p}")
        if self.moment_r is not None and not 0.0 < self.moment_r <= 1.0:
            raise ValueError("moment_r must be in (0, 1]")
        if self.c_star <= 0:
            raise ValueError("c_star must be positive")


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Time-stamped norms, masses, energies and kernel distances."""

    t: float
    mass_u: float
    mass_v: float
    lp_norms: dict           # (component, p) -> value
    phi: float
    h: float
    kernel_dist: dict        # (component, p) -> scaled distance (may be empty)
    moment_u: float | None
    boundary_tail: float


def measure_state(
    s: State,
    spec: DiagnosticsSpec,
    mass_u0: float | None = None,
    mass_v0: float | None = None,
) -> DiagnosticsRecord:
    """One DiagnosticsRecord for the given state.

    Kernel distances use the conserved masses (mass_u0/mass_v0, falling
    back to the instantaneous ones) and are NaN at t = 0, where the
    comparison kernel is singular.
    """
    mu, mv = mass(s.u), mass(s.v)
    lp = {}
    for comp, f in (("u", s.u), ("v", s.v)):
        for p in spec.p_list:
            lp[(comp, p)] = lp_norm(f, p)
    kdist = {}
    if spec.kernel_distance:
        m_ref = {"u": mass_u0 if mass_u0 is not None else mu,
                 "v": mass_v0 if mass_v0 is not None else mv}
        for comp in ("u", "v"):
            for p in spec.p_list:
                if s.t + spec.t_offset > 0 and s.t > 0:
                    kdist[(comp, p)] = kernel_distance(
                        s, p, m_ref[comp], component=comp, t_offset=spec.t_offset
                    )
                else:
                    kdist[(comp, p)] = math.nan
    moment_u = None
    if spec.moment_r is not None:
        from .norms import weighted_moment

        moment_u = weighted_moment(s.u, spec.moment_r)
    return DiagnosticsRecord(
        t=s.t,
        mass_u=mu,
        mass_v=mv,
        lp_norms=lp,
        phi=energy_phi(s),
        h=energy_h(s),
        kernel_dist=kdist,
        moment_u=moment_u,
        boundary_tail=boundary_tail(s),
    )


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log(norm) against log(t)."""

    exponent: float
    intercept: float
    window: tuple
    rms_residual: float
    n_samples: int


def fit_decay_exponent(series, component: str, p: float, window) -> RateFit:
    """Fit log ||f(t)||_p ~ exponent * log t + intercept inside the window."""
    t_lo, t_hi = window
    if not 0 < t_lo < t_hi:
        raise ValueError(f"need 0 < t_lo < t_hi, got {window}")
    ts, ys = [], []
    for rec in series:
        if t_lo - 1e-12 <= rec.t <= t_hi + 1e-12 and rec.t > 0:
            val = rec.lp_norms[(component, p)]
            if val <= 0:
                raise ValueError(f"nonpositive norm {val} at t={rec.t}")
            ts.append(rec.t)
            ys.append(val)
    if len(ts) < 8:
        raise ValueError(f"rate fit needs >= 8 samples in window, got {len(ts)}")
    x = np.log(np.asarray(ts))
    y = np.log(np.asarray(ys))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return RateFit(
        exponent=float(slope),
        intercept=float(intercept),
        window=(float(t_lo), float(t_hi)),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        n_samples=len(ts),
    )


def kernel_distance(
    s: State, p: float, M: float, component: str = "u", t_offset: float = 0.0
) -> float:
    """Scaled distance t^((dim/2)(1-1/p)) * ||f - M*G(., t+t_offset)||_p."""
    if not s.t > 0:
        raise ValueError("kernel distance is undefined at t = 0")
    f = s.u if component == "u" else s.v
    g = s.grid
    kernel = heat_kernel_field(g, KernelSpec(g.dim, s.t + t_offset), warn_tail=False)
    diff = Field(g, f.values - M * kernel.values)
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    return s.t ** ((g.dim / 2.0) * (1.0 - inv_p)) * lp_norm(diff, p)


def energy_phi(s: State) -> float:
    """H^2 energy ||u||_{H^2}^2 + ||v||_{H^2}^2."""
    return sobolev_sq(s.u, 2) + sobolev_sq(s.v, 2)


def energy_h(s: State) -> float:
    """Dissipation functional ||grad u||_{H^2}^2 + ||grad v||_{H^2}^2."""
    return gradient_sobolev_sq(s.u, 2) + gradient_sobolev_sq(s.v, 2)


@dataclass(frozen=True)
class EnergyReport:
    """Discrete checks of the energy dissipation inequality along a series."""

    phi_nonincreasing: bool
    max_relative_increase: float
    max_half_h_residual: float       # max over steps of dphi/dt + h/2
    max_half_h_residual_scaled: float  # same, divided by the step-average h
    fitted_c: float                  # largest c with dphi/dt + c*h <= 0 throughout
    n_steps: int


def check_energy_inequality(series) -> EnergyReport:
    """Evaluate monotonicity and dissipation-rate checks on recorded (phi, h)."""
    recs = list(series)
    if len(recs) < 3:
        raise ValueError("energy check needs at least 3 records")
    phi = np.array([r.phi for r in recs])
    h = np.array([r.h for r in recs])
    t = np.array([r.t for r in recs])
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise ValueError("record times must be strictly increasing")
    dphi_dt = np.diff(phi) / dt
    h_avg = 0.5 * (h[:-1] + h[1:])

    rel_inc = np.diff(phi) / np.maximum(phi[:-1], 1e-300)
    max_rel_inc = float(rel_inc.max())
    residual = dphi_dt + 0.5 * h_avg
    scaled = residual / np.maximum(h_avg, 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        c_candidates = np.where(h_avg > 0, -dphi_dt / np.maximum(h_avg, 1e-300), np.inf)
    return EnergyReport(
        phi_nonincreasing=bool(max_rel_inc <= 1e-8),
        max_relative_increase=max_rel_inc,
        max_half_h_residual=float(residual.max()),
        max_half_h_residual_scaled=float(scaled.max()),
        fitted_c=float(c_candidates.min()),
        n_steps=len(dt),
    )


def theorem13_bound_fit(series, dim: int) -> float:
    """Largest A such that phi(t) <= (phi(0)^(-2/N) + (2/N) A t)^(-N/2) holds.

    Computed as the minimum over recorded t > 0 of
    N/(2t) * (phi(t)^(-2/N) - phi(0)^(-2/N)); nonpositive values signal a
    violation of the algebraic decay bound.
    """
    recs = list(series)
    if not recs:
        raise ValueError("empty series")
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    phi0 = recs[0].phi
    if phi0 <= 0:
        raise ValueError("phi must be positive")
    best = math.inf
    for rec in recs:
        if rec.phi <= 0:
            raise ValueError("phi must be positive")
        if rec.t <= recs[0].t:
            continue
        a = (rec.phi ** (-2.0 / dim) - phi0 ** (-2.0 / dim)) * dim / (2.0 * (rec.t - recs[0].t))
        best = min(best, a)
    if best is math.inf:
        raise ValueError("series has no records after the initial time")
    return float(best)


def smallness_threshold(p: SimParams, C_star: float) -> float:
    """Initial-energy bound 1 / (2 C* (chi^2 + xi^2)) for global behaviour."""
    if C_star <= 0:
        raise ValueError("C_star must be positive")
    s = p.chi**2 + p.xi**2
    if s == 0.0:
        return math.inf
    return 1.0 / (2.0 * C_star * s)


def boundary_tail(s: State) -> float:
    """Max of |u|, |v| on the outermost grid shell, relative to the field max.

    Values above 1e-8 mark a run as truncation-suspect: the box is too
    small for the profile it is carrying.
    """
    worst = 0.0
    for f in (s.u, s.v):
        peak = float(np.abs(f.values).max())
        if peak == 0.0:
            continue
        worst = max(worst, f.grid.shell_max_abs(f.values) / peak)
    return worst


BOUNDARY_TAIL_LIMIT = 1e-8


def gn_theta(j: int, m: int, p, q, r, N: int) -> Fraction:
    """Exact interpolation exponent theta solving

        1/p = j/N + (1/r - m/N) * theta + (1 - theta)/q,

    where theta weights the high-derivative factor ||D^m f||_{L^r}.
    Exponents may be Fractions, integers, or math.inf.  Raises
    ExponentOutOfRange when theta falls outside [j/m, 1].
    """
    if not (isinstance(j, int) and isinstance(m, int) and isinstance(N, int)):
        raise ValueError("j, m and N must be integers")
    if not m > j >= 0:
        raise ValueError(f"need m > j >= 0, got j={j}, m={m}")
    if N < 1:
        raise ValueError("N must be >= 1")

    def inv(x) -> Fraction:
        if x is None:
            raise ValueError("exponent must not be None")
        if isinstance(x, float) and math.isinf(x):
            return Fraction(0)
        x = Fraction(x)
        if x < 1:
            raise ValueError(f"Lebesgue exponents must be >= 1, got {x}")
        return 1 / x

    ip, iq, ir = inv(p), inv(q), inv(r)
    lhs = ip - Fraction(j, N) - iq
    denom = ir - Fraction(m, N) - iq
    if denom == 0:
        if lhs == 0:
            theta = Fraction(j, m)
        else:
            raise ExponentOutOfRange("interpolation identity has no solution")
    else:
        theta = lhs / denom
    if not Fraction(j, m) <= theta <= 1:
        raise ExponentOutOfRange(
            f"theta={theta} outside admissible range [{Fraction(j, m)}, 1]"
        )
    return theta


@dataclass(frozen=True)
class ScalingReport:
    """Residuals of the scale-transform correspondence between two runs."""

    lam: float
    t_check: float
    residual_u: float
    residual_v: float
    mass_identity_error: float
    gradient_norm_identity_error: float

    @property
    def residual(self) -> float:
        return max(self.residual_u, self.residual_v)


def scaling_check(p: SimParams, lam: float, t_check: float, diag: DiagnosticsSpec | None = None) -> ScalingReport:
    """Run the base and rescaled problems and compare them on aligned grids.

    The rescaled run uses the same point count on the box of half-width
    L/lam, initial data lam^N u0(lam x) and v0(lam x), and taxis
    coefficient xi * lam^(-N); node i of the rescaled grid sits exactly
    at (base node i)/lam, so the comparison is interpolation-free.  The
    numerical time-step policy is intentionally left unscaled so the
    residual reflects genuine discretization error and shrinks under
    refinement.
    """
    from .stepper import run

    if lam <= 0:
        raise ValueError("lambda must be positive")
    if t_check <= 0:
        raise ValueError("t_check must be positive")
    if p.initial_u is None or p.initial_v is None:
        raise ValueError("scaling check needs initial-data descriptors")

    g = p.grid
    dim = g.dim
    diag = diag or DiagnosticsSpec(kernel_distance=False)

    base = SimParams(
        grid=g, chi=p.chi, xi=p.xi, epsilon=p.epsilon,
        t_final=lam**2 * t_check, policy=p.policy,
        initial_u=p.initial_u, initial_v=p.initial_v,
    )
    g_scaled = make_grid(dim, g.half_width / lam, g.n)
    rescaled = SimParams(
        grid=g_scaled, chi=p.chi, xi=p.xi * lam ** (-dim),
        epsilon=p.epsilon, t_final=t_check, policy=p.policy,
        initial_u=p.initial_u.scaled(lam, amplitude_power=dim),
        initial_v=p.initial_v.scaled(lam, amplitude_power=0),
    )

    u0b = base.initial_u.realize(g)
    v0b = base.initial_v.realize(g)
    u0s = rescaled.initial_u.realize(g_scaled)
    v0s = rescaled.initial_v.realize(g_scaled)

    # discrete transform identities on the initial data
    m_base, m_scaled = mass(u0b), mass(u0s)
    mass_err = abs(m_scaled - m_base) / max(abs(m_base), 1e-300)
    grad_err = 0.0
    for r_exp in (2.0, 4.0):
        base_gn = _gradient_lp(v0b, r_exp)
        scaled_gn = _gradient_lp(v0s, r_exp)
        expected = lam ** (1.0 - dim / r_exp) * base_gn
        if expected > 0:
            grad_err = max(grad_err, abs(scaled_gn - expected) / expected)

    res_base = run(base, diag)
    res_scaled = run(rescaled, diag)
    ub = res_base.final_state.u.values
    vb = res_base.final_state.v.values
    us = res_scaled.final_state.u.values
    vs = res_scaled.final_state.v.values
    residual_u = float(np.abs(lam**dim * ub - us).max())
    residual_v = float(np.abs(vb - vs).max())
    return ScalingReport(
        lam=lam,
        t_check=t_check,
        residual_u=residual_u,
        residual_v=residual_v,
        mass_identity_error=float(mass_err),
        gradient_norm_identity_error=float(grad_err),
    )


def scaling_residual(p: SimParams, lam: float, t_check: float) -> float:
    """Max-norm residual of the scaling correspondence (see scaling_check)."""
    return scaling_check(p, lam, t_check).residual


def _gradient_lp(f: Field, p_exp: float) -> float:
    import scipy.fft as _fft

    g = f.grid
    hat = _fft.fftn(f.values)
    mag_sq = np.zeros(g.shape)
    for a in range(g.dim):
        comp = _fft.ifftn(1j * g.k_bcast[a] * hat).real
        mag_sq += comp**2
    return lp_norm(Field(g, np.sqrt(mag_sq)), p_exp)
