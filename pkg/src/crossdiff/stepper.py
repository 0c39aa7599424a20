"""Time integration with an exact-diffusion integrating factor.

The linear operator (-|k|^2 - eps*|k|^4 for u, -|k|^2 for v) is diagonal
in Fourier space and is applied exactly through its exponential, so the
scheme commits zero time-discretization error on pure diffusion and the
fourth-order regularization never restricts the step.  Taxis terms are
advanced with a two-stage midpoint rule (formally second order) under a
transport CFL limit.  Blow-up is reported, never suppressed: behaviour
outside the small-data regime is not guaranteed, and the integrator
surfaces non-finite values as a structured failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from .grid import Field
from .norms import mass
from .dynamics import SimParams, State, nonlinear_hat
from .analysis import (
    BOUNDARY_TAIL_LIMIT,
    DiagnosticsRecord,
    DiagnosticsSpec,
    energy_phi,
    measure_state,
    smallness_threshold,
)


class BlowUpDetected(RuntimeError):
    """Non-finite field values appeared during time stepping."""

    def __init__(self, t: float, step_index: int, records=None):
        super().__init__(f"blow-up detected at t={t:.6g} (step {step_index})")
        self.t = t
        self.step_index = step_index
        self.records = list(records) if records is not None else []


class NonFiniteInitialData(ValueError):
    """Initial data contains NaN or Inf."""


def stable_dt(s: State, p: SimParams) -> float:
    """Transport CFL bound cfl_safety * dx / (chi*||grad v||_inf + xi*||grad u||_inf).

    Capped by the policy's dt_max; with no taxis the cap is returned.
    """
    g = s.grid
    speed = 0.0
    if p.chi != 0.0:
        speed += p.chi * _grad_max(s.v)
    if p.xi != 0.0:
        speed += p.xi * _grad_max(s.u)
    dt = p.policy.cfl_safety * g.dx / max(1e-30, speed)
    return min(dt, p.policy.dt_max)


def _grad_max(f: Field) -> float:
    g = f.grid
    hat = _fft.fftn(f.values)
    mag_sq = np.zeros(g.shape)
    for a in range(g.dim):
        comp = _fft.ifftn(1j * g.k_bcast[a] * hat).real
        mag_sq += comp**2
    return float(np.sqrt(mag_sq.max()))


def step(s: State, p: SimParams, dt: float) -> State:
    """One integrating-factor midpoint step of size dt.

    The zero Fourier mode is untouched by both the exact linear factor
    and the divergence-form taxis tendencies, so the masses of u and v
    are conserved to rounding.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    g = s.grid
    u_hat = _fft.fftn(s.u.values)
    v_hat = _fft.fftn(s.v.values)

    lin_u = -g.k2 - p.epsilon * g.k4 if p.epsilon != 0.0 else -g.k2
    lin_v = -g.k2
    eu_half = np.exp(lin_u * (dt / 2.0))
    ev_half = np.exp(lin_v * (dt / 2.0))

    nu1, nv1 = nonlinear_hat(g, u_hat, v_hat, p.chi, p.xi)
    u_mid = eu_half * (u_hat + (dt / 2.0) * nu1)
    v_mid = ev_half * (v_hat + (dt / 2.0) * nv1)
    nu2, nv2 = nonlinear_hat(g, u_mid, v_mid, p.chi, p.xi)

    u_new_hat = eu_half * (eu_half * u_hat) + dt * (eu_half * nu2)
    v_new_hat = ev_half * (ev_half * v_hat) + dt * (ev_half * nv2)

    u_new = _fft.ifftn(u_new_hat).real
    v_new = _fft.ifftn(v_new_hat).real
    if not (np.isfinite(u_new).all() and np.isfinite(v_new).all()):
        raise BlowUpDetected(s.t + dt, step_index=-1)
    return State(Field(g, u_new), Field(g, v_new), s.t + dt)


@dataclass(frozen=True)
class RunSummary:
    """Outcome of one integration: terminal state, record series and flags."""

    status: str                 # "completed" or "stalled"
    final_state: State
    records: list
    steps: int
    mass_u0: float
    mass_v0: float
    phi0: float
    smallness_threshold: float
    is_small_data: bool
    negativity_flagged: bool
    worst_undershoot: float
    truncation_suspect: bool

    @property
    def mass_drift(self) -> tuple[float, float]:
        """Max relative drift of (mass_u, mass_v) across the series."""
        du = max(abs(r.mass_u - self.mass_u0) for r in self.records)
        dv = max(abs(r.mass_v - self.mass_v0) for r in self.records)
        return (
            du / max(abs(self.mass_u0), 1e-300),
            dv / max(abs(self.mass_v0), 1e-300),
        )


def run(p: SimParams, diag: DiagnosticsSpec | None = None, sink=None) -> RunSummary:
    """Integrate to t_final, emitting a DiagnosticsRecord at the policy cadence.

    `sink`, when given, is called with each record as it is produced.
    Raises NonFiniteInitialData / ValueError for bad initial data and
    BlowUpDetected (carrying the partial record series) on instability.
    A run that exhausts max_steps before t_final returns with status
    "stalled" instead of failing.
    """
    diag = diag or DiagnosticsSpec()
    if p.initial_u is None or p.initial_v is None:
        raise ValueError("SimParams must carry initial-data descriptors")
    u0 = p.initial_u.realize(p.grid)
    v0 = p.initial_v.realize(p.grid)
    for name, f in (("u", u0), ("v", v0)):
        if not np.isfinite(f.values).all():
            raise NonFiniteInitialData(f"initial {name} contains non-finite values")
        peak = float(np.abs(f.values).max())
        if f.values.min() < -1e-10 * max(peak, 1.0):
            raise ValueError(f"initial {name} must be nonnegative")

    state = State(u0, v0, 0.0)
    mass_u0, mass_v0 = mass(u0), mass(v0)
    phi0 = energy_phi(state)
    threshold = smallness_threshold(p, diag.c_star)

    records: list[DiagnosticsRecord] = []

    def emit(s: State) -> None:
        rec = measure_state(s, diag, mass_u0, mass_v0)
        records.append(rec)
        if sink is not None:
            sink(rec)

    emit(state)
    cadence = p.policy.record_every
    next_record_idx = 1
    worst_undershoot = 0.0
    steps = 0
    status = "completed"

    while state.t < p.t_final - 1e-12 * max(1.0, p.t_final):
        if steps >= p.policy.max_steps:
            status = "stalled"
            break
        t_record = min(next_record_idx * cadence, p.t_final)
        dt = min(stable_dt(state, p), t_record - state.t)
        if steps == 0:
            dt = min(dt, p.policy.dt_init)
        try:
            state = step(state, p, dt)
        except BlowUpDetected as exc:
            raise BlowUpDetected(exc.t, steps, records) from None
        steps += 1
        undershoot = -min(
            float(state.u.values.min()) / max(float(np.abs(state.u.values).max()), 1e-300),
            float(state.v.values.min()) / max(float(np.abs(state.v.values).max()), 1e-300),
        )
        worst_undershoot = max(worst_undershoot, undershoot)
        if state.t >= t_record - 1e-9 * max(cadence, 1e-30):
            emit(state)
            if t_record >= p.t_final:
                break
            next_record_idx += 1

    if records[-1].t < state.t:
        emit(state)

    tail = max(r.boundary_tail for r in records)
    return RunSummary(
        status=status,
        final_state=state,
        records=records,
        steps=steps,
        mass_u0=mass_u0,
        mass_v0=mass_v0,
        phi0=phi0,
        smallness_threshold=threshold,
        is_small_data=bool(phi0 <= threshold),
        negativity_flagged=bool(worst_undershoot > 1e-10),
        worst_undershoot=worst_undershoot,
        truncation_suspect=bool(tail > BOUNDARY_TAIL_LIMIT),
    )
