"""Pseudo-spectral simulator and verification harness for the pursuit-evasion
cross-diffusion system

    u_t = Lap u - chi * div(u grad v),
    v_t = Lap v + xi  * div(v grad u)

on a truncated periodic box, with diagnostics for mass conservation,
self-similar L^p decay, convergence to the heat kernel, H^2 energy
dissipation, and scaling invariance.
"""

from .grid import (
    Field,
    Grid,
    GridMismatchError,
    SpectralField,
    bilaplacian,
    dealias,
    divergence,
    gradient,
    laplacian,
    make_grid,
    to_physical,
    to_spectral,
)
from .norms import INF, lp_norm, mass, sobolev_sq, weighted_moment
from .heat import (
    KernelSpec,
    TruncationWarning,
    apply_semigroup,
    check_lp_lq_bound,
    gradient_semigroup_bound,
    heat_kernel_field,
    kernel_lp_norm_closed,
    periodized_heat_kernel_field,
)
from .initial import FileIC, GaussianIC, NamedProfileIC
from .dynamics import SimParams, State, StepPolicy, rhs, taxis_flux
from .stepper import BlowUpDetected, NonFiniteInitialData, RunSummary, run, stable_dt, step
from .mild import (
    NoContraction,
    PicardConfig,
    PicardResult,
    QuadratureUnderResolved,
    duhamel_term,
    picard_solve,
)
from .analysis import (
    DiagnosticsRecord,
    DiagnosticsSpec,
    EnergyReport,
    ExponentOutOfRange,
    RateFit,
    ScalingReport,
    boundary_tail,
    check_energy_inequality,
    energy_h,
    energy_phi,
    fit_decay_exponent,
    gn_theta,
    kernel_distance,
    measure_state,
    scaling_check,
    scaling_residual,
    smallness_threshold,
    theorem13_bound_fit,
)
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .snapshots import SnapshotFormatError, snapshot_header, snapshot_load, snapshot_save
from .reporting import emit_plot_data, read_series_csv, write_series_csv

__version__ = "0.1.0"
