"""Experiment configuration: flat key=value sections, strictly validated.

Format example::

    [grid]
    dim = 1
    half_width = 40
    n = 512

    [physics]
    chi = 0.5
    xi = 0.5

    [time]
    t_final = 50

    [initial.u]
    type = gaussian
    mass = 1.0
    width = 0.7

    [initial.v]
    type = gaussian
    mass = 1.0
    width = 1.0

    [diagnostics]
    p_list = 1, 2, inf

    [analysis]
    c_star = 1.0

Unknown sections or keys are errors (typos must not silently change an
experiment), and every message carries the key path and line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analysis import DiagnosticsSpec
from .dynamics import SimParams, StepPolicy
from .grid import make_grid
from .initial import FileIC, GaussianIC, NamedProfileIC


class ConfigError(ValueError):
    def __init__(self, path: str, message: str, line: int | None = None):
        loc = f" (line {line})" if line is not None else ""
        super().__init__(f"{path}: {message}{loc}")
        self.path = path
        self.line = line


KNOWN_KEYS = {
    "grid": {"dim", "half_width", "n"},
    "physics": {"chi", "xi", "epsilon"},
    "time": {"t_final", "dt_init", "dt_max", "cfl_safety", "max_steps"},
    "initial.u": {"type", "mass", "width", "center", "name", "path", "component"},
    "initial.v": {"type", "mass", "width", "center", "name", "path", "component"},
    "diagnostics": {"p_list", "cadence", "moment_r", "save_snapshots", "plot"},
    "analysis": {
        "rate_window_lo",
        "rate_window_hi",
        "kernel_distance",
        "scaling_lambda",
        "energy_checks",
        "c_star",
        "t_offset",
    },
}

REQUIRED = {
    "grid": {"dim", "half_width", "n"},
    "physics": {"chi", "xi"},
    "time": {"t_final"},
    "initial.u": {"type"},
    "initial.v": {"type"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully validated experiment description."""

    dim: int
    half_width: float
    n: int
    chi: float
    xi: float
    epsilon: float
    t_final: float
    dt_init: float
    dt_max: float
    cfl_safety: float
    max_steps: int
    cadence: float
    p_list: tuple
    moment_r: float | None
    save_snapshots: bool
    plot: tuple
    rate_window: tuple
    kernel_distance: bool
    scaling_lambda: float
    energy_checks: bool
    c_star: float
    t_offset: float
    initial_u: object = None
    initial_v: object = None

    def to_sim_params(self) -> SimParams:
        return SimParams(
            grid=make_grid(self.dim, self.half_width, self.n),
            chi=self.chi,
            xi=self.xi,
            epsilon=self.epsilon,
            t_final=self.t_final,
            policy=StepPolicy(
                dt_init=self.dt_init,
                dt_max=self.dt_max,
                cfl_safety=self.cfl_safety,
                max_steps=self.max_steps,
                record_every=self.cadence,
            ),
            initial_u=self.initial_u,
            initial_v=self.initial_v,
        )

    def diagnostics_spec(self) -> DiagnosticsSpec:
        return DiagnosticsSpec(
            p_list=self.p_list,
            kernel_distance=self.kernel_distance,
            t_offset=self.t_offset,
            moment_r=self.moment_r,
            c_star=self.c_star,
        )


def parse_sections(text: str):
    """Raw pass: {section: {key: (value_string, line_number)}}."""
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in KNOWN_KEYS:
                raise ConfigError(current, "unknown section", lineno)
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(
                current or "<top level>", f"expected key = value, got {line!r}", lineno
            )
        if current is None:
            raise ConfigError("<top level>", "key outside any [section]", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS[current]:
            raise ConfigError(f"{current}.{key}", "unknown key", lineno)
        if key in sections[current]:
            raise ConfigError(f"{current}.{key}", "duplicate key", lineno)
        sections[current][key] = (value, lineno)
    return sections


def _get(sections, section, key, convert, default=None, required=False):
    entry = sections.get(section, {}).get(key)
    if entry is None:
        if required:
            raise ConfigError(f"{section}.{key}", "missing required key")
        return default
    value, lineno = entry
    try:
        return convert(value)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"{section}.{key}", f"invalid value {value!r}: {exc}", lineno) from None


def _as_float(v: str) -> float:
    return float(v)


def _as_int(v: str) -> int:
    f = float(v)
    if f != int(f):
        raise ValueError("expected an integer")
    return int(f)


def _as_bool(v: str) -> bool:
    lv = v.lower()
    if lv in ("true", "yes", "on", "1"):
        return True
    if lv in ("false", "no", "off", "0"):
        return False
    raise ValueError("expected true/false")


def _as_p(v: str) -> float:
    lv = v.strip().lower()
    if lv in ("inf", "infinity", "oo"):
        return math.inf
    p = float(lv)
    if p < 1:
        raise ValueError("norm exponent must be >= 1 or inf")
    return p


def _as_p_list(v: str) -> tuple:
    items = [s for s in (part.strip() for part in v.split(",")) if s]
    if not items:
        raise ValueError("empty list")
    return tuple(_as_p(item) for item in items)


def _as_center(v: str) -> tuple:
    return tuple(float(part) for part in v.split(",") if part.strip())


def _as_plot_list(v: str) -> tuple:
    out = []
    for item in (part.strip() for part in v.split(",")):
        if not item:
            continue
        if ":" not in item:
            raise ValueError(f"plot entries are quantity:transform, got {item!r}")
        quantity, _, transform = item.partition(":")
        out.append((quantity.strip(), transform.strip()))
    return tuple(out)


def _parse_initial(sections, section: str, dim: int):
    kind = _get(sections, section, "type", str, required=True)
    component_default = section.rsplit(".", 1)[1]
    center = _get(sections, section, "center", _as_center, default=(0.0,) * dim)
    if len(center) == 1 and dim > 1:
        center = center * dim
    if len(center) != dim:
        raise ConfigError(f"{section}.center", f"expected {dim} coordinates, got {len(center)}")
    mass = _get(sections, section, "mass", _as_float, default=1.0)
    width = _get(sections, section, "width", _as_float, default=1.0)
    if kind == "gaussian":
        if mass < 0:
            raise ConfigError(f"{section}.mass", "must be >= 0")
        if width <= 0:
            raise ConfigError(f"{section}.width", "must be positive")
        return GaussianIC(mass=mass, width=width, center=center)
    if kind == "expression":
        name = _get(sections, section, "name", str, required=True)
        try:
            return NamedProfileIC(name=name, mass=mass, width=width, center=center)
        except ValueError as exc:
            raise ConfigError(f"{section}.name", str(exc)) from None
    if kind == "file":
        path = _get(sections, section, "path", str, required=True)
        component = _get(sections, section, "component", str, default=component_default)
        try:
            return FileIC(path=path, component=component)
        except ValueError as exc:
            raise ConfigError(f"{section}.component", str(exc)) from None
    raise ConfigError(f"{section}.type", f"unknown initial-data type {kind!r}")


def config_from_sections(sections) -> ExperimentConfig:
    for section, keys in REQUIRED.items():
        for key in keys:
            if key not in sections.get(section, {}):
                raise ConfigError(f"{section}.{key}", "missing required key")

    dim = _get(sections, "grid", "dim", _as_int, required=True)
    if dim not in (1, 2, 3):
        raise ConfigError("grid.dim", f"must be 1, 2 or 3, got {dim}")
    half_width = _get(sections, "grid", "half_width", _as_float, required=True)
    if half_width <= 0:
        raise ConfigError("grid.half_width", "must be positive")
    n = _get(sections, "grid", "n", _as_int, required=True)
    if n < 8 or n & (n - 1):
        raise ConfigError("grid.n", f"must be a power of two >= 8, got {n}")

    chi = _get(sections, "physics", "chi", _as_float, required=True)
    xi = _get(sections, "physics", "xi", _as_float, required=True)
    epsilon = _get(sections, "physics", "epsilon", _as_float, default=0.0)
    for name, val in (("chi", chi), ("xi", xi), ("epsilon", epsilon)):
        if val < 0:
            raise ConfigError(f"physics.{name}", f"must be >= 0, got {val}")

    t_final = _get(sections, "time", "t_final", _as_float, required=True)
    if t_final < 0:
        raise ConfigError("time.t_final", "must be >= 0")
    dt_max = _get(sections, "time", "dt_max", _as_float, default=0.1)
    dt_init = _get(sections, "time", "dt_init", _as_float, default=min(1e-3, dt_max))
    cfl_safety = _get(sections, "time", "cfl_safety", _as_float, default=0.4)
    max_steps = _get(sections, "time", "max_steps", _as_int, default=1_000_000)
    if not 0 < dt_init <= dt_max:
        raise ConfigError("time.dt_init", f"need 0 < dt_init <= dt_max, got {dt_init} > {dt_max}")
    if not 0 < cfl_safety <= 1:
        raise ConfigError("time.cfl_safety", "must be in (0, 1]")
    if max_steps < 1:
        raise ConfigError("time.max_steps", "must be >= 1")

    default_cadence = t_final / 100.0 if t_final > 0 else 1.0
    cadence = _get(sections, "diagnostics", "cadence", _as_float, default=default_cadence)
    if cadence <= 0:
        raise ConfigError("diagnostics.cadence", "must be positive")
    p_list = _get(sections, "diagnostics", "p_list", _as_p_list, default=(1.0, 2.0, math.inf))
    moment_r = _get(sections, "diagnostics", "moment_r", _as_float, default=None)
    if moment_r is not None and not 0 < moment_r <= 1:
        raise ConfigError("diagnostics.moment_r", "must be in (0, 1]")
    save_snapshots = _get(sections, "diagnostics", "save_snapshots", _as_bool, default=False)
    plot = _get(sections, "diagnostics", "plot", _as_plot_list, default=())

    rate_lo = _get(sections, "analysis", "rate_window_lo", _as_float, default=None)
    rate_hi = _get(sections, "analysis", "rate_window_hi", _as_float, default=None)
    if rate_lo is None:
        rate_lo = t_final / 10.0 if t_final > 0 else 0.0
    if rate_hi is None:
        rate_hi = t_final
    kernel_dist = _get(sections, "analysis", "kernel_distance", _as_bool, default=True)
    scaling_lambda = _get(sections, "analysis", "scaling_lambda", _as_float, default=2.0)
    energy_checks = _get(sections, "analysis", "energy_checks", _as_bool, default=True)
    c_star = _get(sections, "analysis", "c_star", _as_float, default=1.0)
    if c_star <= 0:
        raise ConfigError("analysis.c_star", "must be positive")
    t_offset = _get(sections, "analysis", "t_offset", _as_float, default=0.0)

    return ExperimentConfig(
        dim=dim,
        half_width=half_width,
        n=n,
        chi=chi,
        xi=xi,
        epsilon=epsilon,
        t_final=t_final,
        dt_init=dt_init,
        dt_max=dt_max,
        cfl_safety=cfl_safety,
        max_steps=max_steps,
        cadence=cadence,
        p_list=p_list,
        moment_r=moment_r,
        save_snapshots=save_snapshots,
        plot=plot,
        rate_window=(rate_lo, rate_hi),
        kernel_distance=kernel_dist,
        scaling_lambda=scaling_lambda,
        energy_checks=energy_checks,
        c_star=c_star,
        t_offset=t_offset,
        initial_u=_parse_initial(sections, "initial.u", dim),
        initial_v=_parse_initial(sections, "initial.v", dim),
    )


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a configuration document."""
    return config_from_sections(parse_sections(text))


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
