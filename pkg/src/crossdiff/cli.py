"""Command-line interface.

Subcommands: simulate, verify-semigroup, scaling-check, rate-fit,
kernel-distance, gn, sweep, plot.  Exit codes: 0 success, 2 config
error, 3 blow-up (or a stepper stall), 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import analysis
from .config import ConfigError, ExperimentConfig, load_config
from .grid import make_grid
from .heat import check_lp_lq_bound, gradient_semigroup_bound
from .initial import GaussianIC, NamedProfileIC
from .mild import NoContraction, QuadratureUnderResolved
from .reporting import (
    emit_plot_data,
    json_sanitize,
    p_label,
    parse_p_label,
    read_series_csv,
    write_series_csv,
    write_summary_json,
)
from .snapshots import SnapshotFormatError, snapshot_load, snapshot_save
from .stepper import BlowUpDetected, NonFiniteInitialData, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_VERIFY = 4


def _result_line(payload: dict) -> None:
    print("RESULT " + json.dumps(json_sanitize(payload), sort_keys=True))


def _series_meta(cfg: ExperimentConfig) -> dict:
    return {
        "dim": cfg.dim,
        "half_width": repr(cfg.half_width),
        "n": cfg.n,
        "chi": repr(cfg.chi),
        "xi": repr(cfg.xi),
        "epsilon": repr(cfg.epsilon),
        "t_offset": repr(cfg.t_offset),
        "cadence": repr(cfg.cadence),
    }


def cmd_simulate(cfg: ExperimentConfig, out_dir: Path, reproducible: bool) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    params = cfg.to_sim_params()
    diag = cfg.diagnostics_spec()
    meta = _series_meta(cfg)
    series_path = out_dir / "series.csv"

    try:
        summary = run(params, diag)
    except BlowUpDetected as exc:
        write_series_csv(
            series_path,
            exc.records,
            meta,
            cfg.p_list,
            kernel_distance=cfg.kernel_distance,
            reproducible=reproducible,
            truncated_reason=f"reason=blow-up t={exc.t:.6g}",
        )
        write_summary_json(out_dir / "summary.json", {"status": "blow-up", "t": exc.t})
        print(f"error: blow-up detected at t={exc.t:.6g}; partial series retained", file=sys.stderr)
        return EXIT_BLOWUP

    records = summary.records
    truncated = None
    if summary.status == "stalled":
        truncated = f"reason=cfl-stall t={summary.final_state.t:.6g} steps={summary.steps}"
    write_series_csv(
        series_path,
        records,
        meta,
        cfg.p_list,
        kernel_distance=cfg.kernel_distance,
        reproducible=reproducible,
        truncated_reason=truncated,
    )

    if cfg.save_snapshots:
        first = summary.records[0]
        u0 = params.initial_u.realize(params.grid)
        v0 = params.initial_v.realize(params.grid)
        from .dynamics import State

        snapshot_save(State(u0, v0, first.t), out_dir / "initial.xdif", params)
        snapshot_save(summary.final_state, out_dir / "final.xdif", params)

    report = _build_summary(cfg, summary)
    write_summary_json(out_dir / "summary.json", report)

    plots_dir = out_dir / "plots"
    plots_dir.mkdir(exist_ok=True)
    from .plots import render_overview, render_quantity_figure

    render_overview(records, plots_dir / "overview.png", cfg.dim, cfg.p_list)
    for quantity, transform in cfg.plot:
        stem = f"{quantity}_{transform.replace('-', '_')}"
        emit_plot_data(records, quantity, transform, plots_dir / f"{stem}.txt", cfg.dim)
        render_quantity_figure(records, quantity, transform, plots_dir / f"{stem}.png", cfg.dim)

    if summary.status == "stalled":
        print(
            f"error: step budget exhausted at t={summary.final_state.t:.6g} "
            f"({summary.steps} steps, CFL stall); partial series retained",
            file=sys.stderr,
        )
        return EXIT_BLOWUP
    _result_line({"status": summary.status, "out": str(out_dir), "steps": summary.steps})
    return EXIT_OK


def _build_summary(cfg: ExperimentConfig, summary) -> dict:
    records = summary.records
    drift_u, drift_v = summary.mass_drift
    report = {
        "status": summary.status,
        "steps": summary.steps,
        "t_final": records[-1].t,
        "mass": {
            "u0": summary.mass_u0,
            "v0": summary.mass_v0,
            "max_relative_drift_u": drift_u,
            "max_relative_drift_v": drift_v,
        },
        "smallness": {
            "phi0": summary.phi0,
            "threshold": summary.smallness_threshold,
            "c_star": cfg.c_star,
            "is_small_data": summary.is_small_data,
        },
        "flags": {
            "negativity": summary.negativity_flagged,
            "worst_undershoot": summary.worst_undershoot,
            "truncation_suspect": summary.truncation_suspect,
        },
    }
    t_lo, t_hi = cfg.rate_window
    fits = []
    if t_lo > 0 and t_hi > t_lo:
        for comp in ("u", "v"):
            for p in cfg.p_list:
                if math.isinf(p) or p > 1:
                    try:
                        fit = analysis.fit_decay_exponent(records, comp, p, (t_lo, t_hi))
                    except ValueError:
                        continue
                    inv_p = 0.0 if math.isinf(p) else 1.0 / p
                    fits.append(
                        {
                            "component": comp,
                            "p": p_label(p),
                            "exponent": fit.exponent,
                            "rms_residual": fit.rms_residual,
                            "heat_rate": -(cfg.dim / 2.0) * (1.0 - inv_p),
                            "window": [t_lo, t_hi],
                        }
                    )
    report["rate_fits"] = fits
    if cfg.energy_checks and len(records) >= 3:
        energy = analysis.check_energy_inequality(records)
        report["energy"] = {
            "phi_nonincreasing": energy.phi_nonincreasing,
            "max_relative_increase": energy.max_relative_increase,
            "max_half_h_residual": energy.max_half_h_residual,
            "max_half_h_residual_scaled": energy.max_half_h_residual_scaled,
            "fitted_c": energy.fitted_c,
        }
        try:
            report["a_star_fit"] = analysis.theorem13_bound_fit(records, cfg.dim)
        except ValueError:
            pass
    if cfg.kernel_distance:
        kd = {}
        for p in cfg.p_list:
            vals = [
                (r.t, r.kernel_dist.get(("u", p), math.nan))
                for r in records
                if r.t > 0 and math.isfinite(r.kernel_dist.get(("u", p), math.nan))
            ]
            if vals:
                kd[p_label(p)] = {"first": vals[0][1], "last": vals[-1][1]}
        report["kernel_distance_u"] = kd
    return report


SEMIGROUP_TIMES = (0.1, 1.0, 10.0)
SEMIGROUP_PAIRS = ((1.0, 2.0), (1.0, math.inf), (2.0, 2.0), (2.0, math.inf))


def _sweep_profiles(dim: int):
    center0 = (0.0,) * dim
    off = tuple(1.5 if a == 0 else 0.0 for a in range(dim))
    return [
        ("gaussian_narrow", GaussianIC(mass=1.0, width=0.7, center=center0)),
        ("gaussian_wide", GaussianIC(mass=1.0, width=1.8, center=center0)),
        ("gaussian_offset", GaussianIC(mass=0.8, width=1.1, center=off)),
        ("bump", NamedProfileIC(name="bump", mass=1.0, width=3.0, center=center0)),
        ("double_gaussian", NamedProfileIC(name="double_gaussian", mass=1.2, width=1.2, center=center0)),
    ]


def cmd_verify_semigroup(cfg: ExperimentConfig, out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = make_grid(cfg.dim, cfg.half_width, cfg.n)
    rows = []
    grad_rows = []
    violations = []
    for name, ic in _sweep_profiles(cfg.dim):
        f = ic.realize(grid)
        for t in SEMIGROUP_TIMES:
            for q, p in SEMIGROUP_PAIRS:
                ratio = check_lp_lq_bound(f, t, p, q)
                ok = ratio <= 1.0 + 1e-8
                rows.append((name, t, q, p, ratio, ok))
                if not ok:
                    violations.append(
                        f"profile={name} t={t} q={p_label(q)} p={p_label(p)} ratio={ratio:.12g}"
                    )
                grad_rows.append((name, t, q, p, gradient_semigroup_bound(f, t, p, q)))

    with open(out_dir / "semigroup_report.csv", "w", encoding="utf-8") as fh:
        fh.write("profile,t,q,p,ratio,bound_ok\n")
        for name, t, q, p, ratio, ok in rows:
            fh.write(f"{name},{t},{p_label(q)},{p_label(p)},{ratio:.17g},{ok}\n")
    with open(out_dir / "gradient_report.csv", "w", encoding="utf-8") as fh:
        fh.write("profile,t,q,p,scaled_ratio\n")
        for name, t, q, p, ratio in grad_rows:
            fh.write(f"{name},{t},{p_label(q)},{p_label(p)},{ratio:.17g}\n")

    max_ratio = max(r[4] for r in rows)
    max_grad = max(r[4] for r in grad_rows)
    print(f"smoothing-bound ratios: max {max_ratio:.12g} over {len(rows)} cases")
    print(f"gradient-bound scaled ratios: max {max_grad:.12g} (tabulated, no pinned constant)")
    for v in violations:
        print(f"VIOLATION {v}")
    _result_line(
        {
            "cases": len(rows),
            "max_ratio": max_ratio,
            "max_gradient_ratio": max_grad,
            "violations": len(violations),
        }
    )
    return EXIT_VERIFY if violations else EXIT_OK


def cmd_scaling_check(cfg: ExperimentConfig, lam: float, t_check: float | None) -> int:
    params = cfg.to_sim_params()
    if t_check is None:
        t_check = cfg.t_final / lam**2 if lam > 0 else cfg.t_final
    report = analysis.scaling_check(params, lam, t_check)
    print(
        f"scaling residual (lambda={lam}, t_check={t_check:g}): "
        f"u {report.residual_u:.6e}, v {report.residual_v:.6e}"
    )
    print(
        f"initial-data identities: mass {report.mass_identity_error:.3e}, "
        f"gradient-norm {report.gradient_norm_identity_error:.3e} (relative)"
    )
    _result_line(
        {
            "lambda": lam,
            "t_check": t_check,
            "residual_u": report.residual_u,
            "residual_v": report.residual_v,
            "mass_identity_error": report.mass_identity_error,
            "gradient_norm_identity_error": report.gradient_norm_identity_error,
        }
    )
    ok = report.mass_identity_error <= 1e-10 and report.gradient_norm_identity_error <= 1e-10
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_rate_fit(series_path: str, component: str, p: float, window) -> int:
    records, meta = read_series_csv(series_path)
    dim = int(meta.get("dim", 1))
    t_lo, t_hi = window
    if t_hi is None:
        t_hi = max(r.t for r in records)
    if t_lo is None:
        t_lo = t_hi / 10.0
    fit = analysis.fit_decay_exponent(records, component, p, (t_lo, t_hi))
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    heat_rate = -(dim / 2.0) * (1.0 - inv_p)
    print(
        f"fitted decay exponent of ||{component}||_{p_label(p)} on [{t_lo:g}, {t_hi:g}]: "
        f"{fit.exponent:.4f} (heat rate {heat_rate:.4f}, rms residual {fit.rms_residual:.2e})"
    )
    payload = {
        "component": component,
        "p": p_label(p),
        "window": [t_lo, t_hi],
        "exponent": fit.exponent,
        "intercept": fit.intercept,
        "rms_residual": fit.rms_residual,
        "heat_rate": heat_rate,
        "n_samples": fit.n_samples,
    }
    if dim == 1:
        payload["guaranteed_rate"] = -(3.0 / 8.0) * (1.0 - inv_p)
    _result_line(payload)
    return EXIT_OK


def cmd_kernel_distance(snapshot_path: str, p_values, t_offset: float) -> int:
    state = snapshot_load(snapshot_path)
    if state.t <= 0:
        print("error: kernel distance is undefined at t = 0", file=sys.stderr)
        return EXIT_CONFIG
    from .norms import mass

    out = {}
    for p in p_values:
        for comp in ("u", "v"):
            field = state.u if comp == "u" else state.v
            d = analysis.kernel_distance(state, p, mass(field), component=comp, t_offset=t_offset)
            out[f"{comp}_{p_label(p)}"] = d
            print(f"scaled kernel distance, component {comp}, p={p_label(p)}: {d:.6e}")
    _result_line({"t": state.t, "t_offset": t_offset, "distances": out})
    return EXIT_OK


def cmd_gn(j: int, m: int, p, q, r, N: int) -> int:
    theta = analysis.gn_theta(j, m, p, q, r, N)
    low = 1 - theta
    print(f"interpolation exponent theta = {theta} (= {float(theta):.6g}); low-norm exponent 1-theta = {low}")
    _result_line(
        {
            "j": j,
            "m": m,
            "N": N,
            "theta": str(theta),
            "theta_float": float(theta),
            "one_minus_theta": str(low),
        }
    )
    return EXIT_OK


def _parse_sweep_file(text: str):
    """Lines of `name: section.key=value ...`; '#' starts a comment."""
    runs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ConfigError("<sweep>", f"expected 'name: key=value ...', got {line!r}", lineno)
        name, _, rest = line.partition(":")
        name = name.strip()
        deltas = []
        for item in rest.split():
            if "=" not in item:
                raise ConfigError("<sweep>", f"expected key=value, got {item!r}", lineno)
            dotted, _, value = item.partition("=")
            if "." not in dotted:
                raise ConfigError("<sweep>", f"keys are section.key, got {dotted!r}", lineno)
            section, _, key = dotted.rpartition(".")
            deltas.append((section, key, value, lineno))
        runs.append((name, deltas))
    return runs


def cmd_sweep(config_path: str, sweep_path: str, out_dir: Path, reproducible: bool) -> int:
    from .config import KNOWN_KEYS, config_from_sections, parse_sections

    with open(config_path, "r", encoding="utf-8") as fh:
        base_text = fh.read()
    with open(sweep_path, "r", encoding="utf-8") as fh:
        sweep_text = fh.read()
    runs = _parse_sweep_file(sweep_text)
    if not runs:
        print("error: sweep file defines no runs", file=sys.stderr)
        return EXIT_CONFIG

    worst = EXIT_OK
    for name, deltas in runs:
        sections = parse_sections(base_text)
        for section, key, value, lineno in deltas:
            if section not in KNOWN_KEYS:
                raise ConfigError(section, "unknown section in sweep delta", lineno)
            if key not in KNOWN_KEYS[section]:
                raise ConfigError(f"{section}.{key}", "unknown key in sweep delta", lineno)
            sections.setdefault(section, {})[key] = (value, lineno)
        cfg = config_from_sections(sections)
        run_dir = out_dir / name
        print(f"[sweep] {name} -> {run_dir}")
        code = cmd_simulate(cfg, run_dir, reproducible)
        worst = max(worst, code)
    return worst


def cmd_plot(series_path: str, quantity: str, transform: str, out_dir: Path) -> int:
    records, meta = read_series_csv(series_path)
    dim = int(meta.get("dim", 1))
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{quantity}_{transform.replace('-', '_')}"
    emit_plot_data(records, quantity, transform, out_dir / f"{stem}.txt", dim)
    from .plots import render_quantity_figure

    render_quantity_figure(records, quantity, transform, out_dir / f"{stem}.png", dim)
    print(f"wrote {out_dir / (stem + '.txt')} and {out_dir / (stem + '.png')}")
    return EXIT_OK


def _rational(text: str):
    lv = text.strip().lower()
    if lv in ("inf", "infinity", "oo"):
        return math.inf
    return Fraction(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment configuration file")
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument(
        "--reproducible",
        action="store_true",
        help="suppress timestamps so outputs are byte-identical across runs",
    )

    parser = argparse.ArgumentParser(
        prog="crossdiff",
        description="Pseudo-spectral simulator and verification harness for the "
        "pursuit-evasion cross-diffusion system",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[common], help="run one experiment")

    sub.add_parser("verify-semigroup", parents=[common],
                   help="sweep diffusion smoothing-bound ratios over profiles, times and (q, p)")

    p_scale = sub.add_parser("scaling-check", parents=[common],
                             help="compare a run against its exactly rescaled twin")
    p_scale.add_argument("--lam", "--lambda", dest="lam", type=float, default=None)
    p_scale.add_argument("--t-check", type=float, default=None)

    p_rate = sub.add_parser("rate-fit", parents=[common], help="fit a decay exponent from a series CSV")
    p_rate.add_argument("--series", required=True)
    p_rate.add_argument("--component", choices=("u", "v"), default="u")
    p_rate.add_argument("--p", default="inf")
    p_rate.add_argument("--t-lo", type=float, default=None)
    p_rate.add_argument("--t-hi", type=float, default=None)

    p_kd = sub.add_parser("kernel-distance", parents=[common],
                          help="scaled heat-kernel distance of a snapshot state")
    p_kd.add_argument("--snapshot", required=True)
    p_kd.add_argument("--p", action="append", default=None)
    p_kd.add_argument("--t-offset", type=float, default=0.0)

    p_gn = sub.add_parser("gn", parents=[common], help="exact interpolation-exponent algebra")
    p_gn.add_argument("--j", type=int, required=True)
    p_gn.add_argument("--m", type=int, required=True)
    p_gn.add_argument("--p", required=True)
    p_gn.add_argument("--q", required=True)
    p_gn.add_argument("--r", required=True)
    p_gn.add_argument("--N", type=int, required=True)

    p_sweep = sub.add_parser("sweep", parents=[common], help="run a list of config deltas")
    p_sweep.add_argument("--sweep", required=True, help="sweep file: 'name: section.key=value ...'")

    p_plot = sub.add_parser("plot", parents=[common], help="emit plot data and a figure from a series CSV")
    p_plot.add_argument("--series", required=True)
    p_plot.add_argument("--quantity", required=True)
    p_plot.add_argument("--transform", default="raw", choices=("raw", "loglog", "scaled-kernel"))

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out_dir = Path(args.out)

    try:
        if args.command == "simulate":
            cfg = _require_config(args)
            return cmd_simulate(cfg, out_dir, args.reproducible)
        if args.command == "verify-semigroup":
            cfg = _require_config(args)
            return cmd_verify_semigroup(cfg, out_dir)
        if args.command == "scaling-check":
            cfg = _require_config(args)
            lam = args.lam if args.lam is not None else cfg.scaling_lambda
            return cmd_scaling_check(cfg, lam, args.t_check)
        if args.command == "rate-fit":
            return cmd_rate_fit(
                args.series, args.component, parse_p_label(args.p), (args.t_lo, args.t_hi)
            )
        if args.command == "kernel-distance":
            ps = [parse_p_label(x) for x in (args.p or ["inf"])]
            return cmd_kernel_distance(args.snapshot, ps, args.t_offset)
        if args.command == "gn":
            return cmd_gn(args.j, args.m, _rational(args.p), _rational(args.q), _rational(args.r), args.N)
        if args.command == "sweep":
            if not args.config:
                parser.error("sweep requires --config")
            return cmd_sweep(args.config, args.sweep, out_dir, args.reproducible)
        if args.command == "plot":
            return cmd_plot(args.series, args.quantity, args.transform, out_dir)
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonFiniteInitialData, SnapshotFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpDetected as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (NoContraction, QuadratureUnderResolved) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except analysis.ExponentOutOfRange as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def _require_config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config", "this command needs a configuration file")
    return load_config(args.config)


if __name__ == "__main__":
    raise SystemExit(main())
