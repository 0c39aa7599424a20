"""Series persistence and plot-data emission.

The series CSV uses fixed 17-significant-digit formatting so float64
values round-trip exactly and runs can be diffed byte for byte.  Header
comments carry the grid and physics metadata needed to re-interpret the
columns; the generation timestamp is suppressed in reproducible mode.
"""

from __future__ import annotations

import csv
import datetime
import io
import json
import math

from .analysis import DiagnosticsRecord

FMT = "{:.17g}"


def p_label(p: float) -> str:
    if math.isinf(p):
        return "inf"
    if float(p) == int(p):
        return str(int(p))
    return repr(float(p))


def parse_p_label(label: str) -> float:
    return math.inf if label == "inf" else float(label)


def series_columns(p_list, kernel_distance: bool = True) -> list[str]:
    cols = ["t", "mass_u", "mass_v"]
    for p in p_list:
        cols += [f"lp_u_{p_label(p)}", f"lp_v_{p_label(p)}"]
    cols += ["phi", "h"]
    if kernel_distance:
        for p in p_list:
            cols += [f"kdist_u_{p_label(p)}", f"kdist_v_{p_label(p)}"]
    cols += ["moment_u", "boundary_tail"]
    return cols


def _record_row(rec: DiagnosticsRecord, p_list, kernel_distance: bool) -> list[float]:
    row = [rec.t, rec.mass_u, rec.mass_v]
    for p in p_list:
        row += [rec.lp_norms[("u", p)], rec.lp_norms[("v", p)]]
    row += [rec.phi, rec.h]
    if kernel_distance:
        for p in p_list:
            row += [rec.kernel_dist.get(("u", p), math.nan), rec.kernel_dist.get(("v", p), math.nan)]
    row += [rec.moment_u if rec.moment_u is not None else math.nan, rec.boundary_tail]
    return row


def write_series_csv(
    path,
    records,
    meta: dict,
    p_list,
    kernel_distance: bool = True,
    reproducible: bool = False,
    truncated_reason: str | None = None,
) -> None:
    buf = io.StringIO()
    buf.write("# crossdiff series v1\n")
    meta_items = " ".join(f"{k}={v}" for k, v in sorted(meta.items()))
    buf.write(f"# meta {meta_items}\n")
    if not reproducible:
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
        buf.write(f"# generated {stamp}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(series_columns(p_list, kernel_distance))
    for rec in records:
        writer.writerow(FMT.format(v) for v in _record_row(rec, p_list, kernel_distance))
    if truncated_reason:
        buf.write(f"# truncated {truncated_reason}\n")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def read_series_csv(path):
    """Read a series CSV back into (records, meta).

    meta includes the '# meta' key=value pairs plus 'truncated' when a
    truncation marker row is present.
    """
    meta: dict = {}
    header = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("meta "):
                    for item in body[len("meta ") :].split():
                        k, _, v = item.partition("=")
                        meta[k] = v
                elif body.startswith("truncated"):
                    meta["truncated"] = body[len("truncated") :].strip()
                continue
            cells = next(csv.reader([line]))
            if header is None:
                header = cells
            else:
                rows.append([float(c) for c in cells])
    if header is None:
        raise ValueError(f"no header row in {path}")

    col = {name: i for i, name in enumerate(header)}
    p_list = []
    for name in header:
        if name.startswith("lp_u_"):
            p_list.append(parse_p_label(name[len("lp_u_") :]))
    records = []
    for row in rows:
        lp = {}
        kdist = {}
        for p in p_list:
            lp[("u", p)] = row[col[f"lp_u_{p_label(p)}"]]
            lp[("v", p)] = row[col[f"lp_v_{p_label(p)}"]]
            ku = col.get(f"kdist_u_{p_label(p)}")
            if ku is not None:
                kdist[("u", p)] = row[ku]
                kdist[("v", p)] = row[col[f"kdist_v_{p_label(p)}"]]
        moment = row[col["moment_u"]]
        records.append(
            DiagnosticsRecord(
                t=row[col["t"]],
                mass_u=row[col["mass_u"]],
                mass_v=row[col["mass_v"]],
                lp_norms=lp,
                phi=row[col["phi"]],
                h=row[col["h"]],
                kernel_dist=kdist,
                moment_u=None if math.isnan(moment) else moment,
                boundary_tail=row[col["boundary_tail"]],
            )
        )
    return records, meta


TRANSFORMS = ("raw", "loglog", "scaled-kernel")


def _quantity_value(rec: DiagnosticsRecord, quantity: str) -> float:
    if quantity in ("mass_u", "mass_v", "phi", "h", "boundary_tail"):
        return getattr(rec, quantity)
    if quantity == "moment_u":
        return rec.moment_u if rec.moment_u is not None else math.nan
    for prefix, store in (("lp_", rec.lp_norms), ("kdist_", rec.kernel_dist)):
        if quantity.startswith(prefix):
            comp_p = quantity[len(prefix) :]
            comp, _, plabel = comp_p.partition("_")
            key = (comp, parse_p_label(plabel))
            if comp in ("u", "v") and key in store:
                return store[key]
    raise KeyError(f"unknown quantity {quantity!r}")


def reference_slope(quantity: str, dim: int) -> float | None:
    """Self-similar decay slope for lp_* quantities, None otherwise."""
    if not quantity.startswith("lp_"):
        return None
    plabel = quantity.split("_")[-1]
    p = parse_p_label(plabel)
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    return -(dim / 2.0) * (1.0 - inv_p)


def emit_plot_data(records, quantity: str, transform: str, path, dim: int) -> None:
    """Two-column (x, y) text file with a descriptive comment line.

    The comment names the theoretical reference slope where one applies
    so any plotting tool can overlay it.
    """
    if transform not in TRANSFORMS:
        raise ValueError(f"unknown transform {transform!r}; choose from {TRANSFORMS}")
    values = [(rec.t, _quantity_value(rec, quantity)) for rec in records]
    ref = reference_slope(quantity, dim)
    lines = []
    desc = f"# quantity={quantity} transform={transform}"
    if ref is not None:
        desc += f" reference_slope={FMT.format(ref)}"
        if dim == 1 and quantity.startswith("lp_"):
            p = parse_p_label(quantity.split("_")[-1])
            inv_p = 0.0 if math.isinf(p) else 1.0 / p
            desc += f" guaranteed_slope={FMT.format(-(3.0 / 8.0) * (1.0 - inv_p))}"
    lines.append(desc)
    if transform == "loglog":
        lines.append("# columns: log_t log_value")
        for t, v in values:
            if t > 0 and v > 0:
                lines.append(f"{FMT.format(math.log(t))} {FMT.format(math.log(v))}")
    else:
        lines.append("# columns: t value")
        for t, v in values:
            lines.append(f"{FMT.format(t)} {FMT.format(v)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def json_sanitize(obj):
    """Replace non-finite floats with strings so output stays strict JSON."""
    if isinstance(obj, dict):
        return {k: json_sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_sanitize(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


def write_summary_json(path, summary: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(json_sanitize(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
