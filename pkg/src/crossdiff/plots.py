"""Render diagnostic figures to files (headless matplotlib)."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reporting import _quantity_value, p_label, parse_p_label, reference_slope


def render_quantity_figure(records, quantity: str, transform: str, out_png, dim: int) -> None:
    """One quantity against time, with the reference slope overlaid on log-log axes."""
    ts = np.array([rec.t for rec in records])
    ys = np.array([_quantity_value(rec, quantity) for rec in records])
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    if transform == "loglog":
        keep = (ts > 0) & (ys > 0)
        ax.loglog(ts[keep], ys[keep], "-", lw=1.4, label=quantity)
        ref = reference_slope(quantity, dim)
        if ref is not None and keep.any():
            t_ref = ts[keep]
            anchor = ys[keep][-1]
            ax.loglog(
                t_ref,
                anchor * (t_ref / t_ref[-1]) ** ref,
                "--",
                lw=1.0,
                color="gray",
                label=f"slope {ref:g}",
            )
        ax.set_xlabel("t")
    else:
        ax.plot(ts, ys, "-", lw=1.4, label=quantity)
        ax.set_xlabel("t")
        if transform == "scaled-kernel":
            ax.set_yscale("log")
    ax.set_ylabel(quantity)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def render_overview(records, out_png, dim: int, p_list) -> None:
    """Four-panel run overview: masses, norm decay, energies, kernel distance."""
    ts = np.array([rec.t for rec in records])
    fig, axes = plt.subplots(2, 2, figsize=(9.0, 6.4))

    ax = axes[0, 0]
    ax.plot(ts, [r.mass_u for r in records], label="mass u")
    ax.plot(ts, [r.mass_v for r in records], label="mass v")
    ax.set_ylabel("mass")

    ax = axes[0, 1]
    pos = ts > 0
    for p in p_list:
        vals = np.array([r.lp_norms[("u", p)] for r in records])
        keep = pos & (vals > 0)
        if keep.any():
            ax.loglog(ts[keep], vals[keep], label=f"||u||_{p_label(p)}")
            ref = reference_slope(f"lp_u_{p_label(p)}", dim)
            anchor = vals[keep][-1]
            ax.loglog(ts[keep], anchor * (ts[keep] / ts[keep][-1]) ** ref,
                      "--", lw=0.8, color="gray")
    ax.set_ylabel("norms of u")

    ax = axes[1, 0]
    phi = np.array([r.phi for r in records])
    h = np.array([r.h for r in records])
    if (phi > 0).any():
        ax.semilogy(ts[phi > 0], phi[phi > 0], label="phi")
    if (h > 0).any():
        ax.semilogy(ts[h > 0], h[h > 0], label="h")
    ax.set_ylabel("energy")

    ax = axes[1, 1]
    plotted = False
    for p in p_list:
        key = ("u", p)
        vals = np.array([r.kernel_dist.get(key, math.nan) for r in records])
        keep = pos & np.isfinite(vals) & (vals > 0)
        if keep.any():
            ax.loglog(ts[keep], vals[keep], label=f"kdist u, p={p_label(p)}")
            plotted = True
    if not plotted:
        tails = np.array([r.boundary_tail for r in records])
        keep = tails > 0
        if keep.any():
            ax.semilogy(ts[keep], tails[keep], label="boundary tail")
    ax.set_ylabel("kernel distance")

    for ax in axes.flat:
        ax.set_xlabel("t")
        ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
