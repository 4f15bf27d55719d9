"""Matplotlib figure builders for the report path.

Figures follow the conventions of the data they render: slice plots draw the
all-output total in black, the detected-pair total in blue, the coincidence in
orange and the bunched components in gray/dashed black; probability maps use
five blue bands (darkest below 0.05), a red isoline at the lowest requested
level and the manifold curve in black. SVG output is made byte-reproducible
via a fixed hash salt and stripped date metadata.
"""

from __future__ import annotations

import math
from typing import Dict, List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

matplotlib.rcParams["svg.hashsalt"] = "ringhom"

BAND_EDGES = (0.0, 0.05, 0.2, 0.45, 0.7, 1.0)
BAND_COLORS = ("#08306b", "#2171b5", "#6baed6", "#c6dbef", "#f7fbff")

_PI_TICKS = (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi, 2.0 * math.pi)
_PI_LABELS = ("0", "π/2", "π", "3π/2", "2π")


def _theta_ticks(ax, lo: float, hi: float, axis: str = "y") -> None:
    ticks = [t for t in _PI_TICKS if lo - 1e-9 <= t <= hi + 1e-9]
    labels = [_PI_LABELS[_PI_TICKS.index(t)] for t in ticks]
    if len(ticks) >= 2:
        if axis == "y":
            ax.set_yticks(ticks, labels)
        else:
            ax.set_xticks(ticks, labels)


def save_figure(fig, path, fmt: str = "svg") -> None:
    """Write a figure to disk; SVG output carries no timestamp metadata."""
    kwargs = {"format": fmt}
    if fmt == "svg":
        kwargs["metadata"] = {"Date": None}
    fig.savefig(path, **kwargs)
    plt.close(fig)


def spectrum_figure(thetas: np.ndarray, probabilities: np.ndarray,
                    in_port: str, out_port: str):
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.plot(thetas, probabilities, color="tab:blue")
    ax.set_xlabel("round-trip phase θ (rad)")
    ax.set_ylabel(f"|{out_port} ← {in_port}| transmission probability")
    ax.set_ylim(-0.02, 1.02)
    _theta_ticks(ax, float(thetas.min()), float(thetas.max()), axis="x")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def slice_figure(table) -> "plt.Figure":
    pair = "".join(table.out_ports).upper()
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.plot(table.tau, table.total, color="black", label="all outputs")
    ax.plot(table.tau, table.detected, color="tab:blue", label=f"any output on {pair}")
    ax.plot(table.tau, table.p11, color="tab:orange", label="{1,1}")
    ax.plot(table.tau, table.p20, color="gray", label="{2,0}")
    ax.plot(table.tau, table.p02, color="black", linestyle="--", label="{0,2}")
    ax.set_xlabel("coupling τ")
    ax.set_ylabel("probability")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def grid_figure(grid, level_polylines: Optional[Dict[float, List[np.ndarray]]] = None,
                homm_curve=None):
    """Filled probability map with isolines and the manifold overlay."""
    fig, ax = plt.subplots(figsize=(5.6, 4.6))
    filled = ax.contourf(grid.tau_axis, grid.theta_axis, grid.values,
                         levels=BAND_EDGES, colors=BAND_COLORS)
    fig.colorbar(filled, ax=ax, label="coincidence probability")
    if level_polylines:
        for level in sorted(level_polylines):
            for poly in level_polylines[level]:
                ax.plot(poly[:, 0], poly[:, 1], color="red", linewidth=1.0)
    if homm_curve is not None:
        mask = homm_curve.converged
        ax.plot(homm_curve.tau[mask], homm_curve.theta[mask],
                color="black", linewidth=1.2)
    ax.set_xlabel("coupling τ")
    ax.set_ylabel("round-trip phase θ")
    _theta_ticks(ax, float(grid.theta_axis.min()), float(grid.theta_axis.max()))
    fig.tight_layout()
    return fig


def curve_figure(curve):
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    mask = curve.converged
    ax.plot(curve.theta[mask], curve.tau[mask], color="black")
    if np.any(~mask):
        ax.plot(curve.theta[~mask], curve.tau[~mask], linestyle="none",
                marker="x", color="red", markersize=3, label="no zero found")
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("round-trip phase θ")
    ax.set_ylabel("manifold coupling τ(θ)")
    _theta_ticks(ax, float(curve.theta.min()), float(curve.theta.max()), axis="x")
    ax.set_ylim(0, 1)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def distribution_figure(dist):
    states = sorted(dist.entries)
    labels = ["|" + ",".join(str(n) for n in s) + "⟩" for s in states]
    probs = [dist.entries[s] for s in states]
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.bar(range(len(states)), probs, color="tab:blue")
    if dist.lost > 0:
        ax.bar([len(states)], [dist.lost], color="lightgray")
        labels.append("lost")
    ax.set_xticks(range(len(labels)), labels, rotation=60, fontsize=7)
    ax.set_ylabel("probability")
    fig.tight_layout()
    return fig


def altio_figure(study):
    fig, (left, right) = plt.subplots(1, 2, figsize=(10.0, 4.0))
    for gamma in sorted(study.tables):
        table = study.tables[gamma]
        for ax in (left, right):
            ax.plot(table.tau, table.p11, label=f"γ={gamma:g}")
    for ax in (left, right):
        ax.set_xlabel("coupling τ")
        ax.set_ylabel("coincidence probability")
        ax.grid(True, alpha=0.3)
    right.set_ylim(0.0, 0.05)
    left.set_ylim(-0.02, 1.02)
    left.legend(loc="best", fontsize=8)
    right.set_title("low-probability zoom", fontsize=9)
    fig.tight_layout()
    return fig
