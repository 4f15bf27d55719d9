"""Running configured experiments and writing their artifact sets.

Every run emits one CSV per data product plus a JSON manifest recording the
normalized configuration, the library version, the wall-clock time and a
SHA-256 checksum of every written file. Floats are formatted with 17
significant digits so CSV values round-trip to the exact binary doubles the
library produced, and identical configurations yield byte-identical CSVs.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np

from . import __version__
from .analysis import (
    ProbabilityGrid,
    alternate_io_study,
    probability_grid,
    probability_slice,
    trace_homm_curve,
)
from .config import ExperimentConfig
from .contours import extract_contours
from .fock import FockState, output_distribution
from .networks import ChainSpec, ChainTemplate, RingTemplate, compose_chain, star_product
from .scattering import RingParams, port_index, ring_matrix
from . import plots


@dataclass(frozen=True)
class RunResult:
    """What a run produced and how healthy it was."""

    output_dir: Path
    files: Tuple[str, ...]
    manifest_path: Path
    cells_total: int
    cells_failed: int

    @property
    def failure_fraction(self) -> float:
        return self.cells_failed / self.cells_total if self.cells_total else 0.0


def format_value(value) -> str:
    """Fixed, locale-independent cell formatting (17 significant digits)."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def chain_template(cfg: ExperimentConfig) -> ChainTemplate:
    return ChainTemplate(
        rings=tuple(
            RingTemplate(theta_offset=r.theta_offset, gamma=r.gamma, alpha=r.alpha)
            for r in cfg.rings
        ),
        bus_phase=cfg.bus_phase,
    )


def fixed_chain(cfg: ExperimentConfig) -> ChainSpec:
    """Absolute chain for the fixed-device modes (ring taus from the config)."""
    return ChainSpec(
        rings=tuple(
            RingParams(r.tau, cfg.theta + r.theta_offset, r.gamma, r.alpha)
            for r in cfg.rings
        ),
        bus_phase=cfg.bus_phase,
    )


def spectrum_values(cfg: ExperimentConfig, thetas: np.ndarray) -> np.ndarray:
    """|S[out, in]|^2 of the configured chain across a phase axis."""
    first = cfg.rings[0]
    matrices = ring_matrix(first.tau, thetas + first.theta_offset, first.gamma, first.alpha)
    segment = None
    if cfg.bus_phase != 0.0:
        segment = np.exp(1j * cfg.bus_phase) * np.eye(4, dtype=complex)
    for ring in cfg.rings[1:]:
        if segment is not None:
            matrices = star_product(matrices, segment)
        matrices = star_product(
            matrices, ring_matrix(ring.tau, thetas + ring.theta_offset, ring.gamma, ring.alpha)
        )
    p = port_index(cfg.output_ports[0])
    q = port_index(cfg.input_ports[0])
    return np.abs(matrices[:, p, q]) ** 2


def _grid_with_threads(cfg: ExperimentConfig) -> ProbabilityGrid:
    """Evaluate the probability grid, optionally chunked over worker threads.

    Rows are split into contiguous blocks and reassembled by index, so the
    values are bitwise identical for any thread count.
    """
    template = chain_template(cfg)
    tau_axis = cfg.tau_axis.to_array()
    theta_axis = cfg.theta_axis.to_array()
    if cfg.threads <= 1 or theta_axis.size < 2 * cfg.threads:
        return probability_grid(template, cfg.input_ports, cfg.output_ports,
                                tau_axis, theta_axis)
    blocks = np.array_split(np.arange(theta_axis.size), cfg.threads)

    def evaluate(block: np.ndarray) -> np.ndarray:
        sub = probability_grid(template, cfg.input_ports, cfg.output_ports,
                               tau_axis, theta_axis[block])
        return sub.values

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        parts = list(pool.map(evaluate, blocks))
    return ProbabilityGrid(
        tau_axis=tau_axis,
        theta_axis=theta_axis,
        values=np.vstack(parts),
        template=template,
        in_ports=tuple(cfg.input_ports),
        out_ports=tuple(cfg.output_ports),
    )


def _slice_rows(table) -> Iterable[Tuple]:
    return zip(table.tau, table.total, table.detected, table.p11, table.p20, table.p02)


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Execute one configured experiment and write its artifact set."""
    start = time.perf_counter()
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    files: List[str] = []
    figures: List[Tuple[str, Callable]] = []
    cells_total = 0
    cells_failed = 0

    def add_csv(name: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
        write_csv(out_dir / name, header, rows)
        files.append(name)

    def add_figure(name: str, build: Callable) -> None:
        if cfg.plot:
            figures.append((f"{name}.{cfg.plot_format}", build))

    mode = cfg.mode
    if mode == "spectrum":
        thetas = cfg.theta_axis.to_array()
        probs = spectrum_values(cfg, thetas)
        add_csv("spectrum.csv", ("theta", "probability"), zip(thetas, probs))
        add_figure("spectrum", lambda: plots.spectrum_figure(
            thetas, probs, cfg.input_ports[0], cfg.output_ports[0]))

    elif mode == "slice":
        table = probability_slice(chain_template(cfg), cfg.input_ports, cfg.output_ports,
                                  cfg.theta, cfg.tau_axis.to_array())
        add_csv("slice.csv", ("tau", "total", "detected", "p11", "p20", "p02"),
                _slice_rows(table))
        add_figure("slice", lambda: plots.slice_figure(table))

    elif mode in ("grid", "contour"):
        grid = _grid_with_threads(cfg)
        cells_total = grid.values.size
        cells_failed = grid.failed_cells()
        add_csv(
            "grid.csv",
            ("theta", "tau", "p11"),
            (
                (grid.theta_axis[i], grid.tau_axis[j], grid.values[i, j])
                for i in range(grid.theta_axis.size)
                for j in range(grid.tau_axis.size)
            ),
        )
        polylines = extract_contours(grid, cfg.levels)
        if mode == "contour":
            rows: List[Tuple] = []
            for level, polys in zip(cfg.levels, polylines):
                for pid, poly in enumerate(polys):
                    rows.extend((level, pid, pt[1], pt[0]) for pt in poly)
            add_csv("contours.csv", ("level", "polyline", "theta", "tau"), rows)
        curve = trace_homm_curve(chain_template(cfg), grid.theta_axis,
                                 cfg.input_ports, cfg.output_ports,
                                 bracket=(cfg.tau_axis.min, cfg.tau_axis.max))
        overlay = {cfg.levels[0]: polylines[0]}
        add_figure(mode, lambda: plots.grid_figure(grid, overlay, curve))

    elif mode == "homm-curve":
        curve = trace_homm_curve(chain_template(cfg), cfg.theta_axis.to_array(),
                                 cfg.input_ports, cfg.output_ports,
                                 bracket=(cfg.tau_axis.min, cfg.tau_axis.max))
        add_csv("homm_curve.csv", ("theta", "tau", "residual", "converged"),
                zip(curve.theta, curve.tau, curve.residual, curve.converged))
        add_figure("homm_curve", lambda: plots.curve_figure(curve))

    elif mode == "distribution":
        S = compose_chain(fixed_chain(cfg))
        dist = output_distribution(S, FockState.on_ports(cfg.input_ports),
                                   detected_ports=cfg.output_ports)
        states = sorted(dist.entries)
        add_csv("distribution.csv", ("na", "nb", "nc", "nd", "probability"),
                ((*state, dist.entries[state]) for state in states))
        summary = dist.detected
        add_csv("distribution_summary.csv",
                ("total", "detected", "p11", "p20", "p02", "lost"),
                [(dist.total(), summary.total, summary.p11, summary.p20,
                  summary.p02, dist.lost)])
        add_figure("distribution", lambda: plots.distribution_figure(dist))

    elif mode == "alt-io":
        study = alternate_io_study(chain_template(cfg), cfg.gammas, cfg.theta,
                                   cfg.tau_axis.to_array(), cfg.input_ports,
                                   cfg.output_ports)
        add_csv(
            "alt_io.csv",
            ("gamma", "tau", "total", "detected", "p11", "p20", "p02"),
            (
                (gamma, *row)
                for gamma in cfg.gammas
                for row in _slice_rows(study.tables[gamma])
            ),
        )
        add_figure("alt_io", lambda: plots.altio_figure(study))

    else:  # pragma: no cover - modes are validated by the config layer
        raise ValueError(f"unknown mode {mode!r}")

    for name, build in figures:
        plots.save_figure(build(), out_dir / name, cfg.plot_format)
        files.append(name)

    runtime = time.perf_counter() - start
    manifest = {
        "config": cfg.to_mapping(),
        "version": __version__,
        "runtime_seconds": runtime,
        "files": [{"path": name, "sha256": _sha256(out_dir / name)} for name in files],
        "cells": {"total": cells_total, "failed": cells_failed},
    }
    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")

    return RunResult(
        output_dir=out_dir,
        files=tuple(files),
        manifest_path=manifest_path,
        cells_total=cells_total,
        cells_failed=cells_failed,
    )
