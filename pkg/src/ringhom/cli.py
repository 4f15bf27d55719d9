"""Command-line interface: one subcommand per experiment mode.

Each subcommand accepts ``--config <path>`` plus flag overrides for every
scalar; flags win over the document. Exit codes: 0 success, 1 runtime or I/O
failure (including grids with more than 0.1% failed cells), 2 bad usage or
configuration.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .config import (
    ConfigError,
    ExperimentConfig,
    MODES,
    PLOT_FORMATS,
    config_from_mapping,
    load_document,
)
from .experiments import run_experiment

FAILURE_BUDGET = 0.001  # tolerated fraction of failed grid cells


def _axis_spec(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"expected MIN:MAX:COUNT, got {text!r}"
        )
    try:
        return {"min": float(parts[0]), "max": float(parts[1]), "count": int(parts[2])}
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringhom",
        description=(
            "Simulate two-photon interference in backscattering double-bus "
            "microring resonators and write CSV data, figures and a manifest."
        ),
    )
    sub = parser.add_subparsers(dest="mode", required=True, metavar="mode")
    for mode in MODES:
        p = sub.add_parser(mode, help=f"run a {mode} experiment")
        p.add_argument("--config", metavar="PATH", help="YAML experiment document")
        p.add_argument("--output", metavar="DIR", help="output directory")
        p.add_argument("--rings", type=int, metavar="N",
                       help="build N identical rings (replaces the config ring list)")
        p.add_argument("--tau", type=float, help="absolute ring coupling (all rings)")
        p.add_argument("--gamma", type=float, help="backscattering transmission (all rings)")
        p.add_argument("--alpha", type=float, help="round-trip amplitude retention (all rings)")
        p.add_argument("--theta-offsets", type=_float_list, metavar="X,Y,...",
                       help="per-ring phase offsets (sets the ring count)")
        p.add_argument("--bus-phase", type=float, help="phase per inter-ring bus segment")
        p.add_argument("--theta", type=float, help="fixed phase for slice-style modes")
        p.add_argument("--ports-in", metavar="PORTS", help="input ports, e.g. ab or a")
        p.add_argument("--ports-out", metavar="PORTS", help="output ports, e.g. ab or a")
        p.add_argument("--tau-axis", type=_axis_spec, metavar="MIN:MAX:COUNT")
        p.add_argument("--theta-axis", type=_axis_spec, metavar="MIN:MAX:COUNT")
        p.add_argument("--levels", type=_float_list, metavar="L1,L2,...")
        p.add_argument("--gammas", type=_float_list, metavar="G1,G2,...",
                       help="backscattering sweep for alt-io")
        p.add_argument("--threads", type=int, help="worker thread cap for grids")
        p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
        p.add_argument("--plot-format", choices=PLOT_FORMATS)
    return parser


def _apply_overrides(document: dict, args: argparse.Namespace) -> dict:
    document = dict(document)
    document["mode"] = args.mode

    chain = dict(document.get("chain") or {})
    rings = [dict(r) for r in (chain.get("rings") or [])]
    if args.theta_offsets is not None:
        rings = [{"theta_offset": off} for off in args.theta_offsets]
    elif args.rings is not None:
        rings = [{} for _ in range(args.rings)]
    elif not rings:
        rings = [{}]
    for name in ("tau", "gamma", "alpha"):
        value = getattr(args, name)
        if value is not None:
            for ring in rings:
                ring[name] = value
    chain["rings"] = rings
    if args.bus_phase is not None:
        chain["bus_phase"] = args.bus_phase
    document["chain"] = chain

    ports = dict(document.get("ports") or {})
    if args.ports_in is not None:
        ports["input"] = args.ports_in
    if args.ports_out is not None:
        ports["output"] = args.ports_out
    if ports:
        document["ports"] = ports

    if args.theta is not None:
        document["theta"] = args.theta
    axes = dict(document.get("axes") or {})
    if args.tau_axis is not None:
        axes["tau"] = args.tau_axis
    if args.theta_axis is not None:
        axes["theta"] = args.theta_axis
    if axes:
        document["axes"] = axes
    if args.levels is not None:
        document["levels"] = args.levels
    if args.gammas is not None:
        document["gammas"] = args.gammas
    if args.threads is not None:
        document["threads"] = args.threads

    output = dict(document.get("output") or {})
    if args.output is not None:
        output["directory"] = args.output
    if args.no_plot:
        output["plot"] = False
    if args.plot_format is not None:
        output["plot_format"] = args.plot_format
    if output:
        document["output"] = output
    return document


def _load_document(args: argparse.Namespace) -> dict:
    if args.config is None:
        return {}
    return dict(load_document(args.config))


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        document = _load_document(args)
        document = _apply_overrides(document, args)
        cfg: ExperimentConfig = config_from_mapping(document)
    except ConfigError as exc:
        print(f"ringhom: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ringhom: cannot read config: {exc}", file=sys.stderr)
        return 2

    try:
        result = run_experiment(cfg)
    except OSError as exc:
        print(f"ringhom: I/O failure: {exc}", file=sys.stderr)
        return 1

    for name in result.files:
        print(result.output_dir / name)
    print(result.manifest_path)
    if result.failure_fraction > FAILURE_BUDGET:
        print(
            f"ringhom: {result.cells_failed} of {result.cells_total} grid cells "
            "failed to solve; see the manifest",
            file=sys.stderr,
        )
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
