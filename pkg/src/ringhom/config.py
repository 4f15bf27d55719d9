"""Experiment configuration: YAML documents, defaults, and validation.

The document is a nested mapping; every key is optional except the ring list.
A minimal experiment therefore looks like::

    chain:
      rings:
        - tau: 0.4142

Unknown keys anywhere in the document are rejected (with their dotted path),
as are out-of-range values, so a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import yaml

from .scattering import PORTS

MODES = ("spectrum", "slice", "grid", "contour", "homm-curve", "distribution", "alt-io")

# Modes that need an absolute per-ring tau (fixed-device modes); the scanned
# modes replace tau with the axis value on every ring.
_FIXED_DEVICE_MODES = ("spectrum", "distribution")
_SINGLE_PORT_MODES = ("spectrum",)

DEFAULT_GAMMAS = (0.001, 0.25, 0.5, 0.75, 0.999)
DEFAULT_LEVELS = (0.001, 0.05)
PLOT_FORMATS = ("svg", "png")


class ConfigError(ValueError):
    """A configuration document failed to parse or validate."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class AxisSpec(NamedTuple):
    """Uniform sampling of one axis."""

    min: float
    max: float
    count: int

    def to_array(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.count)


DEFAULT_TAU_AXIS = AxisSpec(0.005, 0.995, 201)
DEFAULT_THETA_AXIS = AxisSpec(0.0, 2.0 * math.pi, 201)


@dataclass(frozen=True)
class RingConfig:
    """One ring in the chain section.

    ``tau`` is only meaningful for the fixed-device modes (spectrum and
    distribution); scan modes sweep tau over the axis for every ring.
    ``theta_offset`` detunes the ring's round-trip phase from the scanned or
    configured phase.
    """

    tau: Optional[float] = None
    theta_offset: float = 0.0
    gamma: float = 1.0
    alpha: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "grid"
    rings: Tuple[RingConfig, ...] = ()
    bus_phase: float = 0.0
    input_ports: Tuple[str, ...] = ("a", "b")
    output_ports: Tuple[str, ...] = ("a", "b")
    theta: float = math.pi
    tau_axis: AxisSpec = DEFAULT_TAU_AXIS
    theta_axis: AxisSpec = DEFAULT_THETA_AXIS
    levels: Tuple[float, ...] = DEFAULT_LEVELS
    gammas: Tuple[float, ...] = DEFAULT_GAMMAS
    output_dir: str = "out"
    plot: bool = True
    plot_format: str = "svg"
    threads: int = 1

    def to_mapping(self) -> dict:
        """Normalized plain mapping, embeddable in a JSON manifest.

        Feeding the result back through ``config_from_mapping`` reproduces an
        equal ExperimentConfig.
        """
        rings = []
        for r in self.rings:
            entry: dict = {
                "theta_offset": r.theta_offset,
                "gamma": r.gamma,
                "alpha": r.alpha,
            }
            if r.tau is not None:
                entry["tau"] = r.tau
            rings.append(entry)
        return {
            "mode": self.mode,
            "chain": {"bus_phase": self.bus_phase, "rings": rings},
            "ports": {
                "input": list(self.input_ports),
                "output": list(self.output_ports),
            },
            "theta": self.theta,
            "axes": {
                "tau": {"min": self.tau_axis.min, "max": self.tau_axis.max,
                        "count": self.tau_axis.count},
                "theta": {"min": self.theta_axis.min, "max": self.theta_axis.max,
                          "count": self.theta_axis.count},
            },
            "levels": list(self.levels),
            "gammas": list(self.gammas),
            "output": {
                "directory": self.output_dir,
                "plot": self.plot,
                "plot_format": self.plot_format,
            },
            "threads": self.threads,
        }


def _require_mapping(value: Any, key: str) -> Mapping:
    if value is None:
        return {}
    if not isinstance(value, Mapping):
        raise ConfigError(f"expected a mapping, got {type(value).__name__}", key)
    return value


def _reject_unknown(mapping: Mapping, allowed: Sequence[str], key_prefix: str) -> None:
    for k in mapping:
        if k not in allowed:
            dotted = f"{key_prefix}.{k}" if key_prefix else str(k)
            raise ConfigError("unknown key", dotted)


def _real(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", key)
    out = float(value)
    if not math.isfinite(out):
        raise ConfigError(f"expected a finite number, got {value!r}", key)
    return out


def _in_range(value: float, lo: float, hi: float, key: str, lo_open: bool = False) -> float:
    bad = value <= lo if lo_open else value < lo
    if bad or value > hi:
        lohi = f"({lo}, {hi}]" if lo_open else f"[{lo}, {hi}]"
        raise ConfigError(f"value {value} outside {lohi}", key)
    return value


def _ports(value: Any, key: str) -> Tuple[str, ...]:
    if isinstance(value, str):
        letters = list(value)
    elif isinstance(value, Sequence):
        letters = [str(v) for v in value]
    else:
        raise ConfigError(f"expected port letters, got {value!r}", key)
    letters = [p.lower() for p in letters]
    for p in letters:
        if p not in PORTS:
            raise ConfigError(f"unknown port {p!r}; expected one of {PORTS}", key)
    if len(letters) not in (1, 2):
        raise ConfigError("expected one or two ports", key)
    if len(letters) == 2 and letters[0] == letters[1]:
        raise ConfigError("ports in a pair must be distinct", key)
    return tuple(letters)


def _axis(value: Any, key: str, default: AxisSpec) -> AxisSpec:
    mapping = _require_mapping(value, key)
    _reject_unknown(mapping, ("min", "max", "count"), key)
    lo = _real(mapping.get("min", default.min), f"{key}.min")
    hi = _real(mapping.get("max", default.max), f"{key}.max")
    count = mapping.get("count", default.count)
    if isinstance(count, bool) or not isinstance(count, int):
        raise ConfigError(f"expected an integer, got {count!r}", f"{key}.count")
    if count < 2:
        raise ConfigError("axis count must be >= 2", f"{key}.count")
    if not lo < hi:
        raise ConfigError(f"axis min {lo} must be below max {hi}", key)
    return AxisSpec(lo, hi, count)


def _ring(value: Any, key: str) -> RingConfig:
    mapping = _require_mapping(value, key)
    _reject_unknown(mapping, ("tau", "theta_offset", "gamma", "alpha"), key)
    tau = mapping.get("tau")
    if tau is not None:
        tau = _in_range(_real(tau, f"{key}.tau"), 0.0, 1.0, f"{key}.tau")
    gamma = _in_range(_real(mapping.get("gamma", 1.0), f"{key}.gamma"), 0.0, 1.0, f"{key}.gamma")
    alpha = _in_range(_real(mapping.get("alpha", 1.0), f"{key}.alpha"), 0.0, 1.0,
                      f"{key}.alpha", lo_open=True)
    offset = _real(mapping.get("theta_offset", 0.0), f"{key}.theta_offset")
    return RingConfig(tau=tau, theta_offset=offset, gamma=gamma, alpha=alpha)


def config_from_mapping(document: Mapping) -> ExperimentConfig:
    """Validate a plain mapping into an ExperimentConfig, applying defaults."""
    doc = _require_mapping(document, "document")
    _reject_unknown(
        doc,
        ("mode", "chain", "ports", "theta", "axes", "levels", "gammas", "output", "threads"),
        "",
    )

    mode = doc.get("mode", "grid")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}", "mode")

    chain = _require_mapping(doc.get("chain"), "chain")
    _reject_unknown(chain, ("bus_phase", "rings"), "chain")
    if "rings" not in chain or chain.get("rings") in (None, []):
        raise ConfigError("missing ring list", "chain.rings")
    rings_value = chain["rings"]
    if not isinstance(rings_value, Sequence) or isinstance(rings_value, (str, bytes)):
        raise ConfigError("expected a list of rings", "chain.rings")
    rings = tuple(_ring(r, f"chain.rings[{i}]") for i, r in enumerate(rings_value))
    bus_phase = _real(chain.get("bus_phase", 0.0), "chain.bus_phase")

    ports = _require_mapping(doc.get("ports"), "ports")
    _reject_unknown(ports, ("input", "output"), "ports")
    input_ports = _ports(ports.get("input", ["a", "b"]), "ports.input")
    output_ports = _ports(ports.get("output", ["a", "b"]), "ports.output")
    expect_single = mode in _SINGLE_PORT_MODES
    if "input" not in ports and expect_single:
        input_ports = ("a",)
    if "output" not in ports and expect_single:
        output_ports = ("a",)
    want = 1 if expect_single else 2
    for name, got in (("ports.input", input_ports), ("ports.output", output_ports)):
        if len(got) != want:
            raise ConfigError(
                f"mode {mode!r} takes {'a single port' if want == 1 else 'a port pair'}", name
            )

    theta = _real(doc.get("theta", math.pi), "theta")

    axes = _require_mapping(doc.get("axes"), "axes")
    _reject_unknown(axes, ("tau", "theta"), "axes")
    tau_axis = _axis(axes.get("tau"), "axes.tau", DEFAULT_TAU_AXIS)
    theta_axis = _axis(axes.get("theta"), "axes.theta", DEFAULT_THETA_AXIS)
    _in_range(tau_axis.min, 0.0, 1.0, "axes.tau.min")
    _in_range(tau_axis.max, 0.0, 1.0, "axes.tau.max")

    levels_value = doc.get("levels", list(DEFAULT_LEVELS))
    if not isinstance(levels_value, Sequence) or isinstance(levels_value, (str, bytes)):
        raise ConfigError("expected a list of levels", "levels")
    levels = tuple(_real(v, f"levels[{i}]") for i, v in enumerate(levels_value))
    if not levels:
        raise ConfigError("at least one level required", "levels")
    for i, lv in enumerate(levels):
        if not 0.0 < lv < 1.0:
            raise ConfigError(f"level {lv} outside (0, 1)", f"levels[{i}]")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ConfigError("levels must be sorted ascending", "levels")

    gammas_value = doc.get("gammas", list(DEFAULT_GAMMAS))
    if not isinstance(gammas_value, Sequence) or isinstance(gammas_value, (str, bytes)):
        raise ConfigError("expected a list of gamma values", "gammas")
    gammas = tuple(
        _in_range(_real(v, f"gammas[{i}]"), 0.0, 1.0, f"gammas[{i}]")
        for i, v in enumerate(gammas_value)
    )
    if not gammas:
        raise ConfigError("at least one gamma required", "gammas")

    output = _require_mapping(doc.get("output"), "output")
    _reject_unknown(output, ("directory", "plot", "plot_format"), "output")
    output_dir = output.get("directory", "out")
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError("expected a directory path", "output.directory")
    plot = output.get("plot", True)
    if not isinstance(plot, bool):
        raise ConfigError(f"expected a boolean, got {plot!r}", "output.plot")
    plot_format = output.get("plot_format", "svg")
    if plot_format not in PLOT_FORMATS:
        raise ConfigError(f"expected one of {PLOT_FORMATS}, got {plot_format!r}",
                          "output.plot_format")

    threads = doc.get("threads", 1)
    if isinstance(threads, bool) or not isinstance(threads, int) or threads < 1:
        raise ConfigError(f"expected a positive integer, got {threads!r}", "threads")

    if mode in _FIXED_DEVICE_MODES:
        for i, r in enumerate(rings):
            if r.tau is None:
                raise ConfigError(
                    f"mode {mode!r} needs an absolute tau on every ring", f"chain.rings[{i}].tau"
                )

    return ExperimentConfig(
        mode=mode,
        rings=rings,
        bus_phase=bus_phase,
        input_ports=input_ports,
        output_ports=output_ports,
        theta=theta,
        tau_axis=tau_axis,
        theta_axis=theta_axis,
        levels=levels,
        gammas=gammas,
        output_dir=output_dir,
        plot=plot,
        plot_format=plot_format,
        threads=threads,
    )


def parse_document(text: str) -> Mapping:
    """YAML-parse a config document without semantic validation."""
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "document"
        raise ConfigError(f"invalid YAML ({where}): {exc}") from exc
    if document is None:
        document = {}
    if not isinstance(document, Mapping):
        raise ConfigError("top level of the config must be a mapping")
    return document


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a YAML configuration document."""
    return config_from_mapping(parse_document(text))


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def load_document(path) -> Mapping:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_document(fh.read())
