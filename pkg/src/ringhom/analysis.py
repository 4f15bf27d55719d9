"""Locating and characterizing the Hong-Ou-Mandel manifold (HOMM).

The HOMM is the set of device parameters where the two-photon coincidence
probability vanishes exactly. A vanishing coincidence alone is trivial when no
photons reach the detected pair at all, so every root search here also demands
a minimum detected-pair probability (``DETECTION_FLOOR``) at the minimizer.

Coincidence probabilities are non-negative with quadratic zeros, so roots are
located by golden-section minimization seeded from a coarse scan rather than
by sign-change bracketing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .fock import FockState, output_distribution, pair_probabilities
from .networks import ChainTemplate, compose_chain
from .scattering import PortLike, port_index

TAU_MIN = 0.005
TAU_MAX = 0.995
GRID_POINTS = 201
DEFAULT_LEVELS = (0.001, 0.05)
RESIDUAL_TOL = 1e-10
DETECTION_FLOOR = 1e-3
TAU_TOL = 1e-8
COARSE_DIP_THRESHOLD = 1e-4

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

PortPair = Tuple[PortLike, PortLike]


def default_tau_axis(count: int = GRID_POINTS) -> np.ndarray:
    """Coupling axis, pulled in from 0 and 1 to dodge the degenerate devices."""
    return np.linspace(TAU_MIN, TAU_MAX, count)


def default_theta_axis(count: int = GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, 2.0 * np.pi, count)


def _check_pair(pair: PortPair, name: str) -> Tuple[int, int]:
    i, j = (port_index(p) for p in pair)
    if i == j:
        raise ValueError(f"{name} must contain two distinct ports")
    return i, j


def _check_axis(axis, name: str) -> np.ndarray:
    arr = np.asarray(axis, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D sequence")
    if arr.size > 1 and not np.all(np.diff(arr) > 0):
        raise ValueError(f"{name} must be strictly increasing")
    return arr


@dataclass(frozen=True, eq=False)
class ProbabilityGrid:
    """Coincidence probability sampled over a (theta, tau) rectangle.

    ``values[i, j]`` is the probability at (theta_axis[i], tau_axis[j]);
    cells whose solve failed hold NaN. The generating chain template and port
    selection ride along as metadata.
    """

    tau_axis: np.ndarray
    theta_axis: np.ndarray
    values: np.ndarray
    template: ChainTemplate
    in_ports: Tuple[str, str]
    out_ports: Tuple[str, str]

    def __post_init__(self) -> None:
        if self.values.shape != (self.theta_axis.size, self.tau_axis.size):
            raise ValueError("grid shape does not match the axes")

    def failed_cells(self) -> int:
        return int(np.count_nonzero(~np.isfinite(self.values)))


@dataclass(frozen=True, eq=False)
class SliceTable:
    """The five probability curves of a fixed-phase slice, per tau sample.

    total:     probability over all outputs on all four ports (unity when
               lossless).
    detected:  probability that both photons exit on the detected pair.
    p11/p20/p02: the coincidence and bunched components of ``detected``.
    """

    theta: float
    tau: np.ndarray
    total: np.ndarray
    detected: np.ndarray
    p11: np.ndarray
    p20: np.ndarray
    p02: np.ndarray
    in_ports: Tuple[str, str]
    out_ports: Tuple[str, str]

    def coincidence_dips(self, threshold: float = 1e-6) -> np.ndarray:
        """tau samples where the coincidence probability is below threshold."""
        return self.tau[self.p11 < threshold]


@dataclass(frozen=True)
class HommRoot:
    """One candidate zero of the coincidence probability at fixed phase."""

    tau: float
    residual: float
    detected: float
    converged: bool


@dataclass(frozen=True, eq=False)
class HommCurve:
    """Sampled manifold curve tau(theta) with per-point convergence flags."""

    theta: np.ndarray
    tau: np.ndarray
    residual: np.ndarray
    detected: np.ndarray
    converged: np.ndarray

    def __post_init__(self) -> None:
        if self.theta.size > 1 and not np.all(np.diff(self.theta) > 0):
            raise ValueError("curve theta values must be strictly increasing")

    def converged_theta_span(self) -> float:
        """Width of the theta range over which the root converged."""
        hit = self.theta[self.converged]
        return float(hit[-1] - hit[0]) if hit.size else 0.0


def golden_section_minimize(f, lo: float, hi: float, tol: float = TAU_TOL):
    """Golden-section minimum of a unimodal scalar function on [lo, hi]."""
    if not lo < hi:
        raise ValueError(f"empty bracket ({lo}, {hi})")
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _pair_curves(template: ChainTemplate, taus, theta, in_idx, out_idx):
    matrices = template.matrix(np.asarray(taus, dtype=float), theta)
    p11, p20, p02 = pair_probabilities(matrices, in_idx, out_idx)
    return p11, p11 + p20 + p02


def probability_grid(
    template: ChainTemplate,
    in_ports: PortPair = ("a", "b"),
    out_ports: PortPair = ("a", "b"),
    tau_axis=None,
    theta_axis=None,
) -> ProbabilityGrid:
    """Coincidence probability over the full (tau, theta) rectangle.

    Every cell is an independent pure evaluation; failed solves are recorded
    as NaN values rather than aborting the grid.
    """
    in_idx = _check_pair(in_ports, "in_ports")
    out_idx = _check_pair(out_ports, "out_ports")
    tau_axis = default_tau_axis() if tau_axis is None else _check_axis(tau_axis, "tau_axis")
    theta_axis = default_theta_axis() if theta_axis is None else _check_axis(theta_axis, "theta_axis")
    tt, th = np.meshgrid(tau_axis, theta_axis)  # both (n_theta, n_tau)
    matrices = template.matrix(tt, th)
    p11, _, _ = pair_probabilities(matrices, in_idx, out_idx)
    return ProbabilityGrid(
        tau_axis=tau_axis,
        theta_axis=theta_axis,
        values=p11,
        template=template,
        in_ports=tuple(in_ports),
        out_ports=tuple(out_ports),
    )


def probability_slice(
    template: ChainTemplate,
    in_ports: PortPair = ("a", "b"),
    out_ports: PortPair = ("a", "b"),
    theta: float = math.pi,
    tau_axis=None,
) -> SliceTable:
    """The five slice curves at fixed phase, from the full output distribution."""
    _check_pair(in_ports, "in_ports")
    _check_pair(out_ports, "out_ports")
    tau_axis = default_tau_axis() if tau_axis is None else _check_axis(tau_axis, "tau_axis")
    input_state = FockState.on_ports(in_ports)
    total = np.empty(tau_axis.size)
    detected = np.empty(tau_axis.size)
    p11 = np.empty(tau_axis.size)
    p20 = np.empty(tau_axis.size)
    p02 = np.empty(tau_axis.size)
    for k, tau in enumerate(tau_axis):
        S = compose_chain(template.at(float(tau), float(theta)))
        dist = output_distribution(S, input_state, detected_ports=out_ports)
        total[k] = dist.total()
        detected[k] = dist.detected.total
        p11[k] = dist.detected.p11
        p20[k] = dist.detected.p20
        p02[k] = dist.detected.p02
    return SliceTable(
        theta=float(theta),
        tau=tau_axis,
        total=total,
        detected=detected,
        p11=p11,
        p20=p20,
        p02=p02,
        in_ports=tuple(in_ports),
        out_ports=tuple(out_ports),
    )


def _refine_root(template, theta, in_idx, out_idx, lo, hi) -> HommRoot:
    def objective(tau: float) -> float:
        p11, _ = _pair_curves(template, tau, theta, in_idx, out_idx)
        return float(p11)

    tau, residual = golden_section_minimize(objective, lo, hi)
    p11, blue = _pair_curves(template, tau, theta, in_idx, out_idx)
    converged = bool(residual < RESIDUAL_TOL and blue > DETECTION_FLOOR)
    return HommRoot(tau=float(tau), residual=float(residual),
                    detected=float(blue), converged=converged)


def find_homm_roots(
    template: ChainTemplate,
    theta: float,
    in_ports: PortPair = ("a", "b"),
    out_ports: PortPair = ("a", "b"),
    bracket: Tuple[float, float] = (TAU_MIN, TAU_MAX),
    coarse_points: int = GRID_POINTS,
) -> List[HommRoot]:
    """All candidate coincidence dips at one phase, ordered by tau.

    Candidates are interior local minima of a coarse scan restricted to the
    region where the detected-pair probability clears the non-triviality
    floor; each is refined independently by golden-section search. Zeros in
    regions where (almost) nothing reaches the detectors are deliberately not
    candidates: they do not witness two-photon interference.
    """
    lo, hi = bracket
    if not (0.0 <= lo < hi <= 1.0):
        raise ValueError(f"bracket must satisfy 0 <= lo < hi <= 1, got {bracket}")
    in_idx = _check_pair(in_ports, "in_ports")
    out_idx = _check_pair(out_ports, "out_ports")
    taus = np.linspace(lo, hi, coarse_points)
    p11, blue = _pair_curves(template, taus, theta, in_idx, out_idx)
    detectable = blue > DETECTION_FLOOR

    roots: List[HommRoot] = []
    for i in range(1, taus.size - 1):
        if not detectable[i]:
            continue
        if p11[i] <= p11[i - 1] and p11[i] <= p11[i + 1]:
            roots.append(_refine_root(template, theta, in_idx, out_idx,
                                      taus[i - 1], taus[i + 1]))
    roots.sort(key=lambda r: r.tau)
    return roots


def find_homm_tau(
    template: ChainTemplate,
    theta: float,
    in_ports: PortPair = ("a", "b"),
    out_ports: PortPair = ("a", "b"),
    bracket: Tuple[float, float] = (TAU_MIN, TAU_MAX),
    coarse_points: int = GRID_POINTS,
) -> HommRoot:
    """Best coincidence zero at one phase, or the deepest non-trivial minimum.

    A point only counts as converged when the refined probability is below
    RESIDUAL_TOL and photons actually reach the detected pair (probability
    above DETECTION_FLOOR) there. When no interior dip exists the constrained
    minimum over the detectable region is returned with converged=False.
    """
    roots = find_homm_roots(template, theta, in_ports, out_ports, bracket, coarse_points)
    converged = [r for r in roots if r.converged]
    if converged:
        return min(converged, key=lambda r: (r.residual, r.tau))
    if roots:
        return min(roots, key=lambda r: (r.residual, r.tau))

    # No interior dip: report the constrained minimum over the detectable
    # region (or, failing that, the global minimum) without convergence.
    lo, hi = bracket
    in_idx = _check_pair(in_ports, "in_ports")
    out_idx = _check_pair(out_ports, "out_ports")
    taus = np.linspace(lo, hi, coarse_points)
    p11, blue = _pair_curves(template, taus, theta, in_idx, out_idx)
    mask = blue > DETECTION_FLOOR
    pool = np.where(mask)[0] if mask.any() else np.arange(taus.size)
    i = pool[int(np.argmin(p11[pool]))]
    lo_i = taus[max(i - 1, 0)]
    hi_i = taus[min(i + 1, taus.size - 1)]
    if not lo_i < hi_i:
        p, b = _pair_curves(template, taus[i], theta, in_idx, out_idx)
        return HommRoot(tau=float(taus[i]), residual=float(p), detected=float(b), converged=False)
    root = _refine_root(template, theta, in_idx, out_idx, lo_i, hi_i)
    if root.detected <= DETECTION_FLOOR:
        root = HommRoot(root.tau, root.residual, root.detected, False)
    return root


def trace_homm_curve(
    template: ChainTemplate,
    theta_axis=None,
    in_ports: PortPair = ("a", "b"),
    out_ports: PortPair = ("a", "b"),
    bracket: Tuple[float, float] = (TAU_MIN, TAU_MAX),
) -> HommCurve:
    """Follow the manifold curve tau(theta) across a phase axis.

    Each phase is solved with a bracket warm-started around the previous root;
    on failure the full bracket is rescanned. Phases without a converged root
    stay in the curve with converged=False, marking where the manifold ends.
    """
    theta_axis = default_theta_axis() if theta_axis is None else _check_axis(theta_axis, "theta_axis")
    warm_halfwidth = 0.08
    prev: Optional[HommRoot] = None
    rows: List[HommRoot] = []
    for theta in theta_axis:
        root: Optional[HommRoot] = None
        if prev is not None and prev.converged:
            lo = max(bracket[0], prev.tau - warm_halfwidth)
            hi = min(bracket[1], prev.tau + warm_halfwidth)
            if lo < hi:
                candidate = find_homm_tau(template, float(theta), in_ports, out_ports,
                                          (lo, hi), coarse_points=41)
                if candidate.converged:
                    root = candidate
        if root is None:
            root = find_homm_tau(template, float(theta), in_ports, out_ports, bracket)
        rows.append(root)
        prev = root
    return HommCurve(
        theta=theta_axis,
        tau=np.array([r.tau for r in rows]),
        residual=np.array([r.residual for r in rows]),
        detected=np.array([r.detected for r in rows]),
        converged=np.array([r.converged for r in rows], dtype=bool),
    )


_ALT_IO_COMBOS = (
    (frozenset("ab"), frozenset("cd")),
    (frozenset("ad"), frozenset("ad")),
    (frozenset("ab"), frozenset("ab")),
    (frozenset("cd"), frozenset("cd")),
)


@dataclass(frozen=True)
class AltIoStudy:
    """Per-backscattering-level slice tables for one port combination."""

    theta: float
    in_ports: Tuple[str, str]
    out_ports: Tuple[str, str]
    tables: Dict[float, SliceTable] = field(default_factory=dict)

    def dip_taus(self, gamma: float, threshold: float = 1e-6) -> np.ndarray:
        return self.tables[gamma].coincidence_dips(threshold)


def alternate_io_study(
    template: ChainTemplate,
    gammas: Sequence[float],
    theta: float = math.pi,
    tau_axis=None,
    in_ports: PortPair = ("a", "b"),
    out_ports: PortPair = ("c", "d"),
) -> AltIoStudy:
    """Slice curves for a sweep of backscattering levels on alternate ports.

    The sweep replaces every ring's gamma; supported port selections are the
    forward pair, the backscattered pair, and the two mixed-direction pairs.
    """
    combo = (frozenset(str(p).lower() for p in in_ports),
             frozenset(str(p).lower() for p in out_ports))
    if combo not in _ALT_IO_COMBOS:
        raise ValueError(
            f"unsupported port combination {in_ports} -> {out_ports}; "
            "expected one of ab->cd, ad->ad, ab->ab, cd->cd"
        )
    gammas = tuple(float(g) for g in gammas)
    if not gammas:
        raise ValueError("gamma sweep must be non-empty")
    tables = {
        g: probability_slice(template.with_gamma(g), in_ports, out_ports, theta, tau_axis)
        for g in gammas
    }
    return AltIoStudy(theta=float(theta), in_ports=tuple(in_ports),
                      out_ports=tuple(out_ports), tables=tables)
