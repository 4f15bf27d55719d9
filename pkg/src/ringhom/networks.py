"""Composition of rings sharing one pair of bus waveguides.

Rings sit side by side along the buses; at the interface between two
neighbours the bottom bus carries a right-moving (a) and a left-moving (c)
amplitude and the top bus a left-moving (b) and a right-moving (d) one. The
right-moving outputs of the left device feed the right device and vice versa,
which is a Redheffer star product: the internal connection is solved exactly
through a 2x2 feedback inversion, so multiple reflections between neighbours
(e.g. light dropped by the right ring re-entering the left one) are summed to
all orders. The star product is used instead of transfer-matrix products
because the transfer conversion is singular where transmission vanishes
(tau -> 0).

``chain_oracle`` solves the whole chain's boundary conditions in one linear
system without any pairwise composition; it exists as an independent
verification path and is only practical for short chains.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .scattering import (
    RingParams,
    ScatteringMatrix,
    _interior_system,
    ring_matrix,
)

# Port indices of right-movers (a, d) and left-movers (b, c).
_RM = np.array([0, 3])
_LM = np.array([1, 2])
_ROWS_RM, _COLS_RM = _RM.reshape(2, 1), _RM.reshape(1, 2)
_ROWS_LM, _COLS_LM = _LM.reshape(2, 1), _LM.reshape(1, 2)


class CompositionError(RuntimeError):
    """The inter-device feedback block I - R_left R_right is not invertible."""

    def __init__(self, condition_number: float):
        super().__init__(
            "singular feedback block in scattering composition "
            f"(condition number {condition_number:.3e})"
        )
        self.condition_number = condition_number


@dataclass(frozen=True)
class ChainSpec:
    """An ordered chain of rings on shared buses, leftmost first.

    ``bus_phase`` is the phase accumulated on each directed bus segment
    between adjacent rings (the same for all four segments of a gap).
    """

    rings: Tuple[RingParams, ...]
    bus_phase: float = 0.0

    def __post_init__(self) -> None:
        rings = tuple(self.rings)
        if not rings:
            raise ValueError("a chain needs at least one ring")
        if not all(isinstance(r, RingParams) for r in rings):
            raise TypeError("rings must be RingParams instances")
        if not np.isfinite(self.bus_phase):
            raise ValueError("bus_phase must be finite")
        object.__setattr__(self, "rings", rings)
        object.__setattr__(self, "bus_phase", float(self.bus_phase))

    def __len__(self) -> int:
        return len(self.rings)


@dataclass(frozen=True)
class RingTemplate:
    """Per-ring fixed parameters of a chain whose (tau, theta) are scanned."""

    theta_offset: float = 0.0
    gamma: float = 1.0
    alpha: float = 1.0


@dataclass(frozen=True)
class ChainTemplate:
    """A chain with fixed gamma/alpha/theta offsets and scanned (tau, theta).

    All rings share the scanned coupling tau; ring k runs at phase
    theta + theta_offset_k, which covers both identical chains and chains
    whose rings are detuned from one another.
    """

    rings: Tuple[RingTemplate, ...] = (RingTemplate(),)
    bus_phase: float = 0.0

    def __post_init__(self) -> None:
        rings = tuple(self.rings)
        if not rings:
            raise ValueError("a chain template needs at least one ring")
        object.__setattr__(self, "rings", rings)

    @classmethod
    def single(cls, gamma: float = 1.0, alpha: float = 1.0) -> "ChainTemplate":
        return cls(rings=(RingTemplate(gamma=gamma, alpha=alpha),))

    @classmethod
    def identical(cls, count: int, gamma: float = 1.0, alpha: float = 1.0,
                  bus_phase: float = 0.0) -> "ChainTemplate":
        if count < 1:
            raise ValueError("count must be >= 1")
        return cls(rings=tuple(RingTemplate(gamma=gamma, alpha=alpha) for _ in range(count)),
                   bus_phase=bus_phase)

    def with_gamma(self, gamma: float) -> "ChainTemplate":
        """The same chain with every ring's backscattering level replaced."""
        return ChainTemplate(
            rings=tuple(RingTemplate(r.theta_offset, gamma, r.alpha) for r in self.rings),
            bus_phase=self.bus_phase,
        )

    def at(self, tau: float, theta: float) -> ChainSpec:
        return ChainSpec(
            rings=[RingParams(tau, theta + r.theta_offset, r.gamma, r.alpha) for r in self.rings],
            bus_phase=self.bus_phase,
        )

    def matrix(self, tau, theta) -> np.ndarray:
        """Composite scattering matrices over broadcast (tau, theta) arrays."""
        tau = np.asarray(tau, dtype=float)
        theta = np.asarray(theta, dtype=float)
        first = self.rings[0]
        out = ring_matrix(tau, theta + first.theta_offset, first.gamma, first.alpha)
        if len(self.rings) == 1:
            return out
        segment = None
        if self.bus_phase != 0.0:
            segment = np.exp(1j * self.bus_phase) * np.eye(4, dtype=complex)
        for r in self.rings[1:]:
            if segment is not None:
                out = star_product(out, segment)
            out = star_product(out, ring_matrix(tau, theta + r.theta_offset, r.gamma, r.alpha))
        return out


def _blocks(matrices: np.ndarray):
    tf = matrices[..., _ROWS_RM, _COLS_RM]
    rr = matrices[..., _ROWS_RM, _COLS_LM]
    rf = matrices[..., _ROWS_LM, _COLS_RM]
    tb = matrices[..., _ROWS_LM, _COLS_LM]
    return tf, rr, rf, tb


def star_product(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Redheffer star product of two stacks of 4-port scattering matrices.

    Broadcasts over leading batch dimensions. Cells with a singular feedback
    block come back as NaN; the scalar wrapper ``compose_pair`` turns that
    into a CompositionError instead.
    """
    left = np.asarray(left, dtype=complex)
    right = np.asarray(right, dtype=complex)
    tf1, rr1, rf1, tb1 = _blocks(left)
    tf2, rr2, rf2, tb2 = _blocks(right)

    eye = np.eye(2, dtype=complex)
    feedback = eye - rr1 @ rf2
    rhs_fwd = tf1  # right-moving amplitudes injected from the left
    rhs_back = rr1 @ tb2  # right-moving amplitudes generated by right-side inputs
    try:
        g_fwd = np.linalg.solve(feedback, rhs_fwd)
        g_back = np.linalg.solve(feedback, rhs_back)
    except np.linalg.LinAlgError:
        g_fwd = _solve_cellwise_2x2(feedback, rhs_fwd)
        g_back = _solve_cellwise_2x2(feedback, rhs_back)

    batch = np.broadcast_shapes(left.shape[:-2], right.shape[:-2])
    out = np.zeros(batch + (4, 4), dtype=complex)
    out[..., _ROWS_RM, _COLS_RM] = tf2 @ g_fwd
    out[..., _ROWS_RM, _COLS_LM] = rr2 + tf2 @ g_back
    out[..., _ROWS_LM, _COLS_RM] = rf1 + tb1 @ rf2 @ g_fwd
    out[..., _ROWS_LM, _COLS_LM] = tb1 @ (tb2 + rf2 @ g_back)
    return out


def _solve_cellwise_2x2(feedback: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    feedback, rhs = np.broadcast_arrays(feedback, rhs)
    flat_f = feedback.reshape(-1, 2, 2)
    flat_r = rhs.reshape(-1, 2, 2)
    out = np.empty_like(flat_r)
    for i in range(flat_f.shape[0]):
        try:
            out[i] = np.linalg.solve(flat_f[i], flat_r[i])
        except np.linalg.LinAlgError:
            out[i] = np.nan
    return out.reshape(rhs.shape)


def _as_entries(S) -> np.ndarray:
    return S.entries if isinstance(S, ScatteringMatrix) else np.asarray(S, dtype=complex)


def compose_pair(left, right) -> ScatteringMatrix:
    """Compose two devices, ``left`` upstream of ``right`` along the buses."""
    left_m = _as_entries(left)
    right_m = _as_entries(right)
    out = star_product(left_m, right_m)
    if not np.all(np.isfinite(out)):
        _, rr1, _, _ = _blocks(left_m)
        _, _, rf2, _ = _blocks(right_m)
        feedback = np.eye(2, dtype=complex) - rr1 @ rf2
        raise CompositionError(float(np.linalg.cond(feedback)))
    return ScatteringMatrix(out)


def _segment_matrix(bus_phase: float) -> ScatteringMatrix:
    return ScatteringMatrix(np.exp(1j * bus_phase) * np.eye(4, dtype=complex))


def compose_chain(spec: ChainSpec) -> ScatteringMatrix:
    """Composite scattering matrix of a whole chain (left fold of star products)."""
    from .scattering import build_scattering

    out = build_scattering(spec.rings[0])
    segment = _segment_matrix(spec.bus_phase) if spec.bus_phase != 0.0 else None
    for ring in spec.rings[1:]:
        if segment is not None:
            out = compose_pair(out, segment)
        out = compose_pair(out, build_scattering(ring))
    return out


_MAX_ORACLE_RINGS = 3


def chain_oracle(spec: ChainSpec) -> ScatteringMatrix:
    """Solve the full boundary-condition system of a short chain directly.

    Unknowns are every ring's eight interior amplitudes plus the four directed
    bus amplitudes in each inter-ring gap; no pairwise composition is used.
    Intended as a verification oracle, hence the ring-count cap.
    """
    n = len(spec.rings)
    if n > _MAX_ORACLE_RINGS:
        raise ValueError(f"chain_oracle supports at most {_MAX_ORACLE_RINGS} rings, got {n}")

    n_unknowns = 8 * n + 4 * (n - 1)
    system = np.zeros((n_unknowns, n_unknowns), dtype=complex)
    drive = np.zeros((n_unknowns, 4), dtype=complex)
    hop = np.exp(1j * spec.bus_phase)

    def interior(k: int, station: int) -> int:
        return 8 * k + station

    def link(gap: int, channel: int) -> int:
        return 8 * n + 4 * gap + channel

    def local_input(k: int, channel: int):
        """Ring k's input on one channel: (unknown row, external drive row)."""
        row = np.zeros(n_unknowns, dtype=complex)
        ext = np.zeros(4, dtype=complex)
        if channel in (0, 3):  # right-movers arrive from the left
            if k == 0:
                ext[channel] = 1.0
            else:
                row[link(k - 1, channel)] = 1.0
        else:  # left-movers arrive from the right
            if k == n - 1:
                ext[channel] = 1.0
            else:
                row[link(k, channel)] = 1.0
        return row, ext

    # Stations feeding each output channel, same layout as the single ring.
    out_station = (3, 1, 4, 6)  # ccw exit, ccw pre-top, cw pre-exit, cw pre-top

    eq = 0
    for k, ring in enumerate(spec.rings):
        if ring.kappa == 0.0:
            # Decoupled ring: pin its dark interior to zero to keep the block
            # regular (same short-circuit as the single-ring solver).
            for station in range(8):
                system[eq, interior(k, station)] = 1.0
                eq += 1
            continue
        sub_system, sub_drive, _ = _interior_system(
            np.float64(ring.tau), np.float64(ring.theta),
            np.float64(ring.gamma), np.float64(ring.alpha),
        )
        for local_eq in range(8):
            system[eq, 8 * k: 8 * k + 8] = sub_system[local_eq]
            # sub_drive couples the equation to the ring's local bus inputs.
            for channel in range(4):
                coeff = sub_drive[local_eq, channel]
                if coeff != 0.0:
                    row, ext = local_input(k, channel)
                    system[eq] -= coeff * row
                    drive[eq] += coeff * ext
            eq += 1

    for gap in range(n - 1):
        for channel in range(4):
            # The gap amplitude equals the feeding ring's output times the hop.
            feeder = gap if channel in (0, 3) else gap + 1
            ring = spec.rings[feeder]
            row, ext = local_input(feeder, channel)
            system[eq, link(gap, channel)] = 1.0
            system[eq] -= hop * ring.tau * row
            system[eq, interior(feeder, out_station[channel])] -= hop * ring.kappa
            drive[eq] = hop * ring.tau * ext
            eq += 1

    solution = np.linalg.solve(system, drive)

    out = np.zeros((4, 4), dtype=complex)
    for channel in range(4):
        emitter = n - 1 if channel in (0, 3) else 0
        ring = spec.rings[emitter]
        row, ext = local_input(emitter, channel)
        out[channel] = ring.tau * (row @ solution + ext)
        out[channel] += ring.kappa * solution[interior(emitter, out_station[channel])]
    return ScatteringMatrix(out)
