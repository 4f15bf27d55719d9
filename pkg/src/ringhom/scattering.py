"""Scattering model of a double-bus microring resonator with internal backscattering.

The device couples two bus waveguides to a ring through identical directional
couplers (amplitude transmission ``tau``, cross coupling ``kappa = sqrt(1-tau^2)``).
Sidewall-roughness backscattering is condensed into two effective beam
splitters inside the ring with transmission probability ``gamma``; reflections
there convert counterclockwise (ccw) light into clockwise (cw) light and vice
versa. Radiative loss is phenomenological: each round trip retains amplitude
``alpha`` (each half trip ``sqrt(alpha)``).

Port basis, fixed everywhere in this package::

    index 0: a  bottom bus, left -> right   (ccw coupled)
    index 1: b  top bus,    right -> left   (ccw coupled)
    index 2: c  bottom bus, right -> left   (cw coupled)
    index 3: d  top bus,    left -> right   (cw coupled)

A device is described by a 4x4 complex matrix mapping input amplitudes
(a_in, b_in, c_in, d_in) to output amplitudes (a_out, b_out, c_out, d_out);
row = output port, column = input port.

The interior of one ring carries eight modes: four stations along the ring
(just inside the bottom coupler, just before the top coupler, just after the
top coupler, just before the bottom coupler, measured ccw) for each of the two
circulation directions. For a given excitation the eight interior amplitudes
satisfy a linear system (directional-coupler relations plus the two internal
beam splitters with half-trip propagation ``sqrt(alpha) * exp(i*theta/2)``),
which is assembled and solved by dense LU here rather than eliminated by hand.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

PORTS = ("a", "b", "c", "d")
PORT_INDEX = {name: i for i, name in enumerate(PORTS)}

# Propagation direction along the buses, used by network composition.
RIGHT_MOVERS = ("a", "d")
LEFT_MOVERS = ("b", "c")

# Interior unknown layout: ccw stations then cw stations, station order along
# the ccw coordinate (entry, before-top, after-top, before-exit).
_CCW_Z0, _CCW_HM, _CCW_HP, _CCW_ZL = 0, 1, 2, 3
_CW_Z0, _CW_HM, _CW_HP, _CW_ZL = 4, 5, 6, 7
# Interior amplitude feeding each output port (a, b, c, d).
_OUTPUT_STATIONS = (_CCW_ZL, _CCW_HM, _CW_Z0, _CW_HP)

PortLike = Union[str, int]


class SolverError(RuntimeError):
    """Interior linear system could not be solved for the given parameters."""

    def __init__(self, params: "RingParams", message: str = "singular interior system"):
        super().__init__(f"{message} for {params!r}")
        self.params = params


def port_index(port: PortLike) -> int:
    """Return the basis index of a port given by letter or index."""
    if isinstance(port, str):
        try:
            return PORT_INDEX[port.lower()]
        except KeyError:
            raise ValueError(f"unknown port {port!r}; expected one of {PORTS}") from None
    idx = int(port)
    if not 0 <= idx < 4:
        raise ValueError(f"port index {idx} out of range 0..3")
    return idx


@dataclass(frozen=True)
class RingParams:
    """Physical knobs of one ring.

    tau:    coupler transmission amplitude, 0 <= tau <= 1.
    theta:  round-trip phase in radians. Any real value is accepted and used
            directly in exp(i*theta/2); it is deliberately never wrapped, since
            the half-trip factor has period 4*pi.
    gamma:  transmission probability of each internal beam splitter,
            0 <= gamma <= 1 (gamma = 1 means no backscattering).
    alpha:  round-trip amplitude retention, 0 < alpha <= 1 (alpha = 1 lossless).
    """

    tau: float
    theta: float
    gamma: float = 1.0
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.tau) or not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")
        if not np.isfinite(self.theta):
            raise ValueError(f"theta must be finite, got {self.theta}")
        if not np.isfinite(self.gamma) or not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not np.isfinite(self.alpha) or not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")

    @property
    def kappa(self) -> float:
        """Cross-coupling amplitude sqrt(1 - tau^2), always recomputed."""
        return float(np.sqrt(max(1.0 - self.tau * self.tau, 0.0)))


@dataclass(frozen=True, eq=False)
class ScatteringMatrix:
    """4x4 complex scattering matrix over the fixed (a, b, c, d) port basis.

    ``entries[p, q]`` is the amplitude from input port q to output port p.
    Right-moving ports are (a, d), left-moving ports are (b, c); network
    composition relies on that partition.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.entries, dtype=complex)
        if arr.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {arr.shape}")
        object.__setattr__(self, "entries", arr)

    def entry(self, out_port: PortLike, in_port: PortLike) -> complex:
        return complex(self.entries[port_index(out_port), port_index(in_port)])

    def block(self, out_ports: Iterable[PortLike], in_ports: Iterable[PortLike]) -> np.ndarray:
        rows = [port_index(p) for p in out_ports]
        cols = [port_index(p) for p in in_ports]
        return self.entries[np.ix_(rows, cols)]

    def unitarity_defect(self) -> float:
        """max |S^dagger S - I|, zero for a lossless device."""
        gram = self.entries.conj().T @ self.entries
        return float(np.abs(gram - np.eye(4)).max())

    def is_unitary(self, tol: float = 1e-12) -> bool:
        return self.unitarity_defect() < tol

    def largest_singular_value(self) -> float:
        return float(np.linalg.svd(self.entries, compute_uv=False).max())


@dataclass(frozen=True)
class InteriorState:
    """Eight interior amplitudes of one ring for a given excitation.

    Stations are ordered along the ccw coordinate: (entry just inside the
    bottom coupler, just before the top coupler, just after the top coupler,
    just before the bottom coupler). ``ccw`` holds the counterclockwise
    amplitudes at those stations, ``cw`` the clockwise ones.
    """

    ccw: tuple
    cw: tuple

    def output_amplitudes(self, params: RingParams, in_port: PortLike) -> np.ndarray:
        """Exterior output amplitudes implied by this interior solution."""
        q = port_index(in_port)
        amps = np.zeros(4, dtype=complex)
        amps[q] = params.tau
        interior = np.array(self.ccw + self.cw, dtype=complex)
        for p, station in enumerate(_OUTPUT_STATIONS):
            amps[p] += params.kappa * interior[station]
        return amps


def coupler_matrix(tau: float) -> np.ndarray:
    """2x2 transfer matrix of a directional coupler: ((tau, kappa), (-kappa, tau))."""
    if not np.isfinite(tau) or not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    kappa = np.sqrt(max(1.0 - tau * tau, 0.0))
    return np.array([[tau, kappa], [-kappa, tau]])


def backscatter_matrix(gamma: float) -> np.ndarray:
    """2x2 transfer matrix of an internal backscattering beam splitter.

    gamma is the transmission probability, so the amplitudes are sqrt(gamma)
    on the diagonal and +/- sqrt(1-gamma) off it.
    """
    if not np.isfinite(gamma) or not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    sg = np.sqrt(gamma)
    sr = np.sqrt(1.0 - gamma)
    return np.array([[sg, sr], [-sr, sg]])


def _interior_system(tau, theta, gamma, alpha):
    """Assemble the batched 8x8 interior system and 8x4 drive for unit inputs.

    All four parameters must be broadcast-compatible; the returned arrays have
    shape ``batch + (8, 8)`` and ``batch + (8, 4)``.
    """
    kappa = np.sqrt(np.maximum(1.0 - tau * tau, 0.0))
    phi = np.sqrt(alpha) * np.exp(0.5j * theta)
    sg_phi = np.sqrt(gamma) * phi
    sr_phi = np.sqrt(1.0 - gamma) * phi

    shape = np.broadcast(tau, theta, gamma, alpha).shape
    system = np.zeros(shape + (8, 8), dtype=complex)
    drive = np.zeros(shape + (8, 4), dtype=complex)

    # Directional couplers: the mode continuing past each coupler is
    # -kappa * (bus input) + tau * (arriving interior mode).
    system[..., 0, _CCW_Z0] = 1.0
    system[..., 0, _CCW_ZL] = -tau
    drive[..., 0, 0] = -kappa  # a_in enters at the bottom coupler
    system[..., 1, _CCW_HP] = 1.0
    system[..., 1, _CCW_HM] = -tau
    drive[..., 1, 1] = -kappa  # b_in enters at the top coupler
    system[..., 2, _CW_ZL] = 1.0
    system[..., 2, _CW_Z0] = -tau
    drive[..., 2, 2] = -kappa  # c_in enters at the bottom coupler, cw
    system[..., 3, _CW_HM] = 1.0
    system[..., 3, _CW_HP] = -tau
    drive[..., 3, 3] = -kappa  # d_in enters at the top coupler, cw

    # Internal beam splitters with half-trip propagation. Reflections carry a
    # minus sign on ccw -> cw conversion and a plus sign on cw -> ccw.
    system[..., 4, _CCW_ZL] = 1.0
    system[..., 4, _CCW_HP] = -sg_phi
    system[..., 4, _CW_ZL] = -sr_phi
    system[..., 5, _CW_HP] = 1.0
    system[..., 5, _CW_ZL] = -sg_phi
    system[..., 5, _CCW_HP] = sr_phi
    system[..., 6, _CCW_HM] = 1.0
    system[..., 6, _CCW_Z0] = -sg_phi
    system[..., 6, _CW_HM] = -sr_phi
    system[..., 7, _CW_Z0] = 1.0
    system[..., 7, _CW_HM] = -sg_phi
    system[..., 7, _CCW_Z0] = sr_phi
    return system, drive, kappa


def ring_matrix(tau, theta, gamma=1.0, alpha=1.0) -> np.ndarray:
    """Scattering matrices of single rings, broadcast over the parameters.

    Scalar inputs give one (4, 4) complex matrix; array inputs broadcast to
    ``batch + (4, 4)``. Cells whose interior system is singular (isolated
    parameter coincidences) are filled with NaN rather than raising, so grid
    evaluations can record them as missing values. tau = 1 is legal and yields
    the identity (no light enters the ring).
    """
    tau = np.asarray(tau, dtype=float)
    theta = np.asarray(theta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    for name, arr, lo, hi, lo_open in (
        ("tau", tau, 0.0, 1.0, False),
        ("gamma", gamma, 0.0, 1.0, False),
        ("alpha", alpha, 0.0, 1.0, True),
    ):
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name} must be finite")
        below = np.any(arr <= lo) if lo_open else np.any(arr < lo)
        if below or np.any(arr > hi):
            raise ValueError(f"{name} must lie in {'(' if lo_open else '['}{lo}, {hi}]")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")

    tau, theta, gamma, alpha = np.broadcast_arrays(tau, theta, gamma, alpha)
    scalar = tau.ndim == 0
    if scalar:
        tau, theta, gamma, alpha = (np.reshape(x, (1,)) for x in (tau, theta, gamma, alpha))
    system, drive, kappa = _interior_system(tau, theta, gamma, alpha)

    # kappa = 0 decouples the ring entirely; short-circuit to keep the solve
    # regular at the undriven-resonator corner (tau = 1 at exact resonance).
    decoupled = kappa == 0.0
    if np.any(decoupled):
        system[decoupled] = np.eye(8)
        drive[decoupled] = 0.0

    try:
        interior = np.linalg.solve(system, drive)
    except np.linalg.LinAlgError:
        interior = _solve_cellwise(system, drive)

    matrices = tau[..., None, None] * np.eye(4, dtype=complex)
    matrices = matrices + kappa[..., None, None] * interior[..., _OUTPUT_STATIONS, :]
    if scalar:
        return matrices.reshape(4, 4)
    return matrices


def _solve_cellwise(system: np.ndarray, drive: np.ndarray) -> np.ndarray:
    """Fallback when a batch contains singular cells: NaN-fill just those."""
    flat_sys = system.reshape(-1, 8, 8)
    flat_drv = drive.reshape(-1, 8, 4)
    out = np.empty_like(flat_drv)
    for i in range(flat_sys.shape[0]):
        try:
            out[i] = np.linalg.solve(flat_sys[i], flat_drv[i])
        except np.linalg.LinAlgError:
            out[i] = np.nan
    return out.reshape(drive.shape)


def build_scattering(params: RingParams) -> ScatteringMatrix:
    """Solve the boundary-condition model of one ring.

    Assembles the eight-unknown interior system for each of the four unit
    inputs, solves it by dense LU, and reads off the exterior outputs.
    Raises SolverError (carrying the parameters) if the system is singular.
    """
    entries = ring_matrix(params.tau, params.theta, params.gamma, params.alpha)
    if not np.all(np.isfinite(entries)):
        raise SolverError(params)
    return ScatteringMatrix(entries)


def interior_state(params: RingParams, in_port: PortLike) -> InteriorState:
    """Interior amplitudes for a unit-amplitude excitation of one input port."""
    system, drive, _ = _interior_system(
        np.float64(params.tau), np.float64(params.theta),
        np.float64(params.gamma), np.float64(params.alpha),
    )
    if params.kappa == 0.0:
        return InteriorState(ccw=(0j,) * 4, cw=(0j,) * 4)
    q = port_index(in_port)
    try:
        interior = np.linalg.solve(system, drive[:, q])
    except np.linalg.LinAlgError:
        raise SolverError(params) from None
    return InteriorState(ccw=tuple(interior[:4]), cw=tuple(interior[4:]))


def transmission_spectrum(
    params: RingParams,
    in_port: PortLike,
    out_port: PortLike,
    theta_grid: Sequence[float],
) -> np.ndarray:
    """Single-photon transmission |S[out, in]|^2 over a grid of phases.

    Returns an (n, 2) array of (theta, probability) rows; tau, gamma and alpha
    are taken from ``params`` while its theta is replaced by each grid value.
    """
    thetas = np.asarray(theta_grid, dtype=float)
    if thetas.ndim != 1 or thetas.size == 0:
        raise ValueError("theta_grid must be a non-empty 1-D sequence")
    p = port_index(out_port)
    q = port_index(in_port)
    matrices = ring_matrix(params.tau, thetas, params.gamma, params.alpha)
    probs = np.abs(matrices[:, p, q]) ** 2
    return np.column_stack([thetas, probs])
