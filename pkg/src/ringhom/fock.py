"""Few-photon Fock-state propagation through a 4-port scattering matrix.

Transition amplitudes are matrix permanents: with the scattering relation
written for creation operators, each input creation operator expands over the
output ones with the coefficients of S^T, so the amplitude from input
occupations n to output occupations m is

    perm(W[n, m]) / sqrt(prod(n_q!) * prod(m_p!))

where W = S^T and W[n, m] repeats row q of W n_q times and column p m_p times.
The factorial normalization makes the full output distribution of a unitary
device sum to one. Permanents are evaluated exactly (Ryser's inclusion-
exclusion formula); photon numbers are capped at 8 to bound the 2^n work.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Iterable, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .scattering import PortLike, ScatteringMatrix, port_index

MAX_PHOTONS = 8


class FockState(NamedTuple):
    """Photon occupations of the four ports, in (a, b, c, d) order."""

    a: int
    b: int
    c: int
    d: int

    def total(self) -> int:
        return self.a + self.b + self.c + self.d

    @classmethod
    def from_occupations(cls, occupations: Iterable[int]) -> "FockState":
        occ = tuple(int(n) for n in occupations)
        if len(occ) != 4:
            raise ValueError(f"expected 4 occupation numbers, got {len(occ)}")
        if any(n < 0 for n in occ):
            raise ValueError(f"occupations must be non-negative, got {occ}")
        return cls(*occ)

    @classmethod
    def on_ports(cls, ports: Iterable[PortLike]) -> "FockState":
        """One photon on each listed port (ports may repeat)."""
        occ = [0, 0, 0, 0]
        for p in ports:
            occ[port_index(p)] += 1
        return cls(*occ)


StateLike = Union[FockState, Sequence[int]]


class DetectionSummary(NamedTuple):
    """Restricted sums over an ordered pair of detected ports.

    total: probability that every photon exits on the detected pair.
    p11/p20/p02: probabilities of the (1,1), (2,0) and (0,2) patterns on the
    pair (in its given order); they are the two-photon splits of ``total``.
    """

    total: float
    p11: float
    p20: float
    p02: float


@dataclass(frozen=True)
class OutputDistribution:
    """Probabilities of all same-photon-number outputs for a fixed input.

    ``lost`` is the probability not accounted for by any listed output; it is
    nonzero only for lossy devices (alpha < 1), where the model does not
    resolve which internal channel absorbed the photons.
    """

    entries: Dict[FockState, float]
    lost: float
    input_state: FockState
    detected: Optional[DetectionSummary] = None

    def probability(self, state: StateLike) -> float:
        return self.entries.get(_as_state(state), 0.0)

    def total(self) -> float:
        return float(sum(self.entries.values()))


def _as_state(state: StateLike) -> FockState:
    if isinstance(state, FockState):
        return state
    return FockState.from_occupations(state)


def _as_matrix(S) -> np.ndarray:
    entries = S.entries if isinstance(S, ScatteringMatrix) else S
    arr = np.asarray(entries, dtype=complex)
    if arr.shape != (4, 4):
        raise ValueError(f"expected a 4x4 scattering matrix, got shape {arr.shape}")
    return arr


def permanent(m: np.ndarray) -> complex:
    """Exact matrix permanent by Ryser's formula (inclusion-exclusion).

    perm(A) = (-1)^n * sum over non-empty column subsets S of
              (-1)^|S| * prod_i sum_{j in S} A[i, j].
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"permanent requires a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if n < 1:
        raise ValueError("permanent requires n >= 1")
    if n == 1:
        return complex(m[0, 0])
    subsets = np.arange(1, 2**n, dtype=np.int64)
    masks = (subsets[:, None] >> np.arange(n)) & 1  # (2^n - 1, n) column picks
    row_sums = masks @ m.T  # (2^n - 1, n); entry [s, i] = sum_{j in S} m[i, j]
    signs = np.where(masks.sum(axis=1) % 2 == n % 2, 1.0, -1.0)
    return complex(np.sum(signs * np.prod(row_sums, axis=1)))


def _repeat_indices(state: FockState) -> list:
    out: list = []
    for port, count in enumerate(state):
        out.extend([port] * count)
    return out


def transition_amplitude(S, input_state: StateLike, output_state: StateLike) -> complex:
    """Amplitude to scatter ``input_state`` into ``output_state``.

    Photon number must be conserved between the two states (loss is accounted
    for separately, as a probability deficit) and may not exceed MAX_PHOTONS.
    """
    w = _as_matrix(S).T
    inp = _as_state(input_state)
    out = _as_state(output_state)
    n = inp.total()
    if n != out.total():
        raise ValueError(
            f"photon number mismatch: input has {n}, output has {out.total()}"
        )
    if n > MAX_PHOTONS:
        raise ValueError(f"photon number {n} exceeds the supported cap {MAX_PHOTONS}")
    if n == 0:
        return 1.0 + 0j
    rows = _repeat_indices(inp)
    cols = _repeat_indices(out)
    sub = w[np.ix_(rows, cols)]
    norm = math.prod(math.factorial(k) for k in inp) * math.prod(
        math.factorial(k) for k in out
    )
    return permanent(sub) / math.sqrt(norm)


def enumerate_outputs(total: int) -> Iterable[FockState]:
    """All 4-port occupation patterns with the given photon number."""
    for a in range(total + 1):
        for b in range(total - a + 1):
            for c in range(total - a - b + 1):
                yield FockState(a, b, c, total - a - b - c)


def output_distribution(
    S,
    input_state: StateLike,
    detected_ports: Optional[Tuple[PortLike, PortLike]] = None,
) -> OutputDistribution:
    """Full same-photon-number output distribution for one input state.

    With ``detected_ports`` given, also reports the restricted sums over that
    ordered pair: the probability that all photons exit on the pair, and its
    (1,1)/(2,0)/(0,2) components.
    """
    inp = _as_state(input_state)
    if inp.total() > MAX_PHOTONS:
        raise ValueError(
            f"photon number {inp.total()} exceeds the supported cap {MAX_PHOTONS}"
        )
    entries: Dict[FockState, float] = {}
    for out in enumerate_outputs(inp.total()):
        amp = transition_amplitude(S, inp, out)
        entries[out] = float(abs(amp) ** 2)
    accounted = sum(entries.values())
    lost = max(1.0 - accounted, 0.0)
    detected = None
    if detected_ports is not None:
        detected = detection_summary(entries, detected_ports)
    return OutputDistribution(entries=entries, lost=lost, input_state=inp, detected=detected)


def detection_summary(
    entries: Dict[FockState, float], detected_ports: Tuple[PortLike, PortLike]
) -> DetectionSummary:
    """Restricted sums of a distribution over an ordered port pair."""
    p1, p2 = (port_index(p) for p in detected_ports)
    if p1 == p2:
        raise ValueError("detected ports must be distinct")
    total = 0.0
    for state, prob in entries.items():
        if all(n == 0 for i, n in enumerate(state) if i not in (p1, p2)):
            total += prob

    def pattern(n1: int, n2: int) -> float:
        occ = [0, 0, 0, 0]
        occ[p1], occ[p2] = n1, n2
        return entries.get(FockState(*occ), 0.0)

    return DetectionSummary(total=total, p11=pattern(1, 1), p20=pattern(2, 0), p02=pattern(0, 2))


def coincidence_probability(
    S,
    in_ports: Tuple[PortLike, PortLike],
    out_ports: Tuple[PortLike, PortLike],
) -> float:
    """P of a (1,1) output on ``out_ports`` for a (1,1) input on ``in_ports``.

    Equals the squared permanent of the 2x2 submatrix of S^T selected by the
    input rows and output columns.
    """
    i1, i2 = (port_index(p) for p in in_ports)
    o1, o2 = (port_index(p) for p in out_ports)
    if i1 == i2:
        raise ValueError("input ports must be distinct")
    if o1 == o2:
        raise ValueError("output ports must be distinct")
    m = _as_matrix(S)
    amp = m[o1, i1] * m[o2, i2] + m[o2, i1] * m[o1, i2]
    return float(abs(amp) ** 2)


def pair_probabilities(matrices: np.ndarray, in_ports, out_ports):
    """Vectorized (p11, p20, p02) for a (1,1) input on a pair of ports.

    ``matrices`` may be a single 4x4 matrix or any ``batch + (4, 4)`` stack;
    the three arrays (or scalars) share its batch shape. This is the closed
    two-photon form of ``output_distribution`` restricted to the pair, used on
    parameter grids; the two routes are cross-checked in the test suite.
    """
    m = np.asarray(matrices, dtype=complex)
    i1, i2 = (port_index(p) for p in in_ports)
    o1, o2 = (port_index(p) for p in out_ports)
    if i1 == i2 or o1 == o2:
        raise ValueError("port pairs must contain distinct ports")
    amp11 = m[..., o1, i1] * m[..., o2, i2] + m[..., o2, i1] * m[..., o1, i2]
    p11 = np.abs(amp11) ** 2
    p20 = 2.0 * np.abs(m[..., o1, i1] * m[..., o1, i2]) ** 2
    p02 = 2.0 * np.abs(m[..., o2, i1] * m[..., o2, i2]) ** 2
    return p11, p20, p02


def brute_force_permanent(m: np.ndarray) -> complex:
    """Permanent by explicit permutation expansion; exponential, n <= 8."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"permanent requires a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if n > MAX_PHOTONS:
        raise ValueError("brute-force permanent limited to n <= 8")
    total = 0j
    for perm in itertools.permutations(range(n)):
        term = 1.0 + 0j
        for i, j in enumerate(perm):
            term *= m[i, j]
        total += term
    return complex(total)
