"""Shared test oracles, independent of the library's computation paths."""

from __future__ import annotations

import math

import numpy as np

from ringhom import FockState


def random_unitary(rng: np.random.Generator, n: int = 4) -> np.ndarray:
    """Haar-ish random unitary via QR with phase-normalized diagonal."""
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def closed_form_through(tau: float, theta) -> np.ndarray:
    """Lossless, backscatter-free through amplitude from two-mode elimination.

    Derived by hand from the pair (out = tau*in + kappa*ring_back,
    ring_front = -kappa*in + tau*ring_back) with a full-trip phase factor
    linking ring_front to ring_back.
    """
    phase = np.exp(1j * np.asarray(theta))
    return tau * (1.0 - phase) / (1.0 - tau * tau * phase)


def closed_form_drop(tau: float, theta) -> np.ndarray:
    """Companion drop amplitude of the same two-mode elimination."""
    phase = np.exp(1j * np.asarray(theta))
    half = np.exp(0.5j * np.asarray(theta))
    return -(1.0 - tau * tau) * half / (1.0 - tau * tau * phase)


def closed_form_coincidence(tau, theta) -> np.ndarray:
    """|perm of the 2x2 through/drop block|^2 built from the closed forms."""
    t = closed_form_through(tau, theta)
    d = closed_form_drop(tau, theta)
    return np.abs(t * t + d * d) ** 2


def fock_expansion_amplitudes(matrix: np.ndarray, input_state) -> dict:
    """Output amplitudes by direct operator expansion over the Fock basis.

    Expands each input creation operator as a sum of output creation
    operators weighted by the rows of the transposed scattering matrix, then
    applies them one photon at a time to a dense dictionary of basis states
    using the ladder rule a_dag |n> = sqrt(n+1) |n+1>. Completely independent
    of any permanent evaluation.
    """
    w = np.asarray(matrix, dtype=complex).T
    occupations = tuple(input_state)
    amplitudes = {(0, 0, 0, 0): 1.0 + 0j}
    for port, count in enumerate(occupations):
        for _ in range(count):
            grown = {}
            for basis, coeff in amplitudes.items():
                for out_port in range(4):
                    lifted = list(basis)
                    lifted[out_port] += 1
                    key = tuple(lifted)
                    add = coeff * w[port, out_port] * math.sqrt(lifted[out_port])
                    grown[key] = grown.get(key, 0j) + add
            amplitudes = grown
    norm = math.sqrt(math.prod(math.factorial(k) for k in occupations))
    return {FockState(*k): v / norm for k, v in amplitudes.items()}


def bisect_root(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Plain bisection on a sign change of f."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError("no sign change on the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)
