"""End-to-end acceptance gate.

Each test checks one shipping criterion at its stated tolerance and records a
single PASS/FAIL line; the lines are echoed in the terminal summary (and
printed live under ``pytest -s``).
"""

import time

import numpy as np

from conftest import record_acceptance
from helpers import fock_expansion_amplitudes, random_unitary
from ringhom import (
    ChainSpec,
    ChainTemplate,
    RingParams,
    RingTemplate,
    build_scattering,
    chain_oracle,
    compose_chain,
    extract_contours,
    find_homm_roots,
    find_homm_tau,
    output_distribution,
    probability_grid,
    probability_slice,
    transition_amplitude,
)
from ringhom.contours import is_closed, polyline_contains
from ringhom.fock import enumerate_outputs, pair_probabilities
from ringhom.scattering import ring_matrix

SEED = 987654321


def check(num: int, description: str, passed: bool, detail: str) -> None:
    line = f"criterion {num:2d} {'PASS' if passed else 'FAIL'} - {description} ({detail})"
    record_acceptance(line)
    print(line)
    assert passed, line


def test_criterion_01_single_ring_homm_point():
    start = time.perf_counter()
    root = find_homm_tau(ChainTemplate.single(), np.pi)
    elapsed = time.perf_counter() - start
    passed = (
        root.converged
        and abs(root.tau - 0.4142) <= 1e-3
        and root.residual < 1e-10
        and elapsed < 1.0
    )
    check(1, "single-ring coincidence zero at theta=pi",
          passed, f"tau={root.tau:.6f}, residual={root.residual:.1e}, {elapsed:.2f}s")


def test_criterion_02_unitarity_suite():
    rng = np.random.default_rng(SEED)
    n = 10_000
    taus = rng.uniform(0.0, 1.0, n)
    thetas = rng.uniform(0.0, 2.0 * np.pi, n)
    gammas = rng.uniform(0.0, 1.0, n)
    start = time.perf_counter()
    lossless = ring_matrix(taus, thetas, gammas, 1.0)
    gram = np.matmul(lossless.conj().transpose(0, 2, 1), lossless)
    defect = float(np.abs(gram - np.eye(4)).max())
    lossy = ring_matrix(taus, thetas, gammas, 0.9)
    top_singular = float(np.linalg.svd(lossy, compute_uv=False).max())
    elapsed = time.perf_counter() - start
    passed = defect < 1e-12 and top_singular <= 1.0 + 1e-12 and elapsed < 10.0
    check(2, f"unitarity over {n} random devices, sub-unitarity under loss",
          passed,
          f"max defect={defect:.2e}, max singular value={top_singular:.12f}, {elapsed:.1f}s")


def test_criterion_03_two_photon_normalization():
    rng = np.random.default_rng(SEED + 1)
    worst_unitary = 0.0
    worst_lossy = 0.0
    lossy_sums_below_one = True
    for _ in range(1000):
        tau = float(rng.uniform(0, 1))
        theta = float(rng.uniform(0, 2 * np.pi))
        gamma = float(rng.uniform(0, 1))
        dist = output_distribution(
            build_scattering(RingParams(tau, theta, gamma, 1.0)), (1, 1, 0, 0))
        worst_unitary = max(worst_unitary, abs(dist.total() + dist.lost - 1.0),
                            abs(dist.total() - 1.0))
        lossy = output_distribution(
            build_scattering(RingParams(tau, theta, gamma, 0.9)), (1, 1, 0, 0))
        lossy_sums_below_one &= lossy.total() < 1.0
        worst_lossy = max(worst_lossy, abs(lossy.total() + lossy.lost - 1.0))
    passed = worst_unitary < 1e-10 and lossy_sums_below_one and worst_lossy < 1e-10
    check(3, "two-photon distributions normalize; loss balance closes",
          passed,
          f"max |sum-1|={worst_unitary:.1e}, max lossy imbalance={worst_lossy:.1e}")


def test_criterion_04_resonance_splitting():
    thetas = np.linspace(-0.5, 0.5, 1001)
    step = thetas[1] - thetas[0]
    start = time.perf_counter()
    split = np.abs(ring_matrix(0.95, thetas, 0.99)[:, 0, 0]) ** 2
    clean = np.abs(ring_matrix(0.95, thetas, 1.00)[:, 0, 0]) ** 2
    elapsed = time.perf_counter() - start

    def interior_minima(curve):
        return [k for k in range(1, len(curve) - 1)
                if curve[k] < curve[k - 1] and curve[k] < curve[k + 1]]

    split_minima = interior_minima(split)
    clean_minima = interior_minima(clean)
    symmetric = (
        len(split_minima) == 2
        and abs(thetas[split_minima[0]] + thetas[split_minima[1]]) <= step
    )
    single = len(clean_minima) == 1 and abs(thetas[clean_minima[0]]) <= step
    passed = symmetric and single and elapsed < 1.0
    locations = ", ".join(f"{thetas[k]:+.3f}" for k in split_minima)
    check(4, "1% backscatter splits the resonance into a symmetric doublet",
          passed, f"split minima at [{locations}], clean minima={len(clean_minima)}, {elapsed:.2f}s")


def test_criterion_05_forward_and_reverse_problems_identical():
    axis = np.linspace(0.0, 2 * np.pi, 101)
    taus = np.linspace(0.005, 0.995, 101)
    template = ChainTemplate.single(gamma=0.9)
    ab = probability_grid(template, ("a", "b"), ("a", "b"), taus, axis)
    cd = probability_grid(template, ("c", "d"), ("c", "d"), taus, axis)
    gap = float(np.abs(ab.values - cd.values).max())
    check(5, "counter-propagating input/output pair gives identical physics",
          gap < 1e-12, f"max |P_ab - P_cd|={gap:.2e} over 101x101")


def test_criterion_06_backscattered_mode_detection_probability():
    # Dip locations pinned as regression constants after first computation.
    pins = {0.75: (0.456850251748, 0.025, 0.01), 0.25: (0.618033988750, 0.15, 0.03)}
    results = []
    passed = True
    for gamma, (tau_pin, blue_expected, blue_tol) in pins.items():
        root = find_homm_tau(ChainTemplate.single(gamma=gamma), np.pi,
                             ("a", "b"), ("c", "d"))
        ok = (
            root.converged
            and abs(root.tau - tau_pin) < 1e-3
            and abs(root.detected - blue_expected) <= blue_tol
        )
        passed &= ok
        results.append(f"gamma={gamma}: tau={root.tau:.6f}, detected={root.detected:.6f}")
    check(6, "detection probability at the backscattered-pair dip",
          passed, "; ".join(results))


def test_criterion_07_mixed_pair_dip_onset():
    template_strong = ChainTemplate.single(gamma=0.25)
    strong = find_homm_tau(template_strong, np.pi, ("a", "d"), ("a", "d"))

    template_weak = ChainTemplate.single(gamma=0.75)
    weak = find_homm_tau(template_weak, np.pi, ("a", "d"), ("a", "d"))
    weak_dips = find_homm_roots(template_weak, np.pi, ("a", "d"), ("a", "d"))
    # No dip structure at all for weak backscattering: scan the region where
    # detection is clearly possible (well above the non-triviality floor).
    taus = np.linspace(0.005, 0.995, 2001)
    p11, p20, p02 = pair_probabilities(
        template_weak.matrix(taus, np.pi), ("a", "d"), ("a", "d"))
    detectable = (p11 + p20 + p02) > 1e-2
    weak_floor = float(p11[detectable].min())

    passed = (
        strong.converged and strong.residual < 1e-8
        and not weak.converged
        and not weak_dips
        and weak_floor > 1e-3
    )
    check(7, "mixed-direction pair: zero dip appears only under strong backscatter",
          passed,
          f"gamma=0.25 residual={strong.residual:.1e}; gamma=0.75 dips={len(weak_dips)}, "
          f"detectable-region floor={weak_floor:.1e}")


def test_criterion_08_chain_oracle_equivalence():
    rng = np.random.default_rng(SEED + 2)
    start = time.perf_counter()
    worst = 0.0
    for count in (2, 3):
        for _ in range(200):
            spec = ChainSpec(
                rings=tuple(
                    RingParams(
                        tau=float(rng.uniform(0, 1)),
                        theta=float(rng.uniform(0, 2 * np.pi)),
                        gamma=float(rng.uniform(0, 1)),
                        alpha=float(rng.uniform(0.7, 1.0)),
                    )
                    for _ in range(count)
                ),
                bus_phase=float(rng.uniform(0, 2 * np.pi)),
            )
            gap = np.abs(compose_chain(spec).entries - chain_oracle(spec).entries).max()
            worst = max(worst, float(gap))
    elapsed = time.perf_counter() - start
    passed = worst < 1e-10 and elapsed < 30.0
    check(8, "pairwise composition matches the whole-chain solve (N=2, 3)",
          passed, f"max deviation={worst:.2e} over 400 draws, {elapsed:.1f}s")


def _sublevel_theta_extent(template: ChainTemplate, tau: float, level: float = 1e-3):
    """Width of the P < level interval containing theta=pi at fixed tau."""

    def probability(theta):
        p11, _, _ = pair_probabilities(template.matrix(tau, theta), ("a", "b"), ("a", "b"))
        return p11

    thetas = np.linspace(0.0, 2.0 * np.pi, 4001)
    below = probability(thetas) < level
    centre = int(np.searchsorted(thetas, np.pi))
    if not below[centre]:
        return 0.0
    lo = centre
    while lo > 0 and below[lo - 1]:
        lo -= 1
    hi = centre
    while hi < thetas.size - 1 and below[hi + 1]:
        hi += 1

    def refine(inside, outside):
        for _ in range(60):
            mid = 0.5 * (inside + outside)
            if float(probability(mid)) < level:
                inside = mid
            else:
                outside = mid
        return 0.5 * (inside + outside)

    left = refine(thetas[lo], thetas[lo - 1]) if lo > 0 else thetas[0]
    right = refine(thetas[hi], thetas[hi + 1]) if hi < thetas.size - 1 else thetas[-1]
    return right - left


def test_criterion_09_crescent_robust_under_backscatter():
    gammas = (1.0, 0.99, 0.95, 0.9, 0.5)
    extents = []
    enclosure_ok = True
    for gamma in gammas:
        template = ChainTemplate.single(gamma=gamma)
        root = find_homm_tau(template, np.pi)
        grid = probability_grid(template)
        (polys,) = extract_contours(grid, [1e-3])
        containing = [
            p for p in polys if is_closed(p) and polyline_contains(p, (root.tau, np.pi))
        ]
        enclosure_ok &= root.converged and len(containing) >= 1
        extents.append(_sublevel_theta_extent(template, root.tau))
    monotone = all(b <= a + 1e-12 for a, b in zip(extents, extents[1:]))
    passed = enclosure_ok and monotone and all(e > 0 for e in extents)
    detail = ", ".join(f"{g}:{e:.4f}" for g, e in zip(gammas, extents))
    check(9, "level-0.001 crescent survives backscatter and shrinks monotonically",
          passed, f"theta extents {detail}")


def test_criterion_10_detuned_chain_spike_destroyed():
    pair = ChainTemplate(rings=(RingTemplate(), RingTemplate(theta_offset=np.pi / 4)))
    window = np.linspace(1.8 * np.pi, 2.0 * np.pi, 103)[1:-1]
    taus = np.linspace(0.005, 0.995, 201)
    clean = probability_grid(pair, tau_axis=taus, theta_axis=window)
    noisy = probability_grid(pair.with_gamma(0.99), tau_axis=taus, theta_axis=window)
    clean_min = float(np.nanmin(clean.values))
    noisy_min = float(np.nanmin(noisy.values))
    passed = clean_min < 1e-3 and noisy_min > 1e-3
    check(10, "near-resonance spike of a detuned pair is killed by 1% backscatter",
          passed, f"window minimum {clean_min:.1e} -> {noisy_min:.1e}")


def test_criterion_11_loss_weighted_to_low_coupling():
    taus = np.linspace(0.005, 0.995, 199)
    lossless = probability_slice(ChainTemplate.single(gamma=0.9),
                                 theta=np.pi, tau_axis=taus)
    lossy = probability_slice(ChainTemplate.single(gamma=0.9, alpha=0.9),
                              theta=np.pi, tau_axis=taus)
    pointwise = bool(np.all(lossy.detected <= lossless.detected + 1e-12))
    deficit = lossless.detected - lossy.detected
    low = float(deficit[np.argmin(np.abs(taus - 0.1))])
    high = float(deficit[np.argmin(np.abs(taus - 0.9))])
    passed = pointwise and low > high
    check(11, "radiative loss drains the detected pair hardest at low coupling",
          passed, f"deficit {low:.4f} at tau=0.1 vs {high:.4f} at tau=0.9")


def test_criterion_12_permanent_against_operator_expansion():
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(100):
        matrix = random_unitary(rng)
        for inp in enumerate_outputs(2):
            oracle = fock_expansion_amplitudes(matrix, inp)
            for out in enumerate_outputs(2):
                amp = transition_amplitude(matrix, inp, out)
                worst = max(worst, abs(amp - oracle.get(out, 0j)))
    check(12, "permanent amplitudes equal the operator-expansion oracle",
          worst < 1e-12, f"max deviation={worst:.2e} over 100 unitaries x 100 transitions")
