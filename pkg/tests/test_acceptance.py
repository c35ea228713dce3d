"""Exit criteria for the package, one test per criterion.

The pass/fail line for each criterion is printed in the terminal summary
(see conftest.py).
"""
import math
import time

import numpy as np
import pytest

from spinwave.ansatz import (
    basis_magnitude,
    build_product_state,
    energy_closed_form,
    energy_factorized,
    expand,
    ground_amplitude,
)
from spinwave.core import ChainConfig, ModeIndex
from spinwave.dispersion import (
    cos_sum_identity,
    dispersion_curve,
    rms_error_bruteforce,
    rms_error_closed_form,
)
from spinwave.magnon import build_magnon_state, eigen_residual, magnon_energy
from spinwave.sampling import NoiseModel, estimate_energy
from spinwave.statevector import (
    apply_y_rotation,
    apply_z_rotation,
    chain_hamiltonian,
    dimensionless_energy,
    expectation_hamiltonian,
    zero_state,
)

GRID = [(n, m) for n in (2, 4, 6, 8, 10, 12) for m in range(n // 2 + 1)]


def dense_ansatz_energy(config, mode):
    state = expand(build_product_state(config, mode))
    return dimensionless_energy(expectation_hamiltonian(state, chain_hamiltonian(config)), config)


def test_criterion_1_magnon_dispersion():
    start = time.perf_counter()
    for n, m in GRID:
        e = magnon_energy(ChainConfig(n), ModeIndex(m))
        assert abs(e - 4 * (1 - math.cos(2 * math.pi * m / n))) < 1e-10, (n, m)
    assert time.perf_counter() - start < 10


def test_criterion_2_ansatz_closed_form():
    for n, m in GRID:
        config, mode = ChainConfig(n), ModeIndex(m)
        dense = dense_ansatz_energy(config, mode)
        closed = 4 * (1 - 1 / n) * (1 - math.cos(2 * math.pi * m / n))
        factorized = dimensionless_energy(energy_factorized(build_product_state(config, mode), config), config)
        assert abs(dense - closed) < 1e-10, (n, m)
        assert abs(dense - factorized) < 1e-10, (n, m)
        assert abs(energy_closed_form(config, mode) - closed) < 1e-10
    points = dispersion_curve(ChainConfig(4), "dense")
    assert [p.e_ansatz for p in points] == pytest.approx([0, 3, 6], abs=1e-10)
    assert [p.e_theory for p in points] == pytest.approx([0, 4, 8], abs=1e-10)


def test_criterion_3_convergence_law():
    start = time.perf_counter()
    checked = 0
    for n in range(2, 65):
        for p in dispersion_curve(ChainConfig(n), "factorized"):
            if p.m == 0:
                continue
            assert abs(abs(p.e_theory - p.e_ansatz) * n / p.e_theory - 1) < 1e-9, (n, p.m)
            checked += 1
    assert checked > 1000
    assert time.perf_counter() - start < 1


def test_criterion_4_rms_identity():
    for n in range(4, 129, 2):
        assert abs(rms_error_bruteforce(n) - rms_error_closed_form(n)) < 1e-12, n
        # independent direct summation of the cosine identity
        direct = sum((math.cos(2 * math.pi * k / n) - 1) ** 2 for k in range(n // 2 + 1))
        assert abs(cos_sum_identity(n) - (3 * n / 4 + 2)) < 1e-12, n
        assert abs(direct - (3 * n / 4 + 2)) < 1e-12, n
    # N = 2 lies outside the identity (direct sum 4, formula 3.5); excluded
    assert cos_sum_identity(2) == pytest.approx(4.0)


def test_criterion_5_ground_amplitude_limit():
    target = math.exp(-0.5)
    assert abs(ground_amplitude(1000) - target) < 1e-3
    assert abs(ground_amplitude(10000) - target) < 1e-4
    assert abs((1 - 1 / 1000) ** 500 - target) < 1e-3


def test_criterion_6_amplitude_table():
    config, mode = ChainConfig(4), ModeIndex(1)
    exact = build_magnon_state(config, mode).state.amplitudes
    ansatz = expand(build_product_state(config, mode)).amplitudes
    for k in range(16):
        flips = bin(k).count("1")
        if flips == 1:
            assert abs(abs(exact[k]) - 0.5) < 1e-12
        else:
            assert exact[k] == 0
        assert abs(abs(ansatz[k]) - basis_magnitude(4, flips)) < 1e-12
    assert abs(abs(ansatz[0]) - 0.5625) < 1e-12
    assert abs(abs(ansatz[1]) - 0.32476) < 1e-5
    assert abs(np.sum(abs(exact) ** 2) - 1) < 1e-10
    assert abs(np.sum(abs(ansatz) ** 2) - 1) < 1e-10


def test_criterion_7_eigenstate_residual():
    for n in range(2, 13):
        for m in range(n):
            for sign in ("plus", "minus"):
                assert eigen_residual(ChainConfig(n), ModeIndex(m, sign)) < 1e-10, (n, m)


def test_criterion_8_sampling_statistics():
    start = time.perf_counter()
    config = ChainConfig(16)
    for m in range(9):
        mode = ModeIndex(m)
        exact = energy_closed_form(config, mode)
        for seed in range(20):
            est = estimate_energy(config, mode, 10**5, seed=seed)
            assert abs(est.value - exact) < 5 * est.stderr, (m, seed)
    mode = ModeIndex(4)
    for seed in range(20):
        small = estimate_energy(config, mode, 10**5, seed=seed).stderr
        large = estimate_energy(config, mode, 4 * 10**5, seed=seed).stderr
        assert abs(large / small - 0.5) <= 0.2 * 0.5, seed
    assert time.perf_counter() - start < 120


def test_criterion_9_mitigation_efficacy():
    config, mode = ChainConfig(4), ModeIndex(1)
    noise = NoiseModel.uniform(4, 0.02, 0.02)
    shots = 10**6
    raw = estimate_energy(config, mode, shots, noise, "none", seed=0)
    mitigated = estimate_energy(config, mode, shots, noise, "twirled", seed=0)
    raw_bias, mit_bias = abs(raw.value - 3.0), abs(mitigated.value - 3.0)
    assert mit_bias < 0.05
    assert raw_bias >= 5 * mit_bias

    # closed-form channel: every unmitigated parity shrinks by (1 - 2q)^2
    q = 0.02
    predicted_bias = (1 - (1 - 2 * q) ** 2) * 4 * math.cos(math.pi / 3) ** 2
    assert raw_bias == pytest.approx(predicted_bias, rel=0.15)
    zz_noisy = sum(raw.pair_estimates["ZZ"].values())
    zz_exact = 4 * math.cos(math.pi / 3) ** 2
    assert zz_noisy / zz_exact == pytest.approx((1 - 2 * q) ** 2, rel=0.02)


def test_criterion_10_property_suite():
    rng = np.random.default_rng(2024)
    # norm preservation and rotation composition
    for _ in range(50):
        n = int(rng.integers(1, 7))
        s = zero_state(n)
        for _ in range(10):
            site = int(rng.integers(0, n))
            s = apply_y_rotation(s, site, rng.uniform(-7, 7))
            s = apply_z_rotation(s, site, rng.uniform(-7, 7))
        assert abs(s.norm_squared() - 1) < 1e-12
        site, p1, p2 = int(rng.integers(0, n)), rng.uniform(-7, 7), rng.uniform(-7, 7)
        a = apply_z_rotation(apply_z_rotation(s, site, p1), site, p2).amplitudes
        b = apply_z_rotation(s, site, p1 + p2).amplitudes
        k = int(np.argmax(abs(b)))
        phase = b[k] / a[k]
        assert abs(abs(phase) - 1) < 1e-12
        assert np.max(abs(a * phase - b)) < 1e-12
    # sign-tag degeneracy and E(m) = E(N - m)
    for n in range(2, 13):
        config = ChainConfig(n)
        for m in range(n):
            e = magnon_energy(config, ModeIndex(m))
            assert abs(magnon_energy(config, ModeIndex(m, "minus")) - e) < 1e-10
            assert abs(magnon_energy(config, ModeIndex(n - m)) - e) < 1e-10
            a = dense_ansatz_energy(config, ModeIndex(m))
            assert abs(dense_ansatz_energy(config, ModeIndex(m, "minus")) - a) < 1e-10
            assert abs(dense_ansatz_energy(config, ModeIndex(n - m)) - a) < 1e-10
    # random product states: factorized vs dense
    from spinwave.ansatz import ProductState

    for _ in range(100):
        n = int(rng.integers(2, 11))
        config = ChainConfig(n, coupling=rng.uniform(0.1, 4))
        ps = ProductState(n, rng.uniform(0, math.pi, n), rng.uniform(0, 2 * math.pi, n))
        dense = expectation_hamiltonian(expand(ps), chain_hamiltonian(config))
        assert abs(energy_factorized(ps, config) - dense) < 1e-10
