import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import PAULI, chain_matrix, site_operator
from spinwave.core import ChainConfig
from spinwave.statevector import (
    CapExceeded,
    DenseState,
    IndexOutOfRange,
    LengthMismatch,
    PauliPairTerm,
    SizeMismatch,
    apply_hamiltonian,
    apply_y_rotation,
    apply_z_rotation,
    basis_amplitude,
    chain_hamiltonian,
    dense_cap,
    dimensionless_energy,
    dump_state,
    expectation_hamiltonian,
    expectation_pauli_pair,
    inner_product,
    load_state,
    zero_state,
)

angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


def random_state(n, rng):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return DenseState(n, v / np.linalg.norm(v))


def test_zero_state():
    np.testing.assert_array_equal(zero_state(1).amplitudes, [1, 0])
    np.testing.assert_array_equal(zero_state(2).amplitudes, [1, 0, 0, 0])
    assert zero_state(3).amplitudes[0] == 1


def test_cap(monkeypatch):
    assert dense_cap() == 24
    monkeypatch.setenv("SPINWAVE_DENSE_CAP", "3")
    with pytest.raises(CapExceeded):
        zero_state(4)
    zero_state(3)


def test_y_rotation_examples():
    s = zero_state(1)
    np.testing.assert_allclose(apply_y_rotation(s, 0, 0.0).amplitudes, s.amplitudes)
    np.testing.assert_allclose(apply_y_rotation(s, 0, math.pi).amplitudes, [0, 1], atol=1e-15)
    np.testing.assert_allclose(
        apply_y_rotation(s, 0, math.pi / 3).amplitudes, [math.sqrt(3) / 2, 0.5], atol=1e-15
    )
    # |1> -> -sin|0> + cos|1>
    one = DenseState(1, [0, 1])
    np.testing.assert_allclose(
        apply_y_rotation(one, 0, math.pi / 3).amplitudes, [-0.5, math.sqrt(3) / 2], atol=1e-15
    )


def test_z_rotation_examples():
    plus = DenseState(1, np.array([1, 1]) / math.sqrt(2))
    np.testing.assert_allclose(apply_z_rotation(plus, 0, 0).amplitudes, plus.amplitudes)
    np.testing.assert_allclose(apply_z_rotation(plus, 0, 2 * math.pi).amplitudes, plus.amplitudes, atol=1e-15)
    out = apply_z_rotation(plus, 0, math.pi / 2).amplitudes
    assert out[1] / out[0] == pytest.approx(1j)


def test_rotation_acts_on_requested_site():
    # flip site 1 of 3: only index 0b010 is populated
    s = apply_y_rotation(zero_state(3), 1, math.pi)
    assert abs(s.amplitudes[2]) == pytest.approx(1.0)
    assert basis_amplitude(s, "010") == pytest.approx(1.0)


def test_index_errors():
    with pytest.raises(IndexOutOfRange):
        apply_y_rotation(zero_state(2), 2, 0.1)
    with pytest.raises(IndexOutOfRange):
        apply_z_rotation(zero_state(2), -1, 0.1)
    with pytest.raises(IndexOutOfRange):
        expectation_pauli_pair(zero_state(2), PauliPairTerm("ZZ", 0, 3))


def test_basis_amplitude():
    assert basis_amplitude(zero_state(2), "00") == 1
    assert basis_amplitude(zero_state(2), "01") == 0
    with pytest.raises(LengthMismatch):
        basis_amplitude(zero_state(2), "000")


def test_inner_product():
    z = zero_state(2)
    assert inner_product(z, z) == pytest.approx(1)
    one = apply_y_rotation(zero_state(1), 0, math.pi)
    assert abs(inner_product(zero_state(1), one)) < 1e-15
    with pytest.raises(SizeMismatch):
        inner_product(zero_state(1), zero_state(2))
    # conjugation on the first argument
    a = DenseState(1, [1j, 0])
    assert inner_product(a, zero_state(1)) == pytest.approx(-1j)


def test_pauli_pair_examples():
    z = zero_state(2)
    assert expectation_pauli_pair(z, PauliPairTerm("ZZ", 0, 1)) == 1.0
    assert expectation_pauli_pair(z, PauliPairTerm("XX", 0, 1)) == 0.0


@pytest.mark.parametrize("kind", ["XX", "YY", "ZZ"])
@pytest.mark.parametrize("sites", [(0, 1), (1, 0), (0, 3), (2, 1)])
def test_pauli_pair_matches_kron(kind, sites):
    rng = np.random.default_rng(7)
    s = random_state(4, rng)
    op = site_operator(4, {sites[0]: PAULI[kind[0]], sites[1]: PAULI[kind[0]]})
    expected = np.vdot(s.amplitudes, op @ s.amplitudes).real
    got = expectation_pauli_pair(s, PauliPairTerm(kind, *sites, coefficient=0.7))
    assert got == pytest.approx(0.7 * expected, abs=1e-12)


def test_chain_hamiltonian_structure():
    h = chain_hamiltonian(ChainConfig(5, coupling=3.0))
    assert len(h.terms) == 15
    assert {t.coefficient for t in h.terms} == {-1.5}
    assert {(t.site_i, t.site_j) for t in h.terms} == {(n, (n + 1) % 5) for n in range(5)}


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_apply_hamiltonian_matches_matrix(n):
    rng = np.random.default_rng(n)
    s = random_state(n, rng)
    h = chain_hamiltonian(ChainConfig(n, coupling=1.3))
    np.testing.assert_allclose(apply_hamiltonian(s, h), chain_matrix(n, 1.3) @ s.amplitudes, atol=1e-12)


def test_ground_state_energy_zero():
    for n in (2, 5, 8):
        c = ChainConfig(n)
        e = expectation_hamiltonian(zero_state(n), chain_hamiltonian(c))
        assert e == pytest.approx(-n / 2)
        assert dimensionless_energy(e, c) == pytest.approx(0, abs=1e-12)


def test_hamiltonian_size_mismatch():
    with pytest.raises(SizeMismatch):
        expectation_hamiltonian(zero_state(3), chain_hamiltonian(ChainConfig(4)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.lists(st.tuples(st.integers(0, 5), angles, angles), min_size=1, max_size=20))
def test_norm_preserved(n, ops):
    s = zero_state(n)
    for site, theta, phi in ops:
        s = apply_y_rotation(s, site % n, theta)
        s = apply_z_rotation(s, site % n, phi)
    assert abs(s.norm_squared() - 1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 4), angles, angles, st.integers(0, 2**32 - 1))
def test_z_rotation_composition(n, site, phi1, phi2, seed):
    site %= n
    s = random_state(n, np.random.default_rng(seed))
    two = apply_z_rotation(apply_z_rotation(s, site, phi1), site, phi2).amplitudes
    one = apply_z_rotation(s, site, phi1 + phi2).amplitudes
    k = np.argmax(abs(one))
    # align global phase, then compare everything
    np.testing.assert_allclose(two * (one[k] / two[k]) / abs(one[k] / two[k]), one, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1))
def test_hamiltonian_expectation_real(n, seed):
    s = random_state(n, np.random.default_rng(seed))
    h = chain_hamiltonian(ChainConfig(n))
    value = np.vdot(s.amplitudes, apply_hamiltonian(s, h))
    assert abs(value.imag) < 1e-12
    assert expectation_hamiltonian(s, h) == pytest.approx(value.real, abs=1e-12)


def test_imaginary_residue_is_reported():
    bell = DenseState(2, np.array([1, 0, 0, 1]) / math.sqrt(2))
    with pytest.raises(Exception, match="imaginary residue"):
        expectation_pauli_pair(bell, PauliPairTerm("XX", 0, 1, coefficient=1j))


def test_dump_round_trip(tmp_path):
    s = random_state(5, np.random.default_rng(3))
    path = tmp_path / "state.bin"
    dump_state(s, path)
    raw = path.read_bytes()
    assert int.from_bytes(raw[:8], "little") == 5
    assert len(raw) == 8 + 16 * 32
    np.testing.assert_array_equal(load_state(path).amplitudes, s.amplitudes)
