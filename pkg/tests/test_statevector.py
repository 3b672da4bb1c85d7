import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from h2obench.pauli import PauliString
from h2obench.statevector import (H, X, StateVector, apply_cnot, apply_controlled, apply_single, controlled,
                                  dense_applier, expectation, krylov_reduce, pauli_applier, phase_applier, power,
                                  rx, ry, rz, sample_measurement, sequence)

PLUS = StateVector(np.array([1, 1]) / np.sqrt(2))


def random_state(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(v / np.linalg.norm(v))


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_x_flips_zero():
    np.testing.assert_allclose(apply_single(StateVector.zero(1), X, 0).amplitudes, [0, 1])


def test_hadamard_involution():
    s = apply_single(apply_single(StateVector.zero(1), H, 0), H, 0)
    np.testing.assert_allclose(s.amplitudes, [1, 0], atol=1e-15)


def test_rz_phases():
    out = apply_single(PLUS, rz(-np.pi / 2), 0).amplitudes * np.sqrt(2)
    ratio = out[1] / out[0]
    assert ratio == pytest.approx(np.exp(-1j * np.pi / 2))
    np.testing.assert_allclose(out, [np.exp(1j * np.pi / 4), np.exp(-1j * np.pi / 4)])


def test_rotation_matrices_are_exponentials():
    for gate, P in ((rx, X), (ry, np.array([[0, -1j], [1j, 0]])), (rz, np.diag([1, -1]))):
        th = 0.37
        np.testing.assert_allclose(gate(th), np.cos(th / 2) * np.eye(2) - 1j * np.sin(th / 2) * P, atol=1e-15)


def test_controlled_off_branch_unchanged():
    rng = np.random.default_rng(1)
    psi = random_state(rng, 2)
    s = StateVector.zero(1).tensor(psi)
    out = apply_controlled(s, dense_applier(random_unitary(rng, 4)), 0)
    np.testing.assert_allclose(out.amplitudes, s.amplitudes)


def test_cnot_as_controlled_x():
    s = StateVector.basis(2, 0b10)
    np.testing.assert_allclose(apply_controlled(s, dense_applier(X), 0).amplitudes, StateVector.basis(2, 3).amplitudes)
    np.testing.assert_allclose(apply_cnot(s, 0, 1).amplitudes, StateVector.basis(2, 3).amplitudes)


def test_phase_kickback():
    theta = 0.7
    psi = random_state(np.random.default_rng(2), 2)
    out = apply_controlled(PLUS.tensor(psi), phase_applier(2, theta), 0).amplitudes.reshape(2, 4)
    rel = np.vdot(out[0], out[1]) / np.vdot(out[0], out[0])
    assert rel == pytest.approx(np.exp(1j * theta))


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_gates_preserve_norm(n, seed):
    rng = np.random.default_rng(seed)
    s = random_state(rng, n)
    for q in range(n):
        s = apply_single(s, rx(rng.uniform(0, 6)) @ rz(rng.uniform(0, 6)), q)
    if n > 1:
        s = apply_cnot(s, 0, n - 1)
    assert s.norm() == pytest.approx(1.0, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_apply_single_matches_kron(seed):
    rng = np.random.default_rng(seed)
    s = random_state(rng, 3)
    g = random_unitary(rng, 2)
    q = int(rng.integers(3))
    full = np.kron(np.kron(np.eye(1 << q), g), np.eye(1 << (2 - q)))
    np.testing.assert_allclose(apply_single(s, g, q).amplitudes, full @ s.amplitudes, atol=1e-12)


def test_expectation_ground(water, water_spectrum):
    psi = StateVector(water_spectrum.state(0))
    e = expectation(psi, water)
    assert abs(e.imag) <= 1e-10
    assert e.real == pytest.approx(water_spectrum.values[0], abs=1e-9)


def test_sampling_examples():
    assert sample_measurement(StateVector.zero(1), [0], 100, seed=0) == {0: 100}
    hist = sample_measurement(PLUS, [0], 10**6, seed=1)
    assert abs(hist.get(0, 0) / 10**6 - 0.5) <= 0.002


def test_sampling_is_reproducible():
    s = random_state(np.random.default_rng(3), 3)
    assert sample_measurement(s, [2, 0], 1000, seed=5) == sample_measurement(s, [2, 0], 1000, seed=5)


def test_probability_marginal_order():
    s = StateVector.basis(3, 0b100)
    np.testing.assert_allclose(s.probabilities([0]), [0, 1])
    np.testing.assert_allclose(s.probabilities([2, 0]), [0, 1, 0, 0])


def test_power_and_sequence():
    rng = np.random.default_rng(4)
    U = random_unitary(rng, 8)
    V = random_unitary(rng, 8)
    v = random_state(rng, 3).amplitudes
    np.testing.assert_allclose(power(dense_applier(U), 5)(v), np.linalg.matrix_power(U, 5) @ v, atol=1e-12)
    # first argument acts first
    np.testing.assert_allclose(sequence(dense_applier(U), dense_applier(V))(v), V @ U @ v, atol=1e-12)
    np.testing.assert_allclose(dense_applier(U).dag()(U @ v), v, atol=1e-12)


def test_controlled_matrix():
    U = random_unitary(np.random.default_rng(5), 2)
    c = controlled(dense_applier(U)).dense()
    expected = np.block([[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), U]])
    np.testing.assert_allclose(c, expected, atol=1e-15)


def test_pauli_applier_phase():
    p = PauliString("XY")
    v = np.arange(4) + 1j
    np.testing.assert_allclose(pauli_applier(p, -1j)(v), -1j * (p.to_dense() @ v))


def test_krylov_reduction_is_invariant():
    rng = np.random.default_rng(6)
    # unitary with a small invariant subspace containing the start vector
    Q = random_unitary(rng, 16)
    D = np.diag(np.exp(1j * rng.uniform(0, 6, 16)))
    U = Q @ D @ Q.conj().T
    start = Q[:, :3] @ np.array([0.6, 0.8j, 0.0])
    red = krylov_reduce(dense_applier(U), start)
    assert red.basis.shape[1] == 2
    np.testing.assert_allclose(red.basis @ red.matrix, U @ red.basis, atol=1e-10)
