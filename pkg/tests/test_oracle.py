import numpy as np
import pytest

from conftest import kron_dense
from h2obench.oracle import (RESONANCE_FIXTURE, RESONANCE_GUESS, NonHermitianError, ResonanceModel,
                             build_resonance_model, complex_scale, eigensolve_general, eigensolve_hermitian,
                             residuals, resonance_eigenpair, resonance_hamiltonian, resonance_scan)
from h2obench.pauli import PauliHamiltonian, to_dense
from h2obench.statevector import StateVector, expectation


def test_small_hermitian_examples():
    np.testing.assert_allclose(eigensolve_hermitian(PauliHamiltonian([(1.0, "Z")])).values, [-1, 1])
    np.testing.assert_allclose(eigensolve_hermitian(PauliHamiltonian([(0.5, "X")])).values, [-0.5, 0.5])


def test_fixture_spectrum(water, water_spectrum):
    assert water_spectrum.values.shape == (64,)
    assert np.max(residuals(to_dense(water), water_spectrum)) <= 1e-9
    ref = np.linalg.eigvalsh(kron_dense(water.sorted_terms()))
    np.testing.assert_allclose(water_spectrum.values, ref, atol=1e-10)
    assert water_spectrum.values[0] == pytest.approx(-74.97323201, abs=5e-8)


def test_ground_energy_matches_expectation(water, water_spectrum):
    e = expectation(StateVector(water_spectrum.state(0)), water)
    assert e.real == pytest.approx(water_spectrum.values[0], abs=1e-10)


def test_non_hermitian_routed_elsewhere():
    with pytest.raises(NonHermitianError):
        eigensolve_hermitian(PauliHamiltonian([(1j, "Z")]))


def test_general_examples():
    np.testing.assert_allclose(eigensolve_general(np.array([[0, 1], [0, 0]])).values, [0, 0])
    np.testing.assert_allclose(eigensolve_general(np.diag([1, 1j])).values, [1j, 1])
    with pytest.raises(ValueError):
        eigensolve_general(np.zeros((2, 3)))


def test_general_residuals():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    spec = eigensolve_general(M)
    assert np.max(residuals(M, spec)) < 1e-10
    assert np.all(np.diff(spec.values.real) >= 0)


def test_potential_with_zero_depth():
    model = ResonanceModel(a=1e-6, J=0.0)
    assert model.potential(np.array([0.0]))[0] == 0.0
    assert np.all(model.potential(model.grid) >= 0)


def test_unscaled_matrix_is_hermitian():
    M = build_resonance_model(0.1, 0.8)
    np.testing.assert_array_equal(M, M.T)
    assert np.isrealobj(M)


def test_free_particle_box():
    model = ResonanceModel(a=0.1, J=0.0, x_max=10.0, points=256)
    w = np.linalg.eigvalsh(model.kinetic())[:3]
    k = np.arange(1, 4) * np.pi / (2 * model.x_max)
    np.testing.assert_allclose(w, k**2 / 2, rtol=1e-3)


def test_zero_angle_scaling_is_identity():
    model = RESONANCE_FIXTURE
    np.testing.assert_allclose(complex_scale(model, 1.0, 0.0), build_resonance_model(model.a, model.J), atol=1e-14)
    assert np.max(np.abs(np.linalg.eigvals(complex_scale(model, 1.0, 0.0)).imag)) < 1e-10


def test_resonance_is_stable_under_theta():
    scan = resonance_scan(RESONANCE_FIXTURE, np.linspace(0.25, 0.35, 11), near=RESONANCE_GUESS)
    vals = np.array([e for _, e in scan])
    assert np.all(vals.imag < 0)
    mid = vals[5]
    assert np.max(np.abs(vals - mid)) / abs(mid) < 0.01


def test_resonance_eigenpair_and_pauli_form():
    E, v = resonance_eigenpair()
    M = complex_scale(RESONANCE_FIXTURE, 1.0, 0.3)
    assert np.linalg.norm(M @ v - E * v) < 1e-10
    assert np.linalg.norm(v) == pytest.approx(1.0)
    assert E.imag < 0
    H = resonance_hamiltonian()
    assert H.n == 6
    np.testing.assert_allclose(to_dense(H), M, atol=1e-12)


def test_model_validation():
    with pytest.raises(ValueError):
        ResonanceModel(a=0.1, J=0.8, points=4)
    with pytest.raises(ValueError):
        ResonanceModel(a=0.1, J=0.8, x_max=0.0)
    with pytest.raises(ValueError):
        complex_scale(RESONANCE_FIXTURE, 0.0, 0.3)
