import math

import numpy as np
import pytest

from h2obench.measure import (estimate_abs_energy, estimate_complex_energy, estimate_complex_phase,
                              zero_ancilla_amplitude)
from h2obench.oracle import eigensolve_general, resonance_eigenpair, resonance_hamiltonian
from h2obench.pauli import PauliHamiltonian, one_norm, pauli_decompose, to_dense
from h2obench.statevector import StateVector


def test_full_magnitude_single_term():
    H = PauliHamiltonian([(2.0, "Z")])
    psi = StateVector.zero(1)
    exact = estimate_abs_energy(H, psi)
    assert exact.estimate == pytest.approx(2.0) and exact.probability == pytest.approx(1.0)
    sampled = estimate_abs_energy(H, psi, 1000, seed=0)
    assert sampled.estimate == pytest.approx(2.0)


def test_half_probability_case():
    H = PauliHamiltonian([(0.5, "X"), (0.5, "Z")])
    w, V = np.linalg.eigh(to_dense(H))
    res = estimate_abs_energy(H, StateVector(V[:, 1]))
    assert res.probability == pytest.approx(0.5, abs=1e-12)
    assert res.estimate == pytest.approx(1 / math.sqrt(2), abs=1e-12)


def test_zero_shots_rejected():
    with pytest.raises(ValueError):
        estimate_abs_energy(PauliHamiltonian([(1.0, "Z")]), StateVector.zero(1), 0)


def test_amplitude_is_e_over_a(water, water_spectrum):
    A = one_norm(water)
    for k in range(7):
        amp, p, _ = zero_ancilla_amplitude(water, StateVector(water_spectrum.state(k)))
        assert abs(amp - water_spectrum.values[k] / A) <= 1e-10
        assert p == pytest.approx((water_spectrum.values[k] / A) ** 2, abs=1e-10)


def test_sigma_forms(water, ground):
    E0, psi = ground
    A = one_norm(water)
    res = estimate_abs_energy(water, psi, 10**6, seed=0, reference=E0)
    eta = abs(E0) / A
    assert res.sigma == pytest.approx(abs(E0) * math.sqrt(1 - eta**2) / 1e3)
    assert res.sigma / res.sigma_delta == pytest.approx(2 * eta)
    lo, hi = res.interval
    assert lo < res.estimate < hi


def test_error_shrinks_with_shots(water, ground):
    E0, psi = ground
    rms = []
    for X in (10**4, 10**5, 10**6):
        errs = []
        for seed in range(12):
            r = estimate_abs_energy(water, psi, X, seed=seed, reference=E0)
            assert abs(r.estimate - abs(E0)) <= 4 * r.sigma_delta
            errs.append(r.estimate - abs(E0))
        rms.append(math.sqrt(np.mean(np.square(errs))))
    # 1/sqrt(X) scaling within sampling slack on the rms of 12 runs
    for a, b in zip(rms, rms[1:]):
        assert 0.1 < b / a < 0.8


def test_hermitian_negative_energy_phase(water, ground):
    E0, psi = ground
    ph = estimate_complex_phase(water, abs(E0), psi)
    assert ph.cos_theta == pytest.approx(-1.0, abs=1e-10)
    assert ph.energy == pytest.approx(E0, abs=1e-8)


def test_triangular_eigenvalue_i():
    M = np.array([[1j, 1.0], [0.0, 2.0]])
    H = pauli_decompose(M)
    psi = StateVector(np.array([1.0, 0.0]))
    mag, ph = estimate_complex_energy(H, psi)
    assert mag.estimate == pytest.approx(1.0, abs=1e-12)
    assert ph.cos_theta == pytest.approx(0.0, abs=1e-12)
    assert ph.sin_theta == pytest.approx(1.0, abs=1e-12)
    assert ph.energy == pytest.approx(1j, abs=1e-12)


def test_zero_magnitude_rejected():
    with pytest.raises(ValueError):
        estimate_complex_phase(PauliHamiltonian([(1.0, "Z")]), 0.0, StateVector.zero(1))


@pytest.mark.parametrize("n", [1, 2])
def test_synthetic_shot_protocol(n):
    rng = np.random.default_rng(100 + n)
    d = 1 << n
    M = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    spec = eigensolve_general(M)
    for k in range(d):
        E = complex(spec.values[k])
        v = spec.state(k) / np.linalg.norm(spec.state(k))
        mag, ph = estimate_complex_energy(pauli_decompose(M), StateVector(v), 10**6, seed=k)
        assert abs(mag.estimate - abs(E)) <= 4 * mag.sigma_delta
        assert abs(ph.cos_theta - E.real / abs(E)) <= 4 * ph.sigma_cos
        assert abs(ph.sin_theta - E.imag / abs(E)) <= 4 * ph.sigma_sin


def test_resonance_imaginary_part():
    E, v = resonance_eigenpair()
    H = resonance_hamiltonian()
    mag, ph = estimate_complex_energy(H, StateVector(v), 10**8, seed=5)
    # Im E = |E| sin(theta); propagate both errors
    sigma_im = math.hypot(mag.sigma_delta * abs(ph.sin_theta), abs(E) * ph.sigma_sin)
    assert abs(ph.energy.imag - E.imag) <= 4 * sigma_im
    assert abs(mag.estimate - abs(E)) <= 4 * mag.sigma_delta


def test_shot_runs_are_reproducible():
    H = pauli_decompose(np.array([[1j, 1.0], [0.0, 2.0]]))
    psi = StateVector(np.array([1.0, 0.0]))
    assert estimate_complex_energy(H, psi, 1000, 3) == estimate_complex_energy(H, psi, 1000, 3)
