import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from h2obench.lcu import amplified, build_lcu_first_order, build_second_order, choose_kappa, choose_t
from h2obench.pauli import PauliHamiltonian, one_norm, pauli_decompose, to_dense
from h2obench.pea import (ParameterError, PeaConfig, decode_direct1, decode_direct2, decode_trotter, direct1_bits,
                          direct1_budget_bits, direct2_bits, direct2_budget_bits, direct2_phase, direct_pea1,
                          forward_iterative_pea, pea_circuit_probability, trotter_pea, trotter_step, wrap)
from h2obench.statevector import StateVector, dense_applier, krylov_reduce, phase_applier


def global_phase(n: int, phi: float):
    """U = e^{i 2 pi phi} on n qubits."""
    return phase_applier(n, 2 * math.pi * phi)


def expm_hermitian(M: np.ndarray, t: float) -> np.ndarray:
    w, V = np.linalg.eigh(M)
    return (V * np.exp(-1j * w * t)) @ V.conj().T


def bits_of(phi: float, D: int) -> tuple[int, ...]:
    return tuple(int(math.floor(phi * 2 ** (k + 1))) % 2 for k in range(D))


def test_dyadic_phase_bits():
    res = forward_iterative_pea(global_phase(1, 0.625), StateVector.zero(1), PeaConfig(3))
    assert res.bits == (1, 0, 1)
    assert res.phase == 0.625


def test_negative_rotation_reads_complement():
    # e^{-i 2 pi 0.101b} has phase fraction 1 - 0.625 = 0.011b
    res = forward_iterative_pea(global_phase(1, -0.625), StateVector.zero(1), PeaConfig(3))
    assert res.bits == (0, 1, 1)


def test_zero_phase_bits():
    res = forward_iterative_pea(global_phase(2, 0.0), StateVector.zero(2), PeaConfig(8))
    assert res.bits == (0,) * 8


@pytest.mark.parametrize("phi", [k / 16 for k in range(16)])
def test_all_four_bit_dyadics_exact(phi):
    res = forward_iterative_pea(global_phase(1, phi), StateVector.zero(1), PeaConfig(4))
    assert res.phase == phi


def test_bit_decision_law_64_phases():
    rng = np.random.default_rng(64)
    psi = StateVector.zero(1)
    for phi in rng.uniform(0, 1, 64):
        U = global_phase(1, phi)
        for k in range(3):
            frac = (phi * 2**k) % 1
            # ancilla-0 amplitude (1 + e^{i 2 pi (frac - 1/4)}) / 2
            p1_model = 1 - abs(1 + np.exp(2j * math.pi * (frac - 0.25))) ** 2 / 4
            p1_circuit = pea_circuit_probability(U, psi, k)
            assert p1_circuit == pytest.approx(p1_model, abs=1e-12)
            if abs(frac - 0.5) > 1e-9 and frac > 1e-9:
                assert (p1_circuit > 0.5) == (0.5 < frac < 1)


@given(st.floats(0, 1, exclude_max=True), st.integers(1, 10))
@settings(max_examples=60, deadline=None)
def test_exact_readout_truncates(phi, D):
    res = forward_iterative_pea(global_phase(1, phi), StateVector.zero(1), PeaConfig(D))
    # exact mode reads each bit from frac(2^k phi), i.e. MSB-first truncation
    assert res.bits == bits_of(phi, D) or min(abs(phi * 2**j - round(phi * 2**j)) for j in range(1, D + 1)) < 1e-9


def test_circuit_matches_amplitude_shortcut(water, ground):
    _, psi = ground
    U = trotter_step(water.without_identity(), 0.05)
    res = forward_iterative_pea(U, psi, PeaConfig(4))
    for k in range(4):
        p1 = pea_circuit_probability(U, psi, k)
        assert p1 - 0.5 == pytest.approx(res.margins[k], abs=1e-10)


def test_exact_propagator_on_fixture(water, ground):
    E0, psi = ground
    t = 0.04  # |E0| t < pi, so the full spectrum needs no offset
    U = dense_applier(expm_hermitian(to_dense(water), t))
    res = forward_iterative_pea(U, psi, PeaConfig(12))
    assert abs(decode_trotter(res.phase, t) - E0) <= 2 * math.pi * 2**-12 / t


@pytest.mark.parametrize("strategy", ["dense", "krylov", "repeat"])
def test_power_strategies_agree(strategy):
    rng = np.random.default_rng(7)
    H = pauli_decompose(np.diag(rng.uniform(-1, 1, 8)) + 0.1 * np.ones((8, 8)))
    w, V = np.linalg.eigh(to_dense(H))
    U = trotter_step(H, 0.3, order=2)
    psi = StateVector(V[:, 0])
    ref = forward_iterative_pea(U, psi, PeaConfig(9, strategy="dense"))
    res = forward_iterative_pea(U, psi, PeaConfig(9, strategy=strategy))
    assert res.bits == ref.bits
    np.testing.assert_allclose(res.margins, ref.margins, atol=1e-9)


def test_sampled_mode_is_reproducible_and_votes():
    U = global_phase(1, 0.3)
    cfg = PeaConfig(6, shots_per_bit=101, seed=11)
    a = forward_iterative_pea(U, StateVector.zero(1), cfg)
    b = forward_iterative_pea(U, StateVector.zero(1), cfg)
    assert a == b
    assert not cfg.exact
    # with 101 votes the clear-cut leading bits match the exact readout
    assert a.bits[:2] == bits_of(0.3, 2)


def test_config_validation():
    with pytest.raises(ValueError):
        PeaConfig(0)
    with pytest.raises(ValueError):
        PeaConfig(4, shots_per_bit=10)
    with pytest.raises(ValueError):
        PeaConfig(4, strategy="fast")


# ---- Trotter propagator ----


def test_single_term_step_is_exact():
    H = PauliHamiltonian([(0.5, "Z")])
    for t in (0.1, 1.3):
        np.testing.assert_allclose(trotter_step(H, t).dense(), expm_hermitian(to_dense(H), t), atol=1e-14)


def test_commuting_terms_are_exact():
    H = PauliHamiltonian([(0.7, "ZI"), (-0.4, "IZ"), (0.2, "ZZ")])
    np.testing.assert_allclose(trotter_step(H, 0.9).dense(), expm_hermitian(to_dense(H), 0.9), atol=1e-14)


def test_second_order_is_more_accurate(water):
    H = water.without_identity()
    exact = expm_hermitian(to_dense(H), 0.05)
    e1 = np.linalg.norm(trotter_step(H, 0.05, 1).dense() - exact, 2)
    e2 = np.linalg.norm(trotter_step(H, 0.05, 2).dense() - exact, 2)
    assert e2 < e1 / 5


def test_first_order_error_is_quadratic_in_t(water):
    H = water.without_identity()
    M = to_dense(H)
    errs = [np.linalg.norm(trotter_step(H, t).dense() - expm_hermitian(M, t), 2) for t in (0.02, 0.01)]
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.1)


def test_step_adjoint_inverts(water):
    U = trotter_step(water, 0.05)
    v = np.random.default_rng(0).normal(size=64) + 0j
    np.testing.assert_allclose(U.dag()(U(v)), v, atol=1e-12)


# ---- decoders ----


def test_wrap():
    assert wrap(0.0) == 0.0
    assert wrap(0.5) == 0.5
    assert wrap(0.75) == -0.25
    assert wrap(1.25) == 0.25


def test_decode_trotter_examples():
    assert decode_trotter(0.0, 0.3) == 0.0
    assert decode_trotter(0.25, 1.0) == pytest.approx(-math.pi / 2)
    assert decode_trotter(0.875, 0.01) == pytest.approx(2 * math.pi * 0.125 / 0.01)


def test_decode_direct1_examples():
    assert decode_direct1(0.0, 10.0) == 0.0
    phi = -math.atan(1 / 10) / (2 * math.pi)
    assert decode_direct1(phi % 1, 10.0) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ParameterError):
        decode_direct1(0.3, 10.0)


def test_decode_direct2_round_trip():
    assert decode_direct2(0.0, 0.2, 1.0) == pytest.approx(0.0, abs=1e-10)
    enc = build_second_order(PauliHamiltonian([(1.0, "Z")]), 0.2)
    b = enc.block()[0, 0]
    phi = (np.angle(b) / (2 * math.pi)) % 1
    assert direct2_phase(1.0, 0.2, 1.0) % 1 == pytest.approx(phi, abs=1e-12)
    assert decode_direct2(phi, 0.2, 1.0) == pytest.approx(1.0, abs=1e-9)


@given(st.floats(-1, 1))
def test_decode_direct2_inverts_phase(e):
    t, A = choose_t(3), 1.0
    assert decode_direct2(direct2_phase(e, t, A) % 1, t, A) == pytest.approx(e, abs=1e-9)


# ---- bit budgets and leakage ----


def test_bit_budgets_round_up_closed_form(water):
    A = one_norm(water)
    assert direct1_bits(A, 4) == 7 == math.ceil(direct1_budget_bits(4))
    assert direct1_bits(A, 8) == 11 == math.ceil(direct1_budget_bits(8))
    assert direct1_budget_bits(8) == pytest.approx(-1.81 + 12, abs=0.01)
    assert direct2_bits(A, 2) == 14
    assert direct2_bits(A, 3) == 21
    assert direct2_budget_bits(3) > direct2_budget_bits(2)


def _population_after(U, x, reps_log2):
    red = krylov_reduce(U, x)
    assert red is not None and red.residual < 1e-9
    coords = red.basis.conj().T @ x
    y = np.linalg.matrix_power(red.matrix, 2**reps_log2) @ coords
    return abs(np.vdot(coords, y)) ** 2


@pytest.mark.parametrize("N", [4, 8])
def test_first_order_leakage_stays_below_one_eighth(water, ground, N):
    _, psi = ground
    A = one_norm(water)
    D = direct1_bits(A, N)
    enc = build_lcu_first_order(water, choose_kappa(A, N))
    x = np.zeros(enc.dim, dtype=complex)
    x[:64] = psi.amplitudes
    assert _population_after(amplified(enc, N), x, D) >= 7 / 8


def test_pipeline_populations_recorded(water, ground):
    E0, psi = ground
    run = direct_pea1(water, psi, 4)
    assert run.phase.D == 7
    assert min(run.phase.populations) >= 7 / 8


def test_trotter_pipeline_offset(water, ground):
    E0, psi = ground
    run = trotter_pea(water, psi, 0.05, 10)
    assert run.params["offset"] == pytest.approx(-72.008089)
    assert abs(run.energy - E0) < 0.5


def test_sampled_trotter_pipeline_close_to_exact(water, ground):
    E0, psi = ground
    exact = trotter_pea(water, psi, 0.05, 10)
    sampled = trotter_pea(water, psi, 0.05, 10, shots_per_bit=101, seed=3)
    assert abs(sampled.energy - exact.energy) <= 2 * 2 * math.pi * 2**-10 / 0.05
