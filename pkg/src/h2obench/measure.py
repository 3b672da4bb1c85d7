"""Direct energy measurement from ancilla statistics of an H/A block encoding.

After U_r' on |0>_a|psi> with psi an eigenvector of H, the all-zero ancilla
outcome has probability |E/A|^2. Sampling that outcome estimates |E|.
For non-Hermitian H the phase of E follows from two more runs on shifted
operators H + |E| I and H + i|E| I:

    |E + |E|| = 2|E| |cos(theta/2)|   =>  cos theta = (m/|E|)^2 / 2 - 1
    |E + i|E|| = |E| sqrt(2 + 2 sin theta)  =>  sin theta = (m/|E|)^2 / 2 - 1
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .lcu import build_direct_encoding
from .pauli import PauliHamiltonian, PauliString, one_norm
from .statevector import StateVector, rng_stream, sample_measurement


@dataclass(frozen=True)
class ShotEstimate:
    """Point estimate with its predicted standard error.

    ``sigma`` follows |E| sqrt(1 - E^2/A^2) / sqrt(X). ``sigma_delta`` is
    the first-order propagation of binomial noise through A sqrt(f), which
    is (A/2) sqrt(1 - E^2/A^2) / sqrt(X). The two differ by 2|E|/A.
    """

    estimate: float
    shots: int | None
    sigma: float
    sigma_delta: float
    probability: float

    @property
    def interval(self) -> tuple[float, float]:
        return (self.estimate - 4 * self.sigma, self.estimate + 4 * self.sigma)


def zero_ancilla_amplitude(H: PauliHamiltonian, psi: StateVector) -> tuple[complex, float, float]:
    """(<0,psi|U_r'|0,psi>, all-zero ancilla probability, A) for U' = H/A."""
    enc = build_direct_encoding(H)
    if psi.n != enc.n:
        raise ValueError(f"state has {psi.n} qubits, Hamiltonian has {enc.n}")
    ns = 1 << enc.n
    x = np.zeros(enc.dim, dtype=complex)
    x[:ns] = psi.amplitudes
    y = enc.ur()(x)
    return complex(np.vdot(psi.amplitudes, y[:ns])), float(np.vdot(y[:ns], y[:ns]).real), one_norm(H)


def _ancilla_frequency(H: PauliHamiltonian, psi: StateVector, shots: int, seed) -> tuple[float, float]:
    enc = build_direct_encoding(H)
    ns = 1 << enc.n
    x = np.zeros(enc.dim, dtype=complex)
    x[:ns] = psi.amplitudes
    state = StateVector(enc.ur()(x))
    hist = sample_measurement(state, range(enc.m), shots, seed)
    p = float(np.vdot(state.amplitudes[:ns], state.amplitudes[:ns]).real)
    return hist.get(0, 0) / shots, p


def estimate_abs_energy(H: PauliHamiltonian, psi: StateVector, shots: int | None = None,
                        seed: int | np.random.Generator | None = None,
                        reference: float | None = None) -> ShotEstimate:
    """Estimate |E| for an eigenvector psi; ``shots=None`` reads the amplitude.

    ``reference`` is the |E| used in the predicted sigma (oracle value when
    available, otherwise the estimate itself).
    """
    if shots is not None and shots < 1:
        raise ValueError("shots must be positive")
    A = one_norm(H)
    if shots is None:
        amp, p, _ = zero_ancilla_amplitude(H, psi)
        return ShotEstimate(float(A * abs(amp)), None, 0.0, 0.0, p)
    freq, p = _ancilla_frequency(H, psi, shots, seed)
    est = A * math.sqrt(freq)
    e = float(abs(reference)) if reference is not None else est
    eta2 = min((e / A) ** 2, 1.0)
    sigma = e * math.sqrt(1 - eta2) / math.sqrt(shots)
    sigma_delta = (A / 2) * math.sqrt(1 - eta2) / math.sqrt(shots)
    return ShotEstimate(est, shots, sigma, sigma_delta, p)


@dataclass(frozen=True)
class PhaseEstimate:
    cos_theta: float
    sin_theta: float
    sigma_cos: float
    sigma_sin: float
    abs_energy: float

    @property
    def theta(self) -> float:
        return math.atan2(self.sin_theta, self.cos_theta)

    @property
    def energy(self) -> complex:
        return self.abs_energy * cmath.exp(1j * self.theta)


def _shift(H: PauliHamiltonian, c: complex) -> PauliHamiltonian:
    return H + PauliHamiltonian([(c, PauliString.identity(H.n))])


def _trig_from_run(H2: PauliHamiltonian, psi: StateVector, absE: float, shots: int | None, rng
                   ) -> tuple[float, float]:
    """(value, binomial sigma) of (m/|E|)^2/2 - 1 with m measured on H2."""
    A2 = one_norm(H2)
    if shots is None:
        amp, _, _ = zero_ancilla_amplitude(H2, psi)
        m2 = (A2 * abs(amp)) ** 2
        return m2 / (2 * absE**2) - 1, 0.0
    freq, p = _ancilla_frequency(H2, psi, shots, rng)
    k = A2**2 / (2 * absE**2)
    return k * freq - 1, k * math.sqrt(p * (1 - p) / shots)


def estimate_complex_phase(H: PauliHamiltonian, absE: float, psi: StateVector, shots: int | None = None,
                           seed: int | None = None, sigma_abs: float = 0.0) -> PhaseEstimate:
    """cos theta and sin theta of E = |E| e^{i theta} from the shifted runs.

    ``sigma_abs`` is the standard error of ``absE``; it enters the predicted
    errors through d(value)/d|E| = (1 + value)/|E|.
    """
    if absE <= 0:
        raise ValueError("|E| must be positive")
    c, sc = _trig_from_run(_shift(H, absE), psi, absE, shots, None if shots is None else rng_stream(seed, 1))
    s, ss = _trig_from_run(_shift(H, 1j * absE), psi, absE, shots, None if shots is None else rng_stream(seed, 2))
    sc = math.hypot(sc, (1 + c) / absE * sigma_abs)
    ss = math.hypot(ss, (1 + s) / absE * sigma_abs)
    return PhaseEstimate(float(c), float(s), sc, ss, float(absE))


def estimate_complex_energy(H: PauliHamiltonian, psi: StateVector, shots: int | None = None,
                            seed: int | None = None) -> tuple[ShotEstimate, PhaseEstimate]:
    """Full three-run protocol; the |E| run uses stream 0 of ``seed``."""
    mag = estimate_abs_energy(H, psi, shots, None if shots is None else rng_stream(seed, 0))
    phase = estimate_complex_phase(H, mag.estimate, psi, shots, seed, mag.sigma_delta)
    return mag, phase


__all__ = [
    "ShotEstimate", "PhaseEstimate", "zero_ancilla_amplitude", "estimate_abs_energy",
    "estimate_complex_phase", "estimate_complex_energy",
]
