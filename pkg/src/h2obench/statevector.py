"""Statevector substrate: states, operator appliers and measurement sampling.

Basis convention: qubit 0 is the most significant bit of the index, so
``|q0 q1 ... q_{n-1}>`` has index ``q0 * 2**(n-1) + ... + q_{n-1}``.
Registers are concatenated left to right, e.g. ``|ctrl>|ancilla>|system>``.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .pauli import PauliHamiltonian, PauliString

NORM_TOL = 1e-10
DENSE_POWER_CAP = 10  # qubits; above this U^(2^k) is never materialised

Action = Callable[[np.ndarray], np.ndarray]

# ---- gate matrices -------------------------------------------------------

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


# ---- state ---------------------------------------------------------------


class StateVector:
    """2**n complex amplitudes. Operations return new states."""

    __slots__ = ("n", "amplitudes")

    def __init__(self, amplitudes: np.ndarray, n: int | None = None):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        dim = amps.shape[0]
        k = dim.bit_length() - 1
        if (1 << k) != dim:
            raise ValueError(f"state dimension {dim} is not a power of two")
        if n is not None and n != k:
            raise ValueError(f"{dim} amplitudes do not describe {n} qubits")
        self.n = k
        self.amplitudes = amps

    @classmethod
    def zero(cls, n: int) -> StateVector:
        amps = np.zeros(1 << n, dtype=complex)
        amps[0] = 1
        return cls(amps)

    @classmethod
    def basis(cls, n: int, index: int) -> StateVector:
        amps = np.zeros(1 << n, dtype=complex)
        amps[index] = 1
        return cls(amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> StateVector:
        return StateVector(self.amplitudes / self.norm())

    def tensor(self, other: StateVector) -> StateVector:
        """self (left, more significant) tensor other."""
        return StateVector(np.kron(self.amplitudes, other.amplitudes))

    def probabilities(self, qubits: Sequence[int]) -> np.ndarray:
        """Born marginal over ``qubits``; outcome index uses their given order."""
        qubits = list(qubits)
        p = np.abs(self.amplitudes.reshape((2,) * self.n)) ** 2
        rest = tuple(q for q in range(self.n) if q not in qubits)
        p = p.sum(axis=rest) if rest else p
        # remaining axes are sorted ascending; reorder to the requested order
        order = sorted(qubits)
        p = np.transpose(p, [order.index(q) for q in qubits])
        return p.reshape(-1)

    def __repr__(self) -> str:
        return f"StateVector(n={self.n})"


# ---- appliers ------------------------------------------------------------


@dataclass(frozen=True)
class OperatorApplier:
    """An action on an ``n``-qubit register.

    ``action`` maps an array of shape (2**n, k) to the same shape, one column
    per batched state. ``adjoint_action`` is optional; dense appliers derive
    it from the matrix.
    """

    n: int
    action: Action
    unitary: bool = True
    adjoint_action: Action | None = None
    matrix: np.ndarray | None = None
    name: str = "U"

    def __call__(self, amps: np.ndarray) -> np.ndarray:
        if amps.ndim == 1:
            return self.action(amps[:, None])[:, 0]
        return self.action(amps)

    def dag(self) -> OperatorApplier:
        if self.matrix is not None:
            return dense_applier(self.matrix.conj().T, name=self.name + "^dag", unitary=self.unitary)
        if self.adjoint_action is None:
            raise ValueError(f"applier {self.name} has no adjoint")
        return OperatorApplier(self.n, self.adjoint_action, self.unitary, self.action, None, self.name + "^dag")

    def dense(self, cap: int = 14) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        if self.n > cap:
            raise ValueError(f"{self.n}-qubit applier exceeds the dense cap of {cap}")
        return self.action(np.eye(1 << self.n, dtype=complex))


def dense_applier(matrix: np.ndarray, name: str = "M", unitary: bool = True) -> OperatorApplier:
    matrix = np.asarray(matrix, dtype=complex)
    n = matrix.shape[0].bit_length() - 1
    return OperatorApplier(n, lambda x: matrix @ x, unitary, lambda x: matrix.conj().T @ x, matrix, name)


def pauli_applier(p: PauliString, phase: complex = 1.0) -> OperatorApplier:
    ph = phase * p.phase_vector()[:, None]
    perm = np.arange(1 << p.n, dtype=np.int64) ^ p.xmask
    inv = np.conj(ph[perm])
    # P|b> = ph[b]|b^x>; the adjoint is P^dag|c> = conj(ph[c^x])|c^x>
    return OperatorApplier(p.n, lambda x: (ph * x)[perm], True, lambda x: (inv * x)[perm], None,
                           f"{phase:.3g}*{p}")


def phase_applier(n: int, angle: float) -> OperatorApplier:
    """Global phase e^{i angle} on an n-qubit register."""
    f = np.exp(1j * angle)
    return OperatorApplier(n, lambda x: f * x, True, lambda x: np.conj(f) * x, None, "phase")


def sequence(*appliers: OperatorApplier, name: str = "seq") -> OperatorApplier:
    """Apply in circuit order: first argument acts first."""
    n = appliers[0].n
    if any(a.n != n for a in appliers):
        raise ValueError("appliers act on different register sizes")

    def act(x):
        for a in appliers:
            x = a.action(x)
        return x

    def adj(x):
        for a in reversed(appliers):
            x = a.dag().action(x)
        return x

    unitary = all(a.unitary for a in appliers)
    has_adj = all(a.adjoint_action is not None or a.matrix is not None for a in appliers)
    return OperatorApplier(n, act, unitary, adj if has_adj else None, None, name)


def embed(applier: OperatorApplier, qubits: Sequence[int], n_total: int) -> OperatorApplier:
    """Place an applier on ``qubits`` (its own qubit order) of a larger register."""
    qubits = list(qubits)
    if len(qubits) != applier.n or len(set(qubits)) != len(qubits):
        raise ValueError("qubit list does not match the applier width")
    if any(q < 0 or q >= n_total for q in qubits):
        raise ValueError(f"qubit index out of range for {n_total} qubits")
    if qubits == list(range(n_total)):
        return applier
    k = len(qubits)

    def lift(fn):
        def act(x):
            batch = x.shape[1]
            t = x.reshape((2,) * n_total + (batch,))
            t = np.moveaxis(t, qubits, list(range(k)))
            shape = t.shape
            t = fn(t.reshape(1 << k, -1)).reshape(shape)
            return np.moveaxis(t, list(range(k)), qubits).reshape(1 << n_total, batch)
        return act

    adj = applier.adjoint_action
    if adj is None and applier.matrix is not None:
        m = applier.matrix
        adj = lambda x: m.conj().T @ x  # noqa: E731
    return OperatorApplier(n_total, lift(applier.action), applier.unitary,
                           lift(adj) if adj is not None else None, None, applier.name)


def controlled(applier: OperatorApplier) -> OperatorApplier:
    """Controlled version with the control as the new most significant qubit."""
    half = 1 << applier.n

    def lift(fn):
        def act(x):
            out = x.copy()
            out[half:] = fn(x[half:])
            return out
        return act

    adj = applier.adjoint_action
    if adj is None and applier.matrix is not None:
        m = applier.matrix
        adj = lambda x: m.conj().T @ x  # noqa: E731
    return OperatorApplier(applier.n + 1, lift(applier.action), applier.unitary,
                           lift(adj) if adj is not None else None, None, "c-" + applier.name)


def power(applier: OperatorApplier, exponent: int, dense_cap: int = DENSE_POWER_CAP) -> OperatorApplier:
    """U**exponent; squares a dense matrix when the register is small enough."""
    if exponent < 0:
        raise ValueError("negative exponent")
    if applier.n <= dense_cap:
        M = applier.dense()
        return dense_applier(np.linalg.matrix_power(M, exponent), name=f"{applier.name}^{exponent}",
                             unitary=applier.unitary)

    def act(x):
        for _ in range(exponent):
            x = applier.action(x)
        return x

    return OperatorApplier(applier.n, act, applier.unitary, None, None, f"{applier.name}^{exponent}")


# ---- state-level operations -----------------------------------------


def _check_qubit(state: StateVector, q: int) -> None:
    if not 0 <= q < state.n:
        raise IndexError(f"qubit {q} out of range for {state.n} qubits")


def apply_single(state: StateVector, gate: np.ndarray, target: int) -> StateVector:
    _check_qubit(state, target)
    t = state.amplitudes.reshape(2 ** target, 2, -1)
    out = np.einsum("ab,ibj->iaj", np.asarray(gate, dtype=complex), t)
    return StateVector(out.reshape(-1))


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise ValueError("control and target coincide")
    t = state.amplitudes.reshape((2,) * state.n).copy()
    sel = [slice(None)] * state.n
    sel[control] = 1
    sub = t[tuple(sel)]
    axis = target - (1 if target > control else 0)
    t[tuple(sel)] = np.flip(sub, axis=axis)
    return StateVector(t.reshape(-1))


def apply_operator(state: StateVector, applier: OperatorApplier, targets: Sequence[int] | None = None
                   ) -> StateVector:
    targets = list(range(state.n)) if targets is None else list(targets)
    op = embed(applier, targets, state.n)
    return StateVector(op(state.amplitudes))


def apply_controlled(state: StateVector, applier: OperatorApplier, control: int,
                     targets: Sequence[int] | None = None) -> StateVector:
    """Apply ``applier`` on ``targets`` in the branch where ``control`` is 1.

    ``targets`` defaults to every other qubit in ascending order.
    """
    _check_qubit(state, control)
    if targets is None:
        targets = [q for q in range(state.n) if q != control]
    targets = list(targets)
    if control in targets:
        raise ValueError("control qubit overlaps the applier footprint")
    op = embed(controlled(applier), [control] + targets, state.n)
    return StateVector(op(state.amplitudes))


def expectation(state: StateVector, H: PauliHamiltonian) -> complex:
    """<psi|H|psi> evaluated term-wise, never forming the dense matrix."""
    if state.n != H.n:
        raise ValueError(f"state has {state.n} qubits, Hamiltonian has {H.n}")
    return complex(np.vdot(state.amplitudes, H.apply(state.amplitudes)))


def rng_stream(seed: int | None, index: int = 0) -> np.random.Generator:
    """Independent generator for stream ``index`` under a master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_counts(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    p = np.clip(np.asarray(probs, dtype=float), 0, None)
    return rng.multinomial(shots, p / p.sum())


def sample_measurement(state: StateVector, qubits: Sequence[int], shots: int,
                       seed: int | np.random.Generator | None = None) -> dict[int, int]:
    """Histogram {outcome index: count} of ``shots`` measurements of ``qubits``.

    The outcome index reads the measured bits in the order given, first
    qubit most significant.
    """
    qubits = list(qubits)
    if not qubits:
        raise ValueError("no qubits to measure")
    if shots < 1:
        raise ValueError("shots must be positive")
    for q in qubits:
        _check_qubit(state, q)
    rng = seed if isinstance(seed, np.random.Generator) else rng_stream(seed)
    counts = sample_counts(state.probabilities(qubits), shots, rng)
    return {int(i): int(c) for i, c in enumerate(counts) if c}


# ---- exact subspace reduction --------------------------------------------


@dataclass(frozen=True)
class KrylovReduction:
    """Orthonormal basis of a U-invariant subspace containing a start vector.

    ``matrix`` is U restricted to the subspace (basis coordinates), and
    ``residual`` certifies closure: ||U V - V M||.
    """

    basis: np.ndarray
    matrix: np.ndarray
    residual: float

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def krylov_reduce(applier: OperatorApplier, start: np.ndarray, max_dim: int = 64,
                  tol: float = 1e-10) -> KrylovReduction | None:
    """Arnoldi closure of span{x, Ux, U^2x, ...}; None if it exceeds ``max_dim``."""
    v = np.asarray(start, dtype=complex)
    v = v / np.linalg.norm(v)
    basis = [v]
    images = []
    while True:
        w = applier(basis[-1])
        images.append(w)
        r = w.copy()
        for _ in range(2):
            for b in basis:
                r -= np.vdot(b, r) * b
        rn = np.linalg.norm(r)
        if rn <= tol:
            break
        if len(basis) >= max_dim:
            return None
        basis.append(r / rn)
    V = np.stack(basis, axis=1)
    W = np.stack(images, axis=1)
    M = V.conj().T @ W
    if applier.unitary:
        u, _, vh = np.linalg.svd(M)
        M = u @ vh
    residual = float(np.linalg.norm(W - V @ M))
    return KrylovReduction(V, M, residual)
