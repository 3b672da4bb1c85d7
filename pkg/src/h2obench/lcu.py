"""Linear-combination-of-unitaries block encodings.

Register layout for an encoding is ``|ancilla (m qubits)>|system (n qubits)>``;
the second-order construction prepends two branch qubits,
``|c1 c2>|ancilla>|system>``. The flagged subspace is the all-zero state of
every register except the system.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .pauli import PauliHamiltonian, PauliString, one_norm
from .statevector import OperatorApplier, StateVector, dense_applier, sequence


def householder_completion(column: np.ndarray) -> np.ndarray:
    """Unitary B = I - 2|u><u|/<u|u> with B|0> = column (real, unit norm)."""
    b = np.asarray(column, dtype=complex)
    u = b.copy()
    u[0] -= 1
    uu = np.vdot(u, u).real
    if uu < 1e-30:
        return np.eye(len(b), dtype=complex)
    return np.eye(len(b), dtype=complex) - 2 * np.outer(u, u.conj()) / uu


def _reflection_action(u: np.ndarray):
    """Rank-one action x -> x - 2 u (u^dag x)/(u^dag u) on the leading axis."""
    uu = np.vdot(u, u).real
    if uu < 1e-30:
        return lambda x: x
    uc = u.conj()

    def act(x):
        return x - np.outer(u, uc @ x) * (2 / uu)

    return act


@dataclass(frozen=True, eq=False)
class LcuEncoding:
    """U = sum_j beta_j V_j realised as U_r = B^dag V B.

    ``unitaries[j]`` is a (phase, PauliString) pair; absorbed phases keep all
    betas non-negative. Entries beyond ``len(unitaries)`` have beta = 0 and
    act as the identity.
    """

    m: int
    n: int
    betas: np.ndarray
    unitaries: tuple[tuple[complex, PauliString], ...]
    kappa: float | None = None
    s: float = field(init=False)

    def __post_init__(self):
        if len(self.betas) != 1 << self.m:
            raise ValueError("betas must be zero-padded to 2**m entries")
        if np.any(self.betas < 0):
            raise ValueError("betas must be non-negative")
        object.__setattr__(self, "s", float(np.sum(self.betas)))

    @property
    def dim(self) -> int:
        return 1 << (self.m + self.n)

    @cached_property
    def prepare_column(self) -> np.ndarray:
        """B|0> = sum_j sqrt(beta_j / s)|j>."""
        return np.sqrt(self.betas / self.s).astype(complex)

    @cached_property
    def _householder_u(self) -> np.ndarray:
        u = self.prepare_column.copy()
        u[0] -= 1
        return u

    def prepare_matrix(self) -> np.ndarray:
        return householder_completion(self.prepare_column)

    def prepare(self) -> OperatorApplier:
        """B on the ancilla register (Householder reflection, self-inverse)."""
        act = _reflection_action(self._householder_u)
        return OperatorApplier(self.m, act, True, act, None, "B")

    def _prepare_full(self):
        act = _reflection_action(self._householder_u)
        ns = 1 << self.n

        def full(x):
            batch = x.shape[1]
            return act(x.reshape(1 << self.m, ns * batch)).reshape(-1, batch)

        return full

    @cached_property
    def _select_tables(self):
        na, ns = 1 << self.m, 1 << self.n
        perm = np.tile(np.arange(ns, dtype=np.int64), (na, 1))
        phase = np.ones((na, ns), dtype=complex)
        idx = np.arange(ns, dtype=np.int64)
        for j, (ph, p) in enumerate(self.unitaries):
            perm[j] = idx ^ p.xmask
            phase[j] = (ph * p.phase_vector())[perm[j]]
        rows = np.arange(na)[:, None]
        return rows, perm, phase

    def select(self, adjoint: bool = False) -> OperatorApplier:
        """V|j>|psi> = |j> V_j|psi>."""
        rows, perm, phase = self._select_tables
        na, ns = 1 << self.m, 1 << self.n
        # (V_j^dag y)[d] = conj(phase_j[d ^ x_j]) y[d ^ x_j]
        inv_phase = np.conj(phase)

        def act(x):
            t = x.reshape(na, ns, -1)
            return (phase[:, :, None] * t[rows, perm]).reshape(na * ns, -1)

        def adj(x):
            t = x.reshape(na, ns, -1)
            return (inv_phase[:, :, None] * t)[rows, perm].reshape(na * ns, -1)

        if adjoint:
            act, adj = adj, act
        return OperatorApplier(self.m + self.n, act, True, adj, None, "V^dag" if adjoint else "V")

    def ur(self) -> OperatorApplier:
        """U_r = B^dag V B on the ancilla + system register."""
        b = self._prepare_full()
        v, vd = self.select(), self.select(adjoint=True)

        def act(x):
            return b(v.action(b(x)))

        def adj(x):
            return b(vd.action(b(x)))

        return OperatorApplier(self.m + self.n, act, True, adj, None, "U_r")

    def zero_reflection(self) -> OperatorApplier:
        """U_0 = 2|0><0|_a - I on the ancilla, identity on the system."""
        ns = 1 << self.n

        def act(x):
            out = -x
            out[:ns] = x[:ns]
            return out

        return OperatorApplier(self.m + self.n, act, True, act, None, "U_0")

    def oaa_step(self) -> OperatorApplier:
        """Q = U_r (U_0 x I) U_r^dag (U_0 x I), written in circuit order."""
        ur = self.ur()
        r0 = self.zero_reflection()
        return sequence(r0, ur.dag(), r0, ur, name="Q")

    def block(self) -> np.ndarray:
        """Dense <0|_a U_r |0>_a."""
        ns = 1 << self.n
        cols = np.zeros((self.dim, ns), dtype=complex)
        cols[:ns] = np.eye(ns)
        return self.ur()(cols)[:ns]

    def encoded_operator(self) -> np.ndarray:
        """sum_j beta_j V_j as a dense matrix (what the block equals times s)."""
        ns = 1 << self.n
        out = np.zeros((ns, ns), dtype=complex)
        for j, (ph, p) in enumerate(self.unitaries):
            out += self.betas[j] * ph * p.to_dense()
        out += np.sum(self.betas[len(self.unitaries):]) * np.eye(ns)
        return out


def ancilla_qubits(entries: int) -> int:
    return max(1, math.ceil(math.log2(entries)))


def _encoding(n: int, entries: list[tuple[float, complex, PauliString]], kappa: float | None) -> LcuEncoding:
    m = ancilla_qubits(len(entries))
    betas = np.zeros(1 << m)
    betas[: len(entries)] = [b for b, _, _ in entries]
    return LcuEncoding(m, n, betas, tuple((ph, p) for _, ph, p in entries), kappa)


def build_lcu_first_order(H: PauliHamiltonian, kappa: float) -> LcuEncoding:
    """Encoding of I - iH/kappa: beta_0 = 1 with V_0 = I, beta_j = |a_j|/kappa."""
    H.require_hermitian()
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    A = one_norm(H)
    if kappa < A:
        raise ValueError(f"kappa={kappa} is below the one-norm {A}")
    if kappa < 10 * A:
        warnings.warn(f"kappa={kappa:.4g} is less than 10x the one-norm {A:.4g}", stacklevel=2)
    entries = [(1.0, 1.0 + 0j, PauliString.identity(H.n))]
    for c, p in H.terms:
        a = c.real
        entries.append((abs(a) / kappa, -1j * np.sign(a), p))
    return _encoding(H.n, entries, kappa)


def build_direct_encoding(H: PauliHamiltonian) -> LcuEncoding:
    """Encoding of H / A with beta_j = |a_j| / A and V_j = e^{i arg a_j} h_j.

    Complex coefficients are allowed; for real ones V_j = sign(a_j) h_j is
    Hermitian, which makes U_r a reflection.
    """
    A = one_norm(H)
    if A == 0:
        raise ValueError("cannot encode the zero Hamiltonian")
    entries = []
    for c, p in H.terms:
        ph = c / abs(c)
        if abs(ph.imag) < 1e-15:
            ph = complex(np.sign(ph.real))
        entries.append((abs(c) / A, ph, p))
    return _encoding(H.n, entries, None)


def apply_Ur(enc: LcuEncoding, state: StateVector, tol: float = 1e-12) -> StateVector:
    """Apply U_r to a state whose ancilla register is |0>."""
    if state.n != enc.m + enc.n:
        raise ValueError(f"state has {state.n} qubits, encoding needs {enc.m + enc.n}")
    ns = 1 << enc.n
    if np.linalg.norm(state.amplitudes[ns:]) > tol:
        raise ValueError("ancilla register is not |0>")
    return StateVector(enc.ur()(state.amplitudes))


# ---- parameter choice ------------------------------------------------------


def choose_kappa(A: float, N: int) -> float:
    """kappa with (2N+1) arccos(1/(1 + A/kappa)) = pi."""
    if N < 1:
        raise ValueError("N must be at least 1")
    c = math.cos(math.pi / (2 * N + 1))
    return A * c / (1 - c)


def choose_t(N: int) -> float:
    """t with (2N+1) arccos(1/(1 + t + t^2/2)) = pi."""
    if N < 1:
        raise ValueError("N must be at least 1")
    return -1 + math.sqrt(2 / math.cos(math.pi / (2 * N + 1)) - 1)


# ---- second order ------------------------------------------------------------


def b2_column(t: float) -> np.ndarray:
    norm = math.sqrt(1 + t + t * t / 2)
    return np.array([math.sqrt(t), 1.0, t / math.sqrt(2), 0.0], dtype=complex) / norm


_CH = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, -1]], dtype=complex)
_CH[2:, 2:] /= math.sqrt(2)

# swap of the |01> and |10> branches
P_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class SecondOrderEncoding:
    """Block encoding of (I - iht - h^2 t^2/2) / (1 + t + t^2/2), h = H/A.

    Branch register |c1 c2> after preparation holds amplitudes
    (sqrt t, 1, t/2, t/2) / sqrt(1 + t + t^2/2): B2 followed by a Hadamard on
    c2 controlled by c1, which splits the t/sqrt 2 branch. The branches select

        00: e^{-i pi/2} W          (W = inner U_r, block h)
        01: I
        10: -W R W                 (block -(2h^2 - 1))
        11: -I

    where R = 2|0><0|_a - I. Since W is a Hermitian reflection the 10 and 11
    branches together contribute -(t^2/2) h^2 exactly.
    """

    inner: LcuEncoding
    t: float
    A: float

    @property
    def m(self) -> int:
        return self.inner.m

    @property
    def n(self) -> int:
        return self.inner.n

    @property
    def width(self) -> int:
        return 2 + self.m + self.n

    @property
    def normalization(self) -> float:
        return 1 + self.t + self.t**2 / 2

    def B2(self) -> np.ndarray:
        return householder_completion(b2_column(self.t))

    def P(self) -> np.ndarray:
        return P_SWAP

    @cached_property
    def _branch_prep(self) -> np.ndarray:
        return _CH @ self.B2()

    def branch_amplitudes(self) -> np.ndarray:
        return self._branch_prep[:, 0]

    def ur(self) -> OperatorApplier:
        """U_r2 on |c1 c2>|ancilla>|system>."""
        w = self.inner.ur()
        r = self.inner.zero_reflection()
        prep = self._branch_prep
        inner_dim = 1 << (self.m + self.n)

        def select(x, adjoint):
            t = x.reshape(4, inner_dim, -1)
            out = np.empty_like(t)
            for c in range(4):
                blk = t[c]
                if c == 0:
                    y = w.action(blk)
                    out[c] = (1j if adjoint else -1j) * y
                elif c == 1:
                    out[c] = blk
                elif c == 2:
                    out[c] = -w.action(r.action(w.action(blk)))
                else:
                    out[c] = -blk
            return out.reshape(x.shape)

        def mix(mat, x):
            return (mat @ x.reshape(4, -1)).reshape(x.shape)

        def act(x):
            return mix(prep.conj().T, select(mix(prep, x), False))

        def adj(x):
            return mix(prep.conj().T, select(mix(prep, x), True))

        return OperatorApplier(self.width, act, True, adj, None, "U_r2")

    def zero_reflection(self) -> OperatorApplier:
        """U_0^+ = 2|00>|0>_a<0|_a<00| - I, identity on the system."""
        ns = 1 << self.n

        def act(x):
            out = -x
            out[:ns] = x[:ns]
            return out

        return OperatorApplier(self.width, act, True, act, None, "U_0+")

    def oaa_step(self) -> OperatorApplier:
        ur = self.ur()
        r0 = self.zero_reflection()
        return sequence(r0, ur.dag(), r0, ur, name="Q2")

    def block(self) -> np.ndarray:
        ns = 1 << self.n
        cols = np.zeros((1 << self.width, ns), dtype=complex)
        cols[:ns] = np.eye(ns)
        return self.ur()(cols)[:ns]

    def block_scalar(self, energy: complex) -> complex:
        """Flagged amplitude of U_r2 on an eigenstate with eigenvalue ``energy``."""
        u = energy * self.t / self.A
        return (1 - 1j * u - u * u / 2) / self.normalization


def build_second_order(H: PauliHamiltonian, t: float) -> SecondOrderEncoding:
    H.require_hermitian()
    if not 0 < t < 1:
        raise ValueError("t must lie in (0, 1)")
    inner = build_direct_encoding(H)
    return SecondOrderEncoding(inner, t, one_norm(H))


def apply_oaa(enc: LcuEncoding | SecondOrderEncoding, state: StateVector, N: int,
              variant: str = "first") -> StateVector:
    """Apply Q^N (first order) or Q_2^N (second order)."""
    if variant == "first" and not isinstance(enc, LcuEncoding):
        raise TypeError("first-order OAA needs an LcuEncoding")
    if variant == "second" and not isinstance(enc, SecondOrderEncoding):
        raise TypeError("second-order OAA needs a SecondOrderEncoding")
    if variant not in ("first", "second"):
        raise ValueError(f"unknown variant {variant!r}")
    q = enc.oaa_step()
    x = state.amplitudes
    for _ in range(N):
        x = q(x)
    return StateVector(x)


def amplified(enc: LcuEncoding | SecondOrderEncoding, N: int) -> OperatorApplier:
    """U_q = Q^N U_r as a single applier."""
    ur = enc.ur()
    q = enc.oaa_step()
    return sequence(ur, *([q] * N), name=f"Q^{N} U_r")


def oaa_amplitude_law(p: float, N: int) -> float:
    """cos((2N+1) arccos p): flagged amplitude factor after N rotations.

    Q is a product of two reflections, so it rotates the flagged component
    by 2 arccos p per step with no alternating sign.
    """
    return math.cos((2 * N + 1) * math.acos(min(1.0, p)))


def first_order_amplitude(E: float, kappa: float, s: float) -> complex:
    """<0,psi|U_r|0,psi> for an eigenstate: p e^{-i arctan(E/kappa)}."""
    return (1 - 1j * E / kappa) / s


def dense_block_check(enc: LcuEncoding, target: np.ndarray) -> float:
    return float(np.max(np.abs(enc.block() - target)))


__all__ = [
    "LcuEncoding", "SecondOrderEncoding", "build_lcu_first_order", "build_direct_encoding",
    "build_second_order", "apply_Ur", "apply_oaa", "amplified", "choose_kappa", "choose_t",
    "householder_completion", "b2_column", "oaa_amplitude_law", "first_order_amplitude",
    "dense_block_check", "ancilla_qubits",
]
