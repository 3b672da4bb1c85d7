"""Pairwise VQE: ansatz circuit, energy estimation and a Nelder-Mead loop.

The ansatz starts from |0...0>, applies U(phi_k) = Rz(phi_k1) Rx(phi_k2)
Rz(phi_k3) to every qubit, then d entangler blocks. Each block visits the
qubit pairs (p, q), p < q, in lexicographic order and applies U on p, U on
q and a CNOT with control p and target q.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliHamiltonian, to_dense
from .statevector import StateVector, rng_stream, rx, ry, rz


def param_count(n: int, d: int) -> int:
    return 3 * n + 3 * d * n * (n - 1)


def pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


@dataclass(frozen=True)
class AnsatzParams:
    """phi: (n, 3) initial-layer angles; theta: (d, n(n-1), 3) entangler angles.

    Within a block, rows 2k and 2k+1 of theta belong to pair k, for the
    gates on its first and second qubit respectively.
    """

    n: int
    d: int
    phi: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        if self.phi.shape != (self.n, 3):
            raise ValueError(f"phi must have shape ({self.n}, 3)")
        if self.theta.shape != (self.d, self.n * (self.n - 1), 3):
            raise ValueError(f"theta must have shape ({self.d}, {self.n * (self.n - 1)}, 3)")
        if not (np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.theta))):
            raise ValueError("angles must be finite")

    @classmethod
    def from_vector(cls, x: np.ndarray, n: int, d: int) -> AnsatzParams:
        x = np.asarray(x, dtype=float)
        if x.shape != (param_count(n, d),):
            raise ValueError(f"expected {param_count(n, d)} parameters, got {x.size}")
        return cls(n, d, x[: 3 * n].reshape(n, 3), x[3 * n:].reshape(d, n * (n - 1), 3))

    @classmethod
    def zeros(cls, n: int, d: int) -> AnsatzParams:
        return cls.from_vector(np.zeros(param_count(n, d)), n, d)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.phi.ravel(), self.theta.ravel()])

    @property
    def size(self) -> int:
        return param_count(self.n, self.d)


def u_gate(a: float, b: float, c: float) -> np.ndarray:
    """Rz(a) Rx(b) Rz(c); Rz(c) acts first."""
    return rz(a) @ rx(b) @ rz(c)


def _u_gates(angles: np.ndarray) -> np.ndarray:
    """Vectorised u_gate over rows of (k, 3) angles -> (k, 2, 2)."""
    a, b, c = angles[:, 0], angles[:, 1], angles[:, 2]
    cb, sb = np.cos(b / 2), np.sin(b / 2)
    ep = np.exp(-0.5j * (a + c))
    em = np.exp(-0.5j * (a - c))
    out = np.empty((len(angles), 2, 2), dtype=complex)
    out[:, 0, 0] = ep * cb
    out[:, 0, 1] = -1j * em * sb
    out[:, 1, 0] = -1j * np.conj(em) * sb
    out[:, 1, 1] = np.conj(ep) * cb
    return out


def _apply_1q(psi: np.ndarray, g: np.ndarray, q: int, n: int) -> np.ndarray:
    t = psi.reshape(1 << q, 2, 1 << (n - q - 1))
    return np.einsum("ab,ibj->iaj", g, t).reshape(-1)


class _Circuit:
    """Precomputed CNOT permutations for the ansatz on n qubits."""

    def __init__(self, n: int):
        self.n = n
        self.pairs = pairs(n)
        idx = np.arange(1 << n)
        self.cnot = []
        for p, q in self.pairs:
            cp, tq = 1 << (n - 1 - p), 1 << (n - 1 - q)
            self.cnot.append(np.where(idx & cp, idx ^ tq, idx))

    def state(self, params: AnsatzParams) -> np.ndarray:
        n = self.n
        psi = np.zeros(1 << n, dtype=complex)
        psi[0] = 1
        for q, g in enumerate(_u_gates(params.phi)):
            psi = _apply_1q(psi, g, q, n)
        for block in params.theta:
            gates = _u_gates(block)
            for k, (p, q) in enumerate(self.pairs):
                psi = _apply_1q(psi, gates[2 * k], p, n)
                psi = _apply_1q(psi, gates[2 * k + 1], q, n)
                psi = psi[self.cnot[k]]
        return psi


_CIRCUITS: dict[int, _Circuit] = {}


def _circuit(n: int) -> _Circuit:
    if n not in _CIRCUITS:
        _CIRCUITS[n] = _Circuit(n)
    return _CIRCUITS[n]


def ansatz_state(params: AnsatzParams, n: int | None = None) -> StateVector:
    n = params.n if n is None else n
    if n != params.n:
        raise ValueError(f"parameters are for {params.n} qubits, not {n}")
    if params.d >= 1 and n < 2:
        raise ValueError("entangler layers need at least two qubits")
    return StateVector(_circuit(n).state(params))


def gate_audit(n: int, d: int) -> dict[str, int]:
    """Gate counts of the ansatz: entangler CNOTs and parameterised U gates."""
    return {"cnot": d * len(pairs(n)), "u_entangler": d * n * (n - 1), "u_initial": n}


# ---- energy ----------------------------------------------------------------


def _rotate_to_z(psi: np.ndarray, letters: str, n: int) -> np.ndarray:
    for q, p in enumerate(letters):
        if p == "X":
            psi = _apply_1q(psi, ry(-math.pi / 2), q, n)
        elif p == "Y":
            psi = _apply_1q(psi, rx(math.pi / 2), q, n)
    return psi


def shot_expectation(psi: np.ndarray, H: PauliHamiltonian, shots: int, rng: np.random.Generator) -> float:
    """Sampled <H>: each non-identity term gets shots // L_meas measurements.

    Each term is rotated into the Z basis, the computational basis is sampled
    and the parity over the term's support gives the +-1 outcome.
    """
    n = H.n
    measured = [(c, p) for c, p in H.terms if not p.is_identity]
    per_term = shots // max(len(measured), 1)
    if per_term < 1:
        raise ValueError(f"{shots} shots cannot cover {len(measured)} terms")
    idx = np.arange(1 << n)
    total = sum(c.real for c, p in H.terms if p.is_identity)
    for c, p in measured:
        phi = _rotate_to_z(psi, p.letters, n)
        probs = np.abs(phi) ** 2
        counts = rng.multinomial(per_term, probs / probs.sum())
        mask = sum(1 << (n - 1 - q) for q in p.support())
        sign = 1 - 2 * (np.bitwise_count(idx & mask).astype(np.int64) & 1)
        total += c.real * float(counts @ sign) / per_term
    return total


@dataclass(frozen=True)
class EnergyModel:
    """Objective adapter: parameter vector -> energy."""

    H: PauliHamiltonian
    d: int
    mode: str = "exact"
    shots: int = 0
    seed: int | None = None
    _dense: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.mode not in ("exact", "shots"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "shots" and self.shots < 1:
            raise ValueError("shot mode needs a positive shot count")
        object.__setattr__(self, "_dense", to_dense(self.H))
        object.__setattr__(self, "_rng", rng_stream(self.seed, 0) if self.mode == "shots" else None)

    def __call__(self, x: np.ndarray) -> float:
        params = AnsatzParams.from_vector(x, self.H.n, self.d)
        psi = _circuit(self.H.n).state(params)
        if self.mode == "exact":
            return float(np.vdot(psi, self._dense @ psi).real)
        return shot_expectation(psi, self.H, self.shots, self._rng)


def energy_expectation(params: AnsatzParams, H: PauliHamiltonian, mode: str = "exact",
                       shots: int = 0, seed: int | None = None) -> float:
    if params.n != H.n:
        raise ValueError(f"parameters are for {params.n} qubits, Hamiltonian has {H.n}")
    if mode not in ("exact", "shots"):
        raise ValueError(f"unknown mode {mode!r}")
    psi = _circuit(H.n).state(params)
    if mode == "exact":
        return float(np.vdot(psi, H.apply(psi)).real)
    if shots < 1:
        raise ValueError("shot mode needs a positive shot count")
    return shot_expectation(psi, H, shots, rng_stream(seed, 0))


# ---- Nelder-Mead -------------------------------------------------------------


class NonFiniteObjective(RuntimeError):
    def __init__(self, message: str, trace: list[float]):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class NelderMeadConfig:
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    step: float = 0.5
    xtol: float = 1e-8
    ftol: float = 1e-10
    max_iter: int = 10**7
    max_evals: int | None = 25000


@dataclass(frozen=True)
class NelderMeadResult:
    x: np.ndarray
    fun: float
    trace: list[float]
    iterations: int
    converged: bool


def nelder_mead(objective: Callable[[np.ndarray], float], x0, config: NelderMeadConfig = NelderMeadConfig()
                ) -> NelderMeadResult:
    """Downhill simplex with fixed coefficients.

    The start simplex is x0 plus ``step`` along each axis. Iteration stops
    when both the simplex diameter and the spread of function values fall
    below their tolerances, or at ``max_iter`` / ``max_evals``. ``trace``
    records every evaluated value in order.
    """
    x0 = np.asarray(x0, dtype=float).ravel()
    dim = x0.size
    cfg = config
    trace: list[float] = []

    def f(x):
        v = float(objective(x))
        trace.append(v)
        if not math.isfinite(v):
            raise NonFiniteObjective(f"objective returned {v}", trace)
        return v

    simplex = np.vstack([x0, x0 + cfg.step * np.eye(dim)])
    fvals = np.array([f(x) for x in simplex])
    it = 0
    converged = False
    budget = cfg.max_evals if cfg.max_evals is not None else math.inf
    while it < cfg.max_iter and len(trace) < budget:
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        diam = np.max(np.abs(simplex[1:] - simplex[0]))
        if diam <= cfg.xtol and fvals[-1] - fvals[0] <= cfg.ftol:
            converged = True
            break
        it += 1
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + cfg.reflection * (centroid - worst)
        fr = f(xr)
        if fr < fvals[0]:
            xe = centroid + cfg.expansion * (xr - centroid)
            fe = f(xe)
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-1]:
            xc = centroid + cfg.contraction * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid + cfg.contraction * (worst - centroid)
            fc = f(xc)
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue
        simplex[1:] = simplex[0] + cfg.shrink * (simplex[1:] - simplex[0])
        fvals[1:] = [f(x) for x in simplex[1:]]
    best = int(np.argmin(fvals))
    return NelderMeadResult(simplex[best].copy(), float(fvals[best]), trace, it, converged)


# ---- driver ------------------------------------------------------------------


@dataclass(frozen=True)
class VqeConfig:
    restarts: int = 8
    perturbation: float = 0.1
    seed: int | None = 0
    mode: str = "exact"
    shots: int = 0
    rounds: int = 3
    optimizer: NelderMeadConfig = NelderMeadConfig()


@dataclass(frozen=True)
class VqeResult:
    energy: float
    params: AnsatzParams
    trace: list[float]
    converged: bool
    restart_energies: list[float]
    evaluations: int
    shots: int = 0

    @property
    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(np.asarray(self.trace))


def run_vqe(H: PauliHamiltonian, d: int, config: VqeConfig = VqeConfig()) -> VqeResult:
    """Minimise the ansatz energy; keep the best of ``restarts`` runs.

    Restart r draws its start from stream r of ``seed``: zeros plus a
    uniform perturbation in [-perturbation, perturbation]. Each restart may
    run several ``rounds``; a round rebuilds the simplex around the best
    point of the previous one.
    """
    H.require_hermitian()
    if d >= 1 and H.n < 2:
        raise ValueError("entangler layers need at least two qubits")
    size = param_count(H.n, d)
    best: tuple[float, np.ndarray, bool] | None = None
    trace: list[float] = []
    restart_energies = []
    for r in range(config.restarts):
        rng = rng_stream(config.seed, r)
        x = rng.uniform(-config.perturbation, config.perturbation, size)
        model = EnergyModel(H, d, config.mode, config.shots,
                            None if config.seed is None else config.seed * 1000 + r)
        conv = False
        fun = math.inf
        for _ in range(config.rounds):
            res = nelder_mead(model, x, config.optimizer)
            trace.extend(res.trace)
            x, fun, conv = res.x, res.fun, res.converged
        restart_energies.append(fun)
        if best is None or fun < best[0]:
            best = (fun, x, conv)
    fun, x, conv = best
    return VqeResult(fun, AnsatzParams.from_vector(x, H.n, d), trace, conv, restart_energies, len(trace),
                     config.shots if config.mode == "shots" else 0)


__all__ = [
    "AnsatzParams", "VqeResult", "VqeConfig", "NelderMeadConfig", "NelderMeadResult", "NonFiniteObjective",
    "EnergyModel", "param_count", "pairs", "u_gate", "ansatz_state", "gate_audit", "energy_expectation",
    "shot_expectation", "nelder_mead", "run_vqe",
]
