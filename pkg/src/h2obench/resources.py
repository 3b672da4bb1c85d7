"""Analytic qubit, gate and measurement counts for each method.

Gate counts are leading-order standard-gate (single-qubit + CNOT) tallies
with unit constants; they are meant for scaling comparisons, not synthesis.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

METHODS = ("trotter-pea", "direct-pea1", "direct-pea2", "direct-measure", "vqe")

# qubit requirement, gate complexity, number of measurements
TABLE_II = {
    "trotter-pea": ("O(n)", "O(n^5/(eps/A)^2)", "O(1)"),
    "direct-pea1": ("O(n)", "O(n^5/(eps/A)^2.5)", "O(1)"),
    "direct-pea2": ("O(n)", "O(n^5/(eps/A)^1.3)", "O(1)"),
    "direct-measure": ("O(n)", "O(n^5)", "O(E^2/eps^2)"),
    "vqe": ("n", "O(n^2 d)", "O(A^2 n^8/eps^2 * N_iter)"),
}


DEFAULT_TROTTER_BITS = 12


def _budget_bits(method: str, N: int) -> float:
    """Digit budget keeping the flagged population at 7/8 after 2^D uses (eta = 1)."""
    if method == "direct-pea1":
        return math.log2(2**11 * math.log(8 / 7) / math.pi**6) + 4 * math.log2(N)
    return math.log2(2**27 * math.log(8 / 7) / math.pi**14) + 12 * math.log2(N)


class UnknownMethodError(ValueError):
    pass


@dataclass(frozen=True)
class ResourceReport:
    method: str
    qubits: int
    gates: float
    measurements: float | None
    qubit_formula: str
    gate_formula: str
    measurement_formula: str
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def ancilla_count(L: int) -> int:
    """Ancilla register for L terms plus the identity branch of the first-order LCU."""
    return max(1, math.ceil(math.log2(L + 1)))


def givens_count(L: int) -> int:
    """Givens rotations in the Householder form of B."""
    return 2 * L - 3


def _ur_gates(n: int, L: int, m: int) -> dict[str, float]:
    b = givens_count(L) * m * m**2  # each Givens: <= m Toffolis with m controls, O(m^2) gates each
    select = (n + m) * L
    return {"B": b, "select": select, "U_r": 2 * b + select}


def resource_report(method: str, n: int, L: int, D: int | None = None, N: int | None = None,
                    d: int | None = None, energy: float | None = None, eps: float | None = None,
                    A: float | None = None, iterations: int | None = None) -> ResourceReport:
    """Counts for one method. Unused parameters are ignored."""
    if method not in TABLE_II:
        raise UnknownMethodError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if n < 1 or L < 1:
        raise ValueError("n and L must be positive")
    qf, gf, mf = TABLE_II[method]
    m = ancilla_count(L)
    meas: float | None = 1
    details: dict = {"n": n, "L": L}

    if method == "trotter-pea":
        D = DEFAULT_TROTTER_BITS if D is None else D
        qubits = n + 1
        gates = float(2**D * L * n)
        details.update(D=D, step_gates=L * n)
    elif method in ("direct-pea1", "direct-pea2"):
        if N is None:
            raise ValueError(f"{method} needs the rotation count N")
        if D is None:
            D = max(1, math.ceil(_budget_bits(method, N)))
        ur = _ur_gates(n, L, m)
        if method == "direct-pea1":
            unit, anc = ur["U_r"], m
        else:
            unit, anc = 2 * ur["U_r"] + L + 4, m + 2  # two inner U_r, P, B2 and its inverse
        q = 2 * unit + 2 * anc
        uq = N * q + unit
        qubits = n + anc + 2  # one Toffoli work qubit, one PEA control
        gates = float(2**D * uq)
        details.update(D=D, N=N, m=anc, givens=givens_count(L), B=ur["B"], select=ur["select"],
                       U_r=unit, Q=q, U_q=uq)
    elif method == "direct-measure":
        ur = _ur_gates(n, L, m)
        qubits = n + m + 1
        gates = float(ur["U_r"])
        meas = energy**2 / eps**2 if energy is not None and eps else None
        details.update(m=m, givens=givens_count(L), B=ur["B"], select=ur["select"])
    else:
        depth = 1 if d is None else d
        qubits = n
        cnots = depth * n * (n - 1) // 2
        gates = float(n + depth * n * (n - 1) + cnots)
        if A is not None and eps:
            meas = A**2 * L**2 / eps**2 * (iterations or 1)
        else:
            meas = None
        details.update(d=depth, cnot=cnots, iterations=iterations)
    return ResourceReport(method, qubits, gates, meas, qf, gf, mf, details)


def format_report(r: ResourceReport) -> str:
    lines = [f"method: {r.method}",
             f"qubits: {r.qubits}  [{r.qubit_formula}]",
             f"gates: {r.gates:.6g}  [{r.gate_formula}]",
             f"measurements: {'n/a' if r.measurements is None else f'{r.measurements:.6g}'}"
             f"  [{r.measurement_formula}]"]
    lines += [f"{k}: {v}" for k, v in r.details.items() if v is not None]
    return "\n".join(lines)


__all__ = ["METHODS", "TABLE_II", "ResourceReport", "UnknownMethodError", "ancilla_count", "givens_count",
           "resource_report", "format_report"]
