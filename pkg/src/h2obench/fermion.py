"""Second-quantised Hamiltonians: frozen core, parity mapping and tapering.

The Hamiltonian is

    H = sum_ij h_ij a_i^dag a_j + 1/2 sum_ijkl h_ijkl a_i^dag a_j^dag a_k a_l

with 1-based spin-orbital indices. In h_ijkl the pair (i, l) shares the
first electron coordinate and (j, k) the second.
"""

from __future__ import annotations

import re
from collections import defaultdict
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .pauli import PauliHamiltonian, PauliString

HERMITIAN_TOL = 1e-10

# a ladder operator: (mode, is_creation)
Ladder = tuple[int, bool]


class IntegralsParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class SymmetryError(ValueError):
    """A tapered qubit carries X or Y in some term."""


@dataclass
class FermionHamiltonian:
    norb: int
    one_body: dict[tuple[int, int], complex] = field(default_factory=dict)
    two_body: dict[tuple[int, int, int, int], complex] = field(default_factory=dict)

    def __post_init__(self):
        for idx in list(self.one_body) + list(self.two_body):
            if any(not 1 <= i <= self.norb for i in idx):
                raise ValueError(f"index {idx} outside 1..{self.norb}")

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        for (i, j), v in self.one_body.items():
            if abs(v - np.conj(self.one_body.get((j, i), 0))) > tol:
                return False
        for (i, j, k, l), v in self.two_body.items():
            if abs(v - np.conj(self.two_body.get((l, k, j, i), 0))) > tol:
                return False
        return True

    def operator_terms(self) -> list[tuple[complex, tuple[Ladder, ...]]]:
        """Ladder-operator products with their prefactors."""
        out = [(complex(v), ((i, True), (j, False))) for (i, j), v in self.one_body.items()]
        out += [(complex(v) / 2, ((i, True), (j, True), (k, False), (l, False)))
                for (i, j, k, l), v in self.two_body.items()]
        return out

    @property
    def n_terms(self) -> int:
        return len(self.one_body) + len(self.two_body)


def parse_integrals(text: str | Iterable[str], check_hermitian: bool = True) -> FermionHamiltonian:
    """Read ``NORB k`` then ``1B i j v`` and ``2B i j k l v`` lines; '#' starts a comment."""
    lines = text.splitlines() if isinstance(text, str) else list(text)
    norb = None
    one: dict = defaultdict(complex)
    two: dict = defaultdict(complex)
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0].upper()
        if tag == "NORB":
            if norb is not None:
                raise IntegralsParseError("repeated NORB header", lineno)
            if len(parts) != 2 or not re.fullmatch(r"\d+", parts[1]) or int(parts[1]) < 1:
                raise IntegralsParseError("NORB needs one positive integer", lineno)
            norb = int(parts[1])
            continue
        if norb is None:
            raise IntegralsParseError("missing NORB header", lineno)
        width = {"1B": 2, "2B": 4}.get(tag)
        if width is None:
            raise IntegralsParseError(f"unknown record {parts[0]!r}", lineno)
        if len(parts) != width + 2:
            raise IntegralsParseError(f"{tag} needs {width} indices and a value", lineno)
        try:
            idx = tuple(int(p) for p in parts[1:-1])
        except ValueError:
            raise IntegralsParseError("indices must be integers", lineno) from None
        if any(not 1 <= i <= norb for i in idx):
            raise IntegralsParseError(f"index out of range 1..{norb}", lineno)
        try:
            value = complex(parts[-1].replace("i", "j"))
        except ValueError:
            raise IntegralsParseError(f"unparsable value {parts[-1]!r}", lineno) from None
        (one if width == 2 else two)[idx] += value
    if norb is None:
        raise IntegralsParseError("missing NORB header")
    fh = FermionHamiltonian(norb, dict(one), dict(two))
    if check_hermitian and not fh.is_hermitian():
        raise IntegralsParseError("coefficients are not Hermitian (h_ij != conj h_ji or h_ijkl != conj h_lkji)")
    return fh


def load_integrals(path: str | Path) -> FermionHamiltonian:
    return parse_integrals(Path(path).read_text(encoding="utf-8"))


# ---- frozen core -------------------------------------------------------------


@dataclass(frozen=True)
class FrozenSpec:
    """Occupied orbitals ``frozen`` and the relabelling of the survivors."""

    frozen: frozenset[int]
    relabel: Mapping[int, int]

    @classmethod
    def for_orbitals(cls, norb: int, frozen: Iterable[int]) -> FrozenSpec:
        """Survivors keep their relative order and become 1..norb-|F|."""
        fz = frozenset(frozen)
        rest = [i for i in range(1, norb + 1) if i not in fz]
        return cls(fz, {old: new for new, old in enumerate(rest, start=1)})

    def __post_init__(self):
        if self.frozen & set(self.relabel):
            raise ValueError("a frozen orbital cannot be relabelled")
        if sorted(self.relabel.values()) != list(range(1, len(self.relabel) + 1)):
            raise ValueError("relabelling must be a bijection onto 1..k")


WATER_FROZEN = (1, 2, 7, 8)
WATER_TAPER = {3: -1, 7: +1}  # 0-based qubits; qubits 4 and 8 counted from 1


def _apply_to_filled(ops: list[Ladder], frozen: list[int]) -> int:
    """<F filled| ops |F filled> for ops on frozen modes only: 0 or +-1.

    Signs use the Jordan-Wigner order of the frozen modes among themselves.
    """
    occ = {f: 1 for f in frozen}
    sign = 1
    for mode, create in reversed(ops):
        if occ[mode] == int(create):
            return 0
        sign *= (-1) ** sum(occ[f] for f in frozen if f < mode)
        occ[mode] = int(create)
    return sign if all(occ.values()) else 0


def freeze_core(fh: FermionHamiltonian, spec: FrozenSpec) -> tuple[FermionHamiltonian, complex]:
    """Project onto the frozen orbitals being filled.

    Each product is reordered to (frozen operators)(remaining operators)
    with the anticommutation sign, the frozen part is evaluated on the
    filled state and the remaining operators are relabelled. This reproduces
    n_f -> 1, drops mixed one-body terms and terms with an odd number of
    frozen indices, and gives the signed one-body contractions of the
    two-body terms. A surviving operator on mode m also carries
    (-1)^(number of frozen modes below m); for the water set {1,2,7,8}
    that count is always even.
    """
    if any(not 1 <= f <= fh.norb for f in spec.frozen):
        raise ValueError("frozen orbital out of range")
    frozen = sorted(spec.frozen)
    one: dict = defaultdict(complex)
    two: dict = defaultdict(complex)
    shift = 0j
    for coeff, ops in fh.operator_terms():
        f_ops = [op for op in ops if op[0] in spec.frozen]
        rest = [op for op in ops if op[0] not in spec.frozen]
        # sign of moving every frozen operator to the left of the rest
        swaps = 0
        seen_rest = 0
        for op in ops:
            if op[0] in spec.frozen:
                swaps += seen_rest
            else:
                seen_rest += 1
        value = _apply_to_filled(f_ops, frozen) if f_ops else 1
        if value == 0:
            continue
        # each surviving operator also passes the filled frozen modes below it
        swaps += sum(sum(1 for f in frozen if f < m) for m, _ in rest)
        c = coeff * value * (-1) ** swaps
        new = tuple((spec.relabel[m], d) for m, d in rest)
        if len(new) == 0:
            shift += c
        elif len(new) == 2:
            one[(new[0][0], new[1][0])] += c
        else:
            two[tuple(m for m, _ in new)] += 2 * c
    reduced = FermionHamiltonian(len(spec.relabel), {k: v for k, v in one.items() if v != 0},
                                 {k: v for k, v in two.items() if v != 0})
    return reduced, shift


# ---- parity mapping ----------------------------------------------------------


def _pauli_product(a: dict, b: dict) -> dict:
    out: dict = defaultdict(complex)
    for pa, ca in a.items():
        for pb, cb in b.items():
            ph, p = pa.multiply(pb)
            out[p] += ca * cb * ph
    return out


def parity_ladder(n: int, j: int, create: bool) -> dict[PauliString, complex]:
    """Parity-basis a_j^dag or a_j (1-based j) as {PauliString: coefficient}.

    X on qubits j+1..n, and (X_j Z_{j-1} -+ i Y_j)/2 on qubits j-1, j.
    Qubit j (1-based) is position j-1 in the letter string.
    """
    if not 1 <= j <= n:
        raise ValueError(f"mode {j} outside 1..{n}")
    prefix = {q: "X" for q in range(j, n)}
    xz = {**prefix, j - 1: "X"}
    if j > 1:
        xz[j - 2] = "Z"
    y = {**prefix, j - 1: "Y"}
    s = -0.5j if create else 0.5j
    return {PauliString.from_ops(n, xz): 0.5, PauliString.from_ops(n, y): s}


def parity_transform(fh: FermionHamiltonian, drop_tol: float = 1e-12) -> PauliHamiltonian:
    n = fh.norb
    ladders = {(j, d): parity_ladder(n, j, d) for j in range(1, n + 1) for d in (True, False)}
    total: dict = defaultdict(complex)
    for coeff, ops in fh.operator_terms():
        acc = {PauliString.identity(n): coeff}
        for op in ops:
            acc = _pauli_product(acc, ladders[op])
        for p, c in acc.items():
            total[p] += c
    terms = [(c, p) for p, c in total.items()]
    if not terms:
        terms = [(0.0, PauliString.identity(n))]
    return PauliHamiltonian(terms, n=n, drop_tol=drop_tol)


def occupation_to_parity(f: Iterable[int]) -> tuple[int, ...]:
    """q_i = (f_1 + ... + f_i) mod 2."""
    out, acc = [], 0
    for b in f:
        if b not in (0, 1):
            raise ValueError("occupations must be 0 or 1")
        acc ^= b
        out.append(acc)
    return tuple(out)


def parity_to_occupation(q: Iterable[int]) -> tuple[int, ...]:
    out, prev = [], 0
    for b in q:
        if b not in (0, 1):
            raise ValueError("parities must be 0 or 1")
        out.append(b ^ prev)
        prev = b
    return tuple(out)


# ---- tapering ----------------------------------------------------------------


def taper_qubits(H: PauliHamiltonian, assignments: Mapping[int, int]) -> PauliHamiltonian:
    """Replace Z on each assigned qubit (0-based) by its eigenvalue and drop the qubit."""
    for q, v in assignments.items():
        if not 0 <= q < H.n:
            raise ValueError(f"qubit {q} out of range")
        if v not in (1, -1):
            raise ValueError("eigenvalues must be +1 or -1")
    keep = [q for q in range(H.n) if q not in assignments]
    if not keep:
        raise ValueError("cannot taper every qubit")
    terms = []
    for c, p in H.terms:
        factor = 1
        for q, v in assignments.items():
            letter = p.letters[q]
            if letter in "XY":
                raise SymmetryError(f"term {p} has {letter} on tapered qubit {q}")
            if letter == "Z":
                factor *= v
        terms.append((c * factor, PauliString("".join(p.letters[q] for q in keep))))
    return PauliHamiltonian(terms, n=len(keep), drop_tol=H.drop_tol)


def water_pipeline(fh: FermionHamiltonian) -> tuple[PauliHamiltonian, PauliHamiltonian]:
    """12 orbitals -> freeze {1,2,7,8} -> 8-qubit parity form -> taper to 6.

    Returns (8-qubit Hamiltonian with the frozen-core constant, tapered
    6-qubit Hamiltonian).
    """
    if fh.norb != 12:
        raise ValueError("the water preset expects 12 spin-orbitals")
    reduced, shift = freeze_core(fh, FrozenSpec.for_orbitals(12, WATER_FROZEN))
    h8 = parity_transform(reduced).shifted(shift)
    return h8, taper_qubits(h8, WATER_TAPER)


# ---- brute-force reference ---------------------------------------------------


def fock_matrix(fh: FermionHamiltonian) -> np.ndarray:
    """Dense H in the occupation basis, mode 1 as the most significant bit.

    Built from Jordan-Wigner matrices a_j = Z x ... x Z x |0><1| x I x ...,
    independently of the Pauli machinery.
    """
    n = fh.norb
    if n > 10:
        raise ValueError("brute-force Fock matrices are limited to 10 modes")
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    ann = []
    for j in range(n):
        m = np.ones((1, 1), dtype=complex)
        for q in range(n):
            m = np.kron(m, z if q < j else lower if q == j else np.eye(2))
        ann.append(m)
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, ops in fh.operator_terms():
        m = np.eye(dim, dtype=complex)
        for mode, create in ops:
            a = ann[mode - 1]
            m = m @ (a.conj().T if create else a)
        out += coeff * m
    return out


def parity_permutation(n: int) -> np.ndarray:
    """Permutation matrix P with P|f> = |q(f)>."""
    dim = 1 << n
    P = np.zeros((dim, dim))
    for f in range(dim):
        bits = [(f >> (n - 1 - k)) & 1 for k in range(n)]
        q = occupation_to_parity(bits)
        P[int("".join(map(str, q)), 2), f] = 1
    return P


__all__ = [
    "FermionHamiltonian", "FrozenSpec", "IntegralsParseError", "SymmetryError", "parse_integrals",
    "load_integrals", "freeze_core", "parity_ladder", "parity_transform", "occupation_to_parity",
    "parity_to_occupation", "taper_qubits", "water_pipeline", "fock_matrix", "parity_permutation",
    "WATER_FROZEN", "WATER_TAPER",
]
