"""Pauli strings, weighted Pauli Hamiltonians and the Pauli table file format.

Qubit convention used throughout the package: the leftmost letter of a
Pauli string is qubit 0 and maps to the most significant bit of a
computational-basis index.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

DROP_TOL = 1e-12
DENSE_CAP = 14

_LETTERS = "IXYZ"
_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
# single-qubit products: (a, b) -> (phase, letter) with a @ b = phase * letter
_PRODUCT = {}
for _a in _LETTERS:
    for _b in _LETTERS:
        _m = _MATRICES[_a] @ _MATRICES[_b]
        for _c in _LETTERS:
            _ph = np.trace(_MATRICES[_c].conj().T @ _m) / 2
            if abs(_ph) > 0.5:
                _PRODUCT[_a, _b] = (complex(np.round(_ph)), _c)


class PauliParseError(ValueError):
    """Malformed Pauli table input; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class CapacityError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class PauliString:
    letters: str

    def __post_init__(self):
        bad = set(self.letters) - set(_LETTERS)
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls("I" * n)

    @classmethod
    def from_ops(cls, n: int, ops: Mapping[int, str]) -> PauliString:
        """Build from a sparse {qubit: letter} map."""
        letters = ["I"] * n
        for q, p in ops.items():
            letters[q] = p
        return cls("".join(letters))

    @property
    def n(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.letters

    @cached_property
    def xmask(self) -> int:
        mask = 0
        for q, p in enumerate(self.letters):
            if p in "XY":
                mask |= 1 << (self.n - 1 - q)
        return mask

    @cached_property
    def zmask(self) -> int:
        mask = 0
        for q, p in enumerate(self.letters):
            if p in "ZY":
                mask |= 1 << (self.n - 1 - q)
        return mask

    @cached_property
    def n_y(self) -> int:
        return self.letters.count("Y")

    @property
    def is_identity(self) -> bool:
        return set(self.letters) <= {"I"}

    def support(self) -> tuple[int, ...]:
        return tuple(q for q, p in enumerate(self.letters) if p != "I")

    def multiply(self, other: PauliString) -> tuple[complex, PauliString]:
        """Return (phase, P) with self @ other == phase * P."""
        if self.n != other.n:
            raise ValueError("Pauli strings act on different qubit counts")
        phase = 1 + 0j
        out = []
        for a, b in zip(self.letters, other.letters):
            ph, c = _PRODUCT[a, b]
            phase *= ph
            out.append(c)
        return phase, PauliString("".join(out))

    def commutes(self, other: PauliString) -> bool:
        clash = sum(1 for a, b in zip(self.letters, other.letters) if a != "I" and b != "I" and a != b)
        return clash % 2 == 0

    def to_dense(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for p in self.letters:
            out = np.kron(out, _MATRICES[p])
        return out

    def phase_vector(self) -> np.ndarray:
        """Diagonal factor d with P|b> = d[b] |b ^ xmask>."""
        idx = np.arange(1 << self.n, dtype=np.int64)
        parity = (np.bitwise_count(idx & self.zmask) & 1).astype(np.int64)
        return (1j**self.n_y) * (1 - 2 * parity).astype(complex)

    def apply(self, amps: np.ndarray) -> np.ndarray:
        """Apply to a vector (2**n,) or a column batch (2**n, k)."""
        ph = self.phase_vector()
        if amps.ndim > 1:
            ph = ph.reshape((-1,) + (1,) * (amps.ndim - 1))
        idx = np.arange(1 << self.n, dtype=np.int64) ^ self.xmask
        return (ph * amps)[idx]


def _coerce_string(s: PauliString | str) -> PauliString:
    return s if isinstance(s, PauliString) else PauliString(s)


class PauliHamiltonian:
    """Weighted sum of Pauli strings on ``n`` qubits.

    Terms are merged on construction (duplicate strings add up) and
    coefficients with magnitude below ``drop_tol`` are removed. Term order
    is the order of first appearance, which the Trotter product relies on.
    Instances are treated as immutable.
    """

    def __init__(self, terms: Iterable[tuple[complex, PauliString | str]], n: int | None = None,
                 drop_tol: float = DROP_TOL):
        merged: dict[PauliString, complex] = {}
        for coeff, s in terms:
            s = _coerce_string(s)
            if n is None:
                n = s.n
            elif s.n != n:
                raise ValueError(f"term {s} has {s.n} qubits, expected {n}")
            merged[s] = merged.get(s, 0) + complex(coeff)
        if n is None:
            raise ValueError("qubit count required for an empty Hamiltonian")
        self.n = n
        self.drop_tol = drop_tol
        self._terms = tuple((c, s) for s, c in merged.items() if abs(c) >= drop_tol)

    @classmethod
    def from_dict(cls, d: Mapping[str, complex], n: int | None = None) -> PauliHamiltonian:
        return cls(((c, s) for s, c in d.items()), n=n)

    @property
    def terms(self) -> tuple[tuple[complex, PauliString], ...]:
        return self._terms

    @property
    def L(self) -> int:
        return len(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __repr__(self) -> str:
        return f"PauliHamiltonian(n={self.n}, L={self.L})"

    def as_dict(self) -> dict[str, complex]:
        return {str(s): c for c, s in self._terms}

    def coefficient(self, s: PauliString | str) -> complex:
        return self.as_dict().get(str(s), 0j)

    def sorted_terms(self) -> list[tuple[str, complex]]:
        return sorted((str(s), c) for c, s in self._terms)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c, _ in self._terms)

    def require_hermitian(self) -> None:
        if not self.is_hermitian():
            raise ValueError("method requires a Hermitian (real-coefficient) Hamiltonian")

    @property
    def A(self) -> float:
        return one_norm(self)

    def identity_coefficient(self) -> complex:
        return self.coefficient(PauliString.identity(self.n))

    def without_identity(self) -> PauliHamiltonian:
        return PauliHamiltonian(((c, s) for c, s in self._terms if not s.is_identity), n=self.n)

    def __add__(self, other: PauliHamiltonian) -> PauliHamiltonian:
        return PauliHamiltonian(list(self._terms) + list(other._terms), n=self.n)

    def scaled(self, factor: complex) -> PauliHamiltonian:
        return PauliHamiltonian(((factor * c, s) for c, s in self._terms), n=self.n)

    def shifted(self, constant: complex) -> PauliHamiltonian:
        """H + constant * I."""
        return PauliHamiltonian(list(self._terms) + [(constant, PauliString.identity(self.n))], n=self.n)

    @cached_property
    def _groups(self):
        # group terms by X mask: H|psi> = sum_x X^x (d_x * psi)
        dim = 1 << self.n
        groups: dict[int, np.ndarray] = {}
        for c, s in self._terms:
            d = groups.setdefault(s.xmask, np.zeros(dim, dtype=complex))
            d += c * s.phase_vector()
        idx = np.arange(dim, dtype=np.int64)
        return [(idx ^ x, d) for x, d in groups.items()]

    def apply(self, amps: np.ndarray) -> np.ndarray:
        """Matrix-free action H @ amps for a vector or column batch."""
        out = np.zeros_like(amps, dtype=complex)
        for perm, d in self._groups:
            dd = d if amps.ndim == 1 else d.reshape((-1,) + (1,) * (amps.ndim - 1))
            out += (dd * amps)[perm]
        return out


def one_norm(H: PauliHamiltonian, include_identity: bool = True) -> float:
    """Sum of |coefficient| over the terms, optionally skipping the identity."""
    return float(sum(abs(c) for c, s in H.terms if include_identity or not s.is_identity))


def to_dense(H: PauliHamiltonian, cap: int = DENSE_CAP) -> np.ndarray:
    if H.n > cap:
        raise CapacityError(f"{H.n} qubits exceeds the dense cap of {cap}")
    dim = 1 << H.n
    M = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim, dtype=np.int64)
    for c, s in H.terms:
        M[cols ^ s.xmask, cols] += c * s.phase_vector()
    return M


def _fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along axis 0 (length 2**k)."""
    a = a.copy()
    h = 1
    n = a.shape[0]
    while h < n:
        a = a.reshape(n // (2 * h), 2, h, *a.shape[1:])
        x, y = a[:, 0].copy(), a[:, 1].copy()
        a[:, 0], a[:, 1] = x + y, x - y
        a = a.reshape(n, *a.shape[3:])
        h *= 2
    return a


def pauli_decompose(M: np.ndarray, n: int | None = None, drop_tol: float = DROP_TOL) -> PauliHamiltonian:
    """Coefficients tr(P M) / 2**n over all 4**n Pauli strings."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    dim = M.shape[0]
    k = dim.bit_length() - 1
    if dim < 1 or (1 << k) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    if n is not None and n != k:
        raise ValueError(f"matrix of dimension {dim} does not act on {n} qubits")
    n = k
    idx = np.arange(dim, dtype=np.int64)
    terms = []
    # tr(P M) = i^{n_y} sum_c (-1)^{popcount(c & z)} M[c, c ^ x]
    for x in range(dim):
        walsh = _fwht(M[idx, idx ^ x])
        for z in range(dim):
            val = walsh[z]
            if abs(val) < drop_tol * dim:
                continue
            ny = bin(x & z).count("1")
            coeff = (1j**ny) * val / dim
            letters = []
            for q in range(n):
                bit = 1 << (n - 1 - q)
                letters.append("IXZY"[(1 if x & bit else 0) + (2 if z & bit else 0)])
            terms.append((coeff, PauliString("".join(letters))))
    return PauliHamiltonian(terms, n=n, drop_tol=drop_tol)


def parse_pauli_hamiltonian(text: str | Iterable[str]) -> PauliHamiltonian:
    """Parse the one-term-per-line Pauli table format.

    >>> parse_pauli_hamiltonian("IIIIII -72.008089").terms[0][0]
    (-72.008089+0j)
    """
    lines = text.splitlines() if isinstance(text, str) else list(text)
    terms = []
    n = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise PauliParseError(f"expected '<letters> <coefficient>', got {raw.strip()!r}", lineno)
        letters, num = parts
        letters = letters.upper()
        if set(letters) - set(_LETTERS):
            raise PauliParseError(f"malformed Pauli letters {letters!r}", lineno)
        if n is None:
            n = len(letters)
        elif len(letters) != n:
            raise PauliParseError(f"string {letters!r} has length {len(letters)}, expected {n}", lineno)
        try:
            coeff = complex(float(num))
        except ValueError:
            try:
                coeff = complex(num.replace("i", "j"))
            except ValueError:
                raise PauliParseError(f"cannot parse coefficient {num!r}", lineno) from None
        if not (math.isfinite(coeff.real) and math.isfinite(coeff.imag)):
            raise PauliParseError(f"non-finite coefficient {num!r}", lineno)
        terms.append((coeff, PauliString(letters)))
    if n is None:
        raise PauliParseError("no terms found")
    return PauliHamiltonian(terms, n=n)


def load_pauli_hamiltonian(path: str | Path) -> PauliHamiltonian:
    return parse_pauli_hamiltonian(Path(path).read_text(encoding="utf-8"))


def format_pauli_hamiltonian(H: PauliHamiltonian) -> str:
    lines = []
    for c, s in H.terms:
        num = f"{c.real:.12g}" if abs(c.imag) < 1e-15 else f"{c.real:.12g}{c.imag:+.12g}j"
        lines.append(f"{s} {num}")
    return "\n".join(lines) + "\n"


def water_fixture_path() -> Path:
    return Path(__file__).with_name("data") / "water_1.9.pauli"


def water_hamiltonian() -> PauliHamiltonian:
    """The 95-term, 6-qubit water Hamiltonian at O-H = 1.9 a.u."""
    return load_pauli_hamiltonian(water_fixture_path())
