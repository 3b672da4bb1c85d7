"""Quantum-algorithm workbench for the H2O Pauli Hamiltonian.

Statevector simulations of Trotter and LCU phase estimation, direct
energy measurement and VQE, checked against exact diagonalisation.
"""

from .pauli import (
    PauliHamiltonian,
    PauliParseError,
    PauliString,
    load_pauli_hamiltonian,
    one_norm,
    parse_pauli_hamiltonian,
    water_hamiltonian,
)

__version__ = "0.1.0"

__all__ = [
    "PauliHamiltonian",
    "PauliParseError",
    "PauliString",
    "load_pauli_hamiltonian",
    "one_norm",
    "parse_pauli_hamiltonian",
    "water_hamiltonian",
]
