"""Hamiltonians of the two-star model, general ERGMs and the Ising subsystem."""

from .base import (
    ErgmParams,
    GeneralizedParams,
    Hamiltonian,
    HamiltonianContext,
    Params,
    ScalarParams,
)
from .ergm import ErgmHamiltonian
from .ising import IsingHamiltonian, spin_table
from .two_star import TwoStarHamiltonian
from .registry import create_hamiltonian_registry, get_hamiltonian

__all__ = [
    'ErgmParams',
    'GeneralizedParams',
    'Hamiltonian',
    'HamiltonianContext',
    'Params',
    'ScalarParams',
    'ErgmHamiltonian',
    'IsingHamiltonian',
    'spin_table',
    'TwoStarHamiltonian',
    'create_hamiltonian_registry',
    'get_hamiltonian',
]
