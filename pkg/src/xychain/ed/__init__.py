"""Finite-chain exact diagonalization and free-fermion oracles."""
from .basis import SpinBasis, XYHamiltonian, apply_hamiltonian, spin_basis
from .free_fermion import central_pair, free_fermion_finite, hopping_matrix
from .states import (SpinState, ThermalEnsemble, ground_state, magnetizations,
                     reduced_pair_rho, sector_ground_states, spin_correlators,
                     thermal_state)

__all__ = [
    "SpinBasis", "XYHamiltonian", "apply_hamiltonian", "spin_basis",
    "central_pair", "free_fermion_finite", "hopping_matrix",
    "SpinState", "ThermalEnsemble", "ground_state", "magnetizations",
    "reduced_pair_rho", "sector_ground_states", "spin_correlators", "thermal_state",
]
