"""Potential curves, vibrational levels, densities, dipoles and spectra of
ultralong-range Rydberg molecules of Rb and Cs."""

from .pec import (
    BasisSet,
    PotentialCurveSet,
    build_hamiltonian,
    extended_basis,
    find_wells,
    first_order_mixing,
    manifold_basis,
    nearest_manifold_basis,
    pec_diagonalize,
    pec_low_l_swave,
)
from .radial import RydbergState, rydberg_energy, solve_radial
from .species import quantum_defect, species_lookup
from .units import EnergyQuantity, convert_energy
from .vibrational import reduced_mass, solve_vibrational

__version__ = "0.1.0"

__all__ = [
    "BasisSet",
    "EnergyQuantity",
    "PotentialCurveSet",
    "RydbergState",
    "build_hamiltonian",
    "convert_energy",
    "extended_basis",
    "find_wells",
    "first_order_mixing",
    "manifold_basis",
    "nearest_manifold_basis",
    "pec_diagonalize",
    "pec_low_l_swave",
    "quantum_defect",
    "reduced_mass",
    "rydberg_energy",
    "solve_radial",
    "solve_vibrational",
    "species_lookup",
]
