"""Resonant van der Waals force imbalance, vacuum momentum and directional emission
for a pair of dissimilar two-level atoms with one atom excited."""

from .atoms import (
    CONSTANTS,
    AtomPair,
    AtomSpecies,
    PhysicalConstants,
    dipole_from_linewidth,
    linewidth_from_dipole,
    load_species,
    make_pair,
)
from .errors import (
    GeometryError,
    IndistinguishableSpeciesError,
    SpeciesFileError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "CONSTANTS",
    "AtomPair",
    "AtomSpecies",
    "PhysicalConstants",
    "dipole_from_linewidth",
    "linewidth_from_dipole",
    "load_species",
    "make_pair",
    "GeometryError",
    "IndistinguishableSpeciesError",
    "SpeciesFileError",
    "ValidationError",
]
