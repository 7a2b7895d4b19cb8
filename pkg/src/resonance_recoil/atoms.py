"""Two-level atomic species, the species data file, and atom-pair construction."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import (
    GeometryError,
    IndistinguishableSpeciesError,
    SpeciesFileError,
    ValidationError,
)
from .tensors import as_vec3, unit_axis


@dataclass(frozen=True)
class PhysicalConstants:
    # SI 2019 exact values for c and h; epsilon0 is CODATA 2018
    c: float = 299792458.0
    h: float = 6.62607015e-34
    hbar: float = 6.62607015e-34 / (2.0 * math.pi)
    epsilon0: float = 8.8541878128e-12


CONSTANTS = PhysicalConstants()

CONSISTENCY_TOL = 1e-6
DEFAULT_DETUNING_FLOOR = 100.0
ORIENTATIONS = ("fixed", "isotropic")
DEFAULT_SPECIES_FILE = "species/alkali_d1.json"


def linewidth_from_dipole(omega: float, mu: float) -> float:
    """Free-space decay rate of a two-level transition, ``omega^3 mu^2 / (3 pi eps0 hbar c^3)``."""
    C = CONSTANTS
    return omega**3 * mu**2 / (3.0 * math.pi * C.epsilon0 * C.hbar * C.c**3)


def dipole_from_linewidth(omega: float, gamma: float) -> float:
    """Dipole matrix element magnitude (C m) consistent with linewidth ``gamma``."""
    if not (omega > 0.0 and math.isfinite(omega)):
        raise ValidationError(f"omega must be positive, got {omega!r}", field="omega")
    if not (gamma > 0.0 and math.isfinite(gamma)):
        raise ValidationError(f"gamma must be positive, got {gamma!r}", field="gamma")
    C = CONSTANTS
    return math.sqrt(3.0 * math.pi * C.epsilon0 * C.hbar * C.c**3 * gamma / omega**3)


@dataclass(frozen=True, eq=False)
class AtomSpecies:
    """A two-level transition: angular frequency, linewidth and (real) dipole vector."""

    label: str
    omega: float
    gamma: float
    mu: np.ndarray
    source: str = ""

    def __post_init__(self):
        if not (self.omega > 0.0 and math.isfinite(self.omega)):
            raise ValidationError(f"{self.label}: omega must be positive", field="omega")
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ValidationError(f"{self.label}: gamma must be positive", field="gamma")
        mu = as_vec3(self.mu, "mu").copy()
        if not np.linalg.norm(mu) > 0.0:
            raise ValidationError(f"{self.label}: dipole vector must be non-zero", field="mu")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    @classmethod
    def from_linewidth(cls, label: str, omega: float, gamma: float,
                       axis=(0.0, 0.0, 1.0), source: str = "") -> "AtomSpecies":
        """Build a species whose dipole magnitude is derived from ``(omega, gamma)``."""
        direction = as_vec3(axis, "dipole_axis")
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            raise ValidationError(f"{label}: dipole_axis must be non-zero", field="dipole_axis")
        mu = dipole_from_linewidth(omega, gamma) * direction / norm
        return cls(label, float(omega), float(gamma), mu, source)

    @property
    def k(self) -> float:
        return self.omega / CONSTANTS.c

    @property
    def dipole_moment(self) -> float:
        return float(np.linalg.norm(self.mu))

    @property
    def dipole_axis(self) -> np.ndarray:
        return self.mu / self.dipole_moment

    @property
    def consistency_residual(self) -> float:
        return abs(self.gamma - linewidth_from_dipole(self.omega, self.dipole_moment)) / self.gamma

    def check_consistency(self, tol: float = CONSISTENCY_TOL) -> None:
        res = self.consistency_residual
        if not res < tol:
            raise ValidationError(
                f"{self.label}: linewidth/dipole consistency residual {res:.3e} exceeds {tol:.0e}",
                field="gamma_rad_s",
            )

    def oriented(self, axis) -> "AtomSpecies":
        """Same species with its dipole pointed along ``axis`` (magnitude kept)."""
        direction = as_vec3(axis, "dipole_axis")
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            raise ValidationError("dipole_axis must be non-zero", field="dipole_axis")
        return dataclasses.replace(self, mu=self.dipole_moment * direction / norm)

    def dyad(self, orientation: str = "fixed") -> np.ndarray:
        """``mu mu^T`` for a fixed dipole, ``|mu|^2 I / 3`` when orientation-averaged."""
        if orientation == "fixed":
            return np.outer(self.mu, self.mu)
        if orientation == "isotropic":
            return self.dipole_moment**2 * np.eye(3) / 3.0
        raise ValidationError(f"unknown orientation mode {orientation!r}", field="orientation")

    def __repr__(self):
        return (f"AtomSpecies({self.label!r}, omega={self.omega!r}, gamma={self.gamma!r}, "
                f"mu={self.mu.tolist()!r})")


@dataclass(frozen=True, eq=False)
class AtomPair:
    """Atom A (initially excited) and atom B (ground state) at separation ``Rvec = R_A - R_B``."""

    excited: AtomSpecies
    ground: AtomSpecies
    Rvec: np.ndarray
    orientation: str = "fixed"
    detuning_floor: float = DEFAULT_DETUNING_FLOOR
    _axis: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        r = as_vec3(self.Rvec, "Rvec").copy()
        R = float(np.linalg.norm(r))
        if not R > 0.0:
            raise GeometryError("atoms are at zero separation", field="R")
        if self.orientation not in ORIENTATIONS:
            raise ValidationError(f"unknown orientation mode {self.orientation!r}",
                                  field="orientation")
        if not self.detuning_floor >= 0.0:
            raise ValidationError("detuning_floor must be non-negative", field="detuning_floor")
        limit = self.detuning_floor * max(self.excited.gamma, self.ground.gamma)
        delta = self.excited.omega - self.ground.omega
        if not abs(delta) > 0.0 or abs(delta) < limit:
            raise IndistinguishableSpeciesError(
                f"|detuning| = {abs(delta):.6g} rad/s between {self.excited.label} and "
                f"{self.ground.label} is below {self.detuning_floor:g} x max linewidth "
                f"({limit:.6g} rad/s)",
                field="detuning",
            )
        r.setflags(write=False)
        axis = r / R
        axis.setflags(write=False)
        object.__setattr__(self, "Rvec", r)
        object.__setattr__(self, "_axis", axis)

    @property
    def R(self) -> float:
        return float(np.linalg.norm(self.Rvec))

    @property
    def axis(self) -> np.ndarray:
        return self._axis

    @property
    def detuning(self) -> float:
        return self.excited.omega - self.ground.omega

    @property
    def kA(self) -> float:
        return self.excited.k

    @property
    def kB(self) -> float:
        return self.ground.k

    @property
    def x(self) -> float:
        """Dimensionless separation ``k_A R``."""
        return self.kA * self.R

    def dyads(self) -> tuple[np.ndarray, np.ndarray]:
        return self.excited.dyad(self.orientation), self.ground.dyad(self.orientation)

    def at_x(self, x: float) -> "AtomPair":
        """Copy of this pair with ``k_A R = x`` along the same axis."""
        return dataclasses.replace(self, Rvec=(x / self.kA) * self.axis)

    def flipped(self) -> "AtomPair":
        return dataclasses.replace(self, Rvec=-self.Rvec)


def make_pair(A: AtomSpecies, B: AtomSpecies, R: float, axis=(1.0, 0.0, 0.0),
              orientation: str = "fixed",
              detuning_floor: float = DEFAULT_DETUNING_FLOOR) -> AtomPair:
    """Place excited atom ``A`` at ``R * axis`` relative to ground-state atom ``B``."""
    n = unit_axis(axis)
    if not (math.isfinite(R) and R > 0.0):
        raise GeometryError(f"separation must be positive, got {R!r}", field="R")
    A.check_consistency()
    B.check_consistency()
    return AtomPair(A, B, R * n, orientation=orientation, detuning_floor=detuning_floor)


# --- species data file -------------------------------------------------------

_ALLOWED_FIELDS = {"label", "wavelength_nm", "omega_rad_s", "gamma_rad_s", "dipole_axis", "source"}


def _number(entry: dict, key: str, where: str) -> float:
    value = entry[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpeciesFileError(f"{where}: field '{key}' must be a number", field=key)
    value = float(value)
    if not math.isfinite(value):
        raise SpeciesFileError(f"{where}: field '{key}' must be finite", field=key)
    return value


def _parse_entry(entry, index: int) -> AtomSpecies:
    where = f"entry {index}"
    if not isinstance(entry, dict):
        raise SpeciesFileError(f"{where}: expected an object", field=None)
    unknown = sorted(set(entry) - _ALLOWED_FIELDS)
    if unknown:
        raise SpeciesFileError(f"{where}: unknown field(s) {', '.join(unknown)}", field=unknown[0])
    for key in ("label", "gamma_rad_s", "source"):
        if key not in entry:
            raise SpeciesFileError(f"{where}: missing required field '{key}'", field=key)
    label = entry["label"]
    if not isinstance(label, str) or not label:
        raise SpeciesFileError(f"{where}: 'label' must be a non-empty string", field="label")
    where = f"species {label!r}"
    if not isinstance(entry["source"], str) or not entry["source"].strip():
        raise SpeciesFileError(f"{where}: 'source' must be a non-empty citation", field="source")

    has_wl = "wavelength_nm" in entry
    has_omega = "omega_rad_s" in entry
    if has_wl == has_omega:
        raise SpeciesFileError(f"{where}: give exactly one of 'wavelength_nm' or 'omega_rad_s'",
                               field="wavelength_nm")
    if has_wl:
        wl = _number(entry, "wavelength_nm", where)
        if wl <= 0.0:
            raise ValidationError(f"{where}: wavelength_nm must be positive", field="wavelength_nm")
        omega = 2.0 * math.pi * CONSTANTS.c / (wl * 1e-9)
    else:
        omega = _number(entry, "omega_rad_s", where)
        if omega <= 0.0:
            raise ValidationError(f"{where}: omega_rad_s must be positive", field="omega_rad_s")
    gamma = _number(entry, "gamma_rad_s", where)
    if gamma <= 0.0:
        raise ValidationError(f"{where}: gamma_rad_s must be positive", field="gamma_rad_s")

    axis = entry.get("dipole_axis", [0.0, 0.0, 1.0])
    if (not isinstance(axis, list) or len(axis) != 3
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in axis)):
        raise SpeciesFileError(f"{where}: 'dipole_axis' must be a list of 3 numbers",
                               field="dipole_axis")
    species = AtomSpecies.from_linewidth(label, omega, gamma, axis, entry["source"])
    species.check_consistency()
    return species


def bundled_species_path() -> Path:
    return Path(str(resources.files("resonance_recoil").joinpath(DEFAULT_SPECIES_FILE)))


def species_file_digest(path=None) -> str:
    path = bundled_species_path() if path is None else Path(path)
    return hashlib.sha256(path.read_bytes()).hexdigest()


def load_species(path=None) -> Mapping[str, AtomSpecies]:
    """Read a species JSON file into a read-only registry keyed by label.

    Raises ``OSError`` if the file cannot be read, :class:`SpeciesFileError` on
    parse/schema problems and :class:`ValidationError` on unphysical values.
    """
    path = bundled_species_path() if path is None else Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpeciesFileError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(data, list):
        raise SpeciesFileError(f"{path}: top level must be an array of species objects")
    registry: dict[str, AtomSpecies] = {}
    for i, entry in enumerate(data):
        species = _parse_entry(entry, i)
        if species.label in registry:
            raise SpeciesFileError(f"duplicate species label {species.label!r}", field="label")
        registry[species.label] = species
    return MappingProxyType(registry)
