"""Resonant total force on the pair, vacuum momentum and emission directionality."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atoms import CONSTANTS, AtomPair
from .errors import ValidationError
from .tensors import scaled_green, scaled_green_gradient


@dataclass(frozen=True, eq=False)
class ForceResult:
    """Total resonant force at ``T = 0`` and quantities tied to it.

    ``P_inf`` and ``D`` are derived from ``F0``, so ``P_inf == -F0 / decay_rate`` holds
    by construction.
    """

    x: float
    R: float
    axis: np.ndarray
    F0: np.ndarray
    decay_rate: float
    T: float = 0.0

    @property
    def decay_factor(self) -> float:
        return math.exp(-self.decay_rate * self.T)

    @property
    def force(self) -> np.ndarray:
        """Total force at time ``T``."""
        return self.F0 * self.decay_factor

    @property
    def P_inf(self) -> np.ndarray:
        return -self.F0 / self.decay_rate

    @property
    def F0_axial(self) -> float:
        return float(self.axis @ self.F0)

    @property
    def P_axial(self) -> float:
        return float(self.axis @ self.P_inf)

    @property
    def D(self) -> float:
        """Axis-projected mean photon momentum times c/h, in Hz."""
        return self.P_axial * CONSTANTS.c / CONSTANTS.h

    @property
    def D_over_gamma(self) -> float:
        """Dimensionless ``2 pi D / Gamma_A``."""
        return 2.0 * math.pi * self.D / self.decay_rate


def _coupling_rate(species, k: float) -> float:
    # |mu|^2 k^3 / (eps0 hbar), in rad/s; equals 3 pi Gamma for a consistent species at its own k
    return species.dipole_moment**2 * k**3 / (CONSTANTS.epsilon0 * CONSTANTS.hbar)


def _frequency_factor(pair: AtomPair, rotating_wave: bool) -> float:
    wa, wb = pair.excited.omega, pair.ground.omega
    denom = 2.0 * wa * pair.detuning if rotating_wave else (wa - wb) * (wa + wb)
    return wb / denom


def force_kernel(pair: AtomPair, rotating_wave: bool = False) -> float:
    """Scalar prefactor ``4 omega_B k_A^7 / [eps0^2 hbar (omega_A^2 - omega_B^2)]`` (SI).

    With ``rotating_wave=True`` the denominator becomes ``2 omega_A Delta_AB``.
    """
    C = CONSTANTS
    return 4.0 * pair.kA**7 * _frequency_factor(pair, rotating_wave) / (C.epsilon0**2 * C.hbar)


def scaled_gradient(x: float, axis: np.ndarray, unit_dyad_a: np.ndarray,
                    unit_dyad_b: np.ndarray) -> np.ndarray:
    """``d/d(kR) Tr[ma ImGt mb ImGt]`` for dimensionless dyads (trace-one for unit dipoles)."""
    img = scaled_green(x, axis).imag
    dimg = scaled_green_gradient(x, axis).imag
    return 2.0 * np.einsum("qi,lij,jp,pq->l", unit_dyad_a, dimg, unit_dyad_b, img)


def resonant_force(pair: AtomPair, T: float = 0.0, rotating_wave: bool = False) -> ForceResult:
    """Total resonant force ``<F_A + F_B>`` on the pair.

    Evaluated in units of ``hbar k_A Gamma_A`` and converted to newtons. The
    ``rotating_wave`` flag keeps only the ``1/Delta_AB`` part of the frequency factor.
    """
    if not (T >= 0.0 and math.isfinite(T)):
        raise ValidationError(f"observation time must be non-negative, got {T!r}", field="T")
    A, B = pair.excited, pair.ground
    ma, mb = pair.dyads()
    ma = ma / A.dipole_moment**2
    mb = mb / B.dipole_moment**2
    grad = scaled_gradient(pair.x, pair.axis, ma, mb)
    rate = (_frequency_factor(pair, rotating_wave) / (4.0 * math.pi**2)
            * _coupling_rate(A, pair.kA) * _coupling_rate(B, pair.kA))
    F0 = CONSTANTS.hbar * pair.kA * rate * grad
    return ForceResult(x=pair.x, R=pair.R, axis=pair.axis, F0=F0, decay_rate=A.gamma, T=float(T))


def directionality(pair: AtomPair) -> float:
    """``D = (axis . P_inf) c / h`` in Hz."""
    return resonant_force(pair).D


def x_grid(x_min: float, x_max: float, samples: int) -> np.ndarray:
    if not (0.0 < x_min < x_max and math.isfinite(x_max)):
        raise ValidationError(f"need 0 < x_min < x_max, got [{x_min!r}, {x_max!r}]", field="x")
    if int(samples) != samples or samples < 2:
        raise ValidationError(f"samples must be an integer >= 2, got {samples!r}", field="samples")
    return np.linspace(x_min, x_max, int(samples))


def scan_separation(pair: AtomPair, x_min: float, x_max: float, samples: int,
                    T: float = 0.0, rotating_wave: bool = False) -> list[ForceResult]:
    """Force results on a uniform grid of ``x = k_A R``, keeping the pair's axis and dipoles."""
    return [resonant_force(pair.at_x(float(x)), T, rotating_wave)
            for x in x_grid(x_min, x_max, samples)]
