"""Brute-force mode-sum checks in a finite quantization box.

Plane-wave modes ``k = (2 pi / L) n`` inside a sphere of radius ``k_cutoff``,
two transverse polarizations each. Atom B sits at the origin and atom A at
``Rvec``. Per mode and polarization:

* ``amp1`` is the first-order amplitude for A to emit the photon,
  ``g_k (mu_A . eps) e^{-i k.R_A} I(omega, T)`` with
  ``g_k = sqrt(c k / (2 hbar V eps0))`` and the time factor
  ``I = int_0^T dt e^{-i omega (T - t)} e^{-i omega_A t - Gamma_A t / 2}``
  ``  = [e^{-i omega_A T - Gamma_A T/2} - e^{-i omega T}] / [i (omega - omega_A) - Gamma_A/2]``.
* ``amp3`` is the third-order amplitude for the photon to leave from B after B
  absorbed A's virtual photon. The inner sum over virtual modes is done in the
  continuum, which turns it into ``xi = k_A^2 mu_B . G(R, omega_A) . mu_A / (eps0 hbar Delta_AB)``;
  B then follows A's decay adiabatically, ``amp3 = xi g_k (mu_B . eps) e^{-i k.R_B} I``.

The physical alkali linewidths (``Gamma/omega ~ 1e-8``) are far narrower than the
shell spacing of any box that fits in memory, so the sums run on a desk-scale copy
of the pair whose linewidths are raised to a resolvable fraction of ``omega_A``
(:func:`desk_scale_pair`). Probabilities are dimensionless and do not depend on
that choice in the continuum limit.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy import integrate

from .atoms import CONSTANTS, AtomPair, AtomSpecies
from .errors import ValidationError
from .tensors import dyadic_green

MIN_ASYMPTOTIC_GT = 20.0
MIN_CUTOFF_RATIO = 1.5
# Lorentzian half-width must span at least this many |k| shell spacings
MIN_SHELLS_PER_HALFWIDTH = 2.0
DESK_LINEWIDTH_RATIO = 0.01


@dataclass(frozen=True)
class ModeGrid:
    """Cubic box of side ``L`` (m); modes with ``0 < |k| <= k_cutoff`` (1/m)."""

    L: float
    k_cutoff: float

    def __post_init__(self):
        if not (self.L > 0.0 and self.k_cutoff > 0.0):
            raise ValidationError("box side and cutoff must be positive", field="L")

    @classmethod
    def for_pair(cls, pair: AtomPair, side_kA: float = 200.0, cutoff_kA: float = 3.0) -> "ModeGrid":
        """Grid with ``L = side_kA / k_A`` and ``k_cutoff = cutoff_kA * k_A``."""
        return cls(side_kA / pair.kA, cutoff_kA * pair.kA)

    @property
    def volume(self) -> float:
        return self.L**3

    @property
    def dk(self) -> float:
        return 2.0 * math.pi / self.L

    @property
    def n_max(self) -> int:
        return int(math.floor(self.k_cutoff / self.dk))

    def chunks(self) -> Iterator[np.ndarray]:
        """Wavevectors in lexicographic ``(n1, n2, n3)`` order, one ``n1`` slab per chunk."""
        n = np.arange(-self.n_max, self.n_max + 1)
        n2, n3 = np.meshgrid(n, n, indexing="ij")
        n2 = n2.ravel()
        n3 = n3.ravel()
        cut2 = (self.k_cutoff / self.dk) ** 2
        for n1 in n:
            m2 = n1 * n1 + n2 * n2 + n3 * n3
            keep = (m2 > 0) & (m2 <= cut2)
            if np.any(keep):
                yield self.dk * np.stack([np.full(keep.sum(), n1), n2[keep], n3[keep]], axis=1).astype(float)

    def count(self) -> int:
        return sum(len(c) for c in self.chunks())


def polarizations(kvec: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two real unit vectors per row of ``kvec``, orthogonal to it and to each other."""
    khat = kvec / np.linalg.norm(kvec, axis=-1, keepdims=True)
    ref = np.zeros_like(khat)
    near_z = np.abs(khat[..., 2]) > 0.9
    ref[..., 2] = np.where(near_z, 0.0, 1.0)
    ref[..., 0] = np.where(near_z, 1.0, 0.0)
    e1 = np.cross(ref, khat)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(khat, e1)
    return e1, e2


@dataclass(frozen=True, eq=False)
class AmplitudeRecord:
    """Amplitudes for a block of modes; ``amp1``/``amp3`` have one column per polarization."""

    kvec: np.ndarray
    amp1: np.ndarray
    amp3: np.ndarray

    @property
    def p1(self) -> np.ndarray:
        """``|amp1 + amp3|^2`` summed over both polarizations, per mode."""
        return np.sum(np.abs(self.amp1 + self.amp3) ** 2, axis=-1)


def desk_scale_pair(pair: AtomPair, linewidth_ratio: float = DESK_LINEWIDTH_RATIO) -> AtomPair:
    """Copy of ``pair`` with ``Gamma_A = linewidth_ratio * omega_A`` (``Gamma_B`` scaled alike).

    Dipoles are re-derived from the new linewidths; frequencies, geometry and
    orientations are kept. The detuning floor is relaxed to one linewidth.
    """
    if not 0.0 < linewidth_ratio < 1.0:
        raise ValidationError("linewidth_ratio must lie in (0, 1)", field="linewidth_ratio")
    scale = linewidth_ratio * pair.excited.omega / pair.excited.gamma

    def rescale(s: AtomSpecies) -> AtomSpecies:
        return AtomSpecies.from_linewidth(s.label, s.omega, s.gamma * scale, s.mu, s.source)

    return dataclasses.replace(pair, excited=rescale(pair.excited), ground=rescale(pair.ground),
                               detuning_floor=1.0)


def time_factor(omega, pair: AtomPair, T: float) -> np.ndarray:
    """Closed form of ``int_0^T dt e^{-i omega (T-t)} e^{-i omega_A t - Gamma_A t/2}``."""
    wa = pair.excited.omega
    half = 0.5 * pair.excited.gamma
    delta = np.asarray(omega, dtype=float) - wa
    # common factor e^{-i omega_A T} pulled out to keep the bracket well conditioned
    bracket = np.exp(-half * T) - np.exp(-1j * delta * T)
    return np.exp(-1j * wa * T) * bracket / (1j * delta - half)


def scattering_ratio(pair: AtomPair) -> complex:
    """``xi``: B's excitation amplitude relative to A's, ``k_A^2 muB.G.muA / (eps0 hbar Delta)``."""
    if pair.orientation != "fixed":
        raise ValidationError("mode sums need fixed dipole vectors", field="orientation")
    g = dyadic_green(pair.kA, pair.Rvec)
    return (pair.kA**2 * (pair.ground.mu @ g @ pair.excited.mu)
            / (CONSTANTS.epsilon0 * CONSTANTS.hbar * pair.detuning))


def _couplings(kvec: np.ndarray, pair: AtomPair, volume: float):
    """Amplitudes without the time factor, shape ``(n, 2)`` each."""
    k = np.linalg.norm(kvec, axis=-1)
    g = np.sqrt(CONSTANTS.c * k / (2.0 * CONSTANTS.hbar * volume * CONSTANTS.epsilon0))
    e1, e2 = polarizations(kvec)
    eps = np.stack([e1, e2], axis=1)
    mu_a = eps @ pair.excited.mu
    mu_b = eps @ pair.ground.mu
    phase_a = np.exp(-1j * (kvec @ pair.Rvec))
    c1 = g[:, None] * mu_a * phase_a[:, None]
    c3 = scattering_ratio(pair) * g[:, None] * mu_b
    return c1, c3


def amp1_closed(kvec, pair: AtomPair, T: float, volume: float) -> np.ndarray:
    """First-order emission amplitude for each mode (rows of ``kvec``) and polarization."""
    kvec = np.atleast_2d(np.asarray(kvec, dtype=float))
    c1, _ = _couplings(kvec, pair, volume)
    tf = time_factor(CONSTANTS.c * np.linalg.norm(kvec, axis=-1), pair, T)
    return c1 * tf[:, None]


def amp3_closed(kvec, pair: AtomPair, T: float, volume: float) -> np.ndarray:
    """Third-order amplitude (emission via B), asymptotic quasiresonant form."""
    kvec = np.atleast_2d(np.asarray(kvec, dtype=float))
    _, c3 = _couplings(kvec, pair, volume)
    tf = time_factor(CONSTANTS.c * np.linalg.norm(kvec, axis=-1), pair, T)
    return c3 * tf[:, None]


def amplitudes(grid: ModeGrid, pair: AtomPair, T: float) -> Iterator[AmplitudeRecord]:
    for kvec in grid.chunks():
        c1, c3 = _couplings(kvec, pair, grid.volume)
        tf = time_factor(CONSTANTS.c * np.linalg.norm(kvec, axis=-1), pair, T)[:, None]
        yield AmplitudeRecord(kvec, c1 * tf, c3 * tf)


def _check_sum_inputs(grid: ModeGrid, pair: AtomPair, T: float) -> None:
    gt = pair.excited.gamma * T
    if not (T >= 0.0 and math.isfinite(T)):
        raise ValidationError("T must be non-negative", field="T")
    if 0.0 < gt < MIN_ASYMPTOTIC_GT:
        raise ValidationError(f"Gamma_A T = {gt:.3g} is not asymptotic (need >= {MIN_ASYMPTOTIC_GT:g})",
                              field="T")
    if grid.k_cutoff < MIN_CUTOFF_RATIO * pair.kA:
        raise ValidationError(f"cutoff must be at least {MIN_CUTOFF_RATIO} k_A", field="k_cutoff")
    halfwidth = 0.5 * pair.excited.gamma / CONSTANTS.c
    shell = grid.dk**2 / (2.0 * pair.kA)
    if halfwidth < MIN_SHELLS_PER_HALFWIDTH * shell:
        raise ValidationError(
            f"emission line (half-width {halfwidth:.3g} 1/m) is narrower than "
            f"{MIN_SHELLS_PER_HALFWIDTH:g} mode shells ({shell:.3g} 1/m); enlarge the box "
            "or use desk_scale_pair",
            field="L",
        )


def modesum_pa(grid: ModeGrid, pair: AtomPair, T: float) -> float:
    """Free-space emission probability as a sum of ``|amp1|^2`` over the grid."""
    _check_sum_inputs(grid, pair, T)
    if T == 0.0:
        return 0.0
    total = 0.0
    for kvec in grid.chunks():
        c1, _ = _couplings(kvec, pair, grid.volume)
        tf = time_factor(CONSTANTS.c * np.linalg.norm(kvec, axis=-1), pair, T)
        total += float(np.sum(np.sum(np.abs(c1) ** 2, axis=1) * np.abs(tf) ** 2))
    return total


def asymmetry_check(grid: ModeGrid, pair: AtomPair, T: float) -> tuple[float, float]:
    """Summed ``|amp1 + amp3|^2`` over modes with ``khat.axis > 0`` and ``< 0``."""
    _check_sum_inputs(grid, pair, T)
    forward = backward = 0.0
    for rec in amplitudes(grid, pair, T):
        p1 = rec.p1
        s = rec.kvec @ pair.axis
        forward += float(np.sum(p1[s > 0.0]))
        backward += float(np.sum(p1[s < 0.0]))
    return forward, backward


def interference_density(pair: AtomPair, khat) -> np.ndarray:
    """``sum_eps 2 Re[amp1* amp3]`` per unit solid angle at ``T -> infinity``.

    Built from the mode amplitudes at ``|k| = k_A``; the spectral integral of the
    time factor is the Lorentzian area ``2 pi / Gamma_A``.
    """
    khat = np.atleast_2d(np.asarray(khat, dtype=float))
    kvec = pair.kA * khat
    c1, c3 = _couplings(kvec, pair, 1.0)
    per_mode = np.sum(2.0 * np.real(np.conj(c1) * c3), axis=1)
    density = per_mode * pair.kA**2 * (2.0 * math.pi / (pair.excited.gamma * CONSTANTS.c)) / (2.0 * math.pi) ** 3
    return density


def continuum_pa(pair: AtomPair, T: float, k_cutoff: float) -> float:
    """Infinite-volume limit of :func:`modesum_pa` for the same finite-width integrand.

    With ``v = k/k_A - 1`` and ``g = Gamma_A/(2 omega_A)`` the integrand is
    ``(1+v)^3 [1 + e^{-Gamma T} - 2 e^{-Gamma T/2} cos(omega_A T v)] / (v^2 + g^2)``.
    The non-oscillating part is integrated in closed form; the cosine part uses
    QUADPACK's Fourier-weighted rule.
    """
    C = CONSTANTS
    mu2 = pair.excited.dipole_moment**2
    prefactor = C.c * mu2 / (2.0 * C.hbar * C.epsilon0 * (2.0 * math.pi) ** 3) * (8.0 * math.pi / 3.0)
    kA, wa = pair.kA, pair.excited.omega
    gT = pair.excited.gamma * T
    g = 0.5 * pair.excited.gamma / wa
    lo, hi = -1.0, k_cutoff / kA - 1.0

    def antiderivative(v):
        # (1+v)^3 = (v+3)(v^2+g^2) + (3-g^2) v + (1-3g^2)
        return (0.5 * v * v + 3.0 * v + 0.5 * (3.0 - g * g) * math.log(v * v + g * g)
                + (1.0 - 3.0 * g * g) / g * math.atan(v / g))

    smooth = antiderivative(hi) - antiderivative(lo)
    oscillating = smooth
    if T > 0.0:
        oscillating, _ = integrate.quad(lambda v: (1.0 + v) ** 3 / (v * v + g * g), lo, hi,
                                        weight="cos", wvar=wa * T, limit=4000,
                                        epsabs=0.0, epsrel=1e-10)
    value = ((1.0 + math.exp(-gT)) * smooth - 2.0 * math.exp(-0.5 * gT) * oscillating) / wa**2
    return prefactor * kA**4 * value


def convergence_study(pair: AtomPair, T: float, sides_kA=(100.0, 200.0, 400.0),
                      cutoff_kA: float = 3.0) -> list[dict]:
    """``modesum_pa`` for growing boxes, with errors against 1 and against the continuum."""
    reference = continuum_pa(pair, T, cutoff_kA * pair.kA)
    rows = []
    for side in sides_kA:
        grid = ModeGrid.for_pair(pair, side, cutoff_kA)
        value = modesum_pa(grid, pair, T)
        rows.append({
            "side_kA": float(side),
            "modesum_pa": value,
            "continuum_pa": reference,
            "error_vs_one": abs(value - 1.0),
            "discretization_error": abs(value - reference),
        })
    for prev, row in zip(rows, rows[1:]):
        ratio = prev["discretization_error"] / row["discretization_error"]
        row["observed_order"] = math.log(ratio) / math.log(row["side_kA"] / prev["side_kA"])
    return rows
