"""One-photon emission channels in the quasiresonant approximation.

Closed forms for the free-space channel (a), scattering off B (b), rescattering
off A (c) and the two interference pairs (d,e) and (f,g); the angular density of
the (f,g) interference and its solid-angle moments.

All channel probabilities are evaluated as rate ratios. With
``kappa_X = |mu_X|^2 k_A^3 / (eps0 hbar)`` the interference channels read
``p_de = kappa_A kappa_B Tr[mA ImGt mB ReGt] / (4 pi^2 Gamma_A Delta_AB)`` where
``Gt = 4 pi G / k_A`` and ``mA``, ``mB`` are the unit dipole dyads.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .atoms import CONSTANTS, AtomPair, AtomSpecies
from .errors import GeometryError, ValidationError
from .tensors import UNIT_TOL, imgreen_origin_limit, scaled_green

DEFAULT_ORDER = 64


@dataclass(frozen=True)
class ProbabilityBudget:
    p_a: float
    p_b: float
    p_c: float
    p_de: float
    p_fg: float

    @property
    def residual_theorem(self) -> float:
        return self.p_de + self.p_fg

    @property
    def order_check(self) -> float:
        return max(self.p_b, self.p_c) / abs(self.p_fg)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["residual_theorem"] = self.residual_theorem
        out["order_check"] = self.order_check
        return out


def _kappa(species: AtomSpecies, k: float) -> float:
    return species.dipole_moment**2 * k**3 / (CONSTANTS.epsilon0 * CONSTANTS.hbar)


def _unit_dyads(pair: AtomPair) -> tuple[np.ndarray, np.ndarray]:
    ma, mb = pair.dyads()
    return ma / pair.excited.dipole_moment**2, mb / pair.ground.dipole_moment**2


def p_free_space(species: AtomSpecies) -> float:
    """Free-space emission probability ``-2 k^2/(eps0 hbar Gamma) mu.ImG(0).mu``.

    Equal to one whenever the dipole and linewidth are consistent.
    """
    k = species.k
    img0 = imgreen_origin_limit(k)
    contraction = species.mu @ img0 @ species.mu
    return float(-2.0 * k**2 * contraction / (CONSTANTS.epsilon0 * CONSTANTS.hbar * species.gamma))


def _interference_scale(pair: AtomPair) -> float:
    A, B = pair.excited, pair.ground
    return _kappa(A, pair.kA) * _kappa(B, pair.kA) / (A.gamma * pair.detuning)


def _trace_im_re(pair: AtomPair) -> float:
    ma, mb = _unit_dyads(pair)
    g = scaled_green(pair.x, pair.axis)
    return float(np.trace(ma @ g.imag @ mb @ g.real))


def p_interference_de(pair: AtomPair) -> float:
    """Interference of free-space emission with rescattering off A, diagrams (d,e)."""
    return _interference_scale(pair) * _trace_im_re(pair) / (4.0 * math.pi**2)


def p_interference_fg(pair: AtomPair) -> float:
    """Interference of free-space emission with scattering off B, diagrams (f,g)."""
    return -_interference_scale(pair) * _trace_im_re(pair) / (4.0 * math.pi**2)


def _trace_abs2(ma, mb, g) -> float:
    # Tr[mA G mB G*]; real for symmetric dyads
    return float(np.trace(ma @ g @ mb @ g.conj()).real)


def p_scatter_b(pair: AtomPair) -> float:
    """Probability of scattering off atom B, second order in ``Gamma/Delta``."""
    A, B = pair.excited, pair.ground
    ma, mb = _unit_dyads(pair)
    xa = pair.x
    xb = pair.kB * pair.R
    term_a = _kappa(B, pair.kA) ** 2 * _trace_abs2(ma, mb, scaled_green(xa, pair.axis))
    term_b = _kappa(A, pair.kB) * _kappa(B, pair.kB) * _trace_abs2(ma, mb, scaled_green(xb, pair.axis))
    return (term_a + term_b) / (16.0 * math.pi**2 * pair.detuning**2)


def p_rescatter_c(pair: AtomPair) -> float:
    """Probability of rescattering off atom A, second order in ``Gamma/Delta``."""
    ma, mb = _unit_dyads(pair)
    bracket = (_interference_scale(pair) * _trace_abs2(ma, mb, scaled_green(pair.x, pair.axis))
               / (16.0 * math.pi**2))
    return 2.0 * bracket**2


def budget(pair: AtomPair) -> ProbabilityBudget:
    return ProbabilityBudget(
        p_a=p_free_space(pair.excited),
        p_b=p_scatter_b(pair),
        p_c=p_rescatter_c(pair),
        p_de=p_interference_de(pair),
        p_fg=p_interference_fg(pair),
    )


def _unit_directions(khat) -> np.ndarray:
    k = np.asarray(khat, dtype=float)
    if k.shape[-1:] != (3,):
        raise ValidationError(f"khat must have trailing dimension 3, got {k.shape}", field="khat")
    norms = np.linalg.norm(k, axis=-1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise GeometryError("khat must be unit vector(s)", field="khat")
    return k


def dpdomega(pair: AtomPair, khat) -> np.ndarray | float:
    """Angular density (1/sr) of the (f,g) interference emission along ``khat``.

    ``khat`` may be a single unit vector or an array of shape ``(..., 3)``.
    """
    k = _unit_directions(khat)
    ma, mb = _unit_dyads(pair)
    g = scaled_green(pair.x, pair.axis)
    # Tr[mA (I - kk) mB G] = Tr[mA mB G] - k.(mB G mA).k
    full = np.trace(ma @ mb @ g)
    proj = np.einsum("...i,ij,...j->...", k, mb @ g @ ma, k)
    phase = np.exp(1j * pair.x * (k @ pair.axis))
    scale = _interference_scale(pair) / (16.0 * math.pi**3)
    out = scale * np.real(phase * (full - proj))
    return float(out) if np.ndim(out) == 0 else out


def forward_backward(pair: AtomPair) -> float:
    """``dP/dOmega`` along the pair axis minus that along its reverse."""
    return dpdomega(pair, pair.axis) - dpdomega(pair, -pair.axis)


# --- solid-angle quadrature --------------------------------------------------

def frame(polar_axis, reference=None) -> np.ndarray:
    """Orthonormal rows ``(e1, e2, e3)`` with ``e3 = polar_axis``.

    ``e1`` is the part of ``reference`` orthogonal to the axis, falling back to the
    Cartesian direction least aligned with the axis.
    """
    e3 = np.asarray(polar_axis, dtype=float)
    e3 = e3 / np.linalg.norm(e3)
    e1 = None
    if reference is not None:
        r = np.asarray(reference, dtype=float)
        r = r - (r @ e3) * e3
        if np.linalg.norm(r) > 1e-9 * max(np.linalg.norm(reference), 1e-300):
            e1 = r / np.linalg.norm(r)
    if e1 is None:
        r = np.eye(3)[int(np.argmin(np.abs(e3)))]
        r = r - (r @ e3) * e3
        e1 = r / np.linalg.norm(r)
    e2 = np.cross(e3, e1)
    return np.stack([e1, e2, e3])


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Gauss-Legendre in ``cos(theta)`` times the periodic trapezoid rule in ``phi``."""

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray

    def directions(self, axes: np.ndarray | None = None) -> np.ndarray:
        """Unit vectors of the nodes, in the frame whose rows are ``axes`` (default: lab)."""
        st = np.sin(self.theta)
        local = np.stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)], axis=-1)
        return local if axes is None else local @ axes

    def integrate(self, values) -> np.ndarray:
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))


def sphere_quadrature(order: int, n_phi: int | None = None) -> SphereQuadrature:
    """Product rule with ``order`` polar nodes and ``n_phi`` (default ``2*order``) azimuths.

    Integrates ``P_l(cos theta) e^{i m phi}`` exactly for ``l <= 2*order - 1`` and
    ``|m| < n_phi``.
    """
    if isinstance(order, bool) or not isinstance(order, (int, float)) or int(order) != order or order < 2:
        raise ValidationError(f"quadrature order must be an integer >= 2, got {order!r}",
                              field="quad_order")
    order = int(order)
    n_phi = 2 * order if n_phi is None else int(n_phi)
    if n_phi < 1:
        raise ValidationError("n_phi must be positive", field="n_phi")
    u, w = np.polynomial.legendre.leggauss(order)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    theta = np.arccos(u)
    T, P = np.meshgrid(theta, phi, indexing="ij")
    W = np.outer(w, np.full(n_phi, 2.0 * np.pi / n_phi))
    return SphereQuadrature(T.ravel(), P.ravel(), W.ravel())


@dataclass(frozen=True, eq=False)
class EmissionDistribution:
    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    khat: np.ndarray
    values: np.ndarray
    total_momentum: np.ndarray

    @property
    def nodes(self) -> list[tuple[float, float, float]]:
        return list(zip(self.theta.tolist(), self.phi.tolist(), self.weights.tolist()))

    @property
    def total_probability(self) -> float:
        return float(self.weights @ self.values)


def emission_frame(pair: AtomPair) -> np.ndarray:
    """Frame with the pair axis as polar axis and ``phi = 0`` containing A's dipole."""
    reference = pair.excited.mu if pair.orientation == "fixed" else None
    return frame(pair.axis, reference)


def emitted_momentum(pair: AtomPair, order: int = DEFAULT_ORDER) -> EmissionDistribution:
    """Sample ``dP/dOmega`` on the sphere and sum ``hbar k_A khat dP/dOmega`` over it."""
    quad = sphere_quadrature(order)
    khat = quad.directions(emission_frame(pair))
    values = dpdomega(pair, khat)
    momentum = CONSTANTS.hbar * pair.kA * quad.integrate(values[:, None] * khat)
    return EmissionDistribution(quad.theta, quad.phi, quad.weights, khat, values, momentum)


def integrate_dpdomega(pair: AtomPair, order: int = DEFAULT_ORDER) -> float:
    """Full-sphere integral of :func:`dpdomega`; equals ``p_interference_fg``."""
    return emitted_momentum(pair, order).total_probability
