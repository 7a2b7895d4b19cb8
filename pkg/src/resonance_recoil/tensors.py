"""Free-space dyadic Green's function and related 3x3 tensor kernels.

Sign convention: the Green's function carries an overall ``-1/(4 pi)``,

    G(R, k) = -(k e^{ikR} / 4 pi) [alpha/(kR) + i beta/(kR)^2 - beta/(kR)^3]

so that ``Im G(r -> 0) = -(k / 6 pi) I``. Internally everything is written in
terms of ``x = kR`` and the dimensionless ``Gt = G * 4 pi / k``, which splits as
``Gt = a(x) I + b(x) RR^T`` with scalar radial functions ``a`` and ``b``.
"""

from __future__ import annotations

import numpy as np

from .errors import GeometryError, ValidationError

UNIT_TOL = 1e-12
# separations below this many wavelengths/(2 pi) are treated as singular
MIN_KR = 1e-12


def as_vec3(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValidationError(f"{name} must have shape (3,), got {arr.shape}", field=name)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite components", field=name)
    return arr


def unit_axis(v, name: str = "axis") -> np.ndarray:
    """Validate that ``v`` is a unit 3-vector and return it as an array."""
    arr = as_vec3(v, name)
    norm = np.linalg.norm(arr)
    if abs(norm - 1.0) > UNIT_TOL:
        raise GeometryError(f"{name} must be a unit vector (|{name}| = {norm!r})", field=name)
    return arr


def projectors(axis) -> tuple[np.ndarray, np.ndarray]:
    """Transverse projector ``alpha = I - nn`` and ``beta = I - 3nn`` for unit ``axis``."""
    n = unit_axis(axis)
    nn = np.outer(n, n)
    eye = np.eye(3)
    return eye - nn, eye - 3.0 * nn


def radial_functions(x):
    """Scalar parts ``(a, b)`` of ``Gt = a I + b RR``; vectorised over ``x``."""
    x = np.asarray(x, dtype=float)
    phase = -np.exp(1j * x)
    inv = 1.0 / x
    inv2 = inv * inv
    inv3 = inv2 * inv
    a = phase * (inv + 1j * inv2 - inv3)
    b = phase * (-inv - 3j * inv2 + 3.0 * inv3)
    return a, b


def radial_derivatives(x):
    """Derivatives ``(da/dx, db/dx)`` of :func:`radial_functions`."""
    x = np.asarray(x, dtype=float)
    phase = -np.exp(1j * x)
    inv = 1.0 / x
    inv2 = inv * inv
    inv3 = inv2 * inv
    inv4 = inv3 * inv
    pa = inv + 1j * inv2 - inv3
    pb = -inv - 3j * inv2 + 3.0 * inv3
    dpa = -inv2 - 2j * inv3 + 3.0 * inv4
    dpb = inv2 + 6j * inv3 - 9.0 * inv4
    return phase * (1j * pa + dpa), phase * (1j * pb + dpb)


def _check_k(k: float) -> float:
    k = float(k)
    if not np.isfinite(k) or k <= 0.0:
        raise ValidationError(f"wavenumber must be positive, got {k!r}", field="k")
    return k


def _separation(k: float, Rvec) -> tuple[float, np.ndarray]:
    r = as_vec3(Rvec, "Rvec")
    R = float(np.linalg.norm(r))
    if k * R < MIN_KR:
        raise GeometryError(
            "separation is zero or below the singular limit; "
            "use imgreen_origin_limit for r -> 0",
            field="Rvec",
        )
    return R, r / R


def scaled_green(x: float, axis: np.ndarray) -> np.ndarray:
    """Dimensionless ``Gt(x, axis) = G * 4 pi / k``. No validation."""
    a, b = radial_functions(x)
    return a * np.eye(3) + b * np.outer(axis, axis)


def scaled_green_gradient(x: float, axis: np.ndarray) -> np.ndarray:
    """``d Gt_ij / d(k R_l)`` as an array indexed ``[l, i, j]``. No validation."""
    a, b = radial_functions(x)
    da, db = radial_derivatives(x)
    n = axis
    eye = np.eye(3)
    nn = np.outer(n, n)
    radial = np.einsum("l,ij->lij", n, da * eye + db * nn)
    # derivative of the unit vector n_i n_j with respect to kR_l
    angular = (np.einsum("il,j->lij", eye, n) + np.einsum("i,jl->lij", n, eye)
               - 2.0 * np.einsum("i,j,l->lij", n, n, n))
    return radial + (b / x) * angular


def dyadic_green(k: float, Rvec) -> np.ndarray:
    """Free-space dyadic Green's function at wavenumber ``k`` (1/m), separation ``Rvec`` (m).

    Returns a complex symmetric 3x3 array in 1/m.
    """
    k = _check_k(k)
    R, n = _separation(k, Rvec)
    return (k / (4.0 * np.pi)) * scaled_green(k * R, n)


def dyadic_green_gradient(k: float, Rvec) -> np.ndarray:
    """Analytic ``dG_ij/dR_l`` indexed ``[l, i, j]``, in 1/m^2."""
    k = _check_k(k)
    R, n = _separation(k, Rvec)
    return (k * k / (4.0 * np.pi)) * scaled_green_gradient(k * R, n)


def imgreen_origin_limit(k: float) -> np.ndarray:
    """``Im G(r -> 0) = -(k / 6 pi) I``; the real part diverges there and is not returned."""
    k = _check_k(k)
    return -(k / (6.0 * np.pi)) * np.eye(3)


def grad_imim_dyads(k: float, Rvec, dyad_a, dyad_b) -> np.ndarray:
    """Gradient of ``Tr[Ma ImG Mb ImG]`` with respect to ``Rvec``.

    ``Ma``, ``Mb`` are symmetric dipole dyads (``mu mu^T`` for a fixed dipole,
    ``|mu|^2 I / 3`` for an orientation-averaged one). For fixed dipoles the trace
    equals ``(muA . ImG . muB)^2``.
    """
    img = dyadic_green(k, Rvec).imag
    dimg = dyadic_green_gradient(k, Rvec).imag
    ma = np.asarray(dyad_a, dtype=float)
    mb = np.asarray(dyad_b, dtype=float)
    return 2.0 * np.einsum("qi,lij,jp,pq->l", ma, dimg, mb, img)


def grad_imim_contraction(k: float, Rvec, muA, muB) -> np.ndarray:
    """Gradient w.r.t. ``Rvec`` of ``(muA^i ImG_ij muB^j)(muB^p ImG_pq muA^q)``."""
    a = as_vec3(muA, "muA")
    b = as_vec3(muB, "muB")
    img = dyadic_green(k, Rvec).imag
    dimg = dyadic_green_gradient(k, Rvec).imag
    c = a @ img @ b
    dc = np.einsum("i,lij,j->l", a, dimg, b)
    return 2.0 * c * dc
