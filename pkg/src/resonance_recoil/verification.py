"""Self-checks run by ``resonance-recoil verify``.

Each check returns a :class:`Check` with the measured residual and the tolerance it
was held to. ``fast_checks`` covers the closed-form identities; ``oracle_checks``
adds the finite-box mode sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import dynamics, emission, oracle
from .atoms import AtomPair, AtomSpecies, make_pair
from .tensors import dyadic_green, grad_imim_contraction

DEFAULT_SEED = 0


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""
    informational: bool = False

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "tolerance", float(self.tolerance))
        object.__setattr__(self, "passed", bool(self.passed))

    def line(self) -> str:
        status = "INFO" if self.informational else ("PASS" if self.passed else "FAIL")
        text = f"{status} {self.name}: value={self.value!r} tol={self.tolerance!r}"
        return f"{text} {self.detail}".rstrip()


def random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_pairs(A: AtomSpecies, B: AtomSpecies, n: int, seed: int,
                 x_range: tuple[float, float] = (0.5, 20.0)) -> list[AtomPair]:
    """``n`` pairs with random separation, pair axis and dipole directions."""
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n):
        x = rng.uniform(*x_range)
        axis = random_unit(rng)
        a = A.oriented(random_unit(rng))
        b = B.oriented(random_unit(rng))
        pairs.append(make_pair(a, b, x / A.k, axis))
    return pairs


def fd_gradient(f: Callable[[np.ndarray], float], r: np.ndarray, h: float) -> np.ndarray:
    out = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        out[i] = (f(r + e) - f(r - e)) / (2.0 * h)
    return out


def gradient_configurations(A: AtomSpecies, B: AtomSpecies):
    """Three dipole/axis arrangements used for the finite-difference check."""
    oblique_axis = np.array([1.0, 2.0, -0.5]) / np.linalg.norm([1.0, 2.0, -0.5])
    return [
        ("perpendicular", np.array([1.0, 0.0, 0.0]), A.oriented([0, 0, 1]).mu, B.oriented([0, 0, 1]).mu),
        ("parallel", np.array([1.0, 0.0, 0.0]), A.oriented([1, 0, 0]).mu, B.oriented([1, 0, 0]).mu),
        ("oblique", oblique_axis, A.oriented([1, 1, 1]).mu, B.oriented([0.3, -1.0, 0.7]).mu),
    ]


def gradient_errors(A: AtomSpecies, B: AtomSpecies, n_x: int = 50) -> np.ndarray:
    """Relative error of the analytic gradient against central differences, ``h = 1e-6 R``."""
    k = A.k
    errors = []
    for _, axis, mu_a, mu_b in gradient_configurations(A, B):
        def f(r, mu_a=mu_a, mu_b=mu_b):
            img = dyadic_green(k, r).imag
            return float((mu_a @ img @ mu_b) ** 2)

        for x in np.linspace(0.5, 20.0, n_x):
            r = (x / k) * axis
            exact = grad_imim_contraction(k, r, mu_a, mu_b)
            approx = fd_gradient(f, r, 1e-6 * np.linalg.norm(r))
            errors.append(np.linalg.norm(approx - exact) / np.linalg.norm(exact))
    return np.array(errors)


def peak_location(pair: AtomPair, x_min=0.5, x_max=20.0, samples=400) -> tuple[float, float]:
    """``(x, 2 pi D / Gamma_A)`` at the maximum of ``|D|`` over a separation scan."""
    rows = dynamics.scan_separation(pair, x_min, x_max, samples)
    i = int(np.argmax([abs(r.D) for r in rows]))
    return rows[i].x, rows[i].D_over_gamma


def fast_checks(registry: Mapping[str, AtomSpecies], excited: str, ground: str,
                seed: int = DEFAULT_SEED, n_pairs: int = 100) -> list[Check]:
    A, B = registry[excited], registry[ground]
    checks = []

    worst = max(abs(s.consistency_residual) for s in registry.values())
    checks.append(Check("species linewidth/dipole consistency", worst < 1e-6, worst, 1e-6))

    pa = max(abs(emission.p_free_space(s) - 1.0) for s in registry.values())
    checks.append(Check("free-space probability p_a = 1", pa < 1e-10, pa, 1e-10))

    pairs = random_pairs(A, B, n_pairs, seed)
    res = max(abs(emission.p_interference_de(p) + emission.p_interference_fg(p))
              / abs(emission.p_interference_de(p)) for p in pairs)
    checks.append(Check("optical theorem p_de + p_fg = 0 (closed form)", res < 1e-12, res, 1e-12,
                        f"pairs={n_pairs} seed={seed}"))

    quad = max(abs(emission.integrate_dpdomega(p) - emission.p_interference_fg(p))
               / abs(emission.p_interference_fg(p)) for p in pairs)
    checks.append(Check("sphere integral of dP/dOmega = p_fg", quad < 1e-6, quad, 1e-6,
                        "order=64x128"))

    sym = 0.0
    for p in pairs[:20]:
        g = dyadic_green(p.kA, p.Rvec)
        sym = max(sym, np.max(np.abs(g - g.T)) / np.max(np.abs(g)),
                  np.max(np.abs(g - dyadic_green(p.kA, -p.Rvec))))
    checks.append(Check("Green's function symmetry and parity", sym < 1e-14, sym, 1e-14))

    grad = float(np.max(gradient_errors(A, B)))
    checks.append(Check("analytic gradient vs central differences", grad < 1e-6, grad, 1e-6,
                        "combinations=150"))

    base = make_pair(A.oriented([0, 0, 1]), B.oriented([0, 0, 1]), 1.0 / A.k, [1, 0, 0])
    worst_mom = 0.0
    aligned = True
    for x in (0.8, 1.28, 3.0):
        p = base.at_x(x)
        emitted = emission.emitted_momentum(p).total_momentum
        p_rw = dynamics.resonant_force(p, rotating_wave=True).P_inf
        aligned &= bool(np.dot(emitted, p_rw) > 0.0)
        worst_mom = max(worst_mom, abs(np.linalg.norm(emitted) / np.linalg.norm(p_rw) - 1.0))
    checks.append(Check("emitted momentum matches rotating-wave P_inf", aligned and worst_mom < 0.05,
                        worst_mom, 0.05, f"direction_ok={aligned}"))

    ratios = [emission.budget(base.at_x(x)).order_check for x in np.linspace(0.5, 20.0, 400)]
    worst_ratio = max(ratios)
    checks.append(Check("suppression max(p_b, p_c)/|p_fg|", worst_ratio < 1e-4, worst_ratio, 1e-4))

    x_fixed, d_fixed = peak_location(base)
    checks.append(Check("peak |D| location, fixed z dipoles", True, x_fixed, 0.0,
                        f"2piD/Gamma_A={d_fixed!r}", informational=True))
    iso = make_pair(A, B, 1.0 / A.k, [1, 0, 0], orientation="isotropic")
    x_iso, d_iso = peak_location(iso)
    checks.append(Check("peak |D| location, isotropic dipoles", True, x_iso, 0.0,
                        f"2piD/Gamma_A={d_iso!r}", informational=True))
    return checks


def oracle_checks(registry: Mapping[str, AtomSpecies], excited: str, ground: str,
                  seed: int = DEFAULT_SEED, n_pairs: int = 10) -> list[Check]:
    A, B = registry[excited], registry[ground]
    checks = []
    base = make_pair(A.oriented([0, 0, 1]), B.oriented([0, 0, 1]), 1.28 / A.k, [1, 0, 0])
    desk = oracle.desk_scale_pair(base)
    T = 30.0 / desk.excited.gamma

    rows = oracle.convergence_study(desk, T, sides_kA=(100.0, 200.0))
    at200 = rows[-1]
    checks.append(Check("mode-sum p_a at L=200/k_A", at200["error_vs_one"] < 0.02,
                        at200["modesum_pa"], 0.02))
    improving = rows[1]["error_vs_one"] < rows[0]["error_vs_one"]
    checks.append(Check("mode-sum error shrinks when L doubles", improving, rows[1]["error_vs_one"],
                        rows[0]["error_vs_one"]))

    far = oracle.desk_scale_pair(base.at_x(1e5))
    grid = oracle.ModeGrid.for_pair(far)
    f, b = oracle.asymmetry_check(grid, far, T)
    control = abs(f - b)
    checks.append(Check("R -> infinity control forward = backward", control < 1e-3, control, 1e-3))

    agree = 0
    pairs = random_pairs(A, B, n_pairs, seed, x_range=(0.5, 3.0))
    for p in pairs:
        d = oracle.desk_scale_pair(p)
        f, b = oracle.asymmetry_check(oracle.ModeGrid.for_pair(d), d, 30.0 / d.excited.gamma)
        p_axial = dynamics.resonant_force(p).P_axial
        agree += int(np.sign(f - b) == np.sign(p_axial))
    checks.append(Check("sign(forward - backward) = sign(axis . P_inf)", agree == n_pairs,
                        float(agree), float(n_pairs), f"seed={seed}"))
    return checks
