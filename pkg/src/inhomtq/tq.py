"""Inhomogeneous T-Q relation: coefficients, linear solve for Q, Bethe roots, energies."""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .algebra import (
    Polynomial,
    RankDeficientError,
    XBasisPolynomial,
    poly_eval,
    poly_magnitude,
    poly_roots,
    x_to_u,
)
from .lattice import ChainSpec
from .spectrum import (
    LambdaFunction,
    LambdaReconstructionError,
    diagonalize_h,
    lambda_functions,
)

__all__ = [
    "PoleProximityError",
    "DiagonalBoundaryError",
    "ImaginaryEnergyWarning",
    "BetheSolution",
    "LevelResult",
    "CompletenessReport",
    "a_bar",
    "d_bar",
    "delta_term",
    "energy_constant",
    "tq_terms",
    "tq_residual",
    "cysw_residual",
    "cysw_scale",
    "solve_q",
    "canonical_root",
    "q_from_roots",
    "energy_from_roots",
    "cysw_energy",
    "completeness_scan",
    "circle_nodes",
    "check_nodes",
    "TQTerms",
]

POLE_TOL = 1e-3
TQ_TOL = 1e-8
ENERGY_TOL = 1e-6
EDGE_TOL = 1e-9
Q_RADII = tuple(2.0**k for k in range(-1, 9))


class PoleProximityError(ValueError):
    pass


class DiagonalBoundaryError(ValueError):
    pass


class ImaginaryEnergyWarning(RuntimeWarning):
    pass


def a_bar(u, spec: ChainSpec, pole_tol: float = POLE_TOL):
    if np.any(np.abs(np.asarray(u) + 0.5) < pole_tol):
        raise PoleProximityError(f"a_bar evaluated at u={u}, too close to the pole at -1/2")
    prm = spec.params
    s = spec.sign_factor
    n = spec.n_sites
    return (2 * u + 2) / (2 * u + 1) * (u + s * prm.p) * (prm.alpha * u + s * prm.q) * (u + 1) ** (2 * n)


def d_bar(u, spec: ChainSpec, pole_tol: float = POLE_TOL):
    return a_bar(-u - 1, spec, pole_tol)


def delta_term(u, spec: ChainSpec):
    return 2 * (1 - spec.params.alpha) * (u * (u + 1)) ** (2 * spec.n_sites + 1)


def energy_constant(spec: ChainSpec) -> float:
    # The (-) branch flips p and q, and the boundary part of the constant with them.
    prm = spec.params
    return spec.n_sites - 1 + spec.sign_factor * (1 / prm.p + prm.alpha / prm.q)


def check_nodes(n_sites: int) -> np.ndarray:
    return 0.425 + 0.35 * np.arange(10)


class TQTerms(NamedTuple):
    """Pieces of ``lhs = a_term + d_term + inhom`` and their round-off scale."""

    lhs: complex
    a_term: complex
    d_term: complex
    inhom: complex
    scale: float

    @property
    def residual(self) -> complex:
        return self.lhs - self.a_term - self.d_term - self.inhom


def tq_terms(lam: Polynomial, q: Polynomial, q1: Polynomial, q2: Polynomial,
             spec: ChainSpec, u, pole_tol: float = POLE_TOL) -> TQTerms:
    """Evaluate the generalized T-Q relation at u (scalar or array).

    ``scale`` bounds every term through absolute-value polynomial
    evaluation, so ``|residual| / scale`` is a backward-error style
    relative mismatch. With q1 = q2 = 1 this is the linear single-Q relation.
    """
    a, d = a_bar(u, spec, pole_tol), d_bar(u, spec, pole_tol)
    inhom = delta_term(u, spec)
    um, up = u - 1, u + 1
    lhs = poly_eval(lam, u) * poly_eval(q, u) * poly_eval(q1, u) * poly_eval(q2, u)
    a_term = a * poly_eval(q, um) * poly_eval(q1, um) * poly_eval(q1, u)
    d_term = d * poly_eval(q, up) * poly_eval(q2, up) * poly_eval(q2, u)
    scale = np.maximum.reduce([
        poly_magnitude(lam, u) * poly_magnitude(q, u) * poly_magnitude(q1, u) * poly_magnitude(q2, u),
        np.abs(a) * poly_magnitude(q, um) * poly_magnitude(q1, um) * poly_magnitude(q1, u),
        np.abs(d) * poly_magnitude(q, up) * poly_magnitude(q2, up) * poly_magnitude(q2, u),
        np.abs(inhom),
    ])
    return TQTerms(lhs, a_term, d_term, inhom, scale)


def cysw_residual(lam: Polynomial, q: Polynomial, q1: Polynomial, q2: Polynomial,
                  spec: ChainSpec, u: complex) -> complex:
    """LHS minus RHS of the two-sided (M >= 0) inhomogeneous T-Q relation at u."""
    return complex(tq_terms(lam, q, q1, q2, spec, complex(u)).residual)


def cysw_scale(lam, q, q1, q2, spec: ChainSpec, u: complex) -> float:
    return float(tq_terms(lam, q, q1, q2, spec, complex(u)).scale)


_ONE = Polynomial([1.0])


def tq_residual(lam: Polynomial, q: Polynomial, spec: ChainSpec, nodes) -> float:
    """Max relative mismatch of the linear T-Q relation over ``nodes``.

    Deliberately evaluated node by node through the two-sided relation with
    q1 = q2 = 1, so the M = 0 reduction is exact rather than approximate.
    """
    worst = 0.0
    for u in np.atleast_1d(np.asarray(nodes, dtype=complex)):
        terms = tq_terms(lam, q, _ONE, _ONE, spec, complex(u))
        worst = max(worst, abs(terms.residual) / max(float(terms.scale), 1e-300))
    return float(worst)


def canonical_root(x: complex) -> complex:
    """Bethe root lambda with lambda(lambda+1) = x, Re >= -1/2, Im >= 0 on the edge."""
    lam = (-1 + cmath.sqrt(1 + 4 * complex(x))) / 2
    if abs(lam.real + 0.5) <= EDGE_TOL:
        lam = complex(-0.5, abs(lam.imag))
    return lam


def q_from_roots(roots) -> XBasisPolynomial:
    """Monic Q in the x basis from Bethe roots (each root and its partner)."""
    xs = [complex(r) * (complex(r) + 1) for r in roots]
    out = Polynomial([1.0])
    for x in xs:
        out = out * Polynomial([-x, 1.0])
    return XBasisPolynomial(out.coeffs)


def _energy_sum(values, const: float) -> float:
    total = 2 * sum(values) + const
    if abs(total.imag) > 1e-8 * max(1.0, abs(total.real)):
        warnings.warn(f"energy has imaginary part {total.imag:.3e}", ImaginaryEnergyWarning, stacklevel=3)
    return float(total.real)


def energy_from_roots(roots, spec: ChainSpec) -> float:
    vals = []
    for r in roots:
        r = complex(r)
        x = r * (r + 1)
        if abs(x) < 1e-12:
            raise ValueError(f"Bethe root {r} sits on a pole of the energy formula")
        vals.append(1 / x)
    return _energy_sum(vals, energy_constant(spec))


def cysw_energy(lams, mus, nus, spec: ChainSpec) -> float:
    if len(mus) != len(nus):
        raise ValueError("mu and nu lists must have equal length M")
    if len(lams) != spec.n_sites - 2 * len(mus):
        raise ValueError(f"expected {spec.n_sites - 2 * len(mus)} lambda roots, got {len(lams)}")
    vals = []
    for r in lams:
        r = complex(r)
        if abs(r * (r + 1)) < 1e-12:
            raise ValueError(f"lambda root {r} sits on a pole")
        vals.append(1 / (r * (r + 1)))
    for mu, nu in zip(mus, nus):
        mu, nu = complex(mu), complex(nu)
        if abs(nu) < 1e-12 or abs(mu + 1) < 1e-12:
            raise ValueError(f"(mu, nu) = ({mu}, {nu}) sits on a pole")
        vals.append(1 / nu - 1 / (mu + 1))
    return _energy_sum(vals, energy_constant(spec))


@dataclass
class BetheSolution:
    state_index: int
    q_poly: XBasisPolynomial
    roots: list[complex]
    tq_residual: float
    energy: float

    @property
    def q_u(self) -> Polynomial:
        return x_to_u(self.q_poly)


def circle_nodes(n_sites: int, radius: float) -> np.ndarray:
    """4N+6 spectral parameters with x = u(u+1) evenly spaced on |x| = radius."""
    m = 4 * n_sites + 6
    xs = radius * np.exp(2j * np.pi * (np.arange(m) + 0.25) / m)
    return (-1 + np.sqrt(1 + 4 * xs)) / 2


def _x_relation(lam_x: np.ndarray, spec: ChainSpec, us: np.ndarray):
    """Per-node values needed by the collocation rows, all in the x basis."""
    x0, xm, xp = us * (us + 1), (us - 1) * us, (us + 1) * (us + 2)
    lam_poly = Polynomial(lam_x)
    return (x0, xm, xp, poly_eval(lam_poly, x0), poly_magnitude(lam_poly, x0),
            a_bar(us, spec), d_bar(us, spec), delta_term(us, spec))


def _x_mismatch(q_x: np.ndarray, rel) -> float:
    x0, xm, xp, lam_v, lam_m, a, d, inhom = rel
    q = Polynomial(q_x)
    res = lam_v * poly_eval(q, x0) - a * poly_eval(q, xm) - d * poly_eval(q, xp) - inhom
    scale = np.maximum.reduce([
        lam_m * poly_magnitude(q, x0), np.abs(a) * poly_magnitude(q, xm),
        np.abs(d) * poly_magnitude(q, xp), np.abs(inhom),
    ])
    return float(np.max(np.abs(res) / scale))


def _collocate(rel, n: int) -> np.ndarray | None:
    x0, xm, xp, lam_v, _, a, d, inhom = rel
    powers = np.arange(n + 1)
    cols = (lam_v[:, None] * x0[:, None] ** powers
            - a[:, None] * xm[:, None] ** powers
            - d[:, None] * xp[:, None] ** powers)
    matrix, rhs = cols[:, :n], inhom - cols[:, n]
    # Equilibrate rows by the largest individual term of the relation.
    rows = np.maximum.reduce([np.abs(lam_v * x0**n), np.abs(a * xm**n), np.abs(d * xp**n), np.abs(inhom)])
    matrix, rhs = matrix / rows[:, None], rhs / rows
    cols_scale = np.max(np.abs(matrix), axis=0)
    if np.any(cols_scale == 0):
        return None
    sol, _, rank, _ = np.linalg.lstsq(matrix / cols_scale, rhs, rcond=None)
    if rank < n:
        return None
    return np.append(sol / cols_scale, 1.0)


def solve_q(lam: LambdaFunction, spec: ChainSpec) -> BetheSolution:
    """Solve the linear T-Q relation for the monic Q of x-degree N.

    The N lower x-coefficients of Q are the unknowns of a row-equilibrated
    collocation least-squares problem. The monomial x basis is only well
    conditioned near the scale of Q's own roots, so the collocation circle
    radius is chosen from a geometric ladder by the mismatch on a shared
    validation set. The relation is finally checked at real nodes that
    take no part in the solve.
    """
    if spec.params.xi == 0:
        raise DiagonalBoundaryError(
            "xi = 0 (diagonal boundary) has no inhomogeneous term; the fixed-degree "
            "M = 0 solution does not apply"
        )
    n = spec.n_sites
    lam_x = lam.xlam.xcoeffs
    per_radius = [_x_relation(lam_x, spec, circle_nodes(n, r)) for r in Q_RADII]
    validation = tuple(np.concatenate(parts) for parts in zip(*per_radius))

    best, best_score = None, np.inf
    for rel in per_radius:
        coeffs = _collocate(rel, n)
        if coeffs is None:
            continue
        if np.all(lam_x.imag == 0):
            coeffs = coeffs.real.astype(complex)
        score = _x_mismatch(coeffs, validation)
        if score < best_score:
            best, best_score = coeffs, score
    if best is None:
        raise RankDeficientError("T-Q collocation system is rank deficient at every radius")

    q_poly = XBasisPolynomial(best)
    residual = tq_residual(lam.lam, x_to_u(q_poly), spec, check_nodes(n))
    xroots = poly_roots(q_poly.as_x_polynomial())
    roots = [canonical_root(x) for x in xroots]
    if np.all(q_poly.xcoeffs.imag == 0):
        # real Q: strip round-off imaginary parts from real roots
        roots = [complex(r.real) if abs(r.imag) <= 1e-12 * max(1.0, abs(r)) else r for r in roots]
    roots = sorted(roots, key=lambda z: (round(z.real, 9), z.imag))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ImaginaryEnergyWarning)
        energy = energy_from_roots(roots, spec)
    return BetheSolution(lam.state_index, q_poly, roots, residual, energy)


@dataclass
class LevelResult:
    index: int
    energy_direct: float
    energy_bethe: float | None = None
    tq_residual: float | None = None
    roots: list[complex] = field(default_factory=list)
    lam: LambdaFunction | None = None
    solution: BetheSolution | None = None
    error: str | None = None

    def solved(self, tol_tq: float, tol_energy: float) -> bool:
        return (
            self.error is None
            and self.tq_residual is not None
            and self.tq_residual <= tol_tq
            and abs(self.energy_direct - self.energy_bethe) <= tol_energy
        )


@dataclass
class CompletenessReport:
    spec: ChainSpec
    levels: list[LevelResult]
    tol_tq: float
    tol_energy: float
    max_energy_mismatch: float
    max_residual: float
    all_solved: bool
    distinct: bool

    @property
    def n_solved(self) -> int:
        return sum(lv.solved(self.tol_tq, self.tol_energy) for lv in self.levels)


def _distinct(solutions: list[BetheSolution], sep: float = 1e-6) -> bool:
    vecs = np.array([s.q_poly.xcoeffs for s in solutions])
    for i in range(len(vecs)):
        if len(vecs) > i + 1 and np.min(np.max(np.abs(vecs[i + 1:] - vecs[i]), axis=1)) <= sep:
            return False
    return True


def completeness_scan(spec: ChainSpec, tol_tq: float = TQ_TOL, tol_energy: float = ENERGY_TOL) -> CompletenessReport:
    """Solve the linear T-Q relation for every eigenstate of H."""
    es = diagonalize_h(spec)
    lams = lambda_functions(spec, es)
    levels: list[LevelResult] = []
    for k, lf in enumerate(lams):
        level = LevelResult(k, float(es.energies[k]))
        if isinstance(lf, LambdaReconstructionError):
            level.error = str(lf)
            levels.append(level)
            continue
        level.lam = lf
        try:
            sol = solve_q(lf, spec)
        except (ValueError, np.linalg.LinAlgError) as exc:
            level.error = f"{type(exc).__name__}: {exc}"
        else:
            level.solution = sol
            level.energy_bethe = sol.energy
            level.tq_residual = sol.tq_residual
            level.roots = sol.roots
        levels.append(level)

    ok = [lv for lv in levels if lv.error is None]
    max_mismatch = max((abs(lv.energy_direct - lv.energy_bethe) for lv in ok), default=float("inf"))
    max_res = max((lv.tq_residual for lv in ok), default=float("inf"))
    if len(ok) < len(levels):
        max_mismatch = max_res = float("inf")
    all_solved = all(lv.solved(tol_tq, tol_energy) for lv in levels)
    distinct = len(ok) == len(levels) and _distinct([lv.solution for lv in ok])
    return CompletenessReport(spec, levels, tol_tq, tol_energy, max_mismatch, max_res, all_solved, distinct)
