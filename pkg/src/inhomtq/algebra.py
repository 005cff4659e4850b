"""Univariate complex polynomials and the crossing-symmetric x = u(u+1) basis."""

from __future__ import annotations

from math import comb
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Polynomial",
    "XBasisPolynomial",
    "RankDeficientError",
    "poly_eval",
    "poly_magnitude",
    "poly_shift",
    "poly_reflect",
    "poly_fit",
    "poly_roots",
    "poly_from_roots",
    "x_to_u",
    "u_to_x",
]

ROOT_TOL = 1e-10
ABERTH_MAX_ITER = 200
CLUSTER_TOL = 1e-6


class RankDeficientError(ValueError):
    """Least-squares design matrix is rank deficient (e.g. coincident nodes)."""


def _trim(coeffs: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(coeffs)
    if nz.size == 0:
        return np.zeros(1, dtype=complex)
    return coeffs[: nz[-1] + 1]


class Polynomial:
    """Polynomial in u with ascending complex coefficients, kept in canonical form."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[complex]):
        if not isinstance(coeffs, np.ndarray):
            coeffs = list(coeffs)
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        self.coeffs = _trim(c.copy())

    @classmethod
    def constant(cls, value: complex) -> "Polynomial":
        return cls([value])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1])

    def norm(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def __call__(self, u):
        return poly_eval(self, u)

    def __add__(self, other: "Polynomial | complex") -> "Polynomial":
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        out = np.zeros(n, dtype=complex)
        out[: len(self.coeffs)] += self.coeffs
        out[: len(other.coeffs)] += other.coeffs
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(-self.coeffs)

    def __sub__(self, other: "Polynomial | complex") -> "Polynomial":
        return self + (-_as_poly(other))

    def __rsub__(self, other: "Polynomial | complex") -> "Polynomial":
        return _as_poly(other) - self

    def __mul__(self, other: "Polynomial | complex") -> "Polynomial":
        other = _as_poly(other)
        return Polynomial(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        out = Polynomial([1.0])
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def allclose(self, other: "Polynomial", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n, dtype=complex)
        b = np.zeros(n, dtype=complex)
        a[: len(self.coeffs)] = self.coeffs
        b[: len(other.coeffs)] = other.coeffs
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
        return bool(np.max(np.abs(a - b)) <= rtol * scale + atol)

    def __repr__(self) -> str:
        return f"Polynomial({np.array2string(self.coeffs, precision=6)})"


def _as_poly(p: "Polynomial | complex") -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial([p])


class XBasisPolynomial:
    """Polynomial in x = u(u+1); its u-expansion is invariant under u -> -u-1."""

    __slots__ = ("xcoeffs",)

    def __init__(self, xcoeffs: Iterable[complex]):
        self.xcoeffs = Polynomial(xcoeffs).coeffs

    @property
    def degree(self) -> int:
        return len(self.xcoeffs) - 1

    def as_x_polynomial(self) -> Polynomial:
        return Polynomial(self.xcoeffs)

    def __call__(self, u):
        u = np.asarray(u, dtype=complex)
        return poly_eval(Polynomial(self.xcoeffs), u * (u + 1))

    def __repr__(self) -> str:
        return f"XBasisPolynomial({np.array2string(self.xcoeffs, precision=6)})"


def poly_eval(p: Polynomial, u):
    """Horner evaluation; ``u`` may be a scalar or an array."""
    u = np.asarray(u, dtype=complex)
    acc = np.zeros_like(u)
    for c in p.coeffs[::-1]:
        acc = acc * u + c
    return acc[()] if acc.ndim == 0 else acc


def poly_magnitude(p: Polynomial, u):
    """Sum of |c_k| |u|^k, the natural round-off scale for evaluating p at u."""
    u = np.abs(np.asarray(u, dtype=complex))
    acc = np.zeros_like(u)
    for c in np.abs(p.coeffs[::-1]):
        acc = acc * u + c
    return acc[()] if acc.ndim == 0 else acc


def poly_shift(p: Polynomial, delta: float) -> Polynomial:
    """Coefficients of p(u + delta) by binomial re-expansion."""
    c = p.coeffs
    n = len(c)
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        if c[k] == 0:
            continue
        for j in range(k + 1):
            out[j] += c[k] * comb(k, j) * delta ** (k - j)
    return Polynomial(out)


def poly_reflect(p: Polynomial) -> Polynomial:
    """Coefficients of p(-u-1)."""
    signs = (-1.0) ** np.arange(len(p.coeffs))
    return poly_shift(Polynomial(p.coeffs * signs), 1.0)


def poly_fit(nodes: Sequence[complex], values: Sequence[complex], degree: int):
    """Least-squares polynomial fit with row equilibration.

    Returns ``(Polynomial, residual)`` where residual is the largest
    mismatch of a single equation relative to the magnitude of its terms.
    With exactly ``degree + 1`` nodes the fit interpolates.
    """
    nodes = np.asarray(nodes, dtype=complex)
    values = np.asarray(values, dtype=complex)
    if nodes.shape != values.shape:
        raise ValueError("nodes and values must have the same length")
    if len(nodes) < degree + 1:
        raise ValueError(f"need at least {degree + 1} samples for degree {degree}")
    if len(np.unique(nodes)) < degree + 1:
        raise RankDeficientError("fewer distinct nodes than unknown coefficients")

    vander = nodes[:, None] ** np.arange(degree + 1)[None, :]
    coeffs = _equilibrated_lstsq(vander, values)
    return Polynomial(coeffs), _relative_mismatch(vander, coeffs, values)


def _equilibrated_lstsq(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    rows = np.max(np.abs(matrix), axis=1)
    rows = np.maximum(rows, np.abs(rhs))
    rows[rows == 0] = 1.0
    a = matrix / rows[:, None]
    b = rhs / rows
    cols = np.max(np.abs(a), axis=0)
    if np.any(cols == 0):
        raise RankDeficientError("design matrix has an all-zero column")
    a = a / cols[None, :]
    sol, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < a.shape[1]:
        raise RankDeficientError(f"rank {rank} < {a.shape[1]} unknowns")
    return sol / cols


def _relative_mismatch(matrix: np.ndarray, coeffs: np.ndarray, rhs: np.ndarray) -> float:
    terms = np.abs(matrix * coeffs[None, :])
    scale = np.maximum(np.max(terms, axis=1), np.abs(rhs))
    # Rows whose terms all vanish (e.g. a zero value at u = 0) would otherwise
    # compare round-off against round-off; the coefficient size is the floor.
    scale = np.maximum(scale, max(float(np.max(np.abs(coeffs))), 1e-300))
    return float(np.max(np.abs(matrix @ coeffs - rhs) / scale))


def poly_from_roots(roots: Iterable[complex], leading: complex = 1.0) -> Polynomial:
    out = Polynomial([leading])
    for r in roots:
        out = out * Polynomial([-r, 1.0])
    return out


def _scaled_ok(p: Polynomial, r: complex, tol: float) -> bool:
    bound = tol * p.norm() * max(1.0, abs(r)) ** p.degree
    return abs(poly_eval(p, r)) <= bound


def _aberth(c: np.ndarray, tol: float, max_iter: int):
    deg = len(c) - 1
    monic = c / c[-1]
    radius = 1.0 + float(np.max(np.abs(monic[:-1])))
    # Off-axis start avoids symmetric stalls for real polynomials.
    z = radius * 0.5 * np.exp(1j * (2 * np.pi * np.arange(deg) / deg + 0.4))
    dc = c[1:] * np.arange(1, deg + 1)
    for _ in range(max_iter):
        pz = np.polyval(c[::-1], z)
        dpz = np.polyval(dc[::-1], z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            w = ratio / (1.0 - ratio * inv.sum(axis=1))
        w = np.where(np.isfinite(w), w, 0.0)
        z = z - w
        if np.all(np.abs(w) <= 1e-15 * np.maximum(1.0, np.abs(z))):
            return z, True
    return z, False


def _companion_roots(c: np.ndarray) -> np.ndarray:
    deg = len(c) - 1
    comp = np.zeros((deg, deg), dtype=complex)
    comp[1:, :-1] = np.eye(deg - 1)
    comp[:, -1] = -c[:-1] / c[-1]
    return np.linalg.eigvals(comp)


def _cluster(roots: np.ndarray, tol: float) -> np.ndarray:
    roots = roots.copy()
    used = np.zeros(len(roots), dtype=bool)
    for i in range(len(roots)):
        if used[i]:
            continue
        members = [j for j in range(i, len(roots)) if not used[j] and abs(roots[j] - roots[i]) < tol]
        if len(members) > 1:
            roots[members] = np.mean(roots[members])
        used[members] = True
    return roots


def poly_roots(p: Polynomial, tol: float = ROOT_TOL) -> list[complex]:
    """All roots with multiplicity: Aberth iteration, companion-matrix fallback."""
    if p.is_zero:
        raise ValueError("the zero polynomial has no well-defined roots")
    c = p.coeffs
    if p.degree == 0:
        return []
    # Exact zero roots from vanishing low-order coefficients.
    nzero = int(np.flatnonzero(c)[0])
    c = c[nzero:]
    found: list[complex] = [0j] * nzero
    if len(c) == 1:
        return found
    if len(c) == 2:
        return found + [complex(-c[0] / c[1])]

    reduced = Polynomial(c)
    z, converged = _aberth(c, tol, ABERTH_MAX_ITER)
    if not (converged and all(_scaled_ok(reduced, r, tol) for r in z)):
        z = _companion_roots(c)
        dc = c[1:] * np.arange(1, len(c))
        for _ in range(3):
            dpz = np.polyval(dc[::-1], z)
            step = np.where(dpz != 0, np.polyval(c[::-1], z) / np.where(dpz != 0, dpz, 1), 0)
            z = z - step
    z = _cluster(np.asarray(z, dtype=complex), CLUSTER_TOL)
    return found + [complex(r) for r in z]


def x_to_u(p: XBasisPolynomial) -> Polynomial:
    """Expand a polynomial in x = u(u+1) into powers of u."""
    x = Polynomial([0.0, 1.0, 1.0])
    out = Polynomial([0.0])
    for c in p.xcoeffs[::-1]:
        out = out * x + c
    return out


def u_to_x(p: Polynomial, test_nodes: Sequence[complex] | None = None):
    """Project an even-degree polynomial onto the x = u(u+1) basis.

    Returns ``(XBasisPolynomial, defect)``; the representative is built from
    the crossing-symmetric part of ``p`` and ``defect`` measures how far
    ``p`` itself is from crossing symmetry.
    """
    if p.degree % 2:
        raise ValueError("odd-degree polynomials cannot be crossing symmetric")
    if test_nodes is None:
        test_nodes = np.array([0.3, -1.7, 0.9 + 0.4j, -0.2 - 1.1j, 2.5, 1.3j])
    nodes = np.asarray(test_nodes, dtype=complex)
    norm = p.norm() or 1.0
    scale = np.maximum(1.0, np.abs(nodes) + 1.0) ** p.degree
    defect = float(np.max(np.abs(poly_eval(p, nodes) - poly_eval(p, -nodes - 1)) / (norm * scale)))

    # In w = u + 1/2 crossing symmetry is evenness and x = w^2 - 1/4.
    even = poly_shift(p, -0.5).coeffs[::2]
    xcoeffs = poly_shift(Polynomial(even), 0.25).coeffs
    xcoeffs = np.pad(xcoeffs, (0, p.degree // 2 + 1 - len(xcoeffs)))
    return XBasisPolynomial(xcoeffs), defect
