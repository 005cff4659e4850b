"""Shift-operator generating functions for the fusion hierarchy.

Symbols A, B, C carry an integer shift n meaning evaluation at u + n/2.
The shift operator D obeys ``D f = f[-1] D``; every product is kept in
normal form ``(commuting function factors) * D**k``.
"""

from __future__ import annotations

import functools
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np

from .algebra import Polynomial, poly_eval
from .lattice import ChainSpec
from .tq import PoleProximityError, a_bar, d_bar, delta_term

__all__ = [
    "ShiftedSymbol",
    "Monomial",
    "OperatorSeries",
    "TExpression",
    "HirotaResidual",
    "normal_order",
    "expand_w",
    "expand_w_diag",
    "t2s_expression",
    "term_count",
    "character_count",
    "eval_expression",
    "eval_magnitude",
    "hirota_residual",
    "hirota_symbolic",
    "reduction_check_diag",
    "random_q",
]

MAX_SPIN = 8


class ShiftedSymbol(NamedTuple):
    kind: str  # "A", "B" or "C"
    shift: int

    def shifted(self, by: int) -> "ShiftedSymbol":
        return ShiftedSymbol(self.kind, self.shift + by)

    def __str__(self) -> str:
        return f"{self.kind}[{self.shift:+d}]" if self.shift else f"{self.kind}"


A = ShiftedSymbol("A", 0)
B = ShiftedSymbol("B", 0)
C = ShiftedSymbol("C", 0)

Factors = tuple  # sorted tuple of ShiftedSymbol


@dataclass(frozen=True)
class Monomial:
    factors: Factors
    d_power: int = 0
    coefficient: int = 1

    @classmethod
    def of(cls, *symbols: ShiftedSymbol, d_power: int = 0, coefficient: int = 1) -> "Monomial":
        return cls(tuple(sorted(symbols)), d_power, coefficient)

    @property
    def key(self) -> tuple:
        return (self.factors, self.d_power)

    def shifted(self, by: int) -> "Monomial":
        return Monomial(tuple(f.shifted(by) for f in self.factors), self.d_power, self.coefficient)

    def __str__(self) -> str:
        body = "*".join(map(str, self.factors)) or "1"
        if self.d_power:
            body += f"*D^{self.d_power}"
        return body if self.coefficient == 1 else f"{self.coefficient}*{body}"


def normal_order(raw: Sequence[Union[int, ShiftedSymbol]], coefficient: int = 1) -> Monomial:
    """Normal-order a word of D powers (ints) and symbols.

    Scanning left to right, each symbol is shifted down by the number of D's
    already standing to its left; those D's then move to the right.
    """
    d_seen = 0
    factors = []
    for item in raw:
        if isinstance(item, ShiftedSymbol):
            factors.append(item.shifted(-d_seen))
        else:
            if item < 0:
                raise ValueError("only nonnegative powers of D are supported")
            d_seen += item
    return Monomial(tuple(sorted(factors)), d_seen, coefficient)


class OperatorSeries:
    """Finite sum of normal-ordered monomials, truncated at a maximum D grade."""

    def __init__(self, terms: dict | None = None, max_grade: int = 2 * MAX_SPIN):
        self.max_grade = max_grade
        self.terms: dict[tuple, int] = {}
        for key, c in (terms or {}).items():
            if c and key[1] <= max_grade:
                self.terms[key] = c

    @classmethod
    def from_monomials(cls, monomials: Iterable[Monomial], max_grade: int) -> "OperatorSeries":
        out = cls(max_grade=max_grade)
        for m in monomials:
            out._accumulate(m.key, m.coefficient)
        return out

    @classmethod
    def one(cls, max_grade: int) -> "OperatorSeries":
        return cls({((), 0): 1}, max_grade)

    def _accumulate(self, key: tuple, c: int) -> None:
        if key[1] > self.max_grade:
            return
        total = self.terms.get(key, 0) + c
        if total:
            self.terms[key] = total
        else:
            self.terms.pop(key, None)

    def __add__(self, other: "OperatorSeries") -> "OperatorSeries":
        out = OperatorSeries(dict(self.terms), min(self.max_grade, other.max_grade))
        for key, c in other.terms.items():
            out._accumulate(key, c)
        return out

    def __neg__(self) -> "OperatorSeries":
        return OperatorSeries({k: -c for k, c in self.terms.items()}, self.max_grade)

    def __sub__(self, other: "OperatorSeries") -> "OperatorSeries":
        return self + (-other)

    def __mul__(self, other: "OperatorSeries") -> "OperatorSeries":
        out = OperatorSeries(max_grade=min(self.max_grade, other.max_grade))
        for (f1, k1), c1 in self.terms.items():
            for (f2, k2), c2 in other.terms.items():
                if k1 + k2 > out.max_grade:
                    continue
                # f1 D^k1 f2 D^k2 = f1 f2[-k1] D^(k1+k2)
                factors = tuple(sorted(f1 + tuple(f.shifted(-k1) for f in f2)))
                out._accumulate((factors, k1 + k2), c1 * c2)
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OperatorSeries):
            return NotImplemented
        return self.terms == other.terms

    def grade(self, k: int) -> list[Monomial]:
        return [Monomial(f, d, c) for (f, d), c in sorted(self.terms.items()) if d == k]

    def monomials(self) -> list[Monomial]:
        return [Monomial(f, d, c) for (f, d), c in sorted(self.terms.items())]


def _sandwich(symbols: Sequence[ShiftedSymbol], max_grade: int) -> OperatorSeries:
    """D (sum of symbols) D as a series."""
    return OperatorSeries.from_monomials(
        (normal_order([1, s, 1]) for s in symbols), max_grade
    )


def _geometric(x: OperatorSeries, max_grade: int) -> OperatorSeries:
    """Sum_k x**k, exact up to max_grade when x has no grade-0 part."""
    total = OperatorSeries.one(max_grade)
    power = OperatorSeries.one(max_grade)
    while True:
        power = power * x
        if not power.terms:
            return total
        total = total + power


@dataclass(frozen=True)
class TExpression:
    s: int
    monomials: tuple[Monomial, ...]

    def count(self) -> int:
        return sum(m.coefficient for m in self.monomials)

    def multiset(self) -> Counter:
        return Counter({m.factors: m.coefficient for m in self.monomials})

    def shifted(self, by: int) -> "TExpression":
        return TExpression(self.s, tuple(m.shifted(by) for m in self.monomials))

    def __str__(self) -> str:
        return " + ".join(map(str, self.monomials)) or "0"


def _extract(series: OperatorSeries, max_s: int) -> tuple[TExpression, ...]:
    # grade 2s holds D^s T D^s = T[-s] D^(2s)
    out = []
    for s in range(max_s + 1):
        monos = tuple(Monomial(m.factors, 0, m.coefficient).shifted(s) for m in series.grade(2 * s))
        out.append(TExpression(s, tuple(sorted(monos, key=lambda m: m.factors))))
    return tuple(out)


def _check_spin(max_s: int) -> None:
    if not 0 <= max_s <= MAX_SPIN + 1:
        raise ValueError(f"max_s must be in [0, {MAX_SPIN + 1}]")


@functools.lru_cache(maxsize=None)
def expand_w(max_s: int, include_c: bool = True) -> tuple[TExpression, ...]:
    """T_{1,s}, s = 0..max_s, from [1 - D(A+B+C)D + D A D^2 B D]^{-1}.

    With ``include_c=False`` the C symbol is dropped (diagonal boundaries).
    """
    _check_spin(max_s)
    grade = 2 * max_s
    x = _sandwich([A, B, C] if include_c else [A, B], grade)
    x = x - OperatorSeries.from_monomials([normal_order([1, A, 2, B, 1])], grade)
    return _extract(_geometric(x, grade), max_s)


@functools.lru_cache(maxsize=None)
def expand_w_diag(max_s: int) -> tuple[TExpression, ...]:
    """T_{1,s} from the factorized form (1 - DBD)^{-1} (1 - DAD)^{-1}."""
    _check_spin(max_s)
    grade = 2 * max_s
    left = _geometric(_sandwich([B], grade), grade)
    right = _geometric(_sandwich([A], grade), grade)
    return _extract(left * right, max_s)


def t2s_expression(s: int) -> TExpression:
    """prod over k = -(s-1)/2 .. (s-1)/2 of A[2k+1] B[-2k-1]."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    factors = []
    for j in range(s):
        shift = 2 * j - s + 2  # 2k+1 with k = j - (s-1)/2
        factors += [ShiftedSymbol("A", shift), ShiftedSymbol("B", -shift)]
    return TExpression(s, (Monomial.of(*factors),))


def term_count(s: int, include_c: bool = True) -> int:
    return expand_w(s, include_c)[s].count()


def character_count(s: int, include_c: bool = True) -> int:
    """Coefficient of x**s in (1 - 3x + x^2)^{-1}, or (1 - x)^{-2} without C."""
    if not include_c:
        return s + 1
    prev, cur = 0, 1
    for _ in range(s):
        prev, cur = cur, 3 * cur - prev
    return cur


def reduction_check_diag(max_s: int) -> bool:
    """C-free expansion agrees with the independently factorized functional."""
    ours = expand_w(max_s, include_c=False)
    theirs = expand_w_diag(max_s)
    return all(a.multiset() == b.multiset() for a, b in zip(ours, theirs))


def _count_vectors(expr: TExpression, index: dict) -> tuple[np.ndarray, np.ndarray]:
    """Monomials as symbol-multiplicity rows plus their coefficients."""
    rows = np.zeros((len(expr.monomials), len(index)), dtype=np.int8)
    for i, m in enumerate(expr.monomials):
        for f in m.factors:
            rows[i, index[f]] += 1
    return rows, np.array([m.coefficient for m in expr.monomials], dtype=np.int64)


def _product_terms(left: TExpression, right: TExpression, index: dict):
    a, ca = _count_vectors(left, index)
    b, cb = _count_vectors(right, index)
    rows = (a[:, None, :] + b[None, :, :]).reshape(-1, len(index))
    return rows, np.outer(ca, cb).ravel()


def _canonical_sum(rows: np.ndarray, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # one opaque fixed-width key per row sorts far faster than unique(axis=0)
    keys = np.ascontiguousarray(rows).view(np.dtype((np.void, rows.shape[1]))).ravel()
    uniq, inverse = np.unique(keys, return_inverse=True)
    totals = np.bincount(inverse.ravel(), weights=coeffs, minlength=len(uniq)).astype(np.int64)
    keep = totals != 0
    return uniq[keep], totals[keep]


def hirota_symbolic(s: int, include_c: bool = True, t2_shift_offset: int = 0) -> bool:
    """T1s+ T1s- == T2s + T1,s+1 T1,s-1 as an identity in independent A, B, C.

    Monomials are compared as multiplicity vectors over the shifted symbols,
    so the roughly n_s**2 products are handled by array arithmetic.
    """
    if s < 1:
        raise ValueError("the Hirota relation starts at s = 1")
    t1 = expand_w(s + 1, include_c)
    plus, minus = t1[s].shifted(1), t1[s].shifted(-1)
    t2 = t2s_expression(s).shifted(t2_shift_offset)
    symbols = sorted({f for e in (plus, minus, t1[s + 1], t1[s - 1], t2) for m in e.monomials for f in m.factors})
    index = {f: i for i, f in enumerate(symbols)}
    lhs = _canonical_sum(*_product_terms(plus, minus, index))
    up_rows, up_coeffs = _product_terms(t1[s + 1], t1[s - 1], index)
    t2_rows, t2_coeffs = _count_vectors(t2, index)
    rhs = _canonical_sum(np.vstack([up_rows, t2_rows]), np.concatenate([up_coeffs, t2_coeffs]))
    return all(np.array_equal(x, y) for x, y in zip(lhs, rhs))


def _symbol_value(sym: ShiftedSymbol, q: Polynomial, spec: ChainSpec, u: complex, pole_tol: float) -> complex:
    v = u + sym.shift / 2
    qv = poly_eval(q, v)
    if abs(qv) < pole_tol * max(1.0, q.norm()):
        raise PoleProximityError(f"Q vanishes near u={v}")
    if sym.kind == "A":
        return a_bar(v, spec, pole_tol) * poly_eval(q, v - 1) / qv
    if sym.kind == "B":
        return d_bar(v, spec, pole_tol) * poly_eval(q, v + 1) / qv
    return delta_term(v, spec) / qv


def _monomial_values(expr: TExpression, q, spec, u, pole_tol) -> np.ndarray:
    cache: dict[ShiftedSymbol, complex] = {}
    vals = []
    for m in expr.monomials:
        prod = complex(m.coefficient)
        for f in m.factors:
            if f not in cache:
                cache[f] = _symbol_value(f, q, spec, u, pole_tol)
            prod *= cache[f]
        vals.append(prod)
    return np.array(vals, dtype=complex)


def eval_expression(expr: TExpression, q: Polynomial, spec: ChainSpec, u: complex,
                    pole_tol: float = 1e-6) -> complex:
    return complex(np.sum(_monomial_values(expr, q, spec, u, pole_tol)))


def eval_magnitude(expr: TExpression, q: Polynomial, spec: ChainSpec, u: complex,
                   pole_tol: float = 1e-6) -> float:
    """Sum of absolute monomial values; the round-off scale of eval_expression."""
    return float(np.sum(np.abs(_monomial_values(expr, q, spec, u, pole_tol))))


class HirotaResidual(NamedTuple):
    s: int
    u: complex
    hirota: complex
    hirota_scale: float
    t2: complex
    t2_scale: float

    @property
    def hirota_relative(self) -> float:
        return abs(self.hirota) / self.hirota_scale

    @property
    def t2_relative(self) -> float:
        return abs(self.t2) / self.t2_scale


def hirota_residual(s: int, q: Polynomial, spec: ChainSpec, u: complex, include_c: bool = True,
                    pole_tol: float = 1e-6, t2_shift_offset: int = 0) -> HirotaResidual:
    """Residuals of T1s+ T1s- = T2s + T1,s+1 T1,s-1 and T2s+ T2s- = T2,s+1 T2,s-1.

    ``t2_shift_offset`` shifts T_{2,s} in the first relation; it exists only
    as a negative control.
    """
    if s < 1:
        raise ValueError("the Hirota relation starts at s = 1")
    t1 = expand_w(s + 1, include_c)

    def ev(expr, at):
        return eval_expression(expr, q, spec, at, pole_tol), eval_magnitude(expr, q, spec, at, pole_tol)

    plus, plus_m = ev(t1[s], u + 0.5)
    minus, minus_m = ev(t1[s], u - 0.5)
    t2, t2_m = ev(t2s_expression(s).shifted(t2_shift_offset), u)
    up, up_m = ev(t1[s + 1], u)
    down, down_m = ev(t1[s - 1], u)
    hirota = plus * minus - t2 - up * down
    h_scale = max(plus_m * minus_m, t2_m, up_m * down_m)

    t2p, t2p_m = ev(t2s_expression(s), u + 0.5)
    t2m, t2m_m = ev(t2s_expression(s), u - 0.5)
    t2u, t2u_m = ev(t2s_expression(s + 1), u)
    t2d, t2d_m = ev(t2s_expression(s - 1), u)
    t2_res = t2p * t2m - t2u * t2d
    t2_scale = max(t2p_m * t2m_m, t2u_m * t2d_m)
    return HirotaResidual(s, u, hirota, h_scale, t2_res, t2_scale)


def random_q(rng: np.random.Generator, degree: int = 4) -> Polynomial:
    """Monic real-coefficient Q with conjugate-pair roots in [-2,2] x [-1,1]i."""
    roots = []
    for _ in range(degree // 2):
        z = complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
        roots += [z, z.conjugate()]
    if degree % 2:
        roots.append(complex(rng.uniform(-2, 2)))
    q = Polynomial([1.0])
    for r in roots:
        q = q * Polynomial([-r, 1.0])
    return Polynomial(q.coeffs.real)
