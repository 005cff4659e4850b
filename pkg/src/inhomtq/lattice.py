"""R- and K-matrices, the double-row transfer matrix and the Hamiltonian.

Site 1 is the leftmost (most significant) tensor factor and Pauli matrices
use the z-diagonal convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BoundaryParams",
    "ChainSpec",
    "r_matrix",
    "k_minus",
    "k_plus",
    "apply_transfer",
    "transfer_matrix",
    "hamiltonian",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
]

DEFAULT_MAX_SITES = 10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PERMUTATION = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


@dataclass(frozen=True)
class BoundaryParams:
    """Boundary parameters p, q, xi.

    ``xi_squared`` may be given to make ``alpha = sqrt(1 + xi**2)`` exact
    (for xi = -sqrt(3) this gives alpha = 2 rather than 1.9999999999999998).
    """

    p: float
    q: float
    xi: float
    xi_squared: float | None = None
    alpha: float = field(init=False)

    def __post_init__(self):
        if self.p == 0 or self.q == 0:
            raise ValueError("boundary parameters p and q must be nonzero")
        xi2 = self.xi * self.xi if self.xi_squared is None else self.xi_squared
        if xi2 < 0:
            raise ValueError("xi_squared must be nonnegative")
        object.__setattr__(self, "alpha", math.sqrt(1.0 + xi2))

    @classmethod
    def from_xi_squared(cls, p: float, q: float, xi_squared: float, xi_sign: int = 1):
        return cls(p, q, math.copysign(math.sqrt(xi_squared), xi_sign), xi_squared)


@dataclass(frozen=True)
class ChainSpec:
    n_sites: int
    params: BoundaryParams
    sign: str = "+"
    max_sites: int = DEFAULT_MAX_SITES

    def __post_init__(self):
        if not 1 <= self.n_sites <= self.max_sites:
            raise ValueError(f"n_sites must be in [1, {self.max_sites}], got {self.n_sites}")
        if self.sign not in ("+", "-"):
            raise ValueError(f"sign must be '+' or '-', got {self.sign!r}")

    @property
    def dim(self) -> int:
        return 2**self.n_sites

    @property
    def sign_factor(self) -> int:
        return 1 if self.sign == "+" else -1


def r_matrix(u: complex) -> np.ndarray:
    return u * np.eye(4, dtype=complex) + PERMUTATION


def k_minus(u: complex, params: BoundaryParams) -> np.ndarray:
    return np.array([[params.p + u, 0], [0, params.p - u]], dtype=complex)


def k_plus(u: complex, params: BoundaryParams) -> np.ndarray:
    off = params.xi * (u + 1)
    return np.array([[params.q + u + 1, off], [off, params.q - u - 1]], dtype=complex)


def _apply_r(phi: np.ndarray, u: complex, site: int) -> np.ndarray:
    # Axis 0 is the auxiliary space, axis `site` the chain site.
    return u * phi + np.swapaxes(phi, 0, site)


def apply_transfer(u: complex, spec: ChainSpec, vectors: np.ndarray) -> np.ndarray:
    """Return t(u) @ vectors without forming t(u).

    ``vectors`` is (2**N,) or (2**N, m). The auxiliary space rides along as
    a leading axis and each R-matrix is ``u + swap(aux, site)``.
    """
    n = spec.n_sites
    vectors = np.asarray(vectors, dtype=complex)
    flat = vectors.ndim == 1
    cols = vectors.reshape(spec.dim, -1)
    m = cols.shape[1]

    # phi[a, s_1..s_N, col, b] = delta_ab * v[s, col]; b is traced at the end.
    shaped = cols.reshape((2,) * n + (m,))
    phi = np.zeros((2,) + shaped.shape + (2,), dtype=complex)
    phi[0, ..., 0] = shaped
    phi[1, ..., 1] = shaped

    for site in range(1, n + 1):  # T-hat = R_0N ... R_01, rightmost acts first
        phi = _apply_r(phi, u, site)
    phi = np.tensordot(k_minus(u, spec.params), phi, axes=(1, 0))
    for site in range(n, 0, -1):  # T = R_01 ... R_0N
        phi = _apply_r(phi, u, site)
    phi = np.tensordot(k_plus(u, spec.params), phi, axes=(1, 0))

    out = phi[0, ..., 0] + phi[1, ..., 1]
    out = out.reshape(spec.dim, m)
    return out[:, 0] if flat else out


def transfer_matrix(u: complex, spec: ChainSpec) -> np.ndarray:
    return apply_transfer(u, spec, np.eye(spec.dim, dtype=complex))


def _site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    left = np.eye(2 ** (site - 1))
    right = np.eye(2 ** (n - site))
    return np.kron(np.kron(left, op), right)


def hamiltonian(spec: ChainSpec) -> np.ndarray:
    n = spec.n_sites
    if n < 2:
        raise ValueError("the Hamiltonian needs at least two sites")
    prm = spec.params
    h = np.zeros((spec.dim, spec.dim), dtype=complex)
    for site in range(1, n):
        for pauli in (PAULI_X, PAULI_Y, PAULI_Z):
            h += _site_operator(pauli, site, n) @ _site_operator(pauli, site + 1, n)
    h += _site_operator(PAULI_Z, n, n) / prm.p
    h += _site_operator(PAULI_Z + prm.xi * PAULI_X, 1, n) / prm.q
    # sigma_y x sigma_y is real; drop the 0j round-off so H is exactly real symmetric.
    return h.real.astype(complex)
