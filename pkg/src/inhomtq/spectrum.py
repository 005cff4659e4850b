"""Exact diagonalization and reconstruction of transfer-matrix eigenvalues."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Polynomial, XBasisPolynomial, poly_fit, poly_magnitude, x_to_u
from .lattice import ChainSpec, apply_transfer, hamiltonian

__all__ = [
    "EigenSystem",
    "LambdaFunction",
    "LambdaReconstructionError",
    "diagonalize_h",
    "lambda_for_state",
    "lambda_functions",
    "lambda_u_fit",
    "sample_nodes",
    "HELD_OUT_NODES",
]

HELD_OUT_NODES = (0.1, 1.05, 2.9)
LAMBDA_FIT_TOL = 1e-8
DEGENERACY_TOL = 1e-8
# Generic real point used to split degenerate H eigenspaces by t(u*).
SPLIT_POINT = 0.3719
SAMPLE_RADIUS = 1.0


class LambdaReconstructionError(RuntimeError):
    def __init__(self, state_index: int, residual: float):
        super().__init__(
            f"state {state_index}: transfer eigenvalue fit failed on held-out nodes "
            f"(residual {residual:.3e})"
        )
        self.state_index = state_index
        self.residual = residual


@dataclass
class EigenSystem:
    energies: np.ndarray  # ascending
    vectors: np.ndarray  # columns, orthonormal, real
    h_norm: float

    def cluster_of(self, k: int) -> list[int]:
        """Indices whose energy lies within the degeneracy window of state k."""
        tol = DEGENERACY_TOL * max(self.h_norm, 1.0)
        lo = k
        while lo > 0 and abs(self.energies[lo - 1] - self.energies[lo]) < tol:
            lo -= 1
        hi = k
        while hi + 1 < len(self.energies) and abs(self.energies[hi + 1] - self.energies[hi]) < tol:
            hi += 1
        return list(range(lo, hi + 1))


@dataclass
class LambdaFunction:
    state_index: int
    lam: Polynomial
    xlam: XBasisPolynomial
    fit_residual: float
    degenerate: bool = False


def diagonalize_h(spec: ChainSpec) -> EigenSystem:
    h = hamiltonian(spec).real
    energies, vectors = np.linalg.eigh(h)
    return EigenSystem(energies, vectors, float(np.max(np.abs(energies))))


def sample_nodes(n_sites: int, radius: float = SAMPLE_RADIUS) -> np.ndarray:
    """Spectral parameters whose x = u(u+1) lie evenly on a circle.

    The x-Vandermonde on such nodes is DFT-like and stays well conditioned
    for every N, unlike real nodes where x**(N+1) spans many decades.
    """
    m = 2 * n_sites + 4
    xs = radius * np.exp(2j * np.pi * (np.arange(m) + 0.5) / m)
    return (-1 + np.sqrt(1 + 4 * xs)) / 2


def _refined_vectors(spec: ChainSpec, es: EigenSystem, cluster: list[int]) -> np.ndarray:
    block = es.vectors[:, cluster]
    if len(cluster) == 1:
        return block
    tb = block.T @ apply_transfer(SPLIT_POINT, spec, block).real
    _, mix = np.linalg.eigh((tb + tb.T) / 2)
    return block @ mix


def _state_vectors(spec: ChainSpec, es: EigenSystem, indices) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors for ``indices`` with degenerate clusters split by t(u*)."""
    vecs = np.empty((spec.dim, len(indices)))
    degenerate = np.zeros(len(indices), dtype=bool)
    done: dict[int, np.ndarray] = {}
    for pos, k in enumerate(indices):
        cluster = es.cluster_of(k)
        if cluster[0] not in done:
            done[cluster[0]] = _refined_vectors(spec, es, cluster)
        vecs[:, pos] = done[cluster[0]][:, cluster.index(k)]
        degenerate[pos] = len(cluster) > 1
    return vecs, degenerate


def _rayleigh(spec: ChainSpec, vecs: np.ndarray, nodes) -> np.ndarray:
    """(len(nodes), m) array of v_k . t(u) v_k / v_k . v_k."""
    norms = np.sum(vecs * vecs, axis=0)
    return np.array(
        [np.sum(vecs * apply_transfer(u, spec, vecs), axis=0) / norms for u in nodes]
    )


def _fit_lambda(spec: ChainSpec, k: int, fit_values, held_values, degenerate: bool) -> LambdaFunction:
    n = spec.n_sites
    nodes = sample_nodes(n)
    xs = nodes * (nodes + 1)
    lead = 2.0 * xs ** (n + 1)
    xpoly, _ = poly_fit(xs, fit_values - lead, n)
    xcoeffs = np.zeros(n + 2, dtype=complex)
    xcoeffs[: len(xpoly.coeffs)] = xpoly.coeffs
    xcoeffs[n + 1] = 2.0
    # Real boundary parameters give a real transfer matrix polynomial.
    xlam = XBasisPolynomial(xcoeffs.real)
    held = np.asarray(HELD_OUT_NODES)
    held_x = held * (held + 1)
    pred = xlam(held)
    scale = np.maximum(poly_magnitude(xlam.as_x_polynomial(), held_x), np.abs(held_values))
    residual = float(np.max(np.abs(pred - held_values) / scale))
    return LambdaFunction(k, x_to_u(xlam), xlam, residual, degenerate)


def lambda_functions(spec: ChainSpec, es: EigenSystem, indices=None, tol: float = LAMBDA_FIT_TOL):
    """Reconstruct Lambda_k(u) for several states at once.

    Returns a list aligned with ``indices``; entries whose held-out check
    fails are ``LambdaReconstructionError`` instances rather than raised.
    """
    if indices is None:
        indices = range(spec.dim)
    indices = list(indices)
    vecs, degenerate = _state_vectors(spec, es, indices)
    nodes = sample_nodes(spec.n_sites)
    samples = _rayleigh(spec, vecs, list(nodes) + list(HELD_OUT_NODES))
    fit_part, held_part = samples[: len(nodes)], samples[len(nodes):]
    out = []
    for pos, k in enumerate(indices):
        lf = _fit_lambda(spec, k, fit_part[:, pos], held_part[:, pos], bool(degenerate[pos]))
        out.append(lf if lf.fit_residual <= tol else LambdaReconstructionError(k, lf.fit_residual))
    return out


def lambda_for_state(spec: ChainSpec, es: EigenSystem, k: int, tol: float = LAMBDA_FIT_TOL) -> LambdaFunction:
    (result,) = lambda_functions(spec, es, [k], tol)
    if isinstance(result, LambdaReconstructionError):
        raise result
    return result


def lambda_u_fit(spec: ChainSpec, es: EigenSystem, k: int) -> tuple[Polynomial, float]:
    """Direct u-basis fit of Lambda_k, kept as a cross-check of the x-basis fit."""
    vecs, _ = _state_vectors(spec, es, [k])
    deg = 2 * spec.n_sites + 2
    nodes = 0.2 + 0.3 * np.arange(deg + 3)
    vals = _rayleigh(spec, vecs, nodes)[:, 0]
    return poly_fit(nodes, vals, deg)
