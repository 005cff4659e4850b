"""Open spin-1/2 XXX chain with general boundaries: inhomogeneous T-Q solutions
and the shift-operator generating function of the fusion hierarchy."""

from .algebra import Polynomial, XBasisPolynomial
from .lattice import BoundaryParams, ChainSpec
from .spectrum import diagonalize_h, lambda_for_state
from .tq import completeness_scan, solve_q

__version__ = "0.1.0"

__all__ = [
    "Polynomial",
    "XBasisPolynomial",
    "BoundaryParams",
    "ChainSpec",
    "diagonalize_h",
    "lambda_for_state",
    "completeness_scan",
    "solve_q",
]
