"""Crank-Nicolson / fourth-order fractional centered difference solver for
Riesz space-fractional diffusion with variable coefficients, with a
sine-transform preconditioned conjugate gradient method."""

from .fcd import FractionalOrder, CoefficientTable, fcd2_coefficients, fcd4_coefficients, fcd2_symbol, fcd4_symbol
from .krylov import SolveStats, cg, pcg
from .precond import build_circulant, build_tau, apply_circulant_inverse, apply_tau_inverse
from .problem import Domain, GridSpec, ProblemSpec, discrete_l2_norm, example1, example2
from .stepper import MarchReport, convergence_study, march, stability_witness
from .structured_ops import KroneckerSumOperator, SymmetricToeplitz1D, apply_operator, dst1, multi_dst

__all__ = [
    "FractionalOrder",
    "CoefficientTable",
    "fcd2_coefficients",
    "fcd4_coefficients",
    "fcd2_symbol",
    "fcd4_symbol",
    "SolveStats",
    "cg",
    "pcg",
    "build_circulant",
    "build_tau",
    "apply_circulant_inverse",
    "apply_tau_inverse",
    "Domain",
    "GridSpec",
    "ProblemSpec",
    "discrete_l2_norm",
    "example1",
    "example2",
    "MarchReport",
    "convergence_study",
    "march",
    "stability_witness",
    "KroneckerSumOperator",
    "SymmetricToeplitz1D",
    "apply_operator",
    "dst1",
    "multi_dst",
]

__version__ = "0.1.0"
