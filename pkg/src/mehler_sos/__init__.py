"""Explicit perturbative sum-of-squares certificates via the truncated Mehler kernel."""

from .polycore import Polynomial, coefficient_norm, parse, format_polynomial
from .mehler import KernelParams, apply_operator, decompose, tail_polynomial
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "KernelParams",
    "Polynomial",
    "apply_operator",
    "coefficient_norm",
    "decompose",
    "format_polynomial",
    "parse",
    "tail_polynomial",
]
