"""Physicists' Hermite polynomials and Hermite-basis expansions.

Inner products are taken against exp(-xi.xi)/sqrt(pi)**d, under which
``<H_a, H_b> = delta_ab 2**|a| a!``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Mapping, Sequence

from .polycore import DomainMismatchError, Polynomial, mi_abs, mi_ceil_half, mi_factorial

__all__ = [
    "hermite_univariate",
    "hermite_coefficients",
    "hermite_multi",
    "hermite_moment",
    "hermite_inner",
    "HermiteExpansion",
    "hermite_expand",
    "monomial_in_hermite",
    "hermite_envelope",
    "hermite_eval_float",
]


@lru_cache(maxsize=None)
def hermite_coefficients(n: int) -> tuple[int, ...]:
    """Integer coefficients of H_n, lowest degree first, from the three-term recursion."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return (1,)
    if n == 1:
        return (0, 2)
    prev, cur = hermite_coefficients(n - 2), hermite_coefficients(n - 1)
    # H_n = 2z H_{n-1} - 2(n-1) H_{n-2}
    out = [0] * (n + 1)
    for k, c in enumerate(cur):
        out[k + 1] += 2 * c
    for k, c in enumerate(prev):
        out[k] -= 2 * (n - 1) * c
    return tuple(out)


def hermite_univariate(n: int) -> Polynomial:
    return Polynomial(1, {(k,): c for k, c in enumerate(hermite_coefficients(n)) if c})


def hermite_multi(alpha: Sequence[int]) -> Polynomial:
    """H_alpha(x) = prod_j H_{alpha_j}(x_j)."""
    d = len(alpha)
    axes = [[(k, c) for k, c in enumerate(hermite_coefficients(a)) if c] for a in alpha]
    terms = {}
    for combo in product(*axes):
        terms[tuple(k for k, _ in combo)] = math.prod(c for _, c in combo)
    return Polynomial(d, terms)


def hermite_eval_float(n: int, z: float) -> float:
    """H_n(z) in binary64 via the recursion."""
    if n == 0:
        return 1.0
    h0, h1 = 1.0, 2.0 * z
    for k in range(1, n):
        h0, h1 = h1, 2.0 * z * h1 - 2.0 * k * h0
    return h1


@lru_cache(maxsize=None)
def hermite_moment(n: int, m: int) -> Fraction:
    """<H_n, z**m> = m!/(2**(m-n) ((m-n)/2)!) when m-n is even and nonnegative, else 0."""
    if n < 0 or m < 0:
        raise ValueError("indices must be nonnegative")
    if m < n or (m - n) % 2:
        return Fraction(0)
    ell = (m - n) // 2
    return Fraction(math.factorial(m), 2 ** (m - n) * math.factorial(ell))


def _require_exact(p: Polynomial) -> None:
    if p.domain == "float":
        raise DomainMismatchError("Hermite inner products need exact coefficients")


def hermite_inner(alpha: Sequence[int], p: Polynomial):
    """<H_alpha, p> contracted monomial by monomial, without building H_alpha."""
    _require_exact(p)
    if len(alpha) != p.nvars:
        raise ValueError("multi-index arity does not match the polynomial")
    total = Fraction(0)
    for gamma, c in p.terms.items():
        w = Fraction(1)
        for a, g in zip(alpha, gamma):
            w *= hermite_moment(a, g)
            if not w:
                break
        if w:
            total = total + c * w
    return total


@lru_cache(maxsize=None)
def monomial_in_hermite(m: int) -> tuple[tuple[int, Fraction], ...]:
    """z**m = sum_n c_n H_n; returns the nonzero (n, c_n)."""
    out = []
    for n in range(m % 2, m + 1, 2):
        out.append((n, hermite_moment(n, m) / (2**n * math.factorial(n))))
    return tuple(out)


class HermiteExpansion:
    """Sparse coefficients c_alpha of p = sum_alpha c_alpha H_alpha."""

    __slots__ = ("nvars", "coefficients")

    def __init__(self, nvars: int, coefficients: Mapping[tuple[int, ...], object]):
        self.nvars = nvars
        self.coefficients = {tuple(k): v for k, v in coefficients.items() if v != 0}

    def __getitem__(self, alpha):
        return self.coefficients.get(tuple(alpha), Fraction(0))

    def __len__(self):
        return len(self.coefficients)

    def items(self):
        return sorted(self.coefficients.items(), key=lambda kv: (sum(kv[0]), tuple(-a for a in kv[0])))

    def inner(self, alpha) -> object:
        """<H_alpha, p> recovered from the expansion."""
        alpha = tuple(alpha)
        return self[alpha] * (2 ** mi_abs(alpha) * mi_factorial(alpha))

    def reconstruct(self) -> Polynomial:
        result = Polynomial(self.nvars)
        for alpha, c in self.items():
            result = result + hermite_multi(alpha).scale(c)
        return result

    def __eq__(self, other):
        if isinstance(other, HermiteExpansion):
            return self.nvars == other.nvars and self.coefficients == other.coefficients
        if isinstance(other, Mapping):
            return self.coefficients == {tuple(k): v for k, v in other.items()}
        return NotImplemented

    def __repr__(self):
        return f"HermiteExpansion({self.nvars}, {dict(self.items())})"


def hermite_expand(p: Polynomial) -> HermiteExpansion:
    """Coefficients <H_alpha, p>/(2**|alpha| alpha!), computed axis by axis."""
    _require_exact(p)
    acc: dict[tuple[int, ...], object] = {}
    for gamma, c in p.terms.items():
        for combo in product(*(monomial_in_hermite(g) for g in gamma)):
            alpha = tuple(n for n, _ in combo)
            w = math.prod((cn for _, cn in combo), start=Fraction(1))
            acc[alpha] = acc[alpha] + c * w if alpha in acc else c * w
    return HermiteExpansion(p.nvars, acc)


def hermite_envelope(alpha: Sequence[int], xi: Sequence[float]) -> float:
    """Float value of 2**|alpha| sqrt(alpha!) sum_{beta <= ceil(alpha/2)} xi**(2 beta)/beta!."""
    scale = 2.0 ** mi_abs(alpha) * math.sqrt(mi_factorial(alpha))
    s = 1.0
    for c, x in zip(mi_ceil_half(alpha), xi):
        s *= sum(x ** (2 * b) / math.factorial(b) for b in range(c + 1))
    return scale * s
