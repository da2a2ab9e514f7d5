"""Truncated Mehler kernel and the integral operator it induces.

For ``0 <= lam**2 < 1`` and truncation order ``N`` the kernel is

    K(x, xi) = (1-lam^2)^(-d/2) exp_N(q(x, xi)) exp(-(xi.xi) lam^2/(1-lam^2)),
    q(x, xi) = -((x.x) lam^2 - 2 (x.xi) lam) / (1-lam^2),

and the operator maps p to sum_alpha <[K]_alpha, p> x^alpha, the inner
product taken against exp(-xi.xi)/sqrt(pi)**d. Multiplying the two Gaussians
gives exp(-(xi.xi)/(1-lam^2)), whose normalized moments are rational in
``1-lam^2``, so every coefficient of the image lies in Q(lam). ``lam`` itself
is irrational for most rational ``lam**2``; such values are carried as
:class:`~mehler_sos.numbers.QuadraticNumber` and collapse back to
:class:`~fractions.Fraction` whenever odd powers of ``lam`` cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .hermite import hermite_expand, hermite_multi
from .numbers import sqrt_exact
from .polycore import (
    DomainMismatchError,
    Polynomial,
    dot_square_power,
    gaussian_moment_multi,
    mi_abs,
    mi_ceil_half,
    mi_factorial,
    mi_floor_half,
    multi_indices,
    multi_indices_of_degree,
)

__all__ = [
    "KernelParams",
    "exp_truncated",
    "KernelCoefficient",
    "kernel_coefficient",
    "kernel_expansion",
    "OperatorImage",
    "apply_operator",
    "low_part",
    "c_integral",
    "c_integral_exact",
    "tail_polynomial",
    "Decomposition",
    "decompose",
    "infer_M",
    "hermite_correction",
]


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"lambda_sq must be an exact rational, got {type(value).__name__}")


@dataclass(frozen=True)
class KernelParams:
    """Truncation order ``N`` and the exact rational ``lambda_sq``."""

    N: int
    lambda_sq: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lambda_sq", _as_fraction(self.lambda_sq))
        if not isinstance(self.N, int) or isinstance(self.N, bool) or self.N < 0:
            raise ValueError(f"N must be a nonnegative integer, got {self.N!r}")
        if not 0 <= self.lambda_sq < 1:
            raise ValueError(f"lambda_sq must lie in [0, 1), got {self.lambda_sq}")

    @property
    def lam(self):
        """Exact lambda as a Fraction or QuadraticNumber."""
        return sqrt_exact(self.lambda_sq)

    @property
    def variance(self) -> Fraction:
        """1 - lambda^2, the moment parameter of the merged Gaussian."""
        return 1 - self.lambda_sq

    def lam_power(self, k: int):
        base = self.lambda_sq ** (k // 2)
        return base * self.lam if k % 2 else base

    def to_dict(self) -> dict:
        return {"N": self.N, "lambda_sq": str(self.lambda_sq)}


def exp_truncated(N: int) -> Polynomial:
    """sum_{n <= 2N} z**n / n!"""
    if N < 0:
        raise ValueError("N must be nonnegative")
    return Polynomial(1, {(n,): Fraction(1, math.factorial(n)) for n in range(2 * N + 1)})


def infer_M(p: Polynomial) -> int:
    """Smallest M with deg p <= 2M."""
    return max(0, -(-p.degree // 2))


# ---------------------------------------------------------------------------
# kernel coefficients


@lru_cache(maxsize=64)
def kernel_expansion(params: KernelParams, d: int) -> dict[tuple[int, ...], Polynomial]:
    """exp_N(q(x, xi)) grouped by the x-monomial: alpha -> polynomial in xi.

    The Gaussian factor and the (1-lam^2)^(-d/2) prefactor are not included.
    Built by brute-force expansion; this is the independent route used to
    cross-check the Hermite formula.
    """
    v = params.variance
    a = -params.lambda_sq / v
    b = 2 * params.lam / v
    # variables: x_1..x_d, xi_1..xi_d
    q_terms: dict[tuple[int, ...], object] = {}
    for j in range(d):
        e = [0] * (2 * d)
        e[j] = 2
        if a:
            q_terms[tuple(e)] = a
        e = [0] * (2 * d)
        e[j] = e[d + j] = 1
        if b:
            q_terms[tuple(e)] = b
    q = Polynomial(2 * d, q_terms)
    acc = Polynomial.constant(2 * d, 1)
    power = Polynomial.constant(2 * d, 1)
    for n in range(1, 2 * params.N + 1):
        power = power * q
        acc = acc + power.scale(Fraction(1, math.factorial(n)))
    grouped: dict[tuple[int, ...], dict] = {}
    for exps, c in acc.terms.items():
        grouped.setdefault(exps[:d], {})[exps[d:]] = c
    return {alpha: Polynomial(d, t) for alpha, t in grouped.items()}


@dataclass(frozen=True)
class KernelCoefficient:
    """[K]_alpha(xi) = (1-lam^2)^(-d/2) poly(xi) exp(-(xi.xi) lam^2/(1-lam^2))."""

    params: KernelParams
    alpha: tuple[int, ...]
    poly: Polynomial

    def integrate(self, p: Polynomial):
        """<[K]_alpha, p> exactly, using moments of the merged Gaussian."""
        if p.domain == "float":
            raise DomainMismatchError("exact integration needs exact coefficients")
        v = self.params.variance
        total = Fraction(0)
        for exps, c in (self.poly * p).terms.items():
            m = gaussian_moment_multi(exps, v)
            if m:
                total = total + c * m
        return total

    def evaluate(self, xi) -> float:
        d = len(self.alpha)
        v = float(self.params.variance)
        r2 = sum(float(x) ** 2 for x in xi)
        g = math.exp(-r2 * float(self.params.lambda_sq) / v) * v ** (-d / 2)
        if self.poly.is_zero():
            return 0.0
        return g * self.poly.to_float().evaluate([float(x) for x in xi])


def kernel_coefficient(params: KernelParams, alpha) -> KernelCoefficient:
    alpha = tuple(alpha)
    d = len(alpha)
    if mi_abs(alpha) > 4 * params.N:
        return KernelCoefficient(params, alpha, Polynomial(d))
    return KernelCoefficient(params, alpha, kernel_expansion(params, d).get(alpha, Polynomial(d)))


# ---------------------------------------------------------------------------
# operator image


def _require_exact(p: Polynomial) -> None:
    if p.domain == "float":
        raise DomainMismatchError("the operator is evaluated over exact coefficients only")


def low_part(params: KernelParams, p: Polynomial) -> Polynomial:
    """Degree <= 2N part: sum_alpha lam^|alpha| c_alpha H_alpha, truncated to degree 2N."""
    _require_exact(p)
    acc = Polynomial(p.nvars)
    for alpha, c in hermite_expand(p).items():
        k = mi_abs(alpha)
        if k and params.lambda_sq == 0:
            continue
        acc = acc + hermite_multi(alpha).scale(c * params.lam_power(k))
    return acc.truncate(2 * params.N)


def _moment_sums(params: KernelParams, p: Polynomial, max_k: int) -> dict[tuple[int, ...], object]:
    """S(alpha) = sum_beta p_beta m(alpha+beta) for |alpha| <= max_k."""
    v = params.variance
    out = {}
    for alpha in multi_indices(p.nvars, max_k):
        s = Fraction(0)
        for beta, c in p.terms.items():
            m = gaussian_moment_multi([a + b for a, b in zip(alpha, beta)], v)
            if m:
                s = s + c * m
        if s != 0:
            out[alpha] = s
    return out


def tail_polynomial(params: KernelParams, p: Polynomial) -> Polynomial:
    """Degree (2N, 4N] part of the operator image, exactly.

    Expanding q**n/n! binomially, the term with k factors of 2 lam (x.xi)
    has x-degree 2n - k; it is above 2N exactly when n > N and k < 2n - 2N.
    """
    _require_exact(p)
    d, N = p.nvars, params.N
    if params.lambda_sq == 0 or N == 0 or p.is_zero():
        return Polynomial(d)
    lam2, v = params.lambda_sq, params.variance
    sums = _moment_sums(params, p, 2 * N - 1)
    acc = Polynomial(d)
    for n in range(N + 1, 2 * N + 1):
        for k in range(0, 2 * n - 2 * N):
            inner = {
                alpha: sums[alpha] / mi_factorial(alpha)
                for alpha in multi_indices_of_degree(d, k)
                if alpha in sums
            }
            if not inner:
                continue
            scalar = (-lam2) ** (n - k) / math.factorial(n - k) * 2**k / v**n
            acc = acc + (dot_square_power(d, n - k) * Polynomial(d, inner)).scale(scalar * params.lam_power(k))
    return acc


@dataclass(frozen=True)
class OperatorImage:
    params: KernelParams
    total: Polynomial
    low_part: Polynomial
    tail: Polynomial
    M: int = 0


def apply_operator(params: KernelParams, p: Polynomial) -> OperatorImage:
    low = low_part(params, p)
    tail = tail_polynomial(params, p)
    return OperatorImage(params, low + tail, low, tail, infer_M(p))


# ---------------------------------------------------------------------------
# C integral


def c_integral_exact(lambda_sq, alpha, beta) -> tuple[Fraction, Fraction]:
    """(moment, radicand) with C = moment * sqrt(radicand)."""
    lambda_sq = _as_fraction(lambda_sq)
    if not 0 <= lambda_sq < 1:
        raise ValueError("lambda_sq must lie in [0, 1)")
    v = 1 - lambda_sq
    alpha, beta = tuple(alpha), tuple(beta)
    moment = gaussian_moment_multi([a + b for a, b in zip(alpha, beta)], v)
    radicand = Fraction(
        2 ** mi_abs(alpha) * mi_factorial(mi_floor_half(alpha)) * mi_factorial(mi_ceil_half(alpha)),
        mi_factorial(alpha) ** 2,
    ) / v ** mi_abs(alpha)
    return moment, radicand


def c_integral(lambda_sq, alpha, beta) -> float:
    moment, radicand = c_integral_exact(lambda_sq, alpha, beta)
    if not moment:
        return 0.0
    return float(moment * sqrt_exact(radicand))


# ---------------------------------------------------------------------------
# decomposition


def hermite_correction(p: Polynomial, lambda_sq, M: int) -> Polynomial:
    """sum over 0 < |alpha| <= 2M of (lam^|alpha| - 1) c_alpha H_alpha; lambda_sq may be 1 here."""
    _require_exact(p)
    lambda_sq = _as_fraction(lambda_sq)
    if not 0 <= lambda_sq <= 1:
        raise ValueError("lambda_sq must lie in [0, 1]")
    lam = sqrt_exact(lambda_sq)
    out = Polynomial(p.nvars)
    for alpha, c in hermite_expand(p).items():
        k = mi_abs(alpha)
        if k == 0 or k > 2 * M:
            continue
        power = lambda_sq ** (k // 2) * (lam if k % 2 else 1)
        out = out + hermite_multi(alpha).scale(c * (power - 1))
    return out


@dataclass(frozen=True)
class Decomposition:
    params: KernelParams
    M: int
    identity_poly: Polynomial
    correction: Polynomial
    tail: Polynomial
    total: Polynomial = field(repr=False)

    @property
    def holds(self) -> bool:
        return self.identity_poly + self.correction + self.tail == self.total


def decompose(params: KernelParams, p: Polynomial, M: int | None = None) -> Decomposition:
    """p + sum_{|alpha| <= 2M} (lam^|alpha| - 1) c_alpha H_alpha + tail."""
    _require_exact(p)
    m_min = infer_M(p)
    M = m_min if M is None else M
    if M < m_min:
        raise ValueError(f"M = {M} is too small for degree {p.degree}")
    if params.N < M:
        raise ValueError(f"N = {params.N} must be at least M = {M}")
    correction = hermite_correction(p, params.lambda_sq, M)
    image = apply_operator(params, p)
    return Decomposition(params, M, p, correction, image.tail, image.total)
