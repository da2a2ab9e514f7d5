"""Explicit degree bounds for the perturbative SOS certificate.

Everything that can be exact is exact: mu and the coefficient norm are kept
as sums of square roots, lambda^2 is rational and admissibility is decided
by an exact sign test. The transcendental pieces (e, ln, fractional powers)
are evaluated with mpmath in a private context and inflated by a relative
guard of 2**-40 before any ceiling, so reported integers never undershoot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from mpmath.ctx_mp import MPContext

from .mehler import KernelParams, hermite_correction, infer_M, tail_polynomial
from .numbers import SurdSum
from .polycore import NormValue, Polynomial, coefficient_norm, dot_square_power

__all__ = [
    "GUARD",
    "compute_mu",
    "lambda_star",
    "admissible_first",
    "BoundReport",
    "n_expl",
    "n_expl_terms",
    "EstimatePair",
    "first_estimate_pair",
    "second_estimate_threshold",
    "second_estimate_condition",
    "second_estimate_pair",
    "synthesis_N",
    "stirling_min_m",
    "stirling_holds",
    "max_binomial",
    "build_perturbation",
    "weighted_dot_sum",
]

GUARD = Fraction(1, 2**40)
_DYADIC_BITS = 20


@lru_cache(maxsize=8)
def _ctx(prec: int) -> MPContext:
    ctx = MPContext()
    ctx.prec = prec
    return ctx


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, float, str)) and not isinstance(value, bool):
        return Fraction(value)
    raise TypeError(f"expected a rational, got {type(value).__name__}")


def _as_surd(value) -> SurdSum:
    if isinstance(value, NormValue):
        return value.exact
    if isinstance(value, SurdSum):
        return value
    return SurdSum.rational(_as_fraction(value))


def _as_norm(value) -> NormValue:
    return value if isinstance(value, NormValue) else NormValue(_as_surd(value))


def _ceil_up(ctx: MPContext, x) -> int:
    """Ceiling of an upper bound: x is inflated by the guard first."""
    g = ctx.mpf(GUARD.numerator) / GUARD.denominator
    y = x * (1 + g) if x >= 0 else x * (1 - g)
    return int(ctx.ceil(y))


# ---------------------------------------------------------------------------
# mu and lambda


def compute_mu(M: int, d: int) -> NormValue:
    """mu = M binom(2M+d-1, d-1)^(1/2) 2^(M+1/2), kept as an exact surd."""
    if M < 1 or d < 1:
        raise ValueError("mu needs M >= 1 and d >= 1")
    return NormValue(SurdSum.sqrt_int(2 * math.comb(2 * M + d - 1, d - 1), M * 2**M))


def admissible_first(norm_p, lambda_sq, M: int, d: int) -> bool:
    """Exact test of (1 - lambda^(2M)) binom(2M+d-1, d-1)^(1/2) 2^(M+1/2) ||p|| <= 1."""
    lambda_sq = _as_fraction(lambda_sq)
    factor = 1 - lambda_sq**M
    if factor <= 0:
        return True
    lhs = SurdSum.sqrt_int(2 * math.comb(2 * M + d - 1, d - 1), 2**M) * _as_surd(norm_p) * factor
    return lhs <= 1


def lambda_star(mu, norm_p, M: int | None = None, d: int | None = None) -> Fraction:
    """Rational lambda^2 in the role of 1 - 1/(mu ||p||); zero when mu ||p|| <= 1.

    With U a dyadic upper bound of mu ||p||, the choice 1 - 1/U satisfies
    1 - lambda^(2M) <= M/U, hence admissibility. When M and d are given the
    exact admissibility check is run and lambda^2 is pushed toward 1 if needed.
    """
    prod = _as_surd(mu) * _as_surd(norm_p)
    if prod <= 1:
        return Fraction(0)
    exact = prod.rational_part()
    if exact is not None and len(prod.terms) <= 1:
        lam2 = 1 - 1 / exact
    else:
        scale = 2**_DYADIC_BITS
        upper = Fraction(math.ceil(Fraction(prod.upper()) * scale), scale)
        lam2 = 1 - 1 / upper
    if M is not None and d is not None:
        for _ in range(200):
            if admissible_first(norm_p, lam2, M, d):
                break
            lam2 = (lam2 + 1) / 2
        else:
            raise ArithmeticError("no admissible lambda found")
    return lam2


# ---------------------------------------------------------------------------
# N_expl


def n_expl_terms(norm: NormValue, M: int, d: int, t, prec: int = 53) -> dict:
    """Both terms of the explicit bound, from the norm of p/eps. Returns a dict of ints and audit floats."""
    t = _as_fraction(t)
    if not 0 <= t < 1:
        raise ValueError("t must lie in [0, 1)")
    ctx = _ctx(prec)
    mu = compute_mu(M, d)
    expo = ctx.mpf(1) / (1 - ctx.mpf(t.numerator) / t.denominator)
    mu_up = ctx.mpf(mu.upper)
    mu_lo = ctx.mpf(mu.lower)
    n_up = ctx.mpf(norm.upper)
    power = 2 * ctx.e * (4 * mu_up * n_up) ** expo
    first = _ceil_up(ctx, power)
    if norm.exact.is_zero():
        log_term = None
        second = 0
    else:
        log_term = ctx.log((d + 1) ** 2 * ctx.mpf(2) ** (2 * d) * n_up / mu_lo) * expo
        second = max(0, _ceil_up(ctx, log_term))
    relevant = first + second + (3 * d) // 2 + 1
    lame = 2 * M + -(-5 * d // 2) + 2
    return {
        "mu": mu,
        "power": power,
        "power_ceil": first,
        "log": log_term,
        "log_ceil": second,
        "term_relevant": relevant,
        "term_lame": lame,
        "n_expl": max(relevant, lame),
    }


@dataclass(frozen=True)
class BoundReport:
    M: int
    d: int
    t: Fraction
    epsilon: Fraction
    norm_p_over_eps: NormValue
    mu: NormValue
    lambda_star_sq: Fraction
    term_lame: int
    term_relevant: int
    n_expl: int
    audit: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "d": self.d,
            "t": str(self.t),
            "epsilon": str(self.epsilon),
            "norm_p_over_eps": {"exact": str(self.norm_p_over_eps.exact), "upper": self.norm_p_over_eps.upper},
            "mu": {"exact": str(self.mu.exact), "upper": self.mu.upper},
            "lambda_star_sq": str(self.lambda_star_sq),
            "lambda_star_sq_is_zero": self.lambda_star_sq == 0,
            "term_lame": self.term_lame,
            "term_relevant": self.term_relevant,
            "n_expl": self.n_expl,
            "audit": self.audit,
        }


def n_expl(p: Polynomial, epsilon=1, t=0, M: int | None = None) -> BoundReport:
    """Explicit truncation order for p + eps sum_n (x.x)^n/(n!)^t to be SOS."""
    if p.is_zero():
        raise ValueError("the bound is undefined for the zero polynomial")
    if p.domain != "exact":
        raise TypeError("n_expl needs exact coefficients")
    epsilon, t = _as_fraction(epsilon), _as_fraction(t)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 <= t < 1:
        raise ValueError("t must lie in [0, 1)")
    m_min = max(1, infer_M(p))
    M = m_min if M is None else M
    if M < m_min:
        raise ValueError(f"M = {M} is too small for degree {p.degree}")
    d = p.nvars
    norm = NormValue(coefficient_norm(p).exact / epsilon)
    terms = n_expl_terms(norm, M, d, t)
    mu = terms["mu"]
    lam2 = lambda_star(mu, norm, M, d)
    audit = [
        {"label": "norm", "value": norm.upper, "exact": str(norm.exact)},
        {"label": "mu", "value": mu.upper, "exact": str(mu.exact)},
        {"label": "lambda_star_sq", "value": float(lam2), "exact": str(lam2)},
        {"label": "term_relevant.power", "value": float(terms["power"]), "ceil": terms["power_ceil"]},
        {
            "label": "term_relevant.log",
            "value": None if terms["log"] is None else float(terms["log"]),
            "ceil": terms["log_ceil"],
        },
        {"label": "term_relevant.floor_3d_2", "value": (3 * d) // 2},
        {"label": "term_relevant", "value": terms["term_relevant"]},
        {"label": "term_lame", "value": terms["term_lame"]},
        {"label": "guard", "value": float(GUARD)},
    ]
    return BoundReport(
        M, d, t, epsilon, norm, mu, lam2, terms["term_lame"], terms["term_relevant"], terms["n_expl"], audit
    )


# ---------------------------------------------------------------------------
# estimates


def _factorial_power(n: int, t: Fraction):
    """(n!)^t: exact for t in {0, 1}, float via lgamma otherwise."""
    if t == 0:
        return Fraction(1)
    if t == 1:
        return Fraction(math.factorial(n))
    return math.exp(float(t) * math.lgamma(n + 1))


def weighted_dot_sum(d: int, lo: int, hi: int, t, scale=1) -> Polynomial:
    """scale * sum_{lo <= n <= hi} (x.x)^n / (n!)^t; exact when t is 0 or 1."""
    t = _as_fraction(t)
    if t < 0:
        raise ValueError("t must be nonnegative")
    exact = t in (0, 1)
    acc = Polynomial(d)
    for n in range(max(lo, 0), hi + 1):
        w = _factorial_power(n, t)
        term = dot_square_power(d, n)
        if exact:
            acc = acc + term.scale(Fraction(scale) / w)
        else:
            acc = acc + term.to_float().scale(float(scale) / w)
    return acc


@dataclass(frozen=True)
class EstimatePair:
    """lhs should be dominated by rhs; ``gap`` is rhs - lhs in binary64."""

    lhs: Polynomial
    rhs: Polynomial
    context: dict

    @property
    def gap(self) -> Polynomial:
        return self.rhs.to_float() - self.lhs.to_float()


def first_estimate_pair(p: Polynomial, lambda_sq, t, M: int | None = None) -> EstimatePair:
    lambda_sq, t = _as_fraction(lambda_sq), _as_fraction(t)
    M = max(1, infer_M(p)) if M is None else M
    d = p.nvars
    lhs = hermite_correction(p, lambda_sq, M)
    rhs = weighted_dot_sum(d, 0, M + d // 2, t)
    norm = coefficient_norm(p)
    context = {
        "estimate": "first",
        "M": M,
        "d": d,
        "t": str(t),
        "lambda_sq": str(lambda_sq),
        "admissible": admissible_first(norm, lambda_sq, M, d),
        "rhs_range": [0, M + d // 2],
    }
    return EstimatePair(lhs, rhs, context)


def second_estimate_threshold(lambda_sq, t, norm_p, d: int, prec: int = 53):
    """Upper bound (mpf) of floor(d/2) + e(4/(1-lam^2))^(1/(1-t)) + max(0, ln((d+1)2^d ||p|| sqrt(1-lam^2))/(1-t))."""
    lambda_sq, t = _as_fraction(lambda_sq), _as_fraction(t)
    if not 0 <= lambda_sq < 1 or not 0 <= t < 1:
        raise ValueError("lambda_sq and t must lie in [0, 1)")
    ctx = _ctx(prec)
    norm = _as_norm(norm_p)
    expo = 1 / (1 - ctx.mpf(t.numerator) / t.denominator)
    v = 1 - lambda_sq
    v = ctx.mpf(v.numerator) / v.denominator
    total = d // 2 + ctx.e * (4 / v) ** expo
    if not norm.exact.is_zero():
        log_term = ctx.log((d + 1) * ctx.mpf(2) ** d * ctx.mpf(norm.upper) * ctx.sqrt(v)) * expo
        total += max(log_term, 0)
    return total * (1 + ctx.mpf(GUARD.numerator) / GUARD.denominator)


def second_estimate_condition(N: int, lambda_sq, t, norm_p, d: int) -> bool:
    return N >= second_estimate_threshold(lambda_sq, t, norm_p, d)


def second_estimate_pair(p: Polynomial, params: KernelParams, t) -> EstimatePair:
    t = _as_fraction(t)
    d, N = p.nvars, params.N
    lhs = tail_polynomial(params, p)
    lo, hi = N - d // 2, 2 * N + (d + 1) // 2
    rhs = weighted_dot_sum(d, lo, hi, t)
    norm = coefficient_norm(p)
    context = {
        "estimate": "second",
        "N": N,
        "d": d,
        "t": str(t),
        "lambda_sq": str(params.lambda_sq),
        "condition": second_estimate_condition(N, params.lambda_sq, t, norm, d),
        "rhs_range": [max(lo, 0), hi],
    }
    return EstimatePair(lhs, rhs, context)


def synthesis_N(p: Polynomial, t, epsilon=1, M: int | None = None) -> tuple[int, Fraction]:
    """Smallest N >= M + d + 1 meeting the second-estimate condition at the rational lambda*, with that lambda^2."""
    epsilon = _as_fraction(epsilon)
    if p.is_zero():
        raise ValueError("the bound is undefined for the zero polynomial")
    M = max(1, infer_M(p)) if M is None else M
    d = p.nvars
    norm = NormValue(coefficient_norm(p).exact / epsilon)
    lam2 = lambda_star(compute_mu(M, d), norm, M, d)
    threshold = second_estimate_threshold(lam2, t, norm, d)
    N = max(M + d + 1, int(math.ceil(threshold)))
    return N, lam2


# ---------------------------------------------------------------------------
# combinatorial bounds


def stirling_min_m(a, b) -> int:
    """ceil(e b + max(0, ln(a/sqrt b))), computed from an upper bound."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    ctx = _ctx(53)
    a, b = (ctx.mpf(x.numerator) / x.denominator for x in (_as_fraction(a), _as_fraction(b)))
    val = ctx.e * b + max(ctx.mpf(0), ctx.log(a / ctx.sqrt(b)))
    return _ceil_up(ctx, val)


def stirling_holds(m: int, a, b) -> bool:
    """m! >= a b^m, exactly (a, b are read as exact rationals)."""
    a, b = _as_fraction(a), _as_fraction(b)
    return math.factorial(m) >= a * b**m


def max_binomial(n: int) -> Fraction:
    """2^n prod_{j=1}^{ceil(n/2)} (2j-1)/(2j), which equals binom(n, floor(n/2))."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    value = Fraction(2**n)
    for j in range(1, (n + 1) // 2 + 1):
        value *= Fraction(2 * j - 1, 2 * j)
    return value


def build_perturbation(d: int, N: int, t, epsilon=1) -> Polynomial:
    """eps sum_{n=0}^{N} (x.x)^n/(n!)^t."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    return weighted_dot_sum(d, 0, N, t, _as_fraction(epsilon))
