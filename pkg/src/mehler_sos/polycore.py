"""Sparse multivariate polynomials over exact rationals or binary floats.

Multi-indices are plain tuples of nonnegative ints. A :class:`Polynomial`
maps multi-indices to coefficients; the coefficient domain is either *exact*
(``int``, :class:`~fractions.Fraction`, or :class:`~mehler_sos.numbers.QuadraticNumber`)
or *float* (``float``, optionally ``mpmath.mpf`` for extended precision).
Exact and float coefficients never mix silently: combining them raises
:class:`DomainMismatchError`; use :meth:`Polynomial.to_float` to convert.
"""

from __future__ import annotations

import json
import math
import re
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, Mapping, Sequence

import mpmath

from .numbers import QuadraticNumber, SurdSum, is_exact

__all__ = [
    "Polynomial",
    "NormValue",
    "PolynomialError",
    "DomainMismatchError",
    "DimensionMismatchError",
    "PolynomialParseError",
    "mi_abs",
    "mi_factorial",
    "mi_binom",
    "mi_le",
    "mi_floor_half",
    "mi_ceil_half",
    "multi_indices",
    "multi_indices_of_degree",
    "grlex_key",
    "parse",
    "format_polynomial",
    "dot_square_power",
    "gaussian_moment",
    "gaussian_moment_multi",
    "inner_product_infty",
    "coefficient_norm",
]


class PolynomialError(ValueError):
    pass


class DomainMismatchError(PolynomialError, TypeError):
    """Exact and float coefficients were combined."""


class DimensionMismatchError(PolynomialError):
    pass


class PolynomialParseError(PolynomialError):
    pass


# ---------------------------------------------------------------------------
# multi-index helpers


def mi_abs(alpha: Sequence[int]) -> int:
    return sum(alpha)


@lru_cache(maxsize=None)
def _factorial(n: int) -> int:
    return math.factorial(n)


def mi_factorial(alpha: Sequence[int]) -> int:
    return math.prod(_factorial(a) for a in alpha)


def mi_binom(beta: Sequence[int], alpha: Sequence[int]) -> int:
    return math.prod(math.comb(b, a) for b, a in zip(beta, alpha))


def mi_le(alpha: Sequence[int], beta: Sequence[int]) -> bool:
    return all(a <= b for a, b in zip(alpha, beta))


def mi_floor_half(alpha: Sequence[int]) -> tuple[int, ...]:
    return tuple(a // 2 for a in alpha)


def mi_ceil_half(alpha: Sequence[int]) -> tuple[int, ...]:
    return tuple((a + 1) // 2 for a in alpha)


@lru_cache(maxsize=None)
def multi_indices_of_degree(d: int, k: int) -> tuple[tuple[int, ...], ...]:
    """All alpha in N_0^d with |alpha| == k, in lexicographically decreasing order."""
    if d == 1:
        return ((k,),)
    out = []
    for first in range(k, -1, -1):
        for rest in multi_indices_of_degree(d - 1, k - first):
            out.append((first,) + rest)
    return tuple(out)


def multi_indices(d: int, max_degree: int) -> Iterator[tuple[int, ...]]:
    """All alpha in N_0^d with |alpha| <= max_degree, graded."""
    for k in range(max_degree + 1):
        yield from multi_indices_of_degree(d, k)


def grlex_key(alpha: Sequence[int]) -> tuple:
    """Sort key for graded lexicographic order (ascending total degree)."""
    return (sum(alpha), tuple(-a for a in alpha))


# ---------------------------------------------------------------------------
# coefficients


def _domain_of(value) -> str:
    if is_exact(value):
        return "exact"
    if isinstance(value, (float, mpmath.mpf)):
        return "float"
    raise TypeError(f"unsupported coefficient type {type(value).__name__}")


def _normalize_exact(value):
    if isinstance(value, int):
        return Fraction(value)
    return value


def _is_zero(value) -> bool:
    if isinstance(value, QuadraticNumber):
        return False
    return value == 0


class Polynomial:
    """Immutable sparse polynomial in ``nvars`` variables.

    ``terms`` maps exponent tuples to nonzero coefficients. The degree of the
    zero polynomial is -1.
    """

    __slots__ = ("nvars", "terms", "domain")

    def __init__(self, nvars: int, terms: Mapping[Sequence[int], object] | None = None):
        if nvars < 1:
            raise DimensionMismatchError("a polynomial needs at least one variable")
        self.nvars = int(nvars)
        clean: dict[tuple[int, ...], object] = {}
        domain = None
        for exps, coef in (terms or {}).items():
            key = tuple(int(e) for e in exps)
            if len(key) != self.nvars:
                raise DimensionMismatchError(f"exponent {key} has arity {len(key)}, expected {self.nvars}")
            if any(e < 0 for e in key):
                raise PolynomialError(f"negative exponent in {key}")
            dom = _domain_of(coef)
            if domain is None:
                domain = dom
            elif dom != domain:
                raise DomainMismatchError("mixed exact and float coefficients")
            if dom == "exact":
                coef = _normalize_exact(coef)
            if key in clean:
                coef = clean[key] + coef
            clean[key] = coef
        self.terms = {k: v for k, v in clean.items() if not _is_zero(v)}
        self.domain = domain if self.terms else None

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, value) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def monomial(cls, alpha: Sequence[int], coefficient=1) -> "Polynomial":
        return cls(len(alpha), {tuple(alpha): coefficient})

    @classmethod
    def variable(cls, nvars: int, j: int, coefficient=1) -> "Polynomial":
        alpha = [0] * nvars
        alpha[j] = 1
        return cls(nvars, {tuple(alpha): coefficient})

    # -- basic queries ----------------------------------------------------

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, alpha: Sequence[int]):
        return self.terms.get(tuple(alpha), 0)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], object]]:
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def is_even(self) -> bool:
        """True when every term has even total degree."""
        return all(sum(k) % 2 == 0 for k in self.terms)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Polynomial({self.nvars}, {format_terms(self)})"

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Polynomial") -> None:
        if self.nvars != other.nvars:
            raise DimensionMismatchError(f"{self.nvars} vs {other.nvars} variables")
        if self.domain and other.domain and self.domain != other.domain:
            raise DomainMismatchError(f"cannot combine {self.domain} and {other.domain} polynomials")

    def _check_scalar(self, c) -> None:
        dom = _domain_of(c)
        if self.domain and dom != self.domain:
            raise DomainMismatchError(f"cannot combine a {dom} scalar with a {self.domain} polynomial")

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            self._check_scalar(other)
            other = Polynomial.constant(self.nvars, other)
        self._check(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms[k] + v if k in terms else v
        return Polynomial(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            return self + (-other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Polynomial":
        self._check_scalar(c)
        if _is_zero(c):
            return Polynomial(self.nvars)
        return Polynomial(self.nvars, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._check(other)
        acc: dict[tuple[int, ...], object] = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                prod_ = v1 * v2
                acc[k] = acc[k] + prod_ if k in acc else prod_
        return Polynomial(self.nvars, acc)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, c):
        if isinstance(c, Polynomial):
            return NotImplemented
        if self.domain == "float" or isinstance(c, float):
            return self.scale(1.0 / c) if self.domain != "exact" else self.scale(Fraction(1) / c)
        return self.scale(Fraction(1) / c if isinstance(c, int) else 1 / c)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result = Polynomial.constant(self.nvars, 1.0 if self.domain == "float" else 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def truncate(self, max_degree: int) -> "Polynomial":
        return Polynomial(self.nvars, {k: v for k, v in self.terms.items() if sum(k) <= max_degree})

    def degree_band(self, low_exclusive: int, high_inclusive: int) -> "Polynomial":
        return Polynomial(
            self.nvars, {k: v for k, v in self.terms.items() if low_exclusive < sum(k) <= high_inclusive}
        )

    def parity_parts(self) -> tuple["Polynomial", "Polynomial"]:
        even = {k: v for k, v in self.terms.items() if sum(k) % 2 == 0}
        odd = {k: v for k, v in self.terms.items() if sum(k) % 2 == 1}
        return Polynomial(self.nvars, even), Polynomial(self.nvars, odd)

    def compose_univariate(self, q: "Polynomial") -> "Polynomial":
        """``self(q)`` for univariate ``self`` and any polynomial ``q`` (Horner)."""
        if self.nvars != 1:
            raise DimensionMismatchError("compose_univariate needs a univariate outer polynomial")
        if self.domain and q.domain and self.domain != q.domain:
            raise DomainMismatchError("cannot compose exact and float polynomials")
        result = Polynomial(q.nvars)
        for n in range(self.degree, -1, -1):
            result = result * q
            c = self.terms.get((n,))
            if c is not None:
                result = result + Polynomial.constant(q.nvars, c)
        return result

    # -- evaluation / conversion -----------------------------------------

    def evaluate(self, point: Sequence):
        """Evaluate at ``point``; exact polynomials need exact points."""
        if len(point) != self.nvars:
            raise DimensionMismatchError(f"point has {len(point)} coordinates, expected {self.nvars}")
        doms = {_domain_of(x) for x in point}
        if self.domain and doms - {self.domain}:
            raise DomainMismatchError(f"cannot evaluate a {self.domain} polynomial at a {doms} point")
        total = 0
        for alpha, c in self.sorted_terms():
            term = c
            for x, e in zip(point, alpha):
                if e:
                    term = term * x**e
            total = total + term
        return total

    def to_float(self) -> "Polynomial":
        return Polynomial(self.nvars, {k: float(v) for k, v in self.terms.items()})

    def to_mpf(self) -> "Polynomial":
        return Polynomial(self.nvars, {k: _to_mpf(v) for k, v in self.terms.items()})

    def max_abs_coefficient(self) -> float:
        return max((abs(float(v)) for v in self.terms.values()), default=0.0)

    def arrays(self):
        """Exponent matrix and float coefficient vector in grlex order."""
        import numpy as np

        items = self.sorted_terms()
        exps = np.array([k for k, _ in items], dtype=np.int64).reshape(len(items), self.nvars)
        coefs = np.array([float(v) for _, v in items], dtype=np.float64)
        return exps, coefs


def _to_mpf(value):
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    if isinstance(value, QuadraticNumber):
        return _to_mpf(value.a) + _to_mpf(value.b) * mpmath.sqrt(value.s)
    return mpmath.mpf(value)


# ---------------------------------------------------------------------------
# JSON format

_SURD_RE = re.compile(
    r"^(?:(?P<a>-?[0-9./]+)(?=[+-]))?(?P<sign>[+-]?)(?P<b>[0-9./]+)\*sqrt\((?P<s>\d+)\)$"
)


def _parse_coefficient(raw):
    if isinstance(raw, bool):
        raise PolynomialParseError(f"unparseable coefficient {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return raw
    if not isinstance(raw, str):
        raise PolynomialParseError(f"unparseable coefficient {raw!r}")
    text = raw.strip()
    if "sqrt" in text:
        m = _SURD_RE.match(text.replace(" ", ""))
        if not m:
            raise PolynomialParseError(f"unparseable coefficient {raw!r}")
        try:
            a = Fraction(m.group("a")) if m.group("a") else Fraction(0)
            b = Fraction(m.group("b"))
        except (ValueError, ZeroDivisionError) as exc:
            raise PolynomialParseError(f"unparseable coefficient {raw!r}") from exc
        if m.group("sign") == "-":
            b = -b
        return QuadraticNumber.make(a, b, int(m.group("s")))
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise PolynomialParseError(f"unparseable coefficient {raw!r}") from exc


def polynomial_from_dict(obj: Mapping, d: int | None = None) -> Polynomial:
    if not isinstance(obj, Mapping) or "terms" not in obj:
        raise PolynomialParseError("polynomial JSON needs a 'terms' list")
    nvars = obj.get("vars", d)
    if nvars is None:
        raise PolynomialParseError("number of variables unknown")
    if d is not None and nvars != d:
        raise DimensionMismatchError(f"document declares {nvars} variables, expected {d}")
    if not isinstance(nvars, int) or isinstance(nvars, bool) or nvars < 1:
        raise PolynomialParseError(f"invalid 'vars': {nvars!r}")
    terms: dict[tuple[int, ...], object] = {}
    for term in obj["terms"]:
        if not isinstance(term, Mapping) or "exp" not in term or "coef" not in term:
            raise PolynomialParseError(f"malformed term {term!r}")
        exps = term["exp"]
        if not isinstance(exps, list) or not all(isinstance(e, int) and not isinstance(e, bool) and e >= 0 for e in exps):
            raise PolynomialParseError(f"malformed exponent {exps!r}")
        if len(exps) != nvars:
            raise DimensionMismatchError(f"exponent {exps} has arity {len(exps)}, expected {nvars}")
        key = tuple(exps)
        coef = _parse_coefficient(term["coef"])
        terms[key] = terms[key] + coef if key in terms else coef
    try:
        return Polynomial(nvars, terms)
    except DomainMismatchError as exc:
        raise PolynomialParseError(str(exc)) from exc


def parse(text: str, d: int | None = None) -> Polynomial:
    """Parse the JSON polynomial format ``{"vars": d, "terms": [{"exp": [...], "coef": "..."}]}``.

    A bare term list (no ``vars``) is accepted when ``d`` is given.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PolynomialParseError(f"invalid JSON: {exc}") from exc
    if isinstance(obj, list):
        obj = {"terms": obj}
    return polynomial_from_dict(obj, d)


def format_coefficient(value, precision: str = "exact") -> str:
    if precision == "float":
        return repr(float(value))
    if precision == "extended":
        return mpmath.nstr(_to_mpf(value), 30)
    if isinstance(value, (Fraction, QuadraticNumber)):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return mpmath.nstr(value, 30)


def polynomial_to_dict(p: Polynomial, precision: str = "exact") -> dict:
    return {
        "vars": p.nvars,
        "terms": [{"exp": list(k), "coef": format_coefficient(v, precision)} for k, v in p.sorted_terms()],
    }


def format_polynomial(p: Polynomial, precision: str = "exact") -> str:
    return json.dumps(polynomial_to_dict(p, precision))


def format_terms(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    names = ["z"] if p.nvars == 1 else [f"x{j + 1}" for j in range(p.nvars)]
    parts = []
    for alpha, c in p.sorted_terms():
        mono = "*".join(f"{n}^{e}" if e > 1 else n for n, e in zip(names, alpha) if e)
        parts.append(f"({c})*{mono}" if mono else f"({c})")
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# Gaussian moments, inner product, norm


def dot_square_power(d: int, n: int) -> Polynomial:
    """(x . x)**n expanded by the multinomial theorem."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    fn = math.factorial(n)
    return Polynomial(
        d, {tuple(2 * b for b in beta): Fraction(fn // mi_factorial(beta)) for beta in multi_indices_of_degree(d, n)}
    )


def gaussian_moment(ell: int, lam) -> Fraction:
    """Integral of xi**ell against exp(-xi**2/lam) dxi / sqrt(lam*pi), exactly."""
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    lam = Fraction(lam)
    if lam <= 0:
        raise ValueError("lam must be positive")
    if ell % 2:
        return Fraction(0)
    m = ell // 2
    return lam**m * Fraction(math.factorial(ell), 2**ell * math.factorial(m))


def gaussian_moment_multi(gamma: Sequence[int], lam=1) -> Fraction:
    """Product of one-dimensional moments over the coordinates of ``gamma``."""
    out = Fraction(1)
    for g in gamma:
        if g % 2:
            return Fraction(0)
        out *= gaussian_moment(g, lam)
    return out


def inner_product_infty(p: Polynomial, q: Polynomial):
    """<p, q> against exp(-xi.xi) d xi / sqrt(pi)**d, exact."""
    p._check(q)
    if p.domain == "float" or q.domain == "float":
        raise DomainMismatchError("inner_product_infty needs exact coefficients")
    total = Fraction(0)
    for a, ca in p.terms.items():
        for b, cb in q.terms.items():
            m = gaussian_moment_multi([x + y for x, y in zip(a, b)])
            if m:
                total = total + ca * cb * m
    return total


class NormValue:
    """Exact value of a radical expression plus an outward-rounded float.

    ``exact`` is a :class:`SurdSum`; ``upper`` is a binary64 upper bound of it.
    """

    __slots__ = ("exact", "upper")

    def __init__(self, exact: SurdSum):
        self.exact = exact
        self.upper = exact.upper()

    @property
    def value(self) -> float:
        return float(self.exact)

    @property
    def lower(self) -> float:
        return self.exact.lower()

    def scaled(self, c) -> "NormValue":
        return NormValue(self.exact * Fraction(c))

    def __float__(self):
        return self.value

    def __repr__(self):
        return f"NormValue({self.exact}, upper={self.upper!r})"


def _abs_exact(value):
    if isinstance(value, QuadraticNumber):
        return abs(value)
    return abs(value)


def coefficient_norm(p: Polynomial) -> NormValue:
    """sum_alpha |p_alpha| sqrt(alpha!) with the square roots kept symbolic."""
    parts = []
    for alpha, c in p.terms.items():
        root = SurdSum.rational(1)
        for a in alpha:
            if a > 1:
                root = root * SurdSum.sqrt_factorial(a)
        if p.domain == "exact":
            c = _abs_exact(c)
            if isinstance(c, QuadraticNumber):
                factor = SurdSum({1: c.a}) + SurdSum.sqrt_int(c.s, c.b)
            else:
                factor = SurdSum.rational(c)
        else:
            factor = SurdSum.rational(Fraction(abs(float(c))))
        parts.append(factor * root)
    return NormValue(SurdSum.total(parts))


def tensor_points(axes: Iterable[Sequence[float]]) -> list[tuple]:
    return list(product(*axes))
