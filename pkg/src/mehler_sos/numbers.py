"""Exact number types used alongside :class:`fractions.Fraction`.

``QuadraticNumber`` is an element ``a + b*sqrt(s)`` of a real quadratic field;
the operator pipeline uses it to carry odd powers of ``lambda`` exactly when
only ``lambda**2`` is rational.

``SurdSum`` is a finite sum ``sum_k q_k * sqrt(r_k)`` with rational ``q_k`` and
distinct squarefree ``r_k``. Norms and the bound constant live there, and its
sign is decided exactly by refining integer square-root enclosures.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable

__all__ = [
    "QuadraticNumber",
    "SurdSum",
    "squarefree_decompose",
    "sqrt_exact",
    "sqrt_factorial",
    "float_up",
    "float_down",
    "is_exact",
]


def is_exact(value) -> bool:
    return isinstance(value, (int, Fraction, QuadraticNumber)) and not isinstance(value, bool)


def float_up(value: Fraction) -> float:
    """Smallest binary64 value that is >= ``value``."""
    f = float(value)
    if Fraction(f) < value:
        f = math.nextafter(f, math.inf)
    return f


def float_down(value: Fraction) -> float:
    f = float(value)
    if Fraction(f) > value:
        f = math.nextafter(f, -math.inf)
    return f


def _small_primes(limit: int) -> list[int]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i, flag in enumerate(sieve) if flag]


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Return ``(k, r)`` with ``n == k*k*r`` and ``r`` squarefree."""
    if n <= 0:
        raise ValueError("squarefree_decompose needs a positive integer")
    k, r = 1, 1
    m = n
    # after removing primes up to cbrt(n) the cofactor is 1, p, p*q or p**2
    limit = int(round(n ** (1.0 / 3.0))) + 2
    for p in _small_primes(limit):
        if m < p * p:
            break
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            k *= p ** (e // 2)
            if e % 2:
                r *= p
    if m > 1:
        s = math.isqrt(m)
        if s * s == m:
            k *= s
        else:
            r *= m
    return k, r


def sqrt_factorial(n: int) -> tuple[int, int]:
    """Return ``(k, r)`` with ``n! == k*k*r``, ``r`` squarefree (Legendre's formula)."""
    k, r = 1, 1
    for p in _small_primes(max(n, 2)):
        if p > n:
            break
        e, q = 0, p
        while q <= n:
            e += n // q
            q *= p
        k *= p ** (e // 2)
        if e % 2:
            r *= p
    return k, r


def _rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)) and not isinstance(value, bool):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def _rational_radicand(s: Fraction) -> tuple[Fraction, int]:
    """Write ``sqrt(s) = c * sqrt(r)`` with rational ``c`` and squarefree ``r``."""
    num, den = s.numerator, s.denominator
    k, r = squarefree_decompose(num * den)
    return Fraction(k, den), r


class QuadraticNumber:
    """``a + b*sqrt(s)`` with rational ``a``, nonzero rational ``b``, squarefree ``s > 1``.

    Arithmetic results with ``b == 0`` collapse to :class:`Fraction`, so a
    QuadraticNumber instance is never rational.
    """

    __slots__ = ("a", "b", "s")

    def __init__(self, a, b, s: int):
        self.a = _rational(a)
        self.b = _rational(b)
        self.s = int(s)
        if self.b == 0:
            raise ValueError("use Fraction for rational values")
        if self.s <= 1:
            raise ValueError("radicand must be a squarefree integer > 1")

    @staticmethod
    def make(a, b, s: int):
        """Normalizing constructor: any nonnegative ``s``, collapses rationals."""
        if s < 0:
            raise ValueError("negative radicand")
        k, s = squarefree_decompose(int(s)) if s else (0, 1)
        b = _rational(b) * k
        if b == 0 or s == 1:
            return _rational(a) + b
        return QuadraticNumber(a, b, s)

    def _parts(self, other):
        if isinstance(other, QuadraticNumber):
            if other.s != self.s:
                raise ValueError(f"incompatible quadratic fields sqrt({self.s}) and sqrt({other.s})")
            return other.a, other.b
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Fraction(other), Fraction(0)
        return None

    def __add__(self, other):
        parts = self._parts(other)
        if parts is None:
            return NotImplemented
        return QuadraticNumber.make(self.a + parts[0], self.b + parts[1], self.s)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.s)

    def __pos__(self):
        return self

    def __sub__(self, other):
        parts = self._parts(other)
        if parts is None:
            return NotImplemented
        return QuadraticNumber.make(self.a - parts[0], self.b - parts[1], self.s)

    def __rsub__(self, other):
        parts = self._parts(other)
        if parts is None:
            return NotImplemented
        return QuadraticNumber.make(parts[0] - self.a, parts[1] - self.b, self.s)

    def __mul__(self, other):
        parts = self._parts(other)
        if parts is None:
            return NotImplemented
        c, d = parts
        return QuadraticNumber.make(self.a * c + self.b * d * self.s, self.a * d + self.b * c, self.s)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadraticNumber":
        return QuadraticNumber(self.a, -self.b, self.s)

    def field_norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.s

    def __truediv__(self, other):
        parts = self._parts(other)
        if parts is None:
            return NotImplemented
        c, d = parts
        if d == 0:
            if c == 0:
                raise ZeroDivisionError("division by zero")
            return QuadraticNumber.make(self.a / c, self.b / c, self.s)
        other_q = QuadraticNumber(c, d, self.s)
        return self * other_q.conjugate() / other_q.field_norm()

    def __rtruediv__(self, other):
        if not isinstance(other, (int, Fraction)) or isinstance(other, bool):
            return NotImplemented
        return self.conjugate() * Fraction(other) / self.field_norm()

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result, base = Fraction(1), self
        while k:
            if k & 1:
                result = base * result
            k >>= 1
            if k:
                base = base * base
        return result

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a**2 with b**2 * s
        diff = self.a * self.a - self.b * self.b * self.s
        return sa if diff > 0 else -sa

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __eq__(self, other):
        if isinstance(other, QuadraticNumber):
            return (self.a, self.b, self.s) == (other.a, other.b, other.s)
        if isinstance(other, (int, Fraction)):
            return False
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.s))

    def _cmp(self, other) -> int:
        diff = self - other
        if isinstance(diff, QuadraticNumber):
            return diff.sign()
        return (diff > 0) - (diff < 0)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.s)

    def __bool__(self):
        return True

    def __repr__(self):
        return f"QuadraticNumber({self.a!s}, {self.b!s}, {self.s})"

    def __str__(self):
        sign = "+" if self.b > 0 else "-"
        head = f"{self.a}{sign}" if self.a != 0 else ("-" if self.b < 0 else "")
        return f"{head}{abs(self.b)}*sqrt({self.s})"


def sqrt_exact(value) -> Fraction | QuadraticNumber:
    """Exact square root of a nonnegative rational."""
    s = _rational(value)
    if s < 0:
        raise ValueError("square root of a negative rational")
    if s == 0:
        return Fraction(0)
    c, r = _rational_radicand(s)
    if r == 1:
        return c
    return QuadraticNumber(0, c, r)


class SurdSum:
    """Exact real number ``sum_k q_k * sqrt(r_k)`` keyed by squarefree radicand."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[int, Fraction] | None = None):
        clean: dict[int, Fraction] = {}
        for r, q in (terms or {}).items():
            q = _rational(q)
            if q != 0:
                clean[int(r)] = clean.get(int(r), Fraction(0)) + q
        self.terms = {r: q for r, q in clean.items() if q != 0}

    @classmethod
    def rational(cls, q) -> "SurdSum":
        return cls({1: _rational(q)})

    @classmethod
    def sqrt_int(cls, n: int, coefficient=1) -> "SurdSum":
        k, r = squarefree_decompose(n)
        return cls({r: _rational(coefficient) * k})

    @classmethod
    def sqrt_rational(cls, value) -> "SurdSum":
        s = _rational(value)
        if s == 0:
            return cls()
        c, r = _rational_radicand(s)
        return cls({r: c})

    @classmethod
    def sqrt_factorial(cls, n: int, coefficient=1) -> "SurdSum":
        k, r = sqrt_factorial(n)
        return cls({r: _rational(coefficient) * k})

    @classmethod
    def total(cls, items: Iterable["SurdSum"]) -> "SurdSum":
        acc: dict[int, Fraction] = {}
        for item in items:
            for r, q in item.terms.items():
                acc[r] = acc.get(r, Fraction(0)) + q
        return cls(acc)

    def is_zero(self) -> bool:
        return not self.terms

    def rational_part(self) -> Fraction | None:
        """The value as a Fraction when it is rational, else ``None``."""
        if not self.terms:
            return Fraction(0)
        if set(self.terms) == {1}:
            return self.terms[1]
        return None

    def __add__(self, other):
        other = _as_surd(other)
        if other is None:
            return NotImplemented
        return SurdSum.total((self, other))

    __radd__ = __add__

    def __neg__(self):
        return SurdSum({r: -q for r, q in self.terms.items()})

    def __sub__(self, other):
        other = _as_surd(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_surd(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _as_surd(other)
        if other is None:
            return NotImplemented
        acc: dict[int, Fraction] = {}
        for r1, q1 in self.terms.items():
            for r2, q2 in other.terms.items():
                # squarefree r1, r2: r1*r2 = g**2 * (r1/g)*(r2/g)
                g = math.gcd(r1, r2)
                r = (r1 // g) * (r2 // g)
                acc[r] = acc.get(r, Fraction(0)) + q1 * q2 * g
        return SurdSum(acc)

    __rmul__ = __mul__

    def __truediv__(self, other):
        q = _rational(other)
        return SurdSum({r: c / q for r, c in self.terms.items()})

    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        """Rational interval containing the value, each sqrt resolved to ``2**-bits``."""
        lo = hi = Fraction(0)
        scale = 1 << bits
        for r, q in self.terms.items():
            if r == 1:
                lo += q
                hi += q
                continue
            s = math.isqrt(r << (2 * bits))
            a = q * Fraction(s, scale)
            b = q * Fraction(s + 1, scale)
            lo += min(a, b)
            hi += max(a, b)
        return lo, hi

    def sign(self) -> int:
        if not self.terms:
            return 0
        # nonzero by linear independence of square roots of distinct squarefree ints
        bits = 64
        while True:
            lo, hi = self.enclosure(bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2

    def upper(self) -> float:
        return float_up(self.enclosure(80)[1])

    def lower(self) -> float:
        return float_down(self.enclosure(80)[0])

    def __float__(self):
        lo, hi = self.enclosure(80)
        return float((lo + hi) / 2)

    def _cmp(self, other) -> int:
        other = _as_surd(other)
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        other = _as_surd(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self):
        return f"SurdSum({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for r in sorted(self.terms):
            q = self.terms[r]
            parts.append(f"{q}" if r == 1 else f"{q}*sqrt({r})")
        return " + ".join(parts)


def _as_surd(value) -> SurdSum | None:
    if isinstance(value, SurdSum):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return SurdSum.rational(value)
    return None
