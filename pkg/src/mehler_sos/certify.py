"""Constructive SOS certificates for the operator image.

After the substitution xi = sqrt(1-lam^2) z the operator becomes

    I(p)(x) = int exp_N(q(x, sqrt(1-lam^2) z)) p(sqrt(1-lam^2) z) exp(-z.z) dz / sqrt(pi)^d,

an integrand polynomial in z of degree deg p + 2N. A tensor Gauss-Hermite
rule of that exactness turns the integral into a finite nonnegative
combination of exp_N(q_i(x)), and each exp_N splits into two squares.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from itertools import product

import mpmath
import numpy as np
from mpmath.ctx_mp import MPContext

from .errors import HypothesisViolation, PrecisionError
from .kernels import evaluate_sparse, gram_contract
from .mehler import KernelParams, apply_operator
from .polycore import Polynomial, polynomial_from_dict, polynomial_to_dict

__all__ = [
    "QuadratureRule",
    "gauss_hermite",
    "split_exp_n",
    "Certificate",
    "CertificateTerm",
    "certify_operator_image",
    "verify_certificate",
    "square_basis",
    "reexpand",
]


@dataclass(frozen=True)
class QuadratureRule:
    """One-dimensional rule for exp(-z^2)/sqrt(pi); weights sum to one."""

    nodes: tuple[float, ...]
    weights: tuple[float, ...]
    exactness_degree: int

    def integrate(self, f) -> float:
        return math.fsum(w * f(z) for z, w in zip(self.nodes, self.weights))


_MAX_NEWTON = 100


def gauss_hermite(n: int) -> QuadratureRule:
    """Nodes are the roots of H_n, found by Newton's method on the orthonormal recursion."""
    if n < 1:
        raise ValueError("n must be at least 1")
    pim4 = math.pi**-0.25
    roots = [0.0] * n
    weights = [0.0] * n
    m = (n + 1) // 2
    z = 0.0
    for i in range(m):
        # asymptotic starting values for the largest roots, then extrapolation
        if i == 0:
            z = math.sqrt(2 * n + 1) - 1.85575 * (2 * n + 1) ** (-1 / 6)
        elif i == 1:
            z -= 1.14 * n**0.426 / z
        elif i == 2:
            z = 1.86 * z - 0.86 * roots[0]
        elif i == 3:
            z = 1.91 * z - 0.91 * roots[1]
        else:
            z = 2.0 * z - roots[i - 2]
        for _ in range(_MAX_NEWTON):
            p1, p2 = pim4, 0.0
            for j in range(1, n + 1):
                p1, p2 = z * math.sqrt(2.0 / j) * p1 - math.sqrt((j - 1) / j) * p2, p1
            pp = math.sqrt(2.0 * n) * p2
            step = p1 / pp
            z -= step
            if abs(step) <= 1e-15 * max(1.0, abs(z)):
                break
        else:
            raise PrecisionError(f"Gauss-Hermite Newton iteration did not converge for n={n}")
        roots[i], roots[n - 1 - i] = z, -z
        weights[i] = weights[n - 1 - i] = 2.0 / (pp * pp) / math.sqrt(math.pi)
    if n % 2:
        roots[m - 1] = 0.0
    total = math.fsum(weights)
    order = sorted(range(n), key=lambda k: roots[k])
    return QuadratureRule(
        tuple(roots[k] for k in order), tuple(weights[k] / total for k in order), 2 * n - 1
    )


def split_exp_n(N: int, prec: int | None = None) -> tuple[Polynomial, Polynomial]:
    """Two univariate polynomials whose squares sum to exp_N.

    exp_N has no real roots; with r_j the roots in the upper half plane,
    g = sqrt(c) prod (z - r_j) satisfies |g(z)|^2 = exp_N(z) on the real
    line, so Re g and Im g are the two square roots. Roots come from the
    companion matrix and are polished by Newton steps in mpmath. With ``prec``
    the coefficients are returned as mpf at that precision.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    if N == 0:
        one = mpmath.mpf(1) if prec else 1.0
        return Polynomial.constant(1, one), Polynomial(1)
    deg = 2 * N
    work = max(prec or 53, 53) + 60
    ctx = MPContext()
    ctx.prec = work
    coeffs = [ctx.mpf(1) / ctx.factorial(k) for k in range(deg + 1)]
    approx = np.roots([1.0 / math.factorial(k) for k in range(deg, -1, -1)])
    upper = [r for r in approx if r.imag > 0]
    if len(upper) != N:
        raise PrecisionError("could not separate the roots of exp_N into conjugate pairs")

    def value_and_slope(z):
        v, s = ctx.mpc(0), ctx.mpc(0)
        for c in reversed(coeffs):
            s = s * z + v
            v = v * z + c
        return v, s

    refined = []
    for r in upper:
        z = ctx.mpc(r.real, r.imag)
        for _ in range(_MAX_NEWTON):
            v, s = value_and_slope(z)
            step = v / s
            z -= step
            if abs(step) <= ctx.mpf(2) ** (-work + 8) * max(1, abs(z)):
                break
        else:
            raise PrecisionError("Newton refinement of exp_N roots did not converge")
        if abs(z.imag) <= ctx.mpf(2) ** (-work // 2):
            raise PrecisionError("exp_N appears to have a real root")
        refined.append(z)
    g = [ctx.sqrt(coeffs[-1])]  # lowest degree first
    for r in sorted(refined, key=lambda w: (float(w.real), float(w.imag))):
        nxt = [ctx.mpc(0)] * (len(g) + 1)
        for k, c in enumerate(g):
            nxt[k + 1] += c
            nxt[k] -= r * c
        g = nxt
    re = [c.real for c in g]
    im = [c.imag for c in g]
    # fix signs so that the leading nonzero coefficient of each part is positive
    for part in (re, im):
        lead = next((c for c in reversed(part) if abs(c) > ctx.mpf(2) ** (-work // 2)), ctx.mpf(1))
        if lead < 0:
            part[:] = [-c for c in part]
    cast = (lambda c: mpmath.mpf(c)) if prec else float
    sigma1 = Polynomial(1, {(k,): cast(c) for k, c in enumerate(re) if c != 0})
    sigma2 = Polynomial(1, {(k,): cast(c) for k, c in enumerate(im) if abs(c) > ctx.mpf(2) ** (-work + 16)})
    return sigma1, sigma2


# ---------------------------------------------------------------------------
# Gram-style re-expansion


def square_basis(d: int, max_degree: int) -> list[tuple[int, ...]]:
    from .polycore import multi_indices

    return list(multi_indices(d, max_degree))


def reexpand(weights, squares: list[list[Polynomial]], d: int) -> Polynomial:
    """sum_i w_i sum_s squares[i][s]^2 as a float polynomial, through a Gram contraction."""
    deg = max((s.degree for group in squares for s in group), default=0)
    basis = square_basis(d, max(deg, 0))
    pos = {b: k for k, b in enumerate(basis)}
    rows = []
    row_w = []
    for w, group in zip(weights, squares):
        for s in group:
            v = np.zeros(len(basis))
            for alpha, c in s.terms.items():
                v[pos[alpha]] = float(c)
            rows.append(v)
            row_w.append(float(w))
    if not rows:
        return Polynomial(d)
    V = np.array(rows)
    gram = V.T @ (np.array(row_w)[:, None] * V)
    return gram_to_polynomial(gram, basis)


def gram_to_polynomial(gram: np.ndarray, basis: list[tuple[int, ...]]) -> Polynomial:
    d = len(basis[0]) if basis else 1
    out_keys: dict[tuple[int, ...], int] = {}
    index = np.empty((len(basis), len(basis)), dtype=np.int64)
    for a, ba in enumerate(basis):
        for b, bb in enumerate(basis):
            key = tuple(x + y for x, y in zip(ba, bb))
            index[a, b] = out_keys.setdefault(key, len(out_keys))
    flat = gram_contract(gram, index, len(out_keys))
    return Polynomial(d, {k: float(flat[i]) for k, i in out_keys.items() if flat[i] != 0.0})


def max_coeff_diff(p: Polynomial, q: Polynomial) -> float:
    keys = set(p.terms) | set(q.terms)
    return max((abs(float(p.terms.get(k, 0.0)) - float(q.terms.get(k, 0.0))) for k in keys), default=0.0)


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class CertificateTerm:
    weight: float
    xi: tuple[float, ...]
    squares: tuple[Polynomial, ...]


@dataclass
class Certificate:
    """target = sum_i weight_i sum_s squares_{i,s}^2 up to ``residual_norm``."""

    target: Polynomial
    terms: list[CertificateTerm]
    residual_norm: float
    params: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def relative_residual(self) -> float:
        scale = self.target.max_abs_coefficient()
        return self.residual_norm / scale if scale else self.residual_norm

    def to_dict(self) -> dict:
        out = {
            "target": polynomial_to_dict(self.target, "float"),
            "params": self.params,
            "terms": [
                {
                    "weight": t.weight,
                    "xi": list(t.xi),
                    "squares": [polynomial_to_dict(s, "float") for s in t.squares],
                }
                for t in self.terms
            ],
            "residual_norm": self.residual_norm,
        }
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, obj: dict) -> "Certificate":
        target = polynomial_from_dict(obj["target"]).to_float()
        d = target.nvars
        terms = [
            CertificateTerm(
                float(t["weight"]),
                tuple(float(x) for x in t.get("xi", [])),
                tuple(polynomial_from_dict(s, d).to_float() for s in t["squares"]),
            )
            for t in obj["terms"]
        ]
        return cls(target, terms, float(obj["residual_norm"]), dict(obj.get("params", {})), list(obj.get("warnings", [])))

    @classmethod
    def from_json(cls, text: str) -> "Certificate":
        return cls.from_dict(json.loads(text))


def _q_polynomial(xi, lam: float, lam2: float, v: float) -> Polynomial:
    d = len(xi)
    terms = {}
    for j in range(d):
        e = [0] * d
        e[j] = 2
        if lam2:
            terms[tuple(e)] = -lam2 / v
        e = [0] * d
        e[j] = 1
        if lam and xi[j]:
            terms[tuple(e)] = 2.0 * lam * xi[j] / v
    return Polynomial(d, terms)


def certify_operator_image(
    params: KernelParams,
    p: Polynomial,
    order: int | None = None,
    force: bool = False,
    tol: float = 1e-8,
) -> Certificate:
    """Weighted squares reproducing the operator image of a nonnegative ``p``.

    Raises HypothesisViolation when p is negative at a node (``force`` clamps
    such weights to zero instead, which voids the certificate), and
    PrecisionError when the re-expansion misses the exact image by more
    than ``tol`` relative.
    """
    d = p.nvars
    need = -(-(max(p.degree, 0) + 2 * params.N + 1) // 2)
    order = max(need, 1) if order is None else order
    if order < need:
        raise ValueError(f"quadrature order {order} is below the required {need}")
    rule = gauss_hermite(order)
    lam2 = float(params.lambda_sq)
    lam = math.sqrt(lam2)
    v = float(params.variance)
    root_v = math.sqrt(v)
    sigma = split_exp_n(params.N)
    exps, coefs = p.to_float().arrays() if not p.is_zero() else (np.zeros((0, d), np.int64), np.zeros(0))
    grid = list(product(range(order), repeat=d))
    points = np.array([[root_v * rule.nodes[k] for k in idx] for idx in grid]).reshape(len(grid), d)
    values = evaluate_sparse(exps, coefs, points)
    scale = max(1.0, float(np.max(np.abs(coefs))) if len(coefs) else 1.0)
    notes = []
    terms = []
    for idx, xi, pv in zip(grid, points, values):
        if pv < 0:
            if pv < -1e-12 * scale and not force:
                raise HypothesisViolation(f"p({tuple(float(x) for x in xi)}) = {pv} < 0")
            if pv < -1e-12 * scale:
                msg = f"clamped p({tuple(float(x) for x in xi)}) = {pv} to 0; certificate is NOT sound"
                warnings.warn(msg)
                notes.append(msg)
            pv = 0.0
        w = math.prod(rule.weights[k] for k in idx) * float(pv)
        q = _q_polynomial(tuple(xi), lam, lam2, v)
        squares = tuple(s.compose_univariate(q) for s in sigma if not s.is_zero())
        terms.append(CertificateTerm(w, tuple(float(x) for x in xi), squares))
    target = apply_operator(params, p).total.to_float()
    got = reexpand([t.weight for t in terms], [list(t.squares) for t in terms], d)
    residual = max_coeff_diff(got, target)
    cert = Certificate(
        target,
        terms,
        residual,
        {"N": params.N, "lambda_sq": str(params.lambda_sq), "order": order},
        notes,
    )
    if cert.relative_residual > tol:
        raise PrecisionError(f"certificate residual {cert.relative_residual:.3e} exceeds {tol:.1e}")
    return cert


def verify_certificate(cert: Certificate, precision: str = "float") -> dict:
    """Re-expand the weighted squares and compare with the target coefficientwise."""
    d = cert.target.nvars
    min_weight = min((t.weight for t in cert.terms), default=0.0)
    if precision == "extended":
        with mpmath.workdps(40):
            acc = Polynomial(d)
            for t in cert.terms:
                for s in t.squares:
                    sm = s.to_mpf()
                    acc = acc + (sm * sm).scale(mpmath.mpf(t.weight))
            keys = set(acc.terms) | set(cert.target.terms)
            err = max(
                (abs(acc.terms.get(k, 0) - mpmath.mpf(cert.target.terms.get(k, 0.0))) for k in keys),
                default=mpmath.mpf(0),
            )
            err = float(err)
    else:
        got = reexpand([t.weight for t in cert.terms], [list(t.squares) for t in cert.terms], d)
        err = max_coeff_diff(got, cert.target)
    scale = max(1.0, cert.target.max_abs_coefficient())
    slack = 64 * np.finfo(float).eps * scale * max(1, len(cert.terms))
    ok = err <= cert.residual_norm + slack and min_weight >= 0
    return {"max_coeff_err": err, "min_weight": float(min_weight), "ok": bool(ok)}
