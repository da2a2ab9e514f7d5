"""Acceptance criteria 1-10, each reported as one PASS/FAIL line in the terminal summary."""

import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from mehler_sos.bounds import (
    admissible_first,
    compute_mu,
    first_estimate_pair,
    lambda_star,
    max_binomial,
    n_expl,
    n_expl_terms,
    second_estimate_condition,
    second_estimate_threshold,
    stirling_holds,
    stirling_min_m,
    synthesis_N,
)
from mehler_sos.certify import certify_operator_image, max_coeff_diff, reexpand, split_exp_n
from mehler_sos.hermite import hermite_inner, hermite_multi, hermite_univariate
from mehler_sos.mehler import KernelParams, apply_operator, decompose, exp_truncated, infer_M, kernel_coefficient
from mehler_sos.numbers import SurdSum
from mehler_sos.polycore import NormValue, Polynomial, coefficient_norm, inner_product_infty, multi_indices
from mehler_sos.verify import gram_from_certificate, psd_check, sample_nonneg, sample_points, sample_values, synthesis_residual

from conftest import motzkin, random_deg4
from oracles import operator_coefficient_sympy
from test_cli import CASES

criterion = pytest.mark.criterion


def grid_polys(d):
    polys = [Polynomial.constant(d, 1), Polynomial(d, {(2,) + (0,) * (d - 1): 1}), random_deg4(d)]
    if d == 2:
        polys.append(motzkin())
    return polys


GRID = [(d, N, lam2) for d in (1, 2) for N in (1, 2, 3) for lam2 in (Fraction(1, 4), Fraction(1, 2))]


@criterion(1, "Hermite orthogonality, exact")
def test_hermite_orthogonality():
    start = time.perf_counter()
    for n in range(13):
        for m in range(13):
            expected = 2**n * math.factorial(n) if n == m else 0
            assert hermite_inner((n,), hermite_univariate(m)) == expected
    idx = list(multi_indices(2, 6))
    for a in idx:
        for b in idx:
            expected = 2 ** sum(a) * math.factorial(a[0]) * math.factorial(a[1]) if a == b else 0
            assert hermite_inner(a, hermite_multi(b)) == expected
    assert time.perf_counter() - start < 5


@criterion(2, "low part equals direct kernel integration, exact")
def test_low_part_cross_validation():
    start = time.perf_counter()
    for d, N, lam2 in GRID:
        params = KernelParams(N, lam2)
        for p in grid_polys(d):
            low = apply_operator(params, p).low_part
            for gamma in multi_indices(d, 2 * N):
                assert low.coefficient(gamma) == kernel_coefficient(params, gamma).integrate(p)
    assert time.perf_counter() - start < 60
    # symbolic integration as a second, fully independent route in one variable
    for N, lam2 in [(1, Fraction(1, 4)), (2, Fraction(1, 2))]:
        low = apply_operator(KernelParams(N, lam2), Polynomial(1, {(2,): 1, (0,): 1})).low_part
        for g in range(2 * N + 1):
            assert low.coefficient((g,)) == Fraction(str(operator_coefficient_sympy(N, lam2, g, {2: 1, 0: 1})))


@criterion(3, "decomposition identity exact; lambda = 0 collapse")
def test_decomposition_identity():
    checked = 0
    for d, N, lam2 in GRID:
        for p in grid_polys(d):
            if infer_M(p) > N:
                continue
            assert decompose(KernelParams(N, lam2), p).holds
            checked += 1
    assert checked >= 20
    for d in (1, 2):
        for p in grid_polys(d):
            image = apply_operator(KernelParams(3, 0), p)
            assert image.total == Polynomial.constant(d, inner_product_infty(Polynomial.constant(d, 1), p))
            assert image.tail.is_zero()


@criterion(4, "constructive certificate for Motzkin at N=2, lambda^2=1/2")
def test_motzkin_certificate():
    start = time.perf_counter()
    params = KernelParams(2, Fraction(1, 2))
    cert = certify_operator_image(params, motzkin())
    assert min(t.weight for t in cert.terms) >= 0
    exact = apply_operator(params, motzkin()).total.to_float()
    got = reexpand([t.weight for t in cert.terms], [list(t.squares) for t in cert.terms], 2)
    assert max_coeff_diff(got, exact) <= 1e-8 * exact.max_abs_coefficient()
    assert psd_check(gram_from_certificate(cert).gram, 1e-9)
    assert time.perf_counter() - start < 30


@criterion(5, "exp_N as a sum of two squares; positivity on [-50, 0]")
def test_split_exp():
    for N in range(9):
        s1, s2 = split_exp_n(N)
        assert max_coeff_diff(s1 * s1 + s2 * s2, exp_truncated(N).to_float()) <= 1e-11
    rng = np.random.default_rng(0)
    zs = rng.uniform(-50, 0, 1000)
    for N in range(9):
        e = exp_truncated(N)
        assert all(e.evaluate([Fraction(z)]) > 0 for z in zs)


@criterion(6, "bound calculator values and scaling")
def test_bound_calculator():
    mu = compute_mu(3, 2)
    assert str(mu.exact) == "24*sqrt(14)"
    assert abs(mu.upper - 89.7998) <= 1e-3
    assert n_expl_terms(NormValue(SurdSum.rational(1)), 1, 1, 0)["n_expl"] == 66
    assert n_expl(Polynomial.constant(1, 1)).n_expl == 66
    pairs = [(M, d) for M in range(1, 6) for d in range(1, 5)]
    assert len(pairs) == 20
    for M, d in pairs:
        assert n_expl_terms(NormValue(SurdSum.rational(1)), M, d, 0)["term_lame"] == 2 * M + math.ceil(5 * d / 2) + 2
    vals = [n_expl(motzkin(), eps, 0).n_expl for eps in (1, Fraction(1, 10), Fraction(1, 100))]
    for a, b in zip(vals, vals[1:]):
        assert 10 / 1.2 <= b / a <= 10 * 1.2


@criterion(7, "first and second estimates for Motzkin")
def test_estimates():
    p = motzkin()
    norm = coefficient_norm(p)
    lam2 = lambda_star(compute_mu(3, 2), norm, 3, 2)
    assert admissible_first(norm, lam2, 3, 2)
    pair = first_estimate_pair(p, lam2, 0)
    assert pair.context["admissible"]
    values = sample_values(pair.gap, sample_points(2, 10_000, seed=0))
    assert values.min() >= -1e-9
    grid = [(l2, t) for l2 in (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), lam2) for t in (Fraction(0), Fraction(1, 2))]
    assert len(grid) == 10
    for l2, t in grid:
        threshold = second_estimate_threshold(l2, t, norm, 2)
        N = max(3 + 2 + 1, math.ceil(threshold))
        assert second_estimate_condition(N, l2, t, norm, 2)
        assert not second_estimate_condition(math.ceil(threshold) - 1, l2, t, norm, 2)
    N, l2 = synthesis_N(p, Fraction(1, 2))
    assert second_estimate_condition(N, l2, Fraction(1, 2), norm, 2)


@criterion(8, "Stirling and maximal binomial bounds")
def test_combinatorial_bounds():
    vals = [Fraction(1, 2), Fraction(1), Fraction(2), Fraction(10)]
    for a in vals:
        for b in vals:
            assert stirling_holds(stirling_min_m(a, b), a, b)
    for n in range(31):
        assert max_binomial(n) == math.comb(n, n // 2)


@criterion(9, "toy end-to-end synthesis for z^2")
def test_toy_synthesis():
    start = time.perf_counter()
    p = Polynomial(1, {(2,): 1})
    params = KernelParams(3, Fraction(1, 4))
    report = synthesis_residual(p, params, 0, 1, 2 * 3 + 1, n=10_000, seed=0)
    assert report["min_value"] >= -1e-9
    image = apply_operator(params, p).total
    assert sample_nonneg(image, 10_000, seed=0)["violations"] == 0
    assert time.perf_counter() - start < 10


@criterion(10, "CLI output byte-identical across runs")
@pytest.mark.parametrize("name", sorted(CASES) + ["verify-certificate"])
def test_cli_determinism(name, tmp_path):
    if name == "verify-certificate":
        cert = tmp_path / "cert.json"
        argv = CASES["certify"][0] + ["-o", str(cert)]
        subprocess.run([sys.executable, "-m", "mehler_sos.cli", *argv], check=True)
        argv = ["verify-certificate", "-i", str(cert)]
    else:
        argv = CASES[name][0]
    outputs = [
        subprocess.run([sys.executable, "-m", "mehler_sos.cli", *argv], capture_output=True, check=True).stdout
        for _ in range(2)
    ]
    assert outputs[0] == outputs[1] and outputs[0]
