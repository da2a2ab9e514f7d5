import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from mehler_sos.bounds import (
    admissible_first,
    build_perturbation,
    compute_mu,
    first_estimate_pair,
    lambda_star,
    max_binomial,
    n_expl,
    n_expl_terms,
    second_estimate_condition,
    second_estimate_pair,
    second_estimate_threshold,
    stirling_holds,
    stirling_min_m,
    synthesis_N,
)
from mehler_sos.mehler import KernelParams
from mehler_sos.numbers import SurdSum
from mehler_sos.polycore import NormValue, Polynomial, coefficient_norm, inner_product_infty
from mehler_sos.verify import sample_points, sample_values

from conftest import motzkin
from oracles import n_expl_formula


class TestMu:
    @pytest.mark.parametrize(
        "M, d, text, value",
        [(1, 1, "2*sqrt(2)", 2.8284271), (3, 2, "24*sqrt(14)", 89.7997773), (1, 2, "2*sqrt(6)", 4.8989795)],
    )
    def test_examples(self, M, d, text, value):
        mu = compute_mu(M, d)
        assert str(mu.exact) == text
        assert abs(mu.value - value) < 1e-6
        assert mu.upper >= mu.value

    def test_rejects_zero_M(self):
        with pytest.raises(ValueError):
            compute_mu(0, 1)


class TestLambdaStar:
    def test_examples(self):
        assert lambda_star(2, 1) == Fraction(1, 2)
        assert lambda_star(Fraction(1, 2), 1) == 0
        assert lambda_star(1, 1) == 0

    @pytest.mark.parametrize("M, d", [(1, 1), (2, 1), (3, 2), (2, 3)])
    def test_admissible(self, M, d):
        rng = np.random.default_rng(3)
        for _ in range(10):
            norm = NormValue(SurdSum.sqrt_int(int(rng.integers(2, 50)), Fraction(int(rng.integers(1, 40)), 7)))
            mu = compute_mu(M, d)
            if (mu.exact * norm.exact).sign() <= 0:
                continue
            lam2 = lambda_star(mu, norm, M, d)
            assert 0 <= lam2 < 1
            assert admissible_first(norm, lam2, M, d)

    def test_admissibility_is_monotone(self):
        norm = coefficient_norm(motzkin())
        lam2 = lambda_star(compute_mu(3, 2), norm, 3, 2)
        assert admissible_first(norm, (lam2 + 1) / 2, 3, 2)
        assert not admissible_first(norm, Fraction(1, 2), 3, 2)


class TestNExpl:
    def test_unit_norm(self):
        terms = n_expl_terms(NormValue(SurdSum.rational(1)), 1, 1, 0)
        assert terms["term_lame"] == 7
        assert terms["power_ceil"] == 62 and terms["log_ceil"] == 2
        assert terms["term_relevant"] == 66 == terms["n_expl"]

    def test_constant_polynomial(self):
        report = n_expl(Polynomial.constant(1, 1))
        assert report.n_expl == 66 == n_expl_formula(1.0, 1, 1, 0.0)

    def test_motzkin_half(self):
        report = n_expl(motzkin(), 1, Fraction(1, 2))
        assert report.term_lame == 13
        assert report.n_expl == report.term_relevant == 305122308
        assert 0.999 < float(report.lambda_star_sq) < 1
        labels = [a["label"] for a in report.audit]
        assert "term_relevant" in labels and "mu" in labels

    @pytest.mark.parametrize("M", range(1, 5))
    @pytest.mark.parametrize("d", range(1, 6))
    def test_term_lame(self, M, d):
        terms = n_expl_terms(NormValue(SurdSum.rational(1)), M, d, 0)
        assert terms["term_lame"] == 2 * M + math.ceil(5 * d / 2) + 2

    def test_errors(self):
        with pytest.raises(ValueError):
            n_expl(Polynomial(1))
        with pytest.raises(ValueError):
            n_expl(motzkin(), 1, 1)
        with pytest.raises(ValueError):
            n_expl(motzkin(), 0, 0)
        with pytest.raises(ValueError):
            n_expl(motzkin(), M=2)

    def test_scaling(self):
        vals = [n_expl(motzkin(), eps, 0).n_expl for eps in (1, Fraction(1, 10), Fraction(1, 100))]
        for a, b in zip(vals, vals[1:]):
            assert 10 / 1.2 <= b / a <= 10 * 1.2

    def test_monotone(self):
        p = motzkin()
        grid_eps = [Fraction(2), Fraction(1), Fraction(1, 3), Fraction(1, 10)]
        grid_t = [Fraction(0), Fraction(1, 4), Fraction(1, 2)]
        for t in grid_t:
            vals = [n_expl(p, e, t).n_expl for e in grid_eps]
            assert vals == sorted(vals)
        for e in grid_eps:
            vals = [n_expl(p, e, t).n_expl for t in grid_t]
            assert vals == sorted(vals)

    def test_matches_naive_formula(self):
        for M, d, norm in [(1, 1, 3), (2, 2, 7), (3, 1, Fraction(1, 5)), (1, 3, 40)]:
            terms = n_expl_terms(NormValue(SurdSum.rational(norm)), M, d, Fraction(1, 3))
            naive = n_expl_formula(float(norm), M, d, 1 / 3)
            assert terms["n_expl"] in (naive, naive + 1)

    def test_outward_rounding(self):
        rng = np.random.default_rng(11)
        with mpmath.workprec(200):
            for _ in range(100):
                M, d = int(rng.integers(1, 5)), int(rng.integers(1, 4))
                t = Fraction(int(rng.integers(0, 8)), 8)
                norm = NormValue(SurdSum.sqrt_int(int(rng.integers(1, 30)), Fraction(int(rng.integers(1, 100)), 13)))
                reported = n_expl_terms(norm, M, d, t)
                lo, hi = norm.exact.enclosure(200)
                nrm = mpmath.mpf(hi.numerator) / hi.denominator
                mu = M * mpmath.sqrt(math.comb(2 * M + d - 1, d - 1)) * mpmath.mpf(2) ** (M + mpmath.mpf(1) / 2)
                expo = 1 / (1 - mpmath.mpf(t.numerator) / t.denominator)
                power = int(mpmath.ceil(2 * mpmath.e * (4 * mu * nrm) ** expo))
                log = max(0, int(mpmath.ceil(mpmath.log((d + 1) ** 2 * mpmath.mpf(2) ** (2 * d) * nrm / mu) * expo)))
                assert power <= reported["power_ceil"]
                assert log <= reported["log_ceil"]


class TestFirstEstimate:
    def test_lambda_one(self):
        pair = first_estimate_pair(motzkin(), 1, 0)
        assert pair.lhs.is_zero()

    def test_lambda_zero(self):
        p = motzkin()
        pair = first_estimate_pair(p, 0, 0)
        assert pair.lhs == Polynomial.constant(2, inner_product_infty(Polynomial.constant(2, 1), p)) - p

    def test_rhs_range(self):
        pair = first_estimate_pair(motzkin(), Fraction(1, 2), 0)
        assert pair.context["rhs_range"] == [0, 4]
        assert pair.rhs.degree == 8

    def test_motzkin_admissible_and_dominated(self):
        p = motzkin()
        lam2 = lambda_star(compute_mu(3, 2), coefficient_norm(p), 3, 2)
        pair = first_estimate_pair(p, lam2, 0)
        assert pair.context["admissible"]
        values = sample_values(pair.gap, sample_points(2, 1000, seed=5))
        assert values.min() >= -1e-9

    @pytest.mark.parametrize("seed", range(20))
    def test_random_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 3))
        p = Polynomial.constant(d, Fraction(int(rng.integers(0, 4))))
        for _ in range(2):
            q = Polynomial(d, {tuple(int(a) for a in rng.integers(0, 2, d)): Fraction(int(rng.integers(-3, 4)), 2) for _ in range(3)})
            p = p + q * q
        if p.is_zero():
            p = Polynomial.constant(d, 1)
        M = max(1, -(-p.degree // 2))
        lam2 = lambda_star(compute_mu(M, d), coefficient_norm(p), M, d)
        pair = first_estimate_pair(p, lam2, 0, M)
        assert pair.context["admissible"]
        values = sample_values(pair.gap, sample_points(d, 1000, seed=seed))
        assert values.min() >= -1e-9


class TestSecondEstimate:
    def test_threshold_example(self):
        tiny = NormValue(SurdSum.rational(Fraction(1, 100)))
        assert second_estimate_condition(11, 0, 0, tiny, 1)
        assert not second_estimate_condition(10, 0, 0, tiny, 1)
        assert second_estimate_condition(10**6, Fraction(1, 2), Fraction(1, 2), coefficient_norm(motzkin()), 2)

    def test_threshold_value(self):
        th = second_estimate_threshold(0, 0, NormValue(SurdSum.rational(Fraction(1, 100))), 1)
        assert 4 * math.e <= float(th) < 4 * math.e * (1 + 1e-10)

    def test_synthesis_N_satisfies(self):
        p = motzkin()
        N, lam2 = synthesis_N(p, Fraction(1, 2))
        assert N >= 3 + 2 + 1
        assert second_estimate_condition(N, lam2, Fraction(1, 2), coefficient_norm(p), 2)

    def test_pair_small(self):
        p = Polynomial(1, {(2,): 1, (0,): 1})
        pair = second_estimate_pair(p, KernelParams(3, Fraction(1, 4)), 0)
        assert pair.context["rhs_range"] == [3, 7]
        assert all(6 < sum(a) <= 12 for a in pair.lhs.terms)


class TestCombinatorics:
    def test_stirling_examples(self):
        assert stirling_min_m(1, 1) == 3
        assert stirling_min_m(100, 2) == 10
        assert stirling_holds(10, 100, 2)

    def test_stirling_grid(self):
        vals = [Fraction(1, 2), 1, 2, 10]
        for a in vals:
            for b in vals:
                m = stirling_min_m(a, b)
                for k in range(m, m + 10):
                    assert stirling_holds(k, a, b)

    def test_max_binomial(self):
        assert [max_binomial(n) for n in (0, 4, 5)] == [1, 6, 10]
        for n in range(31):
            assert max_binomial(n) == math.comb(n, n // 2)

    def test_binomial_halving(self):
        for n in range(16):
            for k in range(n + 1):
                for ell in range(n + 1):
                    assert math.comb(n, k) <= 2 ** (n - ell) * math.comb(ell, ell // 2)

    def test_perturbation(self):
        assert build_perturbation(1, 1, 0) == Polynomial(1, {(0,): 1, (2,): 1})
        assert build_perturbation(1, 2, 1) == Polynomial(1, {(0,): 1, (2,): 1, (4,): Fraction(1, 2)})
        assert build_perturbation(2, 3, 0, 2) == build_perturbation(2, 3, 0).scale(2)
        half = build_perturbation(1, 4, Fraction(1, 2))
        assert half.domain == "float"
        assert math.isclose(half.coefficient((8,)), 1 / math.sqrt(24))
