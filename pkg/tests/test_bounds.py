"""Bound evaluators against independent oracles and the stated identities."""

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from depbounds import bounds as bd
from depbounds.numkernel import (
    BinomialSpec,
    binom_pmf_log,
    binom_tail_log,
    kl_divergence,
    to_prob,
)

mpmath.mp.dps = 60


def mp_kl(q, p):
    q, p = mpmath.mpf(q), mpmath.mpf(p)
    return q * mpmath.log(q / p) + (1 - q) * mpmath.log((1 - q) / (1 - p))


def exact_binom_tail(n, p_frac, j):
    total = Fraction(0)
    for i in range(j, n + 1):
        total += Fraction(math.comb(n, i)) * p_frac**i * (1 - p_frac) ** (n - i)
    return total


class TestHoeffding:
    def test_three_forms_agree(self):
        # product closed form, KL form, and the tilted-moment infimum
        for n, p, t in [(10, 0.3, 6.0), (50, 0.2, 20.0), (200, 0.7, 160.0)]:
            tb = bd.hoeffding_bound(n, p, t)
            assert tb.is_valid
            assert tb.log_bound == pytest.approx(tb.params["closed_form"], abs=1e-10)
            h = tb.params["h"]
            tilted = -h * t + n * math.log(1 - p + p * math.exp(h))
            assert tb.log_bound == pytest.approx(tilted, abs=1e-10)

    def test_high_precision_value_and_dominance(self):
        # 0.3^6 * 0.7^4 * (4/6)^6 * (10/4)^10, evaluated at 60 digits
        tb = bd.hoeffding_bound(10, 0.3, 6.0)
        want = float(
            6 * mpmath.log(mpmath.mpf(3) / 10)
            + 4 * mpmath.log(mpmath.mpf(7) / 10)
            + 6 * mpmath.log(mpmath.mpf(4) / 6)
            + 10 * mpmath.log(mpmath.mpf(10) / 4)
        )
        assert tb.log_bound == pytest.approx(want, rel=1e-12)
        exact = exact_binom_tail(10, Fraction(3, 10), 6)
        assert tb.bound >= float(exact)

    def test_invalid_below_mean(self):
        tb = bd.hoeffding_bound(10, 0.3, 3.0)
        assert not tb.is_valid
        assert "t <= np" in tb.invalid_reason

    def test_invalid_at_endpoints(self):
        assert not bd.hoeffding_bound(10, 0.3, 10.0).is_valid
        assert not bd.hoeffding_bound(10, 1.2, 5.0).is_valid

    def test_h_optimizer_cross_check(self):
        n, p, t = 30, 0.25, 12.0
        tb = bd.hoeffding_bound(n, p, t)

        def objective(h):
            return -h * t + n * math.log(1 - p + p * math.exp(h))

        h_num, val = bd.optimal_h_cross_check(objective)
        assert h_num == pytest.approx(tb.params["h"], abs=1e-6)
        assert val == pytest.approx(tb.log_bound, abs=1e-10)

    def test_monotone_in_t(self):
        n, p = 40, 0.3
        ts = np.linspace(n * p + 0.1, n - 0.1, 200)
        vals = [bd.hoeffding_bound(n, p, float(t)).log_bound for t in ts]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


class TestIK:
    def test_kl_oracle_value(self):
        tb = bd.ik_bound(20, 0.2, 1.0, c=1.0)
        assert tb.is_valid
        assert tb.log_bound == pytest.approx(float(-20 * mp_kl(0.4, 0.2)), rel=1e-12)

    def test_small_eps_approaches_one(self):
        tb = bd.ik_bound(20, 0.2, 1e-9, c=1.0)
        assert tb.is_valid
        assert tb.bound == pytest.approx(1.0, abs=1e-6)

    def test_eps_out_of_range(self):
        assert not bd.ik_bound(20, 0.2, 4.5, c=1.0).is_valid
        assert not bd.ik_bound(20, 0.2, -0.1, c=1.0).is_valid
        assert not bd.ik_bound(20, 0.2, 1.0, c=0.5).is_valid

    def test_c_annotation(self):
        assert bd.ik_bound(20, 0.2, 1.0, c=1.0).params["soundness"] == "Bernoulli-only"
        assert bd.ik_bound(20, 0.2, 1.0, c=2.0).params["soundness"] == "general"


class TestLinialLuria:
    def test_k1_is_markov(self):
        n, beta_n, p = 10, 6, 0.3
        tb = bd.linial_luria_bound(n, beta_n, 1, bd.MeanOnly(p))
        assert tb.log_bound == pytest.approx(math.log(n * p / beta_n), abs=1e-12)

    def test_independent_bernoulli_dominates_binomial_tail(self):
        n, beta_n, k, p = 10, 8, 4, 0.5
        sk = math.comb(n, k) * p**k
        tb = bd.linial_luria_bound(n, beta_n, k, bd.SymmetricMoments({0: 1.0, k: sk}))
        want = math.comb(10, 4) * p**4 / math.comb(8, 4)
        assert tb.bound == pytest.approx(want, rel=1e-12)
        assert tb.bound >= float(exact_binom_tail(n, Fraction(1, 2), beta_n))

    def test_k_not_less_than_beta_n(self):
        tb = bd.linial_luria_bound(10, 5, 5, bd.ProductBound(0.3))
        assert not tb.is_valid

    def test_product_profile_matches_explicit_moment(self):
        n, beta_n, k, g = 12, 9, 3, 0.4
        a = bd.linial_luria_bound(n, beta_n, k, bd.ProductBound(g))
        sk = math.comb(n, k) * g**k
        b = bd.linial_luria_bound(n, beta_n, k, bd.SymmetricMoments({0: 1.0, k: sk}))
        assert a.log_bound == pytest.approx(b.log_bound, abs=1e-12)

    def test_optimal_k_within_entropy_slack_of_ik(self):
        # the moment bound at the best integer k recovers the
        # covariance-condition bound up to the polynomial slack of the
        # standard entropy estimate C(n,k) >= e^{nH(k/n)}/(n+1); the
        # pointwise inequality without slack fails at extreme thresholds
        checked = 0
        for n, g in [(12, 0.3), (20, 0.15), (16, 0.5)]:
            for beta_n in range(math.ceil(n * g) + 1, n + 1):
                eps = beta_n / (n * g) - 1.0
                ik = bd.ik_bound(n, g, eps, c=1.0)
                if not ik.is_valid:
                    continue
                best = min(
                    (
                        bd.linial_luria_bound(n, beta_n, k, bd.ProductBound(g)).log_bound
                        for k in range(1, beta_n)
                        if bd.linial_luria_bound(n, beta_n, k, bd.ProductBound(g)).is_valid
                    ),
                    default=None,
                )
                assert best is not None
                assert best <= ik.log_bound + 2.0 * math.log(n + 1) + 1e-9
                checked += 1
        assert checked >= 10


class TestLinialLower:
    def test_all_ones(self):
        n, beta_n = 8, 5
        assert bd.linial_lower_bound(n, beta_n, float(math.comb(n, beta_n))) == pytest.approx(0.0, abs=1e-12)

    def test_all_zeros(self):
        assert bd.linial_lower_bound(8, 5, 0.0) == float("-inf")

    def test_independent_bernoulli_lower(self):
        for n in (5, 10, 20):
            for beta_n in range(1, n + 1):
                p = 0.35
                s = math.comb(n, beta_n) * p**beta_n
                lower = math.exp(bd.linial_lower_bound(n, beta_n, s))
                exact = float(exact_binom_tail(n, Fraction(35, 100), beta_n))
                assert lower <= exact + 1e-12
                assert lower == pytest.approx(p**beta_n, rel=1e-10)


class TestExpfunct:
    def test_delta_complement_reduces_to_hoeffding(self):
        for n, g, t in [(12, 0.25, 6.0), (30, 0.4, 20.0)]:
            a = bd.expfunct_bound(n, g, 1.0 - g, t)
            b = bd.hoeffding_bound(n, g, t)
            assert a.log_bound == pytest.approx(b.log_bound, abs=1e-10)

    def test_high_precision_value(self):
        n, t = 12, 6
        g, d = mpmath.mpf("0.25"), mpmath.mpf("0.8")
        want = float(
            t * mpmath.log(g)
            + (n - t) * mpmath.log(d)
            + t * mpmath.log(mpmath.mpf(n - t) / t)
            + n * mpmath.log(mpmath.mpf(n) / (n - t))
        )
        tb = bd.expfunct_bound(12, 0.25, 0.8, 6.0)
        assert tb.log_bound == pytest.approx(want, rel=1e-12)

    def test_infeasible_split_rejected(self):
        assert not bd.expfunct_bound(12, 0.1, 0.5, 6.0).is_valid

    def test_closed_form_at_most_kl_form(self):
        n = 25
        for g in (0.1, 0.3, 0.6):
            for d in (1.0, 1.0 - g / 2, 1.0 - g):
                for t in np.linspace(n * g + 0.05, n - 0.05, 200):
                    tb = bd.expfunct_bound(n, g, d, float(t))
                    assert tb.is_valid
                    assert tb.log_bound <= tb.params["kl_form"] + 1e-10

    def test_h_optimizer_cross_check(self):
        n, g, d, t = 12, 0.25, 0.8, 6.0
        tb = bd.expfunct_bound(n, g, d, t)

        def objective(h):
            # E[e^{h Z_gamma,delta}] style objective from the split bound
            return -h * t + n * math.log(d + g * math.exp(h) - (1 - (d + g)) * 0)

        # direct objective: gamma e^h + delta >= split moment generating value
        def obj2(h):
            return -h * t + n * math.log(g * math.exp(h) + d)

        h_num, val = bd.optimal_h_cross_check(obj2)
        assert math.exp(h_num) == pytest.approx(t * d / ((n - t) * g), rel=1e-5)
        assert val == pytest.approx(tb.log_bound, abs=1e-9)


class TestBincoupling:
    def test_kl_oracle_value(self):
        tb = bd.bincoupling_bound(100, 0.3, 50.0)
        assert tb.params["eps0"] == pytest.approx(19 / 30, rel=1e-12)
        want = float(mpmath.log(2) - 100 * mp_kl("0.49", "0.3"))
        assert tb.log_bound == pytest.approx(want, rel=1e-12)

    def test_boundary_rejected(self):
        assert not bd.bincoupling_bound(100, 0.3, 31.0).is_valid

    def test_relation_to_hoeffding_exponent(self):
        n, p, t = 100, 0.3, 50.0
        a = bd.bincoupling_bound(n, p, t)
        b = bd.hoeffding_bound(n, p, t - 1.0)
        assert a.log_bound == pytest.approx(math.log(2) + b.log_bound, abs=1e-10)


class TestMcDiarmid:
    def test_small_t_near_one(self):
        tb = bd.mcdiarmid_bound(50, 0.4, 1e-9)
        assert tb.bound == pytest.approx(1.0, abs=1e-6)

    def test_kl_oracle_and_foolproof(self):
        tb = bd.mcdiarmid_bound(50, 0.4, 0.2)
        want = float(-50 * mp_kl("0.6", "0.4"))
        assert tb.log_bound == pytest.approx(want, rel=1e-12)
        assert tb.log_bound <= -2 * 50 * 0.2**2 + 1e-12
        assert tb.params["foolproof"] == pytest.approx(-4.0)

    def test_out_of_range(self):
        assert not bd.mcdiarmid_bound(50, 0.4, 0.7).is_valid
        assert not bd.mcdiarmid_bound(50, 0.4, 0.0).is_valid

    def test_sum_scale_identity(self):
        # H_m(n,p,t) equals the independent bound at sum threshold n(p+t)
        for n, p, t in [(50, 0.4, 0.2), (30, 0.1, 0.35), (80, 0.6, 0.25)]:
            a = bd.mcdiarmid_bound(n, p, t)
            b = bd.hoeffding_bound(n, p, n * (p + t))
            assert a.log_bound == pytest.approx(b.log_bound, abs=1e-10)


class TestMcDiarmidRefined:
    def test_example_value_dominates_exact_tail(self):
        n, p, t = 20, 0.3, 0.4
        tb = bd.mcdiarmid_refined_bound(n, p, t)
        assert tb.is_valid
        assert tb.params["ell"] == 14
        exact = float(exact_binom_tail(20, Fraction(3, 10), 14))
        assert tb.bound >= exact - 1e-12

    def test_direct_formula_oracle(self):
        # recompute from the displayed formula in 60-digit arithmetic
        n, p, t = 20, 0.3, 0.4
        tb = bd.mcdiarmid_refined_bound(n, p, t)
        mp_p, mp_t = mpmath.mpf("0.3"), mpmath.mpf("0.4")
        h = mpmath.log((mp_t + mp_p) * (1 - mp_p) / (mp_p * (1 - mp_p - mp_t)))
        missing = (1 + h) / mpmath.e**h
        ell = 14
        hm = mpmath.e ** (-n * mp_kl("0.7", "0.3"))
        T = mpmath.mpf(0)
        for j in range(ell):
            pj = mpmath.binomial(n, j) * mp_p**j * (1 - mp_p) ** (n - j)
            T += mpmath.e ** (h * (j - ell)) * pj
        p_ell = mpmath.binomial(n, ell) * mp_p**ell * (1 - mp_p) ** (n - ell)
        want = float(missing * (hm - T) + (1 - missing) * p_ell)
        assert tb.bound == pytest.approx(want, rel=1e-10)

    def test_h_threshold_rejection(self):
        # below t = p(1-p)(e-1)/(1-p+ep) the tilt h drops to <= 1
        p = 0.3
        thr = p * (1 - p) * (math.e - 1) / (1 - p + math.e * p)
        assert thr == pytest.approx(0.23810, abs=5e-5)
        # n(p+t) = 10 is an integer but t = 0.2 is below the tilt threshold
        tb = bd.mcdiarmid_refined_bound(20, 0.3, 0.2)
        assert not tb.is_valid
        assert "too small" in tb.invalid_reason
        # t = 0.25 clears the threshold: h > 1 and n(p+t) = 11
        ok = bd.mcdiarmid_refined_bound(20, 0.3, 0.25)
        assert ok.is_valid
        assert ok.params["h"] > 1.0

    def test_non_integer_rejected(self):
        assert not bd.mcdiarmid_refined_bound(20, 0.3, 0.33).is_valid

    def test_at_most_plain_bound_on_grid(self):
        count = 0
        for n in (10, 20, 40, 60, 100):
            for ell in range(1, n):
                p = 0.3
                t = ell / n - p
                tb = bd.mcdiarmid_refined_bound(n, p, t)
                if not tb.is_valid:
                    continue
                plain = bd.mcdiarmid_bound(n, p, t)
                assert tb.log_bound <= plain.log_bound + 1e-12
                count += 1
        assert count >= 100


class TestKwise:
    def test_k_equals_n_is_hoeffding(self):
        n, p, eps = 40, 0.5, 0.5
        a = bd.kwise_bound(n, n, p, eps)
        b = bd.hoeffding_bound(n, p, n * p * (1 + eps))
        assert a.log_bound == pytest.approx(b.log_bound, abs=1e-10)

    def test_kl_oracle_value(self):
        tb = bd.kwise_bound(40, 38, 0.5, 0.5)
        want = float(-2 * mpmath.log(mpmath.mpf("0.25")) - 40 * mp_kl("0.75", "0.5"))
        assert tb.log_bound == pytest.approx(want, rel=1e-12)

    def test_clamping_contract(self):
        tb = bd.kwise_bound(40, 10, 0.5, 0.1)
        assert tb.is_valid
        assert tb.bound <= 1.0
        assert tb.params.get("clamped") is True

    def test_range_rejections(self):
        assert not bd.kwise_bound(40, 0, 0.5, 0.5).is_valid
        assert not bd.kwise_bound(40, 41, 0.5, 0.5).is_valid
        assert not bd.kwise_bound(40, 20, 0.5, 1.5).is_valid


class TestKwiseBernoulli:
    def test_k1_markov(self):
        # at k=1 the ratio collapses to 1/(1+eps)
        tb = bd.kwise_bernoulli_bound(20, 1, 0.25, 1.0)
        assert tb.bound == pytest.approx(0.5, rel=1e-12)

    def test_exact_integer_arithmetic(self):
        tb = bd.kwise_bernoulli_bound(20, 3, 0.25, 1.0)
        want = math.comb(20, 3) * 0.25**3 / math.comb(10, 3)
        assert tb.bound == pytest.approx(want, rel=1e-12)
        assert tb.params["threshold"] == 10

    def test_non_integer_rejected(self):
        assert not bd.kwise_bernoulli_bound(20, 3, 0.25, 0.9).is_valid

    def test_threshold_le_k_rejected(self):
        # np(1+eps) = 10 <= k = 10
        assert not bd.kwise_bernoulli_bound(20, 10, 0.25, 1.0).is_valid


class TestSSS:
    def test_example_value(self):
        tb = bd.sss_bound(100, 0.1, 0.5, 6)
        assert tb.is_valid
        assert tb.params["k_star"] == 6
        want = math.comb(100, 6) * 0.1**6 / math.comb(15, 6)
        assert tb.bound == pytest.approx(want, rel=1e-10)

    def test_k_below_k_star_rejected(self):
        tb = bd.sss_bound(100, 0.1, 0.5, 5)
        assert not tb.is_valid
        assert "k < k*" in tb.invalid_reason

    def test_agrees_with_bernoulli_kwise_at_k_star(self):
        # integer threshold, k = k*: the two formulas coincide
        n, p, eps = 100, 0.1, 0.5
        k_star = math.ceil(n * p * eps / (1 - p) - 1e-12)
        a = bd.sss_bound(n, p, eps, k_star)
        b = bd.kwise_bernoulli_bound(n, k_star, p, eps)
        assert a.is_valid and b.is_valid
        assert a.log_bound == pytest.approx(b.log_bound, abs=1e-10)


class TestDepgraph:
    def test_alpha_n_is_hoeffding_half(self):
        for n, t in [(30, 24.0), (12, 8.5)]:
            a = bd.depgraph_bound(bd.DependencyGraphParams(n, n), t)
            b = bd.hoeffding_bound(n, 0.5, t)
            assert a.log_bound == pytest.approx(b.log_bound, abs=1e-10)

    def test_closed_form_value(self):
        # alpha = 28: 2*ln2 + ln H(30, 1/2, 24) stays negative
        tb = bd.depgraph_bound(bd.DependencyGraphParams(30, 28), 24.0)
        want = 2 * math.log(2) + bd.hoeffding_bound(30, 0.5, 24.0).log_bound
        assert tb.log_bound == pytest.approx(want, abs=1e-12)

    def test_clamped_when_prefactor_dominates(self):
        # alpha = 20 at the same t pushes the raw value above 1
        tb = bd.depgraph_bound(bd.DependencyGraphParams(30, 20), 24.0)
        assert tb.is_valid
        assert tb.bound == 1.0
        assert tb.params.get("clamped") is True

    def test_t_range(self):
        assert not bd.depgraph_bound(bd.DependencyGraphParams(30, 20), 15.0).is_valid

    def test_alpha_validation(self):
        with pytest.raises(ValueError):
            bd.DependencyGraphParams(10, 11)


class TestUStat:
    def test_kl_oracle_value(self):
        tb = bd.ustat_bound(bd.UStatParams(9, 3, 0.2), 0.3)
        assert tb.log_bound == pytest.approx(float(-3 * mp_kl("0.5", "0.2")), rel=1e-12)
        assert tb.params["k"] == 3
        assert tb.params["N_d"] == math.comb(8, 2)

    def test_small_t_near_one(self):
        tb = bd.ustat_bound(bd.UStatParams(9, 3, 0.2), 1e-9)
        assert tb.bound == pytest.approx(1.0, abs=1e-6)

    def test_d_must_divide_n(self):
        with pytest.raises(ValueError):
            bd.UStatParams(10, 3, 0.2)

    def test_refined_example_strictly_below_foolproof(self):
        params = bd.UStatParams(30, 3, 0.2)
        tb = bd.ustat_refined_bound(params, 0.4)
        assert tb.is_valid
        assert tb.bound < math.exp(-2 * 10 * 0.4**2)

    def test_refined_rejects_small_t(self):
        params = bd.UStatParams(30, 3, 0.2)
        assert not bd.ustat_refined_bound(params, 0.15).is_valid

    def test_refined_below_foolproof_on_grid(self):
        checked = 0
        for n, d in [(30, 3), (40, 2), (60, 3), (100, 4), (24, 2)]:
            params_list = []
            k = n // d
            for p in (0.1, 0.2, 0.3):
                for ell in range(1, k):
                    t = ell / k - p
                    tb = bd.ustat_refined_bound(bd.UStatParams(n, d, p), t)
                    if tb.is_valid:
                        assert tb.bound < math.exp(-2 * k * t * t)
                        checked += 1
        assert checked >= 50

    def test_refined_direct_formula_oracle(self):
        n, d, p, t = 30, 3, 0.2, 0.4
        params = bd.UStatParams(n, d, p)
        tb = bd.ustat_refined_bound(params, t)
        k, n_d = 10, math.comb(29, 2)
        mp_p, mp_t = mpmath.mpf("0.2"), mpmath.mpf("0.4")
        h_nd = mpmath.log((mp_p + mp_t) * (1 - mp_p) / (mp_p * (1 - mp_p - mp_t)))
        h = h_nd / n_d
        missing = (h_nd + 1) / mpmath.e**h_nd
        ell = 6
        y = k * n_d * (mp_p + mp_t)
        t2 = mpmath.mpf(0)
        for j in range(ell):
            pj = mpmath.binomial(k, j) * mp_p**j * (1 - mp_p) ** (k - j)
            t2 += mpmath.e ** (h * (n_d * j - y)) * pj
        p_ell = mpmath.binomial(k, ell) * mp_p**ell * (1 - mp_p) ** (k - ell)
        want = float(
            missing * (mpmath.e ** (-2 * k * mp_t**2) - t2) + (1 - missing) * p_ell
        )
        assert tb.bound == pytest.approx(want, rel=1e-10)


class TestThresholdConversions:
    def test_round_trip(self):
        for n, base in [(10, 0.3), (50, 0.05), (7, 0.9)]:
            for eps in (0.1, 0.5, 2.0):
                t = bd.eps_to_t(n, base, eps)
                assert bd.t_to_eps(n, base, t) == pytest.approx(eps, abs=1e-12)


class TestMonotonicityGrids:
    @pytest.mark.parametrize(
        "make",
        [
            lambda t: bd.ik_bound(30, 0.2, t / 6.0 - 1.0),
            lambda t: bd.expfunct_bound(30, 0.2, 0.9, t),
            lambda t: bd.bincoupling_bound(30, 0.2, t),
            lambda t: bd.mcdiarmid_bound(30, 0.2, t / 30.0 - 0.2),
            lambda t: bd.depgraph_bound(bd.DependencyGraphParams(30, 12), t),
        ],
    )
    def test_nonincreasing(self, make):
        vals = []
        for t in np.linspace(0.05, 29.95, 200):
            tb = make(float(t))
            if tb.is_valid:
                vals.append(tb.log_bound)
        assert len(vals) >= 20
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
