import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from gaussminimax.bounds import (
    ConditionIIIWarning,
    beta_bounds,
    binary_entropy,
    mu0_empirical,
    mu0_lemma1,
    mu_chebyshev,
    stein_lower,
)
from gaussminimax.hypotheses import HypothesisPair
from gaussminimax.lrtest import DegenerateLr, exact_beta_1d


class TestBinaryEntropy:
    def test_half(self):
        assert binary_entropy(0.5) == pytest.approx(math.log(2), rel=1e-15)

    def test_small(self):
        # -a ln a ~ 2.76e-11 at a = 1e-12
        assert 0 < binary_entropy(1e-12) < 3e-11

    def test_quarter(self):
        assert binary_entropy(0.25) == pytest.approx(0.5623351446, rel=1e-9)

    @given(st.floats(1e-9, 1 - 1e-9))
    def test_symmetric(self, a):
        assume(1.0 - (1.0 - a) == a)
        assert binary_entropy(a) == binary_entropy(1.0 - a)

    @pytest.mark.parametrize("a", [0.0, 1.0, -0.1, 2.0])
    def test_domain(self, a):
        with pytest.raises(ValueError):
            binary_entropy(a)


class TestSteinLower:
    def test_null(self):
        assert stein_lower(HypothesisPair.null(3), 0.5) == pytest.approx(-2 * math.log(2))

    def test_mean_shift_below_exact(self):
        low = stein_lower(HypothesisPair.diagonal([1.0], [1.0]), 0.5)
        assert low == pytest.approx(-(0.5 + math.log(2)) / 0.5)
        assert low <= math.log(norm.cdf(-1.0))


class TestMu0Lemma1:
    def test_null(self):
        assert mu0_lemma1(HypothesisPair.null(4), 0.1) == 0.0

    def test_variance_term(self):
        assert mu0_lemma1(HypothesisPair.diagonal([2.0]), 0.5, p=2) == pytest.approx(math.sqrt(12), rel=1e-14)

    def test_mean_term(self):
        assert mu0_lemma1(HypothesisPair.diagonal([1.0], [1.0]), math.exp(-1)) == pytest.approx(3.0, rel=1e-14)

    def test_p_default_from_delta(self):
        p = HypothesisPair.diagonal([2.0, 3.0])
        assert mu0_lemma1(p, 0.1, delta=0.5) == pytest.approx(mu0_lemma1(p, 0.1, p=1.5))
        assert mu0_lemma1(p, 0.1, delta=3.0) == pytest.approx(mu0_lemma1(p, 0.1, p=2.0))

    @pytest.mark.parametrize("p", [1.0, 2.5])
    def test_p_range(self, p):
        with pytest.raises(ValueError):
            mu0_lemma1(HypothesisPair.diagonal([2.0]), 0.1, p=p)

    def test_dense_uses_spectrum(self):
        t = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)
        dense = HypothesisPair([0.0, 0.0], t @ np.diag([2.0, 0.5]) @ t.T)
        assert mu0_lemma1(dense, 0.1) == pytest.approx(mu0_lemma1(HypothesisPair.diagonal([2.0, 0.5]), 0.1))

    def test_growth_rate(self):
        ns = 2 ** np.arange(4, 11)
        for p in (1.5, 2.0):
            vals = [mu0_lemma1(HypothesisPair.diagonal(np.tile([2.0, 0.5], n // 2)), 0.1, p=p) for n in ns]
            slope = np.polyfit(np.log(ns), np.log(vals), 1)[0]
            assert slope == pytest.approx(1 / p, abs=0.05)


class TestMu0Empirical:
    def test_median_mean_shift(self):
        mu0 = mu0_empirical(HypothesisPair.diagonal([1.0], [1.0]), 0.5, 200_000, seed=1)
        assert abs(mu0) <= 3 * math.sqrt(0.25 / 200_000) / norm.pdf(0.0)

    def test_sign_not_clamped(self):
        assert mu0_empirical(HypothesisPair.diagonal([1.0], [1.0]), 0.99, 100_000, seed=2) < 0

    def test_degenerate(self):
        with pytest.raises(DegenerateLr):
            mu0_empirical(HypothesisPair.null(2), 0.1, 10_000, seed=0)

    def test_below_lemma1(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 20))
            p = HypothesisPair.diagonal(rng.uniform(0.3, 3, n), rng.uniform(-0.5, 0.5, n))
            for alpha in (0.5, 0.1):
                assert mu0_empirical(p, alpha, 20_000, seed=3) <= mu0_lemma1(p, alpha, p=2)


class TestMuChebyshev:
    def test_zero_divergence(self):
        assert mu_chebyshev(HypothesisPair.null(2), 0.1, 1.0) == 0.0

    def test_value(self):
        # pick a pair with D = 1 exactly: mean shift sqrt(2), unit variance; variance of r is 2 = C^2 D with C = sqrt 2
        p = HypothesisPair.diagonal([1.0], [math.sqrt(2)])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConditionIIIWarning)
            assert mu_chebyshev(p, 0.25, 1.0) == pytest.approx(2.0)

    def test_tight_constant(self):
        p = HypothesisPair.diagonal([1.0], [1.0])
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            mu = mu_chebyshev(p, 0.5, math.sqrt(2))
        assert mu == pytest.approx(math.sqrt(2))
        assert mu0_empirical(p, 0.5, 100_000, seed=4) <= mu

    def test_warns(self):
        with pytest.warns(ConditionIIIWarning):
            mu_chebyshev(HypothesisPair.diagonal([2.0]), 0.1, 0.5)

    def test_positive_constant(self):
        with pytest.raises(ValueError):
            mu_chebyshev(HypothesisPair.diagonal([2.0]), 0.1, 0.0)


class TestBetaBounds:
    def test_mean_shift_two(self):
        p = HypothesisPair.diagonal([1.0], [2.0])
        bb = beta_bounds(p, 0.5, "empirical", n_samples=200_000, seed=5)
        _, beta = exact_beta_1d(1.0, 2.0, 0.5)
        assert bb.kl == pytest.approx(2.0)
        assert bb.lower_log_beta == pytest.approx(-(2 + math.log(2)) / 0.5)
        assert bb.upper_log_beta == pytest.approx(-2.0, abs=0.02)
        assert math.log(beta) == pytest.approx(-3.7832, abs=1e-4)
        assert bb.lower_log_beta <= math.log(beta) <= bb.upper_log_beta

    def test_degenerate_lemma1(self):
        bb = beta_bounds(HypothesisPair.null(3), 0.2, "lemma1")
        assert bb.lower_log_beta == pytest.approx(-binary_entropy(0.2) / 0.8)
        assert bb.upper_log_beta == 0.0

    def test_degenerate_empirical(self):
        with pytest.raises(DegenerateLr):
            beta_bounds(HypothesisPair.null(3), 0.2, "empirical")

    def test_chebyshev_needs_constant(self):
        with pytest.raises(ValueError):
            beta_bounds(HypothesisPair.diagonal([2.0]), 0.2, "chebyshev")

    def test_not_clamped(self):
        # a loose mu0 can push the upper bound above zero, and that is reported as is
        bb = beta_bounds(HypothesisPair.diagonal([1.5]), 0.01, "lemma1")
        assert bb.upper_log_beta > 0

    @settings(max_examples=20, deadline=None)
    @given(lam=st.floats(0.3, 3.0), a=st.floats(-1.5, 1.5), alpha=st.sampled_from([0.05, 0.1, 0.5]))
    def test_sandwich_one_dimensional(self, lam, a, alpha):
        if abs(lam - 1) < 1e-3 and abs(a) < 1e-3:
            return
        p = HypothesisPair.diagonal([lam], [a])
        gamma, beta = exact_beta_1d(lam, a, alpha)
        assert stein_lower(p, alpha) <= math.log(beta) + 1e-12
        # with the exact threshold mu0 = D - gamma, so the upper bound is -gamma
        assert math.log(beta) <= -gamma + 1e-12

    @settings(max_examples=100, deadline=None)
    @given(D=st.floats(0.0, 50.0), alpha=st.floats(0.01, 0.99), mu0=st.floats(-60.0, 60.0))
    def test_ordering_condition(self, D, alpha, mu0):
        # lower <= upper  <=>  mu0 >= -(alpha D + h(alpha)) / (1 - alpha)
        h = binary_entropy(alpha)
        lower, upper = -(D + h) / (1 - alpha), -D + mu0
        threshold = -(alpha * D + h) / (1 - alpha)
        if abs(mu0 - threshold) > 1e-9 * (1 + abs(threshold)):
            assert (lower <= upper) == (mu0 >= threshold)
