"""Tests for log-gamma and 2F1(-1) against exact values and slow oracles."""

import math

import mpmath as mp
import numpy as np
import pytest

from wealthdyn.errors import StatisticsError
from wealthdyn.specfun import _gauss_series, hyp2f1_at_minus_one, log_gamma


def euler_series_2f1_minus_one(a, b, c, n_terms=400, dps=80):
    """Independent oracle: direct alternating series at z = -1, summed by
    iterated Euler (partial-sum averaging) in high precision."""
    with mp.workdps(dps):
        term = mp.mpf(1)
        partials = []
        acc = mp.mpf(0)
        for n in range(n_terms):
            acc += term
            partials.append(acc)
            term = term * (a + n) * (b + n) / ((c + n) * (n + 1)) * (-1)
        while len(partials) > 1:
            partials = [(partials[i] + partials[i + 1]) / 2 for i in range(len(partials) - 1)]
        return float(partials[0])


class TestLogGamma:
    def test_exact_values(self):
        assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-14)
        assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-13)
        assert log_gamma(6.0) == pytest.approx(math.log(120.0), rel=1e-13)

    def test_exp_accuracy_against_factorials(self):
        fact = 1.0
        for n in range(2, 25):
            fact *= n
            assert math.exp(log_gamma(n + 1.0)) == pytest.approx(fact, rel=1e-12)

    def test_recurrence_over_support_grid(self):
        for x in np.linspace(0.5, 199.0, 300):
            lhs = log_gamma(x + 1.0) - log_gamma(x)
            assert lhs == pytest.approx(math.log(x), rel=1e-12, abs=1e-12)

    def test_small_argument_branch(self):
        assert math.exp(log_gamma(0.25)) == pytest.approx(3.625609908221908, rel=1e-12)

    @pytest.mark.parametrize("bad", [0.0, -1.0, -0.5])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(StatisticsError):
            log_gamma(bad)


class TestHyp2F1AtMinusOne:
    def test_a_zero_is_one(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            b = rng.uniform(-3, 5)
            c = rng.uniform(0.5, 6)
            assert hyp2f1_at_minus_one(0.0, b, c) == 1.0

    def test_log_two_identity(self):
        # 2F1(1,1;2;z) = -ln(1-z)/z, so the value at z=-1 is ln 2.
        assert hyp2f1_at_minus_one(1.0, 1.0, 2.0) == pytest.approx(math.log(2.0), abs=1e-12)

    @pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0, 4.0, 6.0])
    def test_agrees_with_euler_series_in_gini_slots(self, alpha):
        for a, b, c in (
            (alpha - 1.0, 2.0 * alpha - 1.0, alpha),
            (alpha, 2.0 * alpha - 1.0, alpha + 1.0),
        ):
            oracle = euler_series_2f1_minus_one(a, b, c)
            assert hyp2f1_at_minus_one(a, b, c) == pytest.approx(oracle, rel=1e-8)

    def test_gauss_contiguous_relation_at_half(self):
        rng = np.random.default_rng(11)
        z = 0.5
        for _ in range(40):
            a = rng.uniform(0.2, 6.0)
            b = rng.uniform(0.2, 6.0)
            c = rng.uniform(0.5, 7.0)
            lhs = (
                c * (1.0 - z) * _gauss_series(a, b, c, z)
                - c * _gauss_series(a - 1.0, b, c, z)
                + (c - b) * z * _gauss_series(a, b, c + 1.0, z)
            )
            assert abs(lhs) < 1e-8

    @pytest.mark.parametrize("c", [0.0, -1.0, -3.0])
    def test_rejects_nonpositive_integer_c(self, c):
        with pytest.raises(StatisticsError):
            hyp2f1_at_minus_one(1.0, 1.0, c)

    def test_negative_noninteger_c_is_defined(self):
        mine = hyp2f1_at_minus_one(0.5, 0.25, -0.5)
        assert mine == pytest.approx(float(mp.hyp2f1(0.5, 0.25, -0.5, -1)), rel=1e-10)
