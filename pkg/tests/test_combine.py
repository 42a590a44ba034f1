import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from corrcomb import (InvalidArity, LengthMismatch, RankDeficient, SingularMoment,
                      bg_weights, combine, equal_weights, error_moments,
                      restricted_ols_weights)
from corrcomb.ingest import BG1969_ERRORS


class TestEqualWeights:
    @pytest.mark.parametrize("n", [1, 2, 6])
    def test_values(self, n):
        w = equal_weights(n)
        assert_allclose(w.w, np.full(n, 1 / n), rtol=0, atol=0)

    def test_zero(self):
        with pytest.raises(InvalidArity):
            equal_weights(0)


class TestErrorMoments:
    def test_es_column(self):
        es = np.array(BG1969_ERRORS["ES"], dtype=float)
        assert round(error_moments(es).sigma[0, 0], 2) == 196.08

    def test_zero(self):
        assert_array_equal(error_moments(np.zeros((5, 3))).sigma, np.zeros((3, 3)))

    def test_two_by_two(self):
        S = error_moments([[1, -3], [6, -10]]).sigma
        assert_allclose(S, [[18.5, -31.5], [-31.5, 54.5]], rtol=0, atol=1e-12)

    def test_centered_flag(self):
        E = np.array([[1.0], [3.0]])
        assert error_moments(E).sigma[0, 0] == 5.0
        assert error_moments(E, centered=True).sigma[0, 0] == 1.0


class TestBGWeights:
    def test_identity(self):
        assert_allclose(bg_weights(np.eye(2)).w, [0.5, 0.5], atol=1e-15)

    def test_diag(self):
        assert_allclose(bg_weights(np.diag([1.0, 4.0])).w, [0.8, 0.2], atol=1e-15)

    @pytest.mark.parametrize("rho", [-0.9, -0.3, 0.0, 0.5, 0.95])
    def test_exchangeable(self, rho):
        assert_allclose(bg_weights([[1, rho], [rho, 1]]).w, [0.5, 0.5], atol=1e-14)

    def test_singular(self):
        with pytest.raises(SingularMoment):
            bg_weights(np.ones((2, 2)))
        with pytest.raises(SingularMoment):
            bg_weights(np.zeros((3, 3)))

    def test_sum_to_one(self, rng):
        A = rng.normal(size=(20, 5))
        assert abs(bg_weights(A.T @ A).w.sum() - 1) < 1e-10

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
    def test_scale_invariance(self, seed, c):
        A = np.random.default_rng(seed).normal(size=(10, 4))
        S = A.T @ A
        assert_allclose(bg_weights(c * S).w, bg_weights(S).w, rtol=0, atol=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(-0.95, 0.95))
    def test_two_forecaster_closed_form(self, s1, s2, r):
        s12 = r * np.sqrt(s1 * s2)
        w1 = (s2 - s12) / (s1 + s2 - 2 * s12)
        w = bg_weights([[s1, s12], [s12, s2]]).w
        assert_allclose(w, [w1, 1 - w1], rtol=0, atol=1e-9)


class TestRestrictedOLS:
    def test_single_forecaster(self, rng):
        w = restricted_ols_weights(rng.normal(size=(7, 1)), rng.normal(size=7))
        assert_array_equal(w.w, [1.0])

    def test_identical_columns(self, rng):
        f = rng.normal(size=20)
        with pytest.raises(RankDeficient):
            restricted_ols_weights(np.c_[f, f], rng.normal(size=20))

    def test_equals_bg_on_uncentered_moments(self):
        rng = np.random.default_rng(50)
        F = rng.normal(size=(50, 3))
        y = rng.normal(size=50)
        a = restricted_ols_weights(F, y).w
        b = bg_weights(error_moments(y[:, None] - F)).w
        assert_allclose(a, b, rtol=0, atol=1e-8)

    def test_minimizes_constrained_ssr(self, rng):
        F = rng.normal(size=(40, 4))
        y = F @ [0.1, 0.2, 0.3, 0.4] + rng.normal(size=40)
        w = restricted_ols_weights(F, y).w
        ssr = np.sum((y - F @ w) ** 2)
        for _ in range(50):
            d = rng.normal(size=4)
            d -= d.mean()
            assert np.sum((y - F @ (w + 1e-3 * d)) ** 2) >= ssr


class TestCombine:
    def test_example1953_march(self):
        # combine distributes over errors
        assert combine(equal_weights(2), [18.0, 24.0]) == 21.0

    def test_selector(self):
        assert combine([1.0, 0.0, 0.0], [3.0, 7.0, 9.0]) == 3.0

    def test_arithmetic(self):
        assert combine([0.8, 0.2], [10.0, 20.0]) == pytest.approx(12.0, abs=1e-12)

    def test_length(self):
        with pytest.raises(LengthMismatch):
            combine(equal_weights(2), [1.0, 2.0, 3.0])

    def test_equal_weights_is_mean(self, rng):
        f = rng.normal(size=(30, 5))
        assert_allclose(combine(equal_weights(5), f), f.mean(axis=1), atol=1e-14)

    def test_combined_error_is_weighted_error(self, rng):
        f = rng.normal(size=6)
        y = 1.7
        w = rng.dirichlet(np.ones(6))
        w[-1] = 1 - w[:-1].sum()
        assert y - combine(w, f) == pytest.approx(combine(w, y - f), abs=1e-12)
