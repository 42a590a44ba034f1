import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from corrcomb import (CorrectionSpec, InsufficientHistory, PeriodMask, ZeroDenominator,
                      combine, corrected_stream, equal_weights, fixed_correction,
                      historical_gamma, historical_gamma_path, msfe, quarter)
from corrcomb.correct import clamp_open
from corrcomb.simulate import ar_series

COMBINED = np.array([-1, -2, 21, 20, -3, -19.5, -7, -7, -11.5, -9.5, -12, -10])
CORRECTED = np.array([-2.375, -1.5, 22, 9.5, -13, -18, 2.75, -3.5, -8, -3.75, -7.25, -4])


class TestFixedCorrection:
    def test_february(self):
        assert fixed_correction([-1.0, -2.0], 0.5).errors[1] == -1.5

    def test_january_with_seed(self):
        assert fixed_correction([-1.0], 0.5, seed=2.75).errors[0] == -2.375

    def test_zero_gamma_identity(self, rng):
        e = rng.normal(size=25)
        assert_array_equal(fixed_correction(e, 0.0, seed=1.0).errors, e)

    def test_full_table(self):
        out = fixed_correction(COMBINED, 0.5, seed=2.75)
        assert_array_equal(out.errors, CORRECTED)
        assert out.corrected.all()

    def test_no_seed_flags_first(self):
        out = fixed_correction(COMBINED, 0.5)
        assert not out.corrected[0] and out.corrected[1:].all()
        assert out.errors[0] == COMBINED[0]

    def test_lag_h(self):
        e = np.arange(1.0, 7.0)
        out = fixed_correction(e, 1.0, h=2, seed=[0.5, 1.5])
        assert_array_equal(out.errors, [0.5, 0.5, 2, 2, 2, 2])


class TestHistoricalGamma:
    def test_geometric(self):
        assert historical_gamma([1, 0.5, 0.25, 0.125]) == 0.5

    def test_white_noise(self):
        e = np.random.default_rng(1).normal(size=1000)
        assert abs(historical_gamma(e)) < 0.08

    def test_ar_consistency(self):
        e = ar_series(0.5, 2000, np.random.default_rng(2))
        assert 0.42 < historical_gamma(e) < 0.58

    def test_insufficient(self):
        with pytest.raises(InsufficientHistory):
            historical_gamma([1.0, 2.0, 3.0])

    def test_zero_denominator(self):
        with pytest.raises(ZeroDenominator):
            historical_gamma([0.0, 0.0, 0.0, 0.0, 1.0][:4])

    def test_clamp_open_interval(self):
        assert historical_gamma([1, 2, 4, 8, 16]) == pytest.approx(1 - 1e-6, abs=0)
        assert historical_gamma([1, -2, 4, -8, 16]) == pytest.approx(-1 + 1e-6, abs=0)
        assert clamp_open(0.3) == 0.3

    def test_exclusion_drops_pairs_touching_mask(self):
        qs = [quarter(2019, 1) + i for i in range(12)]
        e = np.r_[[1.0, 0.5, 0.25, 0.125], [9.0, -9.0, 9.0, -9.0], [2.0, 1.0, 0.5, 0.25]]
        covid = PeriodMask("covid", qs[4], qs[7])
        # surviving pairs: 3 inside the first block, 3 inside the last
        assert historical_gamma(e, exclusion=covid, periods=qs) == 0.5

    def test_matches_grid_minimizer(self):
        grid = np.round(np.arange(-1, 1 + 1e-9, 1e-4), 4)
        for seed in range(20):
            rng = np.random.default_rng(seed)
            e = ar_series(rng.uniform(-0.8, 0.8), int(rng.integers(10, 80)), rng)
            obj = [np.sum((e[1:] - g * e[:-1]) ** 2) for g in grid]
            assert abs(historical_gamma(e) - grid[int(np.argmin(obj))]) < 1e-3


class TestCorrectedStream:
    def _bg(self, bg1969):
        from corrcomb import align
        panel, actuals, seed = bg1969
        s = align(panel, actuals)
        return combine(equal_weights(2), s.F), s.y, s.targets, seed

    def test_none(self, rng):
        raw = rng.normal(size=10)
        st = corrected_stream(raw, rng.normal(size=10), CorrectionSpec.none())
        assert_array_equal(st.corrected, raw)

    def test_example1953(self, bg1969):
        raw, y, targets, seed = self._bg(bg1969)
        st = corrected_stream(raw, y, CorrectionSpec.fixed(0.5), targets, seed=seed)
        assert_array_equal(st.errors, CORRECTED)
        assert_array_equal(st.corrected, raw + st.b)
        assert np.all(st.gamma == 0.5)
        assert round(msfe(st.errors), 2) == 103.46

    def test_fixed_without_seed(self, bg1969):
        raw, y, targets, _ = self._bg(bg1969)
        st = corrected_stream(raw, y, CorrectionSpec.fixed(0.5), targets)
        assert st.first_correctable == 1 and st.b[0] == 0.0

    def test_historical_start_after_exclusion(self):
        rng = np.random.default_rng(3)
        T = 40
        y = rng.normal(size=T)
        excl = np.zeros(T, dtype=bool)
        excl[:10] = True
        spec = CorrectionSpec.historical(exclusion=excl)
        st = corrected_stream(np.zeros(T), y, spec)
        # usable pairs (e_j, e_{j-1}) start at j = 11; three of them are
        # realized by origin 13, which is row 14's origin
        assert st.first_correctable == 14
        assert np.isnan(st.gamma[:14]).all() and np.isfinite(st.gamma[14:]).all()

    def test_historical_uses_only_past(self):
        rng = np.random.default_rng(4)
        e = ar_series(0.6, 60, rng)
        path = historical_gamma_path(e)
        for j in (5, 17, 42, 59):
            assert path[j] == pytest.approx(historical_gamma(e[:j]), abs=1e-15)

    def test_no_lookahead(self):
        rng = np.random.default_rng(5)
        T = 80
        raw, y = rng.normal(size=T), ar_series(0.5, T, rng)
        spec = CorrectionSpec.historical()
        full = corrected_stream(raw, y, spec)
        for t in (20, 50, 79):
            part = corrected_stream(raw[:t], y[:t], spec)
            assert_array_equal(part.gamma, full.gamma[:t])
            assert_array_equal(part.corrected, full.corrected[:t])

    def test_no_lookahead_by_period(self):
        rng = np.random.default_rng(6)
        T = 60
        qs = [quarter(2005, 1) + i for i in range(T)]
        raw, y = rng.normal(size=T), ar_series(0.5, T, rng)
        spec = CorrectionSpec.historical(t0=quarter(2006, 1), exclusion=PeriodMask(
            "x", quarter(2008, 1), quarter(2008, 4)))
        full = corrected_stream(raw, y, spec, qs)
        part = corrected_stream(raw[:30], y[:30], spec, qs[:30])
        assert_array_equal(part.corrected, full.corrected[:30])
        # pairs need the lagged error at or after t0
        assert full.first_correctable == qs.index(quarter(2006, 1)) + 4


@pytest.mark.slow
class TestArCorrectionSimulation:
    def test_fixed_phi_correction_helps(self):
        wins = acf_ok = 0
        T = 2000
        for seed in range(50):
            rng = np.random.default_rng(1000 + seed)
            phi = rng.uniform(0.2, 0.8)
            e = ar_series(phi, T, rng)
            c = fixed_correction(e, phi).errors[1:]
            wins += msfe(c) < msfe(e[1:])
            d = c - c.mean()
            acf_ok += abs(d[1:] @ d[:-1] / (d @ d)) < 1.96 / np.sqrt(c.size)
        assert wins >= 48
        assert acf_ok >= 45
