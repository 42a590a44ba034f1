import numpy as np
import pytest
from numpy.testing import assert_allclose

from corrcomb import (DuplicateKey, ForecastPanel, MalformedHeader, PeriodMask,
                      UnparseableNumber, impute_forward, parse_spf, quarter, read_actuals,
                      read_panel, select_forecasters, write_panel)
from corrcomb.ingest import BG1969_ERRORS, demo_bg1969


def _write(tmp_path, text, name="spf.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestParseSpf:
    def test_fixture_with_gap(self, tmp_path):
        p = _write(tmp_path, "YEAR,QUARTER,ID,UNEMP2\n2000,1,421,4.1\n2000,1,426,#N/A\n"
                             "2000,2,421.0,4.0\n")
        panel = parse_spf(p, "UNEMP")
        assert len(panel.entries) == 2
        assert panel.gaps == {("426", quarter(2000, 1))}
        assert panel.forecaster_ids == ("421", "426")
        assert panel.get("421", quarter(2000, 2)) == 4.0

    def test_origin_shift(self, tmp_path):
        p = _write(tmp_path, "YEAR,QUARTER,ID,UNEMP2\n2000,1,1,4.1\n")
        panel = parse_spf(p, "UNEMP", origin_shift=-1)
        assert panel.entries == {("1", quarter(1999, 4)): 4.1}

    def test_explicit_column(self, tmp_path):
        p = _write(tmp_path, "year,quarter,id,UNEMP3\n2000,1,1,4.3\n")
        panel = parse_spf(p, column="UNEMP3", h=2)
        assert panel.horizon == 2 and len(panel.entries) == 1

    def test_missing_id_column(self, tmp_path):
        with pytest.raises(MalformedHeader):
            parse_spf(_write(tmp_path, "YEAR,QUARTER,UNEMP2\n2000,1,4.1\n"), "UNEMP")

    def test_missing_variable(self, tmp_path):
        with pytest.raises(MalformedHeader):
            parse_spf(_write(tmp_path, "YEAR,QUARTER,ID,NGDP2\n2000,1,1,4.1\n"), "UNEMP")

    def test_unparseable(self, tmp_path):
        with pytest.raises(UnparseableNumber) as exc:
            parse_spf(_write(tmp_path, "YEAR,QUARTER,ID,UNEMP2\n2000,1,1,4.1\n2000,2,1,abc\n"),
                      "UNEMP")
        assert exc.value.row == 3 and exc.value.text == "abc"

    def test_duplicate(self, tmp_path):
        with pytest.raises(DuplicateKey):
            parse_spf(_write(tmp_path, "YEAR,QUARTER,ID,UNEMP2\n2000,1,1,4.1\n2000,1,1,4.2\n"),
                      "UNEMP")


def _counts_panel(counts):
    start = quarter(1990, 1)
    entries = {}
    for fid, k in counts.items():
        for i in range(k):
            entries[(fid, start + i)] = 1.0
    return ForecastPanel(tuple(counts), 1, entries)


class TestSelect:
    def test_threshold(self):
        panel = _counts_panel({"1": 80, "2": 69, "3": 71})
        assert select_forecasters(panel, 70).forecaster_ids == ("1", "3")

    def test_zero_is_identity(self):
        panel = _counts_panel({"1": 5, "2": 3})
        assert select_forecasters(panel, 0) is panel

    def test_mask_restricts_count(self):
        panel = _counts_panel({"1": 80, "2": 40})
        mask = PeriodMask("m", quarter(2000, 1), quarter(2019, 4))
        # ids "1" covers 1990Q1..2009Q4: 40 origins inside the mask
        assert select_forecasters(panel, 40, mask).forecaster_ids == ("1",)


class TestImpute:
    def test_fill_middle(self):
        q1, q2, q3 = quarter(2000, 1), quarter(2000, 2), quarter(2000, 3)
        panel = ForecastPanel(("a", "b"), 1, {("a", q1): 1.0, ("a", q3): 3.0,
                                              ("b", q1): 5.0, ("b", q2): 6.0, ("b", q3): 7.0})
        out = impute_forward(panel)
        assert out.get("a", q2) == 1.0
        assert out.imputed == {("a", q2)}

    def test_leading_gap(self):
        q1, q2 = quarter(2000, 1), quarter(2000, 2)
        panel = ForecastPanel(("a", "b"), 1, {("a", q1): 1.0, ("a", q2): 2.0, ("b", q2): 5.0})
        out = impute_forward(panel)
        assert out.get("b", q1) is None and not out.imputed

    def test_random_gaps(self):
        rng = np.random.default_rng(8)
        ids, T = tuple("abcdef"), 60
        start = quarter(2000, 1)
        entries = {(f, start + t): float(t) for f in ids for t in range(T)
                   if rng.random() > 0.1}
        out = impute_forward(ForecastPanel(ids, 1, entries))
        leading = sum(min(t for t in range(T) if (f, start + t) in entries) for f in ids)
        assert T * len(ids) - len(out.entries) == leading
        assert len(out.imputed) == len(out.entries) - len(entries)


class TestActuals:
    def test_levels_and_transforms(self, tmp_path):
        p = _write(tmp_path, "DATE,UNRATE\n2000Q1,100\n2000Q2,110\n2000Q3,#N/A\n", "a.csv")
        lv = read_actuals(p)
        assert list(lv.values()) == [100.0, 110.0]
        pct = read_actuals(p, "pct")
        assert_allclose(pct[quarter(2000, 2)], 100 * (1.1 ** 4 - 1))
        lg = read_actuals(p, "log")
        assert_allclose(lg[quarter(2000, 2)], 400 * np.log(1.1))

    def test_headerless(self, tmp_path):
        p = _write(tmp_path, "2000:1,4.0\n2000:2,4.1\n", "a.csv")
        assert len(read_actuals(p)) == 2

    def test_bad_value(self, tmp_path):
        with pytest.raises(UnparseableNumber):
            read_actuals(_write(tmp_path, "2000Q1,x\n", "a.csv"))


def test_panel_roundtrip(tmp_path, rng):
    start = quarter(1999, 3)
    entries = {(f, start + t): float(rng.normal()) for f in ("10", "2") for t in range(9)}
    panel = ForecastPanel(("10", "2"), 1, entries, imputed={("2", start + 4)})
    write_panel(panel, tmp_path / "p.csv")
    back = read_panel(tmp_path / "p.csv")
    assert back.forecaster_ids == panel.forecaster_ids
    assert back.entries == panel.entries and back.imputed == panel.imputed


def test_read_panel_bad_header(tmp_path):
    with pytest.raises(MalformedHeader):
        read_panel(_write(tmp_path, "a,b\n", "p.csv"))


def test_demo_values():
    panel, actuals, seed = demo_bg1969()
    assert seed == 2.75 and panel.forecaster_ids == ("ES", "BJ")
    errs = [actuals[o + 1] - panel.get("ES", o) for o in panel.origins()]
    assert errs == list(map(float, BG1969_ERRORS["ES"]))
