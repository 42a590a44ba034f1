"""Reading forecaster panels and actuals, selection and imputation."""
from __future__ import annotations

import csv
import logging
import math
import os
from pathlib import Path

from .core import ActualSeries, ForecastPanel, PeriodIndex, PeriodMask
from .exceptions import (DuplicateKey, MalformedHeader, UnparseableNumber, ValidationError)

__all__ = [
    "MISSING",
    "parse_spf",
    "select_forecasters",
    "impute_forward",
    "read_actuals",
    "write_panel",
    "read_panel",
    "demo_bg1969",
    "BG1969_ERRORS",
    "BG1969_SEED",
]

log = logging.getLogger(__name__)

MISSING = frozenset({"", "#N/A", "NA", "N/A", ".", "NaN", "nan"})

PANEL_HEADER = ["id", "origin", "target", "horizon", "value", "imputed"]


def _number(text, row, column, missing=MISSING):
    s = text.strip()
    if s in missing:
        return None
    try:
        v = float(s)
    except ValueError:
        raise UnparseableNumber(row, column, text) from None
    if not math.isfinite(v):
        raise UnparseableNumber(row, column, text)
    return v


def _norm_id(text: str) -> str:
    s = text.strip()
    try:
        f = float(s)
    except ValueError:
        return s
    return str(int(f)) if f.is_integer() else s


def _id_key(fid):
    s = str(fid)
    return (0, int(s), "") if s.isdigit() else (1, 0, s)


def parse_spf(path, indicator: str | None = None, column: str | None = None, h: int = 1,
              origin_shift: int = 0, missing=MISSING) -> ForecastPanel:
    """Read an SPF-style CSV (``YEAR, QUARTER, ID, ...``) into a panel.

    Parameters
    ----------
    indicator, column : str
        ``column`` names the variable column (e.g. ``UNEMP2``); when omitted
        it is ``indicator + "2"``.
    h : int
        Horizon the column represents.
    origin_shift : int
        Origin = survey quarter + ``origin_shift``. With the default 0 the
        target of a row is ``survey quarter + h``.
    """
    column = column or (f"{indicator}2" if indicator else None)
    if column is None:
        raise ValidationError("need an indicator or a column name")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [c.strip() for c in next(reader)]
        except StopIteration:
            raise MalformedHeader(f"{path}: empty file") from None
        upper = [c.upper() for c in header]
        need = ["YEAR", "QUARTER", "ID", column.upper()]
        missing_cols = [c for c in need if c not in upper]
        if missing_cols:
            raise MalformedHeader(f"{path}: header lacks {', '.join(missing_cols)}")
        iy, iq, ii, iv = (upper.index(c) for c in need)
        entries, gaps, seen, ids = {}, set(), set(), {}
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) < len(header):
                rec = rec + [""] * (len(header) - len(rec))
            year = _number(rec[iy], lineno, "YEAR", missing)
            qtr = _number(rec[iq], lineno, "QUARTER", missing)
            if year is None or qtr is None or not rec[ii].strip():
                raise UnparseableNumber(lineno, "YEAR/QUARTER/ID", ",".join(rec[:3]))
            fid = _norm_id(rec[ii])
            survey = PeriodIndex(int(year), int(qtr))
            key = (survey, fid)
            if key in seen:
                raise DuplicateKey(f"{path}: line {lineno}: repeated {survey} ID {fid}")
            seen.add(key)
            ids.setdefault(fid, None)
            origin = survey + origin_shift
            value = _number(rec[iv], lineno, header[iv], missing)
            if value is None:
                gaps.add((fid, origin))
            else:
                entries[(fid, origin)] = value
    order = tuple(sorted(ids, key=_id_key))
    return ForecastPanel(order, h, entries, gaps=gaps)


def select_forecasters(panel: ForecastPanel, min_obs: int,
                       mask: PeriodMask | None = None) -> ForecastPanel:
    """Keep forecasters with at least ``min_obs`` forecasts at origins in ``mask``."""
    if min_obs <= 0:
        return panel
    keep = sorted((f for f in panel.forecaster_ids if panel.count(f, mask) >= min_obs), key=_id_key)
    if not keep:
        log.warning("no forecaster has %d observations in %s", min_obs,
                    mask.name if mask else "the panel")
    return panel.subset(keep)


def impute_forward(panel: ForecastPanel, start: PeriodIndex | None = None,
                   end: PeriodIndex | None = None) -> ForecastPanel:
    """Fill each missing forecast with the forecaster's latest earlier one.

    The origin grid runs over consecutive periods from ``start`` to ``end``
    (default: the panel's first and last origins). Periods before a
    forecaster's first submission stay missing.
    """
    origins = panel.origins()
    if not origins:
        return panel
    start = start or origins[0]
    end = end or origins[-1]
    entries = dict(panel.entries)
    imputed = set(panel.imputed)
    for fid in panel.forecaster_ids:
        last = None
        # earlier submissions count even when before the grid start
        prior = [o for (f, o) in panel.entries if f == fid and o < start]
        if prior:
            last = panel.entries[(fid, max(prior))]
        q = start
        while q <= end:
            v = entries.get((fid, q))
            if v is None:
                if last is not None:
                    entries[(fid, q)] = last
                    imputed.add((fid, q))
            else:
                last = v
            q = q + 1
    return ForecastPanel(panel.forecaster_ids, panel.horizon, entries, imputed, panel.gaps)


def read_actuals(path, transform: str = "none", missing=MISSING) -> ActualSeries:
    """Two-column CSV (period, value); a header row is optional.

    ``transform`` is ``none``, ``pct`` (annualized percent change) or
    ``log`` (annualized log difference, x100).
    """
    pairs = []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or not rec[0].strip():
                continue
            if len(rec) < 2:
                raise MalformedHeader(f"{path}: line {lineno} needs two columns")
            try:
                q = PeriodIndex.parse(rec[0])
            except ValidationError:
                if lineno == 1:
                    continue
                raise UnparseableNumber(lineno, "period", rec[0]) from None
            v = _number(rec[1], lineno, "value", missing)
            if v is not None:
                pairs.append((q, v))
    series = ActualSeries(pairs)
    if transform == "none":
        return series
    if transform not in ("pct", "log"):
        raise ValidationError(f"unknown actuals transform {transform!r}")
    out = []
    for q, v in series.items():
        prev = series.get(q - 1)
        if prev is None:
            continue
        if transform == "pct":
            out.append((q, 100.0 * ((v / prev) ** q.per_year - 1.0)))
        else:
            out.append((q, 100.0 * q.per_year * math.log(v / prev)))
    return ActualSeries(out)


def write_panel(panel: ForecastPanel, path):
    """Normalized long format: id, origin, target, horizon, value, imputed."""
    rank = {f: i for i, f in enumerate(panel.forecaster_ids)}
    keys = sorted(panel.entries, key=lambda k: (rank[k[0]], k[1].ordinal))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PANEL_HEADER)
        for fid, origin in keys:
            w.writerow([fid, origin, origin + panel.horizon, panel.horizon,
                        repr(panel.entries[(fid, origin)]),
                        int((fid, origin) in panel.imputed)])


def read_panel(path, ids: tuple | None = None) -> ForecastPanel:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PANEL_HEADER:
            raise MalformedHeader(f"{path}: expected header {','.join(PANEL_HEADER)}")
        order, entries, imputed, horizon = {}, {}, set(), None
        for lineno, (fid, origin, _target, hz, value, flag) in enumerate(reader, start=2):
            q = PeriodIndex.parse(origin)
            if horizon is None:
                horizon = int(hz)
            elif int(hz) != horizon:
                raise ValidationError(f"{path}: mixed horizons")
            order.setdefault(fid, None)
            if (fid, q) in entries:
                raise DuplicateKey(f"{path}: line {lineno}: repeated {fid} {q}")
            entries[(fid, q)] = _number(value, lineno, "value")
            if flag.strip() == "1":
                imputed.add((fid, q))
    return ForecastPanel(ids or tuple(order), horizon or 1, entries, imputed)


# Forecast errors (actual less forecast) of passenger miles flown, 1953,
# exponential smoothing and Box-Jenkins.
BG1969_ERRORS = {
    "ES": (1, 6, 18, 18, 3, -17, -24, -16, -12, -9, -12, -13),
    "BJ": (-3, -10, 24, 22, -9, -22, 10, 2, -11, -10, -12, -7),
}
# combined-forecast error of December 1952
BG1969_SEED = 2.75


def demo_bg1969():
    """The 1953 two-forecaster example on a monthly axis.

    Actuals are all zero and forecasts are minus the published errors, so
    every error computed downstream equals the published one.

    Returns
    -------
    panel : ForecastPanel
    actuals : ActualSeries
    seed : float
        Combined error of the month preceding the sample.
    """
    months = [PeriodIndex(1953, m, 12) for m in range(1, 13)]
    entries = {}
    for fid, errs in BG1969_ERRORS.items():
        for target, err in zip(months, errs):
            entries[(fid, target - 1)] = 0.0 - float(err)
    actuals = ActualSeries((m, 0.0) for m in months)
    return ForecastPanel(tuple(BG1969_ERRORS), 1, entries), actuals, BG1969_SEED


def data_dir() -> Path:
    return Path(os.environ.get("CORRCOMB_DATA_DIR", "."))
