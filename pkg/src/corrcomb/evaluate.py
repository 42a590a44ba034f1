"""Rolling-origin evaluation of combined and corrected forecasts."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _backend
from .combine import restricted_ols_weights
from .core import (COVID, ActualSeries, AlignedSample, ForecastPanel, PeriodIndex,
                   PeriodMask, align)
from .correct import CorrectionSpec, corrected_stream, historical_gamma
from .exceptions import (ConstantSeries, DataError, EmptyInput, InsufficientData,
                         InsufficientHistory, ValidationError, ZeroDenominator)
from .gls import gls_forecast, hildreth_lu

__all__ = [
    "msfe",
    "rmsfe",
    "AcfResult",
    "acf",
    "quadratic_moments",
    "EvaluationReport",
    "factor_grid_report",
    "RollingForecasts",
    "rolling_forecasts",
    "ComparisonTable",
    "method_comparison",
    "DEFAULT_FACTORS",
]

log = logging.getLogger(__name__)

DEFAULT_FACTORS = tuple(np.round(np.arange(1, 11) / 10, 1).tolist())
OPT_GRID = tuple(np.round(np.arange(0, 21) / 20, 2).tolist())
MIN_CELL = 4


def msfe(errors) -> float:
    e = np.asarray(errors, dtype=float)
    if e.size == 0:
        raise EmptyInput("no errors to score")
    return float(np.mean(e * e))


def rmsfe(errors) -> float:
    return float(np.sqrt(msfe(errors)))


@dataclass(frozen=True, eq=False)
class AcfResult:
    lags: np.ndarray
    rho: np.ndarray
    band: float
    nobs: int

    def outside_band(self) -> np.ndarray:
        return self.lags[np.abs(self.rho) > self.band]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lag", "rho", "band"])
            for k, r in zip(self.lags.tolist(), self.rho.tolist()):
                w.writerow([k, repr(r), repr(self.band)])


def acf(errors, max_lag: int) -> AcfResult:
    """Sample autocorrelations ``rho_1..rho_L`` with a 1.96/sqrt(T) band."""
    e = np.asarray(errors, dtype=float)
    T = e.size
    if not 1 <= max_lag < T:
        raise ValidationError(f"need 1 <= max_lag < T, got max_lag={max_lag}, T={T}")
    sums = _backend.centered_acov_sums(e, int(max_lag))
    if sums[0] == 0:
        raise ConstantSeries("errors are constant")
    return AcfResult(np.arange(1, max_lag + 1), sums[1:] / sums[0], 1.96 / np.sqrt(T), T)


def quadratic_moments(e, lagged) -> tuple[float, float, float]:
    """``(A, B, C)`` with ``MSFE(g) = A - 2 B g + C g**2`` for ``e - g * lagged``."""
    e = np.asarray(e, dtype=float)
    lagged = np.asarray(lagged, dtype=float)
    return float(np.mean(e * e)), float(np.mean(e * lagged)), float(np.mean(lagged * lagged))


def _lagged(values, periods, h):
    pos = {p: i for i, p in enumerate(periods)}
    out = np.full(len(periods), np.nan)
    for j, p in enumerate(periods):
        i = pos.get(p - h)
        if i is not None:
            out[j] = values[i]
    return out


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    """Relative RMSFE per evaluation window (rows) and correction (columns)."""

    rows: tuple
    columns: tuple
    cells: np.ndarray
    counts: np.ndarray
    base_msfe: np.ndarray
    moments: tuple            # (A, B, C) per row
    best: tuple               # column index of the row minimum among fixed factors
    factors: tuple
    indicator: str = ""

    @property
    def insufficient(self) -> np.ndarray:
        return self.counts < MIN_CELL

    def improves(self, row: int) -> bool:
        b = self.best[row]
        return b is not None and self.cells[row, b] < 1.0

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["period", *self.columns, "n", "best_factor", "best_improves"])
            for i, name in enumerate(self.rows):
                b = self.best[i]
                w.writerow([name, *(repr(float(x)) for x in self.cells[i]),
                            int(self.counts[i].min()),
                            "" if b is None else repr(self.factors[b]),
                            int(self.improves(i))])

    def to_text(self, decimals: int = 2) -> str:
        width = max(len(r) for r in self.rows) + 2
        head = "".ljust(width) + "".join(c.rjust(8) for c in self.columns)
        lines = [f"{self.indicator}".strip() or "relative RMSFE", head]
        for i, name in enumerate(self.rows):
            cells = []
            for j, x in enumerate(self.cells[i]):
                s = "n/a" if not np.isfinite(x) else f"{x:.{decimals}f}"
                if self.best[i] == j and self.improves(i):
                    s = "*" + s
                cells.append(s.rjust(8))
            lines.append(name.ljust(width) + "".join(cells))
        lines.append("* row minimum among fixed factors (full precision)")
        return "\n".join(lines)


def factor_grid_report(panel: ForecastPanel, actuals: ActualSeries, masks: Sequence[PeriodMask],
                       factors: Sequence[float] = DEFAULT_FACTORS, hist: bool = True,
                       exclusion: PeriodMask | None = COVID, t0: PeriodIndex | None = None,
                       clamp=(-1.0, 1.0), indicator: str = "") -> EvaluationReport:
    """Relative RMSFE of the corrected mean forecast over windows x factors.

    The mean forecast averages whichever forecasters reported at each
    origin. A target enters a window's evaluation when it lies in the
    window and the mean error ``h`` periods earlier exists; all columns of
    a row share that set. Fixed-factor cells come from the exact quadratic
    ``MSFE(g) = A - 2 B g + C g**2``; the ``hist`` column re-estimates the
    factor at each origin from errors since ``t0`` (default: window start),
    leaving ``exclusion`` periods out of the estimate.
    """
    factors = tuple(float(f) for f in factors)
    if not factors:
        raise ValidationError("no correction factors given")
    h = panel.horizon
    sample = align(panel.cross_section_mean(), actuals)
    periods = list(sample.targets)
    e = sample.y - sample.F[:, 0]
    e_lag = _lagged(e, periods, h)
    has_lag = np.isfinite(e_lag)

    columns = tuple(f"{f:g}" for f in factors) + (("hist",) if hist else ())
    cells = np.full((len(masks), len(columns)), np.nan)
    counts = np.zeros((len(masks), len(columns)), dtype=int)
    base = np.full(len(masks), np.nan)
    moments, best = [], []
    for r, mask in enumerate(masks):
        rows = np.array([mask.contains(p) for p in periods], dtype=bool) & has_lag
        n = int(rows.sum())
        counts[r, :] = n
        A, B, C = quadratic_moments(e[rows], e_lag[rows]) if n else (np.nan,) * 3
        moments.append((A, B, C))
        if n < MIN_CELL or not A > 0:
            log.warning("window %s: %d evaluated periods, marked insufficient", mask.name, n)
            best.append(None)
            continue
        base[r] = A
        for j, g in enumerate(factors):
            cells[r, j] = np.sqrt(max(A - 2 * B * g + C * g * g, 0.0) / A)
        best.append(int(np.argmin(cells[r, :len(factors)])))
        if hist:
            spec = CorrectionSpec.historical(t0=t0 or mask.start, clamp=clamp,
                                             exclusion=exclusion, h=h)
            stream = corrected_stream(sample.F[:, 0], sample.y, spec, periods)
            cells[r, -1] = np.sqrt(msfe(stream.errors[rows]) / A)
    return EvaluationReport(tuple(m.name for m in masks), columns, cells, counts, base,
                            tuple(moments), tuple(best), factors, indicator)


@dataclass(frozen=True, eq=False)
class RollingForecasts:
    """Out-of-sample forecasts by method, one entry per target period.

    ``forecasts[label][j]`` is NaN where the method could not forecast.
    ``lagged_errors`` holds, for the correctable methods, the base error
    each correction multiplies (mean error, or the OLS residual at the
    origin under the origin's weights).
    """

    sample: AlignedSample
    forecasts: dict
    lagged_errors: dict
    gamma_paths: dict = field(default_factory=dict)


def _window_rows(targets, origin, t0):
    return [i for i, t in enumerate(targets) if t <= origin and (t0 is None or t >= t0)]


def rolling_forecasts(sample: AlignedSample, t0: PeriodIndex | None = None,
                      fixed_gamma: float = 0.5, exclusion: PeriodMask | None = COVID,
                      clamp=(-1.0, 1.0), min_window: int | None = None,
                      hl_step: float = 0.01) -> RollingForecasts:
    """Expanding-window forecasts of every method at every origin.

    At the origin of each row only targets realized by then, and not before
    ``t0``, enter estimation. The mean error stream's historical factor
    follows the same rule.
    """
    F, y = sample.F, sample.y
    T, n = F.shape
    h = sample.horizon
    targets = list(sample.targets)
    pos = {p: i for i, p in enumerate(targets)}
    if min_window is None:
        min_window = n + 3

    fc = {f"ID {fid}": F[:, k].copy() for k, fid in enumerate(sample.ids)}
    mean = F.mean(axis=1)
    e_mean = y - mean
    e_mean_lag = _lagged(e_mean, targets, h)
    fc["mean"] = mean
    fc[f"mean+fixed({fixed_gamma:g})"] = mean + fixed_gamma * e_mean_lag
    hist_spec = CorrectionSpec.historical(t0=t0, clamp=clamp, exclusion=exclusion, h=h)
    stream = corrected_stream(mean, y, hist_spec, targets)
    mean_hist = np.where(stream.applied, stream.corrected, np.nan)
    fc["mean+hist"] = mean_hist

    ols = np.full(T, np.nan)
    ols_lag = np.full(T, np.nan)
    ols_hist = np.full(T, np.nan)
    ols_gamma = np.full(T, np.nan)
    gls = np.full(T, np.nan)
    gls_gamma = np.full(T, np.nan)
    for j, target in enumerate(targets):
        origin = target - h
        win = _window_rows(targets, origin, t0)
        if len(win) < min_window:
            continue
        win_t = [targets[i] for i in win]
        contiguous = all(b - a == 1 for a, b in zip(win_t, win_t[1:]))
        try:
            w = restricted_ols_weights(F[win], y[win])
        except DataError:
            continue
        ols[j] = F[j] @ w.w
        resid = y[win] - F[win] @ w.w
        i_prev = pos.get(origin)
        if i_prev is not None and i_prev in win:
            u_prev = y[i_prev] - F[i_prev] @ w.w
            ols_lag[j] = u_prev
            try:
                g = historical_gamma(resid, h, clamp, exclusion, win_t, t0)
                ols_gamma[j] = g
                ols_hist[j] = ols[j] + g * u_prev
            except (InsufficientHistory, ZeroDenominator):
                pass
            if contiguous:
                try:
                    fit = hildreth_lu(F[win], y[win], h, step=hl_step)
                except DataError:
                    continue
                gls[j] = gls_forecast(fit, F[j], F[i_prev], y[i_prev])
                gls_gamma[j] = fit.gamma
    fc["ols"] = ols
    fc[f"ols+fixed({fixed_gamma:g})"] = ols + fixed_gamma * ols_lag
    fc["ols+hist"] = ols_hist
    fc["gls"] = gls
    return RollingForecasts(
        sample, fc, {"mean": e_mean_lag, "ols": ols_lag},
        {"mean+hist": stream.gamma, "ols+hist": ols_gamma, "gls": gls_gamma})


@dataclass(frozen=True, eq=False)
class ComparisonTable:
    labels: tuple
    msfe: np.ndarray
    relative: np.ndarray
    nobs: int
    eval_targets: tuple
    opt_gamma: dict
    eval_rows: np.ndarray
    dropped: tuple = ()
    rolling: RollingForecasts | None = None

    def row(self, label) -> tuple[float, float]:
        i = self.labels.index(label)
        return float(self.msfe[i]), float(self.relative[i])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["method", "msfe", "relative_msfe", "n"])
            for lab, m, r in zip(self.labels, self.msfe.tolist(), self.relative.tolist()):
                w.writerow([lab, repr(m), repr(r), self.nobs])

    def to_text(self, decimals: int = 4) -> str:
        width = max(len(s) for s in self.labels) + 2
        lines = ["method".ljust(width) + "MSFE".rjust(10) + "relative".rjust(10)]
        for lab, m, r in zip(self.labels, self.msfe, self.relative):
            lines.append(lab.ljust(width) + f"{m:.{decimals}f}".rjust(10)
                         + f"{r:.{decimals}f}".rjust(10))
        lines.append(f"{self.nobs} evaluated periods "
                     f"({self.eval_targets[0]}..{self.eval_targets[-1]})" if self.nobs else "")
        return "\n".join(lines)


def method_comparison(panel: ForecastPanel, actuals: ActualSeries, mask: PeriodMask,
                      eval_start: PeriodIndex | None = None, t0: PeriodIndex | None = None,
                      fixed_gamma: float = 0.5, opt_grid: Sequence[float] = OPT_GRID,
                      exclusion: PeriodMask | None = COVID, clamp=(-1.0, 1.0),
                      min_window: int | None = None, hl_step: float = 0.01) -> ComparisonTable:
    """MSFE of individual forecasters, mean and OLS combinations (raw and
    corrected) and the one-step GLS forecast over a common evaluation set.

    Estimation windows expand from ``t0`` (default ``mask.start``). The
    evaluation set is the targets in ``mask``, from ``eval_start`` on, where
    every method produced a forecast. The "fixed opt." rows use the factor
    on ``opt_grid`` with the lowest MSFE over that set.
    """
    t0 = t0 or mask.start
    sample = align(panel, actuals)
    keep = [i for i, t in enumerate(sample.targets) if t >= t0]
    if not keep:
        raise InsufficientData(f"no aligned targets from {t0}")
    sample = sample.select(keep)
    roll = rolling_forecasts(sample, t0, fixed_gamma, exclusion, clamp, min_window, hl_step)
    targets = sample.targets
    in_eval = np.array([mask.contains(t) and (eval_start is None or t >= eval_start)
                        for t in targets], dtype=bool)
    ok = in_eval.copy()
    for f in roll.forecasts.values():
        ok &= np.isfinite(f)
    for lag in roll.lagged_errors.values():
        ok &= np.isfinite(lag)
    dropped = tuple(t for t, a, b in zip(targets, in_eval, ok) if a and not b)
    if not ok.any():
        raise InsufficientData("no evaluation period where every method forecasts")
    y = sample.y[ok]

    labels, values, opt = [], [], {}
    order = [k for k in roll.forecasts if k.startswith("ID ")]
    for k in order + ["mean", f"mean+fixed({fixed_gamma:g})"]:
        labels.append(k)
        values.append(msfe(y - roll.forecasts[k][ok]))
    for base in ("mean", "ols"):
        e = y - roll.forecasts[base][ok]
        lag = roll.lagged_errors[base][ok]
        A, B, C = quadratic_moments(e, lag)
        q = np.array([A - 2 * B * g + C * g * g for g in opt_grid])
        g_opt = float(opt_grid[int(np.argmin(q))])
        opt[base] = g_opt
        if base == "ols":
            labels += ["ols", f"ols+fixed({fixed_gamma:g})"]
            values += [A, msfe(y - roll.forecasts[f"ols+fixed({fixed_gamma:g})"][ok])]
        labels.append(f"{base}+fixed(opt={g_opt:g})")
        values.append(msfe(e - g_opt * lag))
        labels.append(f"{base}+hist")
        values.append(msfe(y - roll.forecasts[f"{base}+hist"][ok]))
    labels.append("gls")
    values.append(msfe(y - roll.forecasts["gls"][ok]))
    values = np.array(values)
    ref = values[labels.index("mean")]
    return ComparisonTable(tuple(labels), values, values / ref, int(ok.sum()),
                           tuple(t for t, k in zip(targets, ok) if k), opt, ok, dropped, roll)
