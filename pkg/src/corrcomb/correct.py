"""Correcting a combined forecast with its own lagged error.

The corrected forecast of target ``t`` adds ``gamma * e_{t-h}``, the
combined error of the target realized at the forecast origin. ``gamma``
is either fixed or re-estimated at every origin from the errors observable
there (no-intercept regression of ``e_{tau+h}`` on ``e_tau``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _backend
from .core import PeriodIndex, PeriodMask
from .exceptions import (InsufficientHistory, LengthMismatch, ValidationError,
                         ZeroDenominator)

__all__ = [
    "CorrectionSpec",
    "CorrectedErrors",
    "CorrectedForecastStream",
    "fixed_correction",
    "historical_gamma",
    "historical_gamma_path",
    "corrected_stream",
    "clamp_open",
    "CLAMP_NUDGE",
]

CLAMP_NUDGE = 1e-6
MIN_PAIRS = 3


def clamp_open(g: float, clamp=(-1.0, 1.0)) -> float:
    """Force ``g`` strictly inside ``clamp``, 1e-6 away from a crossed bound."""
    lo, hi = clamp
    if g <= lo:
        return lo + CLAMP_NUDGE
    if g >= hi:
        return hi - CLAMP_NUDGE
    return float(g)


@dataclass(frozen=True)
class CorrectionSpec:
    """How a combined forecast is corrected.

    Use the constructors :meth:`none`, :meth:`fixed` and :meth:`historical`.
    """

    kind: str = "none"
    gamma: float = 0.0
    h: int = 1
    t0: PeriodIndex | int | None = None
    clamp: tuple = (-1.0, 1.0)
    exclusion: PeriodMask | None = None

    def __post_init__(self):
        if self.kind not in ("none", "fixed", "historical"):
            raise ValidationError(f"unknown correction kind {self.kind!r}")
        if not np.isfinite(self.gamma):
            raise ValidationError("correction factor must be finite")
        if self.h < 1:
            raise ValidationError("horizon must be >= 1")
        lo, hi = self.clamp
        if not lo < hi:
            raise ValidationError(f"empty clamp interval {self.clamp}")

    @classmethod
    def none(cls, h: int = 1):
        return cls("none", 0.0, h)

    @classmethod
    def fixed(cls, gamma: float, h: int = 1):
        return cls("fixed", float(gamma), h)

    @classmethod
    def historical(cls, t0=None, clamp=(-1.0, 1.0), exclusion=None, h: int = 1):
        return cls("historical", 0.0, h, t0, tuple(clamp), exclusion)

    @property
    def label(self) -> str:
        if self.kind == "fixed":
            return f"fixed({self.gamma:g})"
        return self.kind


class CorrectedErrors(NamedTuple):
    errors: np.ndarray
    corrected: np.ndarray  # False where no prior error was available


def _seed_array(seed, h):
    if seed is None:
        return None
    s = np.atleast_1d(np.asarray(seed, dtype=float))
    if s.size == 1 and h > 1:
        raise ValidationError(f"horizon {h} needs {h} seed errors, got one")
    if s.size != h:
        raise ValidationError(f"expected {h} seed errors, got {s.size}")
    return s


def fixed_correction(errors, gamma: float, h: int = 1, seed=None) -> CorrectedErrors:
    """Corrected errors ``e_t - gamma * e_{t-h}``.

    ``seed`` supplies the ``h`` errors preceding the series (oldest first).
    Without it the first ``h`` values are returned unchanged and flagged.
    """
    e = np.asarray(errors, dtype=float)
    seed = _seed_array(seed, h)
    prior = np.full(e.size, np.nan)
    prior[h:] = e[:-h] if e.size > h else prior[h:]
    if seed is not None:
        k = min(h, e.size)
        prior[:k] = seed[:k]
    done = ~np.isnan(prior)
    out = e - gamma * np.where(done, prior, 0.0)
    return CorrectedErrors(out, done)


def _ordinals(periods, T):
    if periods is None:
        return np.arange(T, dtype=np.int64)
    if len(periods) != T:
        raise LengthMismatch(f"{len(periods)} periods for {T} values")
    return np.array([p.ordinal if isinstance(p, PeriodIndex) else int(p) for p in periods],
                    dtype=np.int64)


def _exclusion_flags(exclusion, periods, T):
    if exclusion is None:
        return np.zeros(T, dtype=bool)
    if isinstance(exclusion, PeriodMask):
        if periods is None:
            raise ValidationError("an exclusion mask needs the error periods")
        return np.array([exclusion.contains(p) for p in periods], dtype=bool)
    flags = np.asarray(exclusion, dtype=bool)
    if flags.shape != (T,):
        raise LengthMismatch("exclusion flags must match the error series")
    return flags


def _lag_pairs(e, ords, excl, h, t0):
    """For each position j: the error at ``ords[j] - h`` and whether the pair
    (e_j, that lagged error) may enter the estimate."""
    pos = {o: i for i, o in enumerate(ords.tolist())}
    lag = np.full(e.size, np.nan)
    usable = np.zeros(e.size, dtype=bool)
    for j, o in enumerate(ords.tolist()):
        i = pos.get(o - h)
        if i is None:
            continue
        lag[j] = e[i]
        usable[j] = (not excl[j] and not excl[i] and np.isfinite(e[j]) and np.isfinite(e[i])
                     and (t0 is None or o - h >= t0))
    return lag, usable


def _t0_ordinal(t0):
    if t0 is None:
        return None
    return t0.ordinal if isinstance(t0, PeriodIndex) else int(t0)


def historical_gamma(errors, h: int = 1, clamp=(-1.0, 1.0), exclusion=None,
                     periods: Sequence | None = None, t0=None,
                     min_pairs: int = MIN_PAIRS) -> float:
    """Least-squares correction factor from all usable lag-h error pairs.

    Returns ``sum e_{tau+h} e_tau / sum e_tau**2`` clamped into the open
    interval ``clamp``. A pair is dropped when either member is flagged by
    ``exclusion`` (a :class:`PeriodMask` over ``periods``, or boolean flags).

    Raises
    ------
    InsufficientHistory
        Fewer than ``min_pairs`` usable pairs.
    ZeroDenominator
        All usable lagged errors are zero.
    """
    e = np.asarray(errors, dtype=float)
    ords = _ordinals(periods, e.size)
    excl = _exclusion_flags(exclusion, periods, e.size)
    lag, usable = _lag_pairs(e, ords, excl, h, _t0_ordinal(t0))
    if usable.sum() < min_pairs:
        raise InsufficientHistory(
            f"{int(usable.sum())} usable error pairs, need {min_pairs}")
    den = lag[usable] @ lag[usable]
    if den == 0:
        raise ZeroDenominator("all lagged errors are zero")
    return clamp_open(float(e[usable] @ lag[usable] / den), clamp)


def historical_gamma_path(errors, h: int = 1, clamp=(-1.0, 1.0), exclusion=None,
                          periods: Sequence | None = None, t0=None,
                          min_pairs: int = MIN_PAIRS) -> np.ndarray:
    """Correction factor available at the origin of every row.

    Row ``j`` targets ``periods[j]``; its origin is ``periods[j] - h`` and
    only pairs whose later error is realized by then are used. Rows without
    enough history get NaN.
    """
    e = np.asarray(errors, dtype=float)
    ords = _ordinals(periods, e.size)
    if np.any(np.diff(ords) <= 0):
        raise ValidationError("periods must be strictly increasing")
    excl = _exclusion_flags(exclusion, periods, e.size)
    lag, usable = _lag_pairs(e, ords, excl, h, _t0_ordinal(t0))
    num, den, cnt = _backend.lag_moment_cumsums(
        np.where(usable, e, 0.0), np.where(usable, lag, 0.0), usable)
    # pairs with later error realized at the origin: ords <= origin
    k = np.searchsorted(ords, ords - h, side="right") - 1
    gam = np.full(e.size, np.nan)
    for j in np.flatnonzero(k >= 0):
        i = k[j]
        if cnt[i] >= min_pairs and den[i] > 0:
            gam[j] = clamp_open(num[i] / den[i], clamp)
    return gam


@dataclass(frozen=True, eq=False)
class CorrectedForecastStream:
    """Raw and corrected combined forecasts, one row per target period."""

    targets: tuple
    origins: tuple
    raw: np.ndarray
    b: np.ndarray
    corrected: np.ndarray
    gamma: np.ndarray
    applied: np.ndarray
    actuals: np.ndarray | None = None
    spec: CorrectionSpec | None = None

    @property
    def first_correctable(self) -> int | None:
        idx = np.flatnonzero(self.applied)
        return int(idx[0]) if idx.size else None

    @property
    def raw_errors(self) -> np.ndarray:
        return self.actuals - self.raw

    @property
    def errors(self) -> np.ndarray:
        return self.actuals - self.corrected


def corrected_stream(raw, actuals, spec: CorrectionSpec, periods: Sequence | None = None,
                     seed=None) -> CorrectedForecastStream:
    """Correct a combined forecast series row by row.

    ``raw[j]`` forecasts ``actuals[j]``, the value at ``periods[j]``
    (positions are used as periods when ``periods`` is None). The
    correction for row ``j`` uses the combined error at ``periods[j] - h``,
    or ``seed`` for the first ``h`` periods of the series. In historical
    mode the factor for row ``j`` is estimated from errors realized by its
    origin only.
    """
    raw = np.asarray(raw, dtype=float)
    y = np.asarray(actuals, dtype=float)
    if raw.shape != y.shape:
        raise LengthMismatch(f"{raw.size} forecasts vs {y.size} actuals")
    T, h = raw.size, spec.h
    ords = _ordinals(periods, T)
    e = y - raw
    pos = {o: i for i, o in enumerate(ords.tolist())}
    seed_arr = _seed_array(seed, h)
    prior = np.full(T, np.nan)
    for j, o in enumerate(ords.tolist()):
        i = pos.get(o - h)
        if i is not None:
            prior[j] = e[i]
        elif seed_arr is not None and ords.size and o - h < ords[0] and o - ords[0] < h:
            prior[j] = seed_arr[o - ords[0]]
    if spec.kind == "none":
        gam = np.zeros(T)
    elif spec.kind == "fixed":
        gam = np.full(T, spec.gamma)
    else:
        gam = historical_gamma_path(e, h, spec.clamp, spec.exclusion,
                                    periods, spec.t0)
    applied = np.isfinite(prior) & np.isfinite(gam) & (spec.kind != "none")
    b = np.where(applied, np.nan_to_num(gam) * np.nan_to_num(prior), 0.0)
    if periods is None:
        targets = tuple(range(T))
        origins = tuple(t - h for t in targets)
    else:
        targets = tuple(periods)
        origins = tuple(t - h for t in targets)
    return CorrectedForecastStream(targets, origins, raw, b, raw + b, gam, applied, y, spec)
