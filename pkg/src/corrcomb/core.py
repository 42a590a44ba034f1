"""Calendar indices, series, panels and sample alignment.

Everything here is an immutable value. Quarters are the native frequency;
:class:`PeriodIndex` carries ``per_year`` so the monthly 1953 demo runs
through the same code path (``per_year=12``).
"""
from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .exceptions import DuplicateKey, EmptyIntersection, LengthMismatch, ValidationError

__all__ = [
    "PeriodIndex",
    "QuarterIndex",
    "quarter",
    "ActualSeries",
    "ForecastPanel",
    "PeriodMask",
    "AlignedSample",
    "align",
    "errors_of",
    "in_mask",
    "COVID",
    "standard_periods",
]


@functools.total_ordering
@dataclass(frozen=True)
class PeriodIndex:
    """A calendar period, e.g. ``2000Q1`` or ``1953M07``.

    Parameters
    ----------
    year : int
    period : int
        1-based position within the year.
    per_year : int, default 4
        Number of periods per year (4 for quarters, 12 for months).
    """

    year: int
    period: int
    per_year: int = 4

    def __post_init__(self):
        if self.per_year < 1:
            raise ValidationError(f"per_year must be positive, got {self.per_year}")
        if not 1 <= self.period <= self.per_year:
            raise ValidationError(
                f"period {self.period} outside 1..{self.per_year}")

    @property
    def quarter(self) -> int:
        return self.period

    @property
    def ordinal(self) -> int:
        return self.year * self.per_year + self.period - 1

    @classmethod
    def from_ordinal(cls, ordinal: int, per_year: int = 4) -> "PeriodIndex":
        year, rem = divmod(int(ordinal), per_year)
        return cls(year, rem + 1, per_year)

    @classmethod
    def parse(cls, text: str) -> "PeriodIndex":
        """Parse ``2000Q1``, ``2000:1``, ``2000-Q1``, ``1953M07`` or ``1953P3/6``."""
        s = text.strip().upper()
        m = re.fullmatch(r"(\d{4})\s*[-:]?\s*Q([1-4])", s) or re.fullmatch(r"(\d{4}):([1-4])", s)
        if m:
            return cls(int(m.group(1)), int(m.group(2)), 4)
        m = re.fullmatch(r"(\d{4})\s*-?\s*M(\d{1,2})", s)
        if m:
            return cls(int(m.group(1)), int(m.group(2)), 12)
        m = re.fullmatch(r"(\d{4})P(\d+)/(\d+)", s)
        if m:
            return cls(int(m.group(1)), int(m.group(2)), int(m.group(3)))
        raise ValidationError(f"cannot parse period {text!r}")

    def _check(self, other: "PeriodIndex"):
        if self.per_year != other.per_year:
            raise ValidationError("cannot compare periods of different frequency")

    def __lt__(self, other):
        if not isinstance(other, PeriodIndex):
            return NotImplemented
        self._check(other)
        return self.ordinal < other.ordinal

    def __add__(self, k):
        if isinstance(k, (int, np.integer)):
            return PeriodIndex.from_ordinal(self.ordinal + int(k), self.per_year)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, PeriodIndex):
            self._check(other)
            return self.ordinal - other.ordinal
        if isinstance(other, (int, np.integer)):
            return self + (-int(other))
        return NotImplemented

    def __str__(self):
        if self.per_year == 4:
            return f"{self.year}Q{self.period}"
        if self.per_year == 12:
            return f"{self.year}M{self.period:02d}"
        return f"{self.year}P{self.period}/{self.per_year}"

    def __repr__(self):
        return f"PeriodIndex({self})"


QuarterIndex = PeriodIndex


def quarter(year: int, q: int) -> PeriodIndex:
    return PeriodIndex(year, q, 4)


def _as_period(q) -> PeriodIndex:
    return q if isinstance(q, PeriodIndex) else PeriodIndex.parse(str(q))


class ActualSeries(Mapping):
    """Realized target values keyed by period, iterated in calendar order."""

    def __init__(self, values: Mapping | Iterable = ()):
        pairs = values.items() if isinstance(values, Mapping) else values
        data = {}
        for q, v in pairs:
            q = _as_period(q)
            if q in data:
                raise DuplicateKey(f"duplicate actual for {q}")
            data[q] = float(v)
        freqs = {q.per_year for q in data}
        if len(freqs) > 1:
            raise ValidationError("actuals mix period frequencies")
        self._data = MappingProxyType(dict(sorted(data.items())))

    def __getitem__(self, q):
        return self._data[q]

    def __iter__(self) -> Iterator[PeriodIndex]:
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def __eq__(self, other):
        if not isinstance(other, ActualSeries):
            return NotImplemented
        return dict(self._data) == dict(other._data)

    def __repr__(self):
        return f"ActualSeries({len(self)} periods)"

    @property
    def periods(self) -> list[PeriodIndex]:
        return list(self._data)

    def to_array(self) -> np.ndarray:
        return np.fromiter(self._data.values(), dtype=float, count=len(self._data))


@dataclass(frozen=True, eq=False)
class ForecastPanel:
    """Forecaster x origin grid of h-step forecasts.

    ``entries`` maps ``(forecaster_id, origin)`` to a forecast of the target
    ``origin + horizon``. Absent keys are missing forecasts. ``imputed``
    holds the keys that were filled in rather than submitted, ``gaps`` the
    keys that appeared in the source file with an empty value.
    """

    forecaster_ids: tuple
    horizon: int
    entries: Mapping
    imputed: frozenset = field(default_factory=frozenset)
    gaps: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        ids = tuple(self.forecaster_ids)
        if len(set(ids)) != len(ids):
            raise DuplicateKey("forecaster ids must be unique")
        if int(self.horizon) < 1:
            raise ValidationError(f"horizon must be >= 1, got {self.horizon}")
        known = set(ids)
        entries = {}
        for (fid, origin), value in self.entries.items():
            if fid not in known:
                raise ValidationError(f"entry for unknown forecaster {fid!r}")
            entries[(fid, _as_period(origin))] = float(value)
        object.__setattr__(self, "forecaster_ids", ids)
        object.__setattr__(self, "horizon", int(self.horizon))
        object.__setattr__(self, "entries", MappingProxyType(entries))
        object.__setattr__(self, "imputed", frozenset(self.imputed))
        object.__setattr__(self, "gaps", frozenset(self.gaps))

    def __eq__(self, other):
        if not isinstance(other, ForecastPanel):
            return NotImplemented
        return (self.forecaster_ids == other.forecaster_ids
                and self.horizon == other.horizon
                and dict(self.entries) == dict(other.entries)
                and self.imputed == other.imputed)

    def __len__(self):
        return len(self.entries)

    def get(self, fid, origin, default=None):
        return self.entries.get((fid, origin), default)

    def origins(self) -> list[PeriodIndex]:
        return sorted({o for _, o in self.entries})

    def target(self, origin: PeriodIndex) -> PeriodIndex:
        return origin + self.horizon

    def count(self, fid, mask: "PeriodMask | None" = None) -> int:
        return sum(1 for (f, o) in self.entries
                   if f == fid and (mask is None or mask.contains(o)))

    def subset(self, ids: Sequence) -> "ForecastPanel":
        keep = set(ids)
        return ForecastPanel(
            tuple(ids), self.horizon,
            {k: v for k, v in self.entries.items() if k[0] in keep},
            imputed={k for k in self.imputed if k[0] in keep},
            gaps={k for k in self.gaps if k[0] in keep},
        )

    def imputation_share(self) -> float:
        return len(self.imputed) / len(self.entries) if self.entries else 0.0

    def cross_section_mean(self, name="mean") -> "ForecastPanel":
        """Equal-weight combination over whichever forecasters are present."""
        sums: dict = {}
        for (_, origin), value in self.entries.items():
            s = sums.setdefault(origin, [0.0, 0])
            s[0] += value
            s[1] += 1
        return ForecastPanel((name,), self.horizon,
                             {(name, o): s / k for o, (s, k) in sums.items()})


@dataclass(frozen=True)
class PeriodMask:
    """Inclusive period window with optional excluded sub-ranges."""

    name: str
    start: PeriodIndex
    end: PeriodIndex
    excluded: tuple = ()

    def __post_init__(self):
        start, end = _as_period(self.start), _as_period(self.end)
        if end < start:
            raise ValidationError(f"mask {self.name!r}: start {start} after end {end}")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)
        object.__setattr__(self, "excluded", tuple(
            (_as_period(a), _as_period(b)) for a, b in self.excluded))

    def contains(self, q: PeriodIndex) -> bool:
        if q.per_year != self.start.per_year:
            return False
        if not self.start <= q <= self.end:
            return False
        return not any(a <= q <= b for a, b in self.excluded)

    __contains__ = contains

    @classmethod
    def parse(cls, label: str, exclusion: tuple = None) -> "PeriodMask":
        """Build a mask from a label like ``2000Q1--2025Q2*``.

        A trailing ``*`` excludes ``exclusion`` (COVID quarters by default).
        """
        text = label.strip()
        star = text.endswith("*")
        body = text.rstrip("*").strip()
        parts = re.split(r"\s*-{1,2}\s*(?=\d{4})", body)
        if len(parts) != 2:
            raise ValidationError(f"cannot parse period window {label!r}")
        excluded = ()
        if star:
            excluded = (exclusion or (COVID.start, COVID.end),)
        return cls(text, PeriodIndex.parse(parts[0]), PeriodIndex.parse(parts[1]), excluded)


COVID = PeriodMask("COVID", PeriodIndex(2020, 1), PeriodIndex(2022, 4))


def standard_periods(first="1969Q1", last="2025Q2") -> list[PeriodMask]:
    """The nine evaluation windows used for the quarterly SPF tables."""
    labels = [
        f"{first}--{last}", f"{first}--{last}*", f"{first}--1999Q4",
        f"2000Q1--{last}", f"2000Q1--{last}*", "2000Q1--2008Q4",
        "2000Q1--2019Q4", "2010Q1--2019Q4", f"2022Q1--{last}",
    ]
    return [PeriodMask.parse(s) for s in labels]


def in_mask(q: PeriodIndex, mask: PeriodMask) -> bool:
    return mask.contains(q)


@dataclass(frozen=True, eq=False)
class AlignedSample:
    """Balanced estimation sample: row t holds y at ``targets[t]`` and the
    forecasts of it made ``horizon`` periods earlier."""

    F: np.ndarray
    y: np.ndarray
    targets: tuple
    ids: tuple
    horizon: int
    dropped: tuple = ()

    @property
    def origins(self) -> list[PeriodIndex]:
        return [t - self.horizon for t in self.targets]

    @property
    def errors(self) -> np.ndarray:
        return self.y[:, None] - self.F

    def to_panel(self) -> ForecastPanel:
        entries = {(fid, t - self.horizon): self.F[r, c]
                   for r, t in enumerate(self.targets) for c, fid in enumerate(self.ids)}
        return ForecastPanel(self.ids, self.horizon, entries)

    def to_actuals(self) -> ActualSeries:
        return ActualSeries(zip(self.targets, self.y))

    def select(self, rows) -> "AlignedSample":
        rows = np.asarray(rows)
        if rows.dtype == bool:
            rows = np.flatnonzero(rows)
        return AlignedSample(self.F[rows], self.y[rows],
                             tuple(self.targets[i] for i in rows), self.ids, self.horizon)


def align(panel: ForecastPanel, actuals: ActualSeries) -> AlignedSample:
    """Match each forecaster's forecasts with the realized target values.

    Candidate rows are all target periods for which any forecast exists.
    A row is dropped, and reported in ``dropped``, when a forecaster or the
    actual value is missing for it.
    """
    h = panel.horizon
    ids = panel.forecaster_ids
    targets = sorted({o + h for _, o in panel.entries})
    rows, kept, dropped = [], [], []
    for t in targets:
        origin = t - h
        fc = [panel.entries.get((fid, origin)) for fid in ids]
        if not ids or any(v is None for v in fc) or t not in actuals:
            dropped.append(t)
            continue
        rows.append(fc)
        kept.append(t)
    if not kept:
        raise EmptyIntersection(
            f"no target period has all {len(ids)} forecasts and an actual value")
    F = np.asarray(rows, dtype=float)
    y = np.array([actuals[t] for t in kept])
    return AlignedSample(F, y, tuple(kept), ids, h, tuple(dropped))


def errors_of(forecasts, actuals) -> np.ndarray:
    """Forecast errors, actual minus forecast."""
    f = np.asarray(forecasts, dtype=float)
    y = np.asarray(actuals, dtype=float)
    if f.shape[0] != y.shape[0]:
        raise LengthMismatch(f"{f.shape[0]} forecasts vs {y.shape[0]} actuals")
    if f.ndim == 2:
        return y[:, None] - f
    return y - f
