"""Flat ``key = value`` run configuration.

Lines starting with ``#`` are comments. Lists are comma separated
(``factors``) or semicolon separated (``masks``). Unknown keys are an
error. Relative paths resolve against ``data_dir`` (or the directory in
``CORRCOMB_DATA_DIR``).
"""
from __future__ import annotations

import dataclasses
import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path

from .core import COVID, PeriodIndex, PeriodMask, standard_periods
from .evaluate import DEFAULT_FACTORS
from .exceptions import ConfigError, ValidationError

__all__ = ["RunConfig", "load_config", "parse_config_text"]


@dataclass
class RunConfig:
    spf_path: str = ""
    panel_path: str = ""
    actuals_path: str = ""
    actuals_transform: str = "none"
    data_dir: str = ""
    indicator: str = "UNEMP"
    column: str = ""            # default: indicator + "2"
    h: int = 1
    origin_shift: int = -1      # survey quarter - 1, so column "2" targets the survey quarter
    masks: list = field(default_factory=list)
    factors: list = field(default_factory=lambda: list(DEFAULT_FACTORS))
    hist: bool = True
    exclusion: str = "2020Q1--2022Q4"
    t0: str = ""
    eval_start: str = ""
    compare_mask: str = "2000Q1--2019Q4"
    min_obs: int = 0
    selection_mask: str = ""
    impute: str = "forward"
    fixed_gamma: float = 0.5
    min_window: int = 0
    hl_step: float = 0.01
    max_lag: int = 12
    seed_prior: list = field(default_factory=list)
    output_dir: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.h < 1:
            raise ConfigError("h must be >= 1")
        if self.impute not in ("forward", "none"):
            raise ConfigError(f"impute must be 'forward' or 'none', got {self.impute!r}")
        if self.actuals_transform not in ("none", "pct", "log"):
            raise ConfigError(f"unknown actuals_transform {self.actuals_transform!r}")
        if not 0 < self.hl_step <= 0.5:
            raise ConfigError("hl_step must be in (0, 0.5]")
        if self.max_lag < 1:
            raise ConfigError("max_lag must be >= 1")
        try:
            self.mask_objects()
            self.exclusion_mask()
            self.period("t0")
            self.period("eval_start")
        except ValidationError as exc:
            raise ConfigError(str(exc)) from None

    # derived values

    @property
    def spf_column(self) -> str:
        return self.column or f"{self.indicator}2"

    def exclusion_mask(self) -> PeriodMask | None:
        if self.exclusion.strip().lower() in ("", "none"):
            return None
        m = PeriodMask.parse(self.exclusion)
        return PeriodMask("exclusion", m.start, m.end)

    def mask_objects(self) -> list[PeriodMask]:
        ex = self.exclusion_mask() or COVID
        if not self.masks:
            return standard_periods()
        return [PeriodMask.parse(s, (ex.start, ex.end)) for s in self.masks]

    def named_mask(self, key: str) -> PeriodMask | None:
        label = getattr(self, key)
        if not label:
            return None
        ex = self.exclusion_mask() or COVID
        return PeriodMask.parse(label, (ex.start, ex.end))

    def period(self, key: str) -> PeriodIndex | None:
        s = getattr(self, key)
        return PeriodIndex.parse(s) if s else None

    def resolve(self, path: str) -> Path:
        base = self.data_dir or os.environ.get("CORRCOMB_DATA_DIR", "")
        p = Path(path)
        return p if p.is_absolute() or not base else Path(base) / p

    def canonical(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, list):
                sep = ";" if f.name == "masks" else ","
                v = sep.join(str(x) for x in v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _convert(key: str, raw: str):
    default = _FIELDS[key].default
    if default is dataclasses.MISSING:
        default = _FIELDS[key].default_factory()
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, list):
            if not raw:
                return []
            if key == "masks":
                return [s.strip() for s in raw.split(";") if s.strip()]
            return [float(s) for s in raw.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw


def parse_config_text(text: str, overrides: dict | None = None) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: {key!r} given twice")
        values[key] = _convert(key, raw)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = _convert(key, value) if isinstance(value, str) else value
    return RunConfig(**values)


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    text = ""
    if path is not None:
        try:
            text = Path(path).read_text()
        except FileNotFoundError:
            raise FileNotFoundError(f"config file not found: {path}") from None
    return parse_config_text(text, overrides)
