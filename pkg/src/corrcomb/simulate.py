"""Synthetic forecast panels with known weights and AR error dynamics."""
from __future__ import annotations

import numpy as np

from .core import ActualSeries, ForecastPanel, PeriodIndex


def ar_series(phi: float, T: int, rng: np.random.Generator, scale: float = 1.0,
              burn: int = 200) -> np.ndarray:
    eps = rng.normal(scale=scale, size=T + burn)
    x = np.empty_like(eps)
    x[0] = eps[0]
    for t in range(1, eps.size):
        x[t] = phi * x[t - 1] + eps[t]
    return x[burn:]


def combination_dgp(T: int, weights, phi: float, rng: np.random.Generator,
                    signal_ar: float = 0.8, spread: float = 1.0, noise: float = 1.0):
    """Forecasts ``f_i = x + v_i`` around a persistent signal, and
    ``y = F w + u`` with AR(1) error ``u`` of coefficient ``phi``.

    Returns ``(F, y, u)``.
    """
    w = np.asarray(weights, dtype=float)
    x = ar_series(signal_ar, T, rng)
    F = x[:, None] + rng.normal(scale=spread, size=(T, w.size))
    u = ar_series(phi, T, rng, scale=noise)
    return F, F @ w + u, u


def puzzle_panel(T: int, n: int, phi: float, rng: np.random.Generator,
                 start: PeriodIndex = PeriodIndex(1990, 1)):
    """Panel where equal weights are optimal but the errors share an AR(1)
    component, as a quarterly :class:`ForecastPanel` and its actuals."""
    F, y, _ = combination_dgp(T, np.full(n, 1.0 / n), phi, rng)
    ids = tuple(f"F{i + 1}" for i in range(n))
    targets = [start + t for t in range(T)]
    entries = {(fid, q - 1): F[t, k] for t, q in enumerate(targets) for k, fid in enumerate(ids)}
    return ForecastPanel(ids, 1, entries), ActualSeries(zip(targets, y))
