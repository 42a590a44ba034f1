"""Compiled vs numpy kernels on the hot paths.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each case runs with the compiled kernels and again with the numpy
fallback swapped in; results are checked to agree before timing.
"""
import argparse
import timeit
from contextlib import contextmanager

import numpy as np

from corrcomb import _backend, _kernels_py, align, hildreth_lu, rolling_forecasts
from corrcomb.simulate import combination_dgp, puzzle_panel

KERNELS = ("ar1_ssr_profile", "lag_moment_cumsums", "centered_acov_sums")


@contextmanager
def numpy_kernels():
    saved = {k: getattr(_backend, k) for k in KERNELS}
    for k in KERNELS:
        setattr(_backend, k, getattr(_kernels_py, k))
    try:
        yield
    finally:
        for k, f in saved.items():
            setattr(_backend, k, f)


def cases():
    rng = np.random.default_rng(0)
    F, y, _ = combination_dgp(80, np.full(6, 1 / 6), 0.5, rng)
    grid = np.round(np.arange(-0.99, 0.995, 0.01), 2)
    e_short, e = rng.normal(size=120), rng.normal(size=5000)
    lead, lag = rng.normal(size=5000), rng.normal(size=5000)
    usable = np.ones(5000, dtype=bool)
    panel, actuals = puzzle_panel(80, 6, 0.5, rng)
    sample = align(panel, actuals)
    return {
        "ssr profile (T=80, n=6, 199 pts)": lambda: _backend.ar1_ssr_profile(F, y, 1, grid),
        "hildreth_lu (T=80, n=6)": lambda: hildreth_lu(F, y).gamma,
        "lag cumsums (T=5000)": lambda: _backend.lag_moment_cumsums(lead, lag, usable)[0],
        "acov sums (T=120, 12 lags)": lambda: _backend.centered_acov_sums(e_short, 12),
        "acov sums (T=5000, 12 lags)": lambda: _backend.centered_acov_sums(e, 12),
        "rolling_forecasts (T=80, n=6)": lambda: rolling_forecasts(sample).forecasts["gls"],
    }


def best(fn, repeat):
    t = timeit.Timer(fn)
    number, _ = t.autorange()
    return min(t.repeat(repeat, number)) / number


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    print(f"default backend: {_backend.BACKEND}")
    if _backend.BACKEND != "cython":
        print("compiled kernels unavailable; both columns use numpy")
    print(f"{'case':<34}{'compiled':>12}{'numpy':>12}{'speedup':>9}")
    for name, fn in cases().items():
        fast = fn()
        with numpy_kernels():
            slow = fn()
            t_np = best(fn, args.repeat)
        np.testing.assert_allclose(np.asarray(fast, dtype=float), np.asarray(slow, dtype=float),
                                   rtol=1e-6, atol=1e-9, equal_nan=True)
        t_c = best(fn, args.repeat)
        print(f"{name:<34}{t_c * 1e3:>10.3f}ms{t_np * 1e3:>10.3f}ms{t_np / t_c:>8.1f}x")


if __name__ == "__main__":
    main()
