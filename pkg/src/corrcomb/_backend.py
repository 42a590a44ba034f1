"""Kernel selection: compiled extension if importable, numpy otherwise.

Set ``CORRCOMB_PURE_PYTHON=1`` to force the numpy kernels.
"""
import os

from . import _kernels_py

if os.environ.get("CORRCOMB_PURE_PYTHON", "").strip() not in ("", "0"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"

ar1_ssr_profile = kernels.ar1_ssr_profile
lag_moment_cumsums = kernels.lag_moment_cumsums
centered_acov_sums = kernels.centered_acov_sums
