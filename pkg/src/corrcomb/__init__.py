"""Forecast combination with correction for serially dependent errors.

Combine a panel of point forecasts (equal, Bates-Granger or restricted
least-squares weights), correct the combination with a fraction of its
previous error (fixed or re-estimated factor), or estimate weights and the
error autocorrelation jointly by GLS. :mod:`corrcomb.evaluate` scores all
of these out of sample on expanding windows.
"""
__version__ = "0.1.0"

from ._backend import BACKEND
from .combine import (CombinationWeights, ErrorMomentMatrix, bg_weights, combine,
                      equal_weights, error_moments, restricted_ols_weights)
from .core import (COVID, ActualSeries, AlignedSample, ForecastPanel, PeriodIndex,
                   PeriodMask, QuarterIndex, align, errors_of, in_mask, quarter,
                   standard_periods)
from .correct import (CorrectedForecastStream, CorrectionSpec, corrected_stream,
                      fixed_correction, historical_gamma, historical_gamma_path)
from .evaluate import (AcfResult, ComparisonTable, EvaluationReport, acf, factor_grid_report,
                       method_comparison, msfe, rmsfe, rolling_forecasts)
from .exceptions import *  # noqa: F401,F403
from .gls import (Ar1GlsFit, ArmaCovariance, RiskBoundReport, arma_autocovariance,
                  general_gls_weights, gls_forecast, hildreth_lu, risk_bound_report,
                  two_step_gls)
from .ingest import (demo_bg1969, impute_forward, parse_spf, read_actuals, read_panel,
                     select_forecasters, write_panel)
