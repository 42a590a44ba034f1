"""Joint estimation of combination weights and error dependence.

Weights are always constrained to sum to one. With ``E = y i' - F`` the
combined error is ``E w``, so every GLS problem here reduces to
Bates-Granger weights on a whitened error matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import _backend
from .combine import CombinationWeights, bg_weights, combine, restricted_ols_weights
from .correct import clamp_open
from .exceptions import (InsufficientData, LengthMismatch, NonStationary, NotSPD,
                         RankDeficient, ValidationError)

__all__ = [
    "Ar1GlsFit",
    "ArmaCovariance",
    "RiskBoundReport",
    "TwoStepFit",
    "hildreth_lu",
    "gls_forecast",
    "arma_acovf",
    "arma_autocovariance",
    "ar_lag_covariance",
    "general_gls_weights",
    "two_step_gls",
    "risk_bound_report",
]

GAMMA_BOUNDS = (-0.99, 0.99)


@dataclass(frozen=True, eq=False)
class Ar1GlsFit:
    weights: CombinationWeights
    gamma: float
    ssr: float
    trace: list = field(repr=False, default_factory=list)
    nobs: int = 0

    @property
    def sigma2(self) -> float:
        """Innovation variance estimate SSR / (rows - n)."""
        dof = self.nobs - len(self.weights)
        return self.ssr / dof if dof > 0 else np.nan


def _check_Fy(F, y):
    F = np.asarray(F, dtype=float)
    y = np.asarray(y, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if y.shape != (F.shape[0],):
        raise LengthMismatch(f"F has {F.shape[0]} rows, y has shape {y.shape}")
    return F, y


def _transform(F, y, h, g):
    return F[h:] - g * F[:-h], y[h:] - g * y[:-h]


_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def _golden(f, a, b, tol):
    c, d = b - _INVPHI * (b - a), a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def hildreth_lu(F, y, h: int = 1, step: float = 0.01, grid=None,
                bounds=GAMMA_BOUNDS, refine: bool = True, tol: float = 1e-4,
                ids=None) -> Ar1GlsFit:
    """Grid search for the AR(h) coefficient of the combined error.

    For each ``g`` the model ``y_t - g y_{t-h} = w'(f_t - g f_{t-h}) + xi_t``
    is fit by sum-to-one least squares on rows ``h..T-1``; the ``g`` with
    the smallest SSR wins (ties go to the smaller ``g``) and is polished by
    a bounded golden-section search over the neighbouring grid cells.

    Parameters
    ----------
    grid : array_like, optional
        Explicit candidate values; replaces the ``step`` grid over ``bounds``.
        Refinement is skipped when only one candidate is given.
    """
    F, y = _check_Fy(F, y)
    T, n = F.shape
    if T < n + 2 or T <= h + n - 1:
        raise InsufficientData(f"{T} rows is too few for {n} forecasters at horizon {h}")
    if grid is None:
        if not 0 < step <= 0.5:
            raise ValidationError(f"grid step must be in (0, 0.5], got {step}")
        lo, hi = bounds
        k = int(np.floor((hi - lo) / step + 1e-9))
        grid = np.round(lo + step * np.arange(k + 1), 12)
    grid = np.sort(np.asarray(grid, dtype=float))
    ssr = _backend.ar1_ssr_profile(F, y, h, grid)
    if np.any(np.isnan(ssr)):
        raise RankDeficient("transformed forecasts are collinear at some grid point")
    # ties (up to rounding) go to the smallest gamma
    best = int(np.flatnonzero(ssr <= ssr.min() + 1e-12 * float(y @ y))[0])
    g = float(grid[best])
    trace = list(zip(grid.tolist(), ssr.tolist()))
    if refine and grid.size > 1:
        a = grid[max(best - 1, 0)]
        b = grid[min(best + 1, grid.size - 1)]
        x, fx = _golden(lambda x: _backend.ar1_ssr_profile(F, y, h, np.array([x]))[0],
                        a, b, tol)
        if fx < ssr[best]:
            g = x
    Ft, yt = _transform(F, y, h, g)
    w = restricted_ols_weights(Ft, yt, ids)
    resid = yt - Ft @ w.w
    return Ar1GlsFit(w, g, float(resid @ resid), trace, T - h)


def gls_forecast(fit: Ar1GlsFit, f_next, f_prev, y_T: float) -> float:
    """Combine and correct in one go: ``w'f_next + g (y_T - w'f_prev)``."""
    w = fit.weights.w
    f_next = np.asarray(f_next, dtype=float)
    f_prev = np.asarray(f_prev, dtype=float)
    if f_next.shape != w.shape or f_prev.shape != w.shape:
        raise LengthMismatch(f"fit has {w.size} weights")
    return combine(w, f_next) + fit.gamma * (float(y_T) - combine(w, f_prev))


@dataclass(frozen=True)
class ArmaCovariance:
    """Stationary ARMA(p, q) error process
    ``x_t = sum ar_i x_{t-i} + eps_t + sum ma_j eps_{t-j}`` over ``T`` periods."""

    ar: tuple = ()
    ma: tuple = ()
    sigma2: float = 1.0
    T: int = 1

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(float(a) for a in np.atleast_1d(self.ar)))
        object.__setattr__(self, "ma", tuple(float(m) for m in np.atleast_1d(self.ma)))
        if not self.sigma2 > 0:
            raise ValidationError("innovation variance must be positive")
        if self.T < 1:
            raise ValidationError("T must be positive")

    @property
    def is_stationary(self) -> bool:
        ar = np.trim_zeros(np.asarray(self.ar), "b")
        if ar.size == 0:
            return True
        # roots of 1 - a1 z - ... - ap z^p, highest power first for np.roots
        roots = np.roots(np.r_[-ar[::-1], 1.0])
        return bool(np.all(np.abs(roots) > 1.0 + 1e-10))


def arma_acovf(ar, ma, sigma2: float, nlags: int) -> np.ndarray:
    """Theoretical autocovariances at lags ``0..nlags``.

    Solves the linear system for lags ``0..p`` and recurses beyond.
    """
    phi = np.asarray(ar, dtype=float).reshape(-1)
    theta = np.r_[1.0, np.asarray(ma, dtype=float).reshape(-1)]
    p, q = phi.size, theta.size - 1
    psi = np.zeros(q + 1)
    for j in range(q + 1):
        psi[j] = theta[j] + sum(phi[i - 1] * psi[j - i] for i in range(1, min(j, p) + 1))

    def rhs(k):
        return sigma2 * sum(theta[j] * psi[j - k] for j in range(k, q + 1))

    out = np.zeros(max(nlags, p) + 1)
    if p:
        A = np.zeros((p + 1, p + 1))
        for k in range(p + 1):
            A[k, k] += 1.0
            for i in range(1, p + 1):
                A[k, abs(k - i)] -= phi[i - 1]
        out[:p + 1] = np.linalg.solve(A, [rhs(k) for k in range(p + 1)])
    else:
        out[0] = rhs(0)
    for k in range(p + 1, out.size):
        out[k] = sum(phi[i - 1] * out[k - i] for i in range(1, p + 1)) + (rhs(k) if k <= q else 0.0)
    return out[:nlags + 1]


def arma_autocovariance(spec: ArmaCovariance) -> np.ndarray:
    """T x T Toeplitz covariance matrix of the process."""
    if not spec.is_stationary:
        raise NonStationary(f"AR coefficients {spec.ar} are not stationary")
    if len(spec.ar) == 1 and not spec.ma:
        phi = spec.ar[0]
        acv = spec.sigma2 * phi ** np.arange(spec.T) / (1.0 - phi * phi)
    else:
        acv = arma_acovf(spec.ar, spec.ma, spec.sigma2, spec.T - 1)
    return linalg.toeplitz(acv)


def ar_lag_covariance(gamma: float, T: int, h: int = 1, sigma2: float = 1.0) -> np.ndarray:
    """Covariance of ``x_t = gamma x_{t-h} + eps_t`` (AR(1) when h == 1)."""
    ar = np.zeros(h)
    ar[-1] = gamma
    if h == 1:
        return arma_autocovariance(ArmaCovariance((gamma,), (), sigma2, T))
    return arma_autocovariance(ArmaCovariance(tuple(ar), (), sigma2, T))


def _whitener(omega):
    omega = np.asarray(omega, dtype=float)
    try:
        return linalg.cholesky(omega, lower=True)
    except linalg.LinAlgError as exc:
        raise NotSPD("covariance matrix is not positive definite") from exc


def whiten(omega, E) -> np.ndarray:
    """``L^-1 E`` where ``omega = L L'``."""
    L = _whitener(omega)
    return linalg.solve_triangular(L, E, lower=True)


def general_gls_weights(F, y, omega, ids=None) -> CombinationWeights:
    """Sum-to-one weights minimizing ``(y - Fw)' omega^-1 (y - Fw)``."""
    F, y = _check_Fy(F, y)
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (y.size, y.size):
        raise LengthMismatch(f"omega is {omega.shape}, sample has {y.size} rows")
    Et = whiten(omega, y[:, None] - F)
    S = Et.T @ Et
    return bg_weights(0.5 * (S + S.T), ids)


@dataclass(frozen=True, eq=False)
class TwoStepFit:
    weights: CombinationWeights
    gamma: float
    ols_weights: CombinationWeights

    def __iter__(self):
        return iter((self.weights, self.gamma))


def _residual_ar(u, h, clamp):
    den = u[:-h] @ u[:-h]
    if den == 0:
        return 0.0
    return clamp_open(float(u[h:] @ u[:-h] / den), clamp)


def two_step_gls(F, y, h: int = 1, iterations: int = 1, clamp=(-1.0, 1.0),
                 ids=None) -> TwoStepFit:
    """OLS weights, residual AR(h) coefficient, then GLS with that covariance.

    ``iterations`` extra passes re-estimate the coefficient from the GLS
    residuals and solve again.
    """
    F, y = _check_Fy(F, y)
    T, n = F.shape
    if T < n + 3:
        raise InsufficientData(f"{T} rows is too few for {n} forecasters")
    w_ols = restricted_ols_weights(F, y, ids)
    w = w_ols
    for _ in range(1 + max(0, int(iterations))):
        g = _residual_ar(y - F @ w.w, h, clamp)
        w = general_gls_weights(F, y, ar_lag_covariance(g, T, h), ids)
    return TwoStepFit(w, g, w_ols)


@dataclass(frozen=True)
class RiskBoundReport:
    a_T: float
    c: float
    risk_opt: float          # R(w_opt): true-covariance risk at the true-covariance optimum
    emp_risk_hat: float      # R_n(w_hat): estimated-covariance risk at its own optimum
    risk_hat: float          # R(w_hat)
    gaps: tuple
    bounds: tuple
    w_opt: tuple
    w_hat: tuple
    premise_holds: bool

    @property
    def slack(self) -> tuple:
        return tuple(b - g for g, b in zip(self.gaps, self.bounds))

    @property
    def holds(self) -> bool:
        tol = 1e-9 * max(1.0, abs(self.risk_opt), abs(self.risk_hat), abs(self.emp_risk_hat))
        return all(g <= b + tol for g, b in zip(self.gaps, self.bounds))


def risk_bound_report(F, y, gamma_true: float, gamma_hat: float, c: float | None = None,
                      h: int = 1) -> RiskBoundReport:
    """Compare true and estimated-covariance GLS risks against ``a_T c^2`` bounds.

    ``a_T`` is the max-abs entry of ``E'(omega_hat^-1 - omega^-1)E``. When
    ``c`` is omitted the larger L1 norm of the two weight vectors is used,
    which is the smallest budget under which all three bounds apply.
    """
    F, y = _check_Fy(F, y)
    T = y.size
    E = y[:, None] - F
    Ew = whiten(ar_lag_covariance(gamma_true, T, h), E)
    Ewh = whiten(ar_lag_covariance(gamma_hat, T, h), E)
    M = Ew.T @ Ew
    Mh = Ewh.T @ Ewh
    M, Mh = 0.5 * (M + M.T), 0.5 * (Mh + Mh.T)
    a_T = float(np.max(np.abs(Mh - M)))
    w_opt = bg_weights(M).w
    w_hat = bg_weights(Mh).w

    def R(w):
        return float(w @ M @ w)

    def Rn(w):
        return float(w @ Mh @ w)

    need = max(np.abs(w_opt).sum(), np.abs(w_hat).sum())
    if c is None:
        c = float(need)
    r_opt, r_hat, rn_hat = R(w_opt), R(w_hat), Rn(w_hat)
    gaps = (abs(r_opt - rn_hat), abs(r_hat - rn_hat), abs(r_hat - r_opt))
    bound = a_T * c * c
    return RiskBoundReport(a_T, float(c), r_opt, rn_hat, r_hat, gaps,
                           (bound, bound, 2 * bound), tuple(w_opt), tuple(w_hat),
                           bool(need <= c + 1e-12))
