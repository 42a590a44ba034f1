"""Combination weights: equal, Bates-Granger and restricted least squares."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg

from .exceptions import (InsufficientData, InvalidArity, LengthMismatch,
                         RankDeficient, SingularMoment, ValidationError)

__all__ = [
    "CombinationWeights",
    "ErrorMomentMatrix",
    "equal_weights",
    "error_moments",
    "bg_weights",
    "restricted_ols_weights",
    "combine",
    "COND_CAP",
]

COND_CAP = 1e12
SUM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CombinationWeights:
    """Weight vector over forecasters, summing to one."""

    ids: tuple
    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float).reshape(-1)
        ids = tuple(self.ids) if self.ids is not None else tuple(range(w.size))
        if len(ids) != w.size:
            raise LengthMismatch(f"{len(ids)} ids for {w.size} weights")
        if abs(w.sum() - 1.0) > SUM_TOL:
            raise ValidationError(f"weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "w", w)

    def __len__(self):
        return self.w.size

    def __array__(self, dtype=None, copy=None):
        return self.w if dtype is None else self.w.astype(dtype)

    def as_dict(self) -> dict:
        return dict(zip(self.ids, self.w.tolist()))

    @property
    def l1(self) -> float:
        return float(np.abs(self.w).sum())


@dataclass(frozen=True, eq=False)
class ErrorMomentMatrix:
    """Second-moment matrix of individual forecast errors."""

    sigma: np.ndarray

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        if s.shape[0] != s.shape[1]:
            raise ValidationError(f"moment matrix must be square, got {s.shape}")
        if not np.allclose(s, s.T, rtol=0, atol=1e-12 * max(1.0, np.abs(s).max())):
            raise ValidationError("moment matrix is not symmetric")
        if np.any(np.diag(s) < 0):
            raise ValidationError("moment matrix has a negative diagonal entry")
        object.__setattr__(self, "sigma", s)

    @property
    def n(self) -> int:
        return self.sigma.shape[0]


def equal_weights(n: int, ids: Sequence | None = None) -> CombinationWeights:
    if n < 1:
        raise InvalidArity(f"need at least one forecaster, got {n}")
    return CombinationWeights(ids, np.full(n, 1.0 / n))


def error_moments(error_matrix, centered: bool = False) -> ErrorMomentMatrix:
    """Sample second moments ``E'E / T`` of a T x n error matrix.

    The uncentered version is the default; with ``centered=True`` column
    means are removed first (exploration only, it breaks the equivalence
    with restricted least squares).
    """
    E = np.asarray(error_matrix, dtype=float)
    if E.ndim == 1:
        E = E[:, None]
    if E.shape[0] < 1:
        raise InsufficientData("no error rows")
    if centered:
        E = E - E.mean(axis=0)
    S = E.T @ E / E.shape[0]
    return ErrorMomentMatrix(0.5 * (S + S.T))


def _solve_sym(S: np.ndarray, b: np.ndarray, cond_cap: float) -> np.ndarray:
    if not np.all(np.isfinite(S)):
        raise SingularMoment("moment matrix has non-finite entries")
    cond = np.linalg.cond(S)
    if not np.isfinite(cond) or cond > cond_cap:
        raise SingularMoment(f"moment matrix condition number {cond:.3g} exceeds {cond_cap:.3g}")
    try:
        return linalg.cho_solve(linalg.cho_factor(S, lower=True), b)
    except linalg.LinAlgError:
        # indefinite but well conditioned, e.g. a user-supplied matrix
        return linalg.lu_solve(linalg.lu_factor(S), b)


def bg_weights(sigma, ids: Sequence | None = None,
               cond_cap: float = COND_CAP) -> CombinationWeights:
    """Variance-minimizing weights ``S^-1 i / (i' S^-1 i)``.

    Raises
    ------
    SingularMoment
        If the condition number of ``sigma`` exceeds ``cond_cap``.
    """
    S = sigma.sigma if isinstance(sigma, ErrorMomentMatrix) else np.atleast_2d(
        np.asarray(sigma, dtype=float))
    n = S.shape[0]
    if n == 1:
        if not S[0, 0] > 0:
            raise SingularMoment("zero error variance")
        return CombinationWeights(ids, [1.0])
    x = _solve_sym(S, np.ones(n), cond_cap)
    denom = x.sum()
    if denom == 0 or not np.isfinite(denom):
        raise SingularMoment("i' S^-1 i is zero")
    w = x / denom
    # push rounding error into the largest weight so the sum is exactly 1
    w[np.argmax(np.abs(w))] += 1.0 - w.sum()
    return CombinationWeights(ids, w)


def restricted_ols_weights(F, y, ids: Sequence | None = None) -> CombinationWeights:
    """Least-squares weights constrained to sum to one.

    Substitutes ``w_n = 1 - sum(w_1..w_{n-1})`` and regresses ``y - f_n``
    on ``f_i - f_n`` without intercept.
    """
    F = np.asarray(F, dtype=float)
    y = np.asarray(y, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    T, n = F.shape
    if y.shape != (T,):
        raise LengthMismatch(f"F has {T} rows, y has shape {y.shape}")
    if n == 1:
        return CombinationWeights(ids, [1.0])
    if T < n:
        raise InsufficientData(f"need at least {n} observations, got {T}")
    Z = F[:, :-1] - F[:, -1:]
    r = y - F[:, -1]
    beta, _, rank, sv = np.linalg.lstsq(Z, r, rcond=None)
    if rank < n - 1 or sv[-1] <= sv[0] * np.sqrt(np.finfo(float).eps):
        raise RankDeficient("forecast differences are collinear over the sample")
    w = np.empty(n)
    w[:-1] = beta
    w[-1] = 1.0 - beta.sum()
    return CombinationWeights(ids, w)


def combine(weights, f) -> np.ndarray | float:
    """Combined forecast ``w'f``; ``f`` may be one vector or a T x n matrix."""
    w = np.asarray(weights, dtype=float)
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != w.size:
        raise LengthMismatch(f"{w.size} weights for {f.shape[-1]} forecasts")
    out = f @ w
    return float(out) if np.ndim(out) == 0 else out
