"""Pure numpy reference implementations of the compiled kernels.

Signatures and results match ``_kernels.pyx``; these are used when the
extension is not built or ``CORRCOMB_PURE_PYTHON`` is set.
"""
import numpy as np


def ar1_ssr_profile(F, y, h, gammas):
    """SSR of the sum-to-one regression of ``y_t - g y_{t-h}`` on
    ``F_t - g F_{t-h}``, for every ``g`` in ``gammas``.

    Rank-deficient transformed systems give NaN.
    """
    F = np.ascontiguousarray(F, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    gammas = np.asarray(gammas, dtype=float)
    n = F.shape[1]
    D = F[:, :-1] - F[:, -1:]
    r0 = y - F[:, -1]
    out = np.empty(gammas.size)
    for k, g in enumerate(gammas):
        r = r0[h:] - g * r0[:-h]
        if n == 1:
            out[k] = r @ r
            continue
        Z = D[h:] - g * D[:-h]
        beta, _, rank, _ = np.linalg.lstsq(Z, r, rcond=None)
        if rank < n - 1:
            out[k] = np.nan
            continue
        resid = r - Z @ beta
        out[k] = resid @ resid
    return out


def lag_moment_cumsums(lead, lag, usable):
    """Running sums of ``lead*lag``, ``lag**2`` and the usable-pair count."""
    lead = np.asarray(lead, dtype=float)
    lag = np.asarray(lag, dtype=float)
    u = np.asarray(usable, dtype=bool)
    num = np.cumsum(np.where(u, lead * lag, 0.0))
    den = np.cumsum(np.where(u, lag * lag, 0.0))
    cnt = np.cumsum(u.astype(np.int64))
    return num, den, cnt


def centered_acov_sums(e, max_lag):
    """``sum_{t>=k} (e_t - m)(e_{t-k} - m)`` for k = 0..max_lag."""
    d = np.asarray(e, dtype=float)
    d = d - d.mean()
    T = d.size
    return np.array([d[k:] @ d[:T - k] for k in range(max_lag + 1)])
