"""OLS with Newey-West (Bartlett kernel) HAC covariance and Wald / t tests.

Inference is asymptotic: no degrees-of-freedom correction is applied to
the covariance, Wald statistics are referred to the chi-square
distribution and t statistics to the standard normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .distributions import chi2_sf, norm_cdf
from .exceptions import (RankDeficient, SingularRestriction, TooFewObservations,
                         ZeroVariance)

Alternative = Literal["two-sided", "less", "greater"]
Bandwidth = int | Literal["auto"]

EXACT_FIT_RTOL = 1e-12
NULL_RTOL = 1e-10


@dataclass(frozen=True)
class RegressionResult:
    """
    Fitted OLS regression.

    Attributes
    ----------
    coefficients : np.ndarray
        Estimates, one per column of the design.
    residuals : np.ndarray
        ``y - X @ coefficients``.
    hac_cov : np.ndarray
        Bartlett-kernel HAC sandwich covariance of the estimates.
    n : int
        Number of observations.
    bandwidth : int
        Number of lags in the Bartlett kernel.
    names : tuple of str
        Column labels.
    X : np.ndarray
        Design matrix used in the fit.
    """

    coefficients: np.ndarray
    residuals: np.ndarray
    hac_cov: np.ndarray
    n: int
    bandwidth: int
    names: tuple[str, ...]
    X: np.ndarray

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.hac_cov), 0.0, None))

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def se(self, name: str) -> float:
        return float(self.std_errors[self.names.index(name)])


@dataclass(frozen=True)
class HypothesisReport:
    statistic: float
    p_value: float
    df: int | None = None
    alternative: str = "two-sided"

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value out of range: {self.p_value}")


def _collinear_columns(X: np.ndarray, names: Sequence[str]) -> list[str]:
    kept: list[int] = []
    bad: list[str] = []
    for j in range(X.shape[1]):
        trial = kept + [j]
        if np.linalg.matrix_rank(X[:, trial]) == len(trial):
            kept = trial
        else:
            bad.append(names[j])
    return bad


def ols(X, y, bandwidth: Bandwidth = "auto",
        names: Sequence[str] | None = None) -> RegressionResult:
    """Least squares of ``y`` on the columns of ``X`` with HAC covariance.

    Parameters
    ----------
    X : array_like, shape (n, k)
    y : array_like, shape (n,)
    bandwidth : int or "auto"
        Bartlett lag truncation; ``"auto"`` applies :func:`nw_auto_bandwidth`
        to the regression scores.
    names : sequence of str, optional
        Column labels, used in error messages and lookups.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).ravel()
    n, k = X.shape
    if n != y.shape[0]:
        raise ValueError(f"X has {n} rows but y has {y.shape[0]} entries")
    names = tuple(names) if names is not None else tuple(f"x{j}" for j in range(k))
    if n < k or np.linalg.matrix_rank(X) < k:
        raise RankDeficient(_collinear_columns(X, names) or names)

    q, r = np.linalg.qr(X)
    beta = np.linalg.solve(r, q.T @ y)
    resid = y - X @ beta
    # an exact fit leaves only rounding noise, which would otherwise be
    # mistaken for a tiny but informative covariance
    if np.abs(resid).max(initial=0.0) <= EXACT_FIT_RTOL * max(np.abs(y).max(initial=0.0), 1.0):
        resid = np.zeros_like(resid)

    if bandwidth == "auto":
        m = nw_auto_bandwidth(X * resid[:, None]) if n >= 4 else 0
    else:
        m = int(bandwidth)
    cov = nw_hac_cov(X, resid, m)
    return RegressionResult(beta, resid, cov, n, m, names, X)


def nw_preliminary_lags(n: int) -> int:
    """``floor(4 (n/100)^(2/9))``, the pilot lag of the plug-in rule."""
    return int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def nw_auto_bandwidth(scores) -> int:
    """Newey-West (1994) plug-in lag for the Bartlett kernel.

    The score columns are summed with unit weights into a scalar series
    ``h_t``; with ``sigma_j`` its lag-``j`` autocovariance (divided by n)
    and ``p = floor(4 (n/100)^(2/9))`` preliminary lags,

        s0 = sigma_0 + 2 sum_{j<=p} sigma_j
        s1 = 2 sum_{j<=p} j sigma_j
        m  = floor(1.1447 ((s1/s0)^2 n)^(1/3))

    capped at ``n - 1``; ``m = 0`` whenever ``s0 <= 0`` or ``s1 <= 0``.
    """
    g = np.asarray(scores, dtype=float)
    if g.ndim == 1:
        g = g[:, None]
    n = g.shape[0]
    if n < 4:
        raise TooFewObservations(f"automatic bandwidth needs >= 4 observations, got {n}")
    h = g.sum(axis=1)
    n_pre = min(nw_preliminary_lags(n), n - 1)
    sigma = np.array([h[j:] @ h[:n - j] / n for j in range(n_pre + 1)])
    lags = np.arange(1, n_pre + 1)
    s0 = sigma[0] + 2.0 * sigma[1:].sum()
    s1 = 2.0 * (lags * sigma[1:]).sum()
    if s0 <= 0.0 or s1 <= 0.0:
        return 0
    m = int(math.floor(1.1447 * ((s1 / s0) ** 2 * n) ** (1.0 / 3.0)))
    return max(0, min(n - 1, m))


def nw_hac_cov(X, residuals, bandwidth: Bandwidth = "auto") -> np.ndarray:
    """Sandwich ``(X'X)^-1 S (X'X)^-1`` with Bartlett-weighted score sums.

    ``S = G_0 + sum_{j=1..m} (1 - j/(m+1)) (G_j + G_j')`` where
    ``G_j = sum_t g_t g_{t-j}'`` and ``g_t = x_t u_t``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    u = np.asarray(residuals, dtype=float).ravel()
    g = X * u[:, None]
    n, k = X.shape
    if bandwidth == "auto":
        m = nw_auto_bandwidth(g)
    else:
        m = int(bandwidth)
        if m < 0:
            raise ValueError("bandwidth must be >= 0")
    m = min(m, max(n - 1, 0))
    S = g.T @ g
    for j in range(1, m + 1):
        gj = g[j:].T @ g[:n - j]
        S += (1.0 - j / (m + 1.0)) * (gj + gj.T)
    xtx = X.T @ X
    if np.linalg.matrix_rank(xtx) < k:
        raise RankDeficient(_collinear_columns(X, [f"x{j}" for j in range(k)]))
    bread = np.linalg.inv(xtx)
    cov = bread @ S @ bread
    return 0.5 * (cov + cov.T)


def _negligible(x, scale: float) -> bool:
    return bool(np.all(np.abs(x) <= NULL_RTOL * max(scale, 1.0)))


def wald_test(res: RegressionResult, R, r) -> HypothesisReport:
    """Wald test of ``R beta = r`` using the HAC covariance.

    A singular ``R V R'`` raises :class:`SingularRestriction`, except when
    the restriction holds exactly, which gives ``W = 0`` and ``p = 1``.
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    q = R.shape[0]
    if R.shape[1] != res.coefficients.shape[0] or r.shape[0] != q:
        raise ValueError("restriction dimensions do not match the regression")
    if np.linalg.matrix_rank(R) < q:
        raise SingularRestriction("restriction matrix does not have full row rank")
    diff = R @ res.coefficients - r
    middle = R @ res.hac_cov @ R.T
    if not np.all(np.isfinite(middle)):
        raise SingularRestriction("R V R' is not finite")
    scale = max(float(np.abs(res.coefficients).max(initial=0.0)), float(np.abs(r).max()))
    vals = np.linalg.eigvalsh(0.5 * (middle + middle.T))
    if vals.max(initial=0.0) <= 0.0 or vals.min() <= 1e-12 * vals.max():
        if _negligible(diff, scale):
            return HypothesisReport(0.0, 1.0, q, "two-sided")
        raise SingularRestriction("R V R' is not invertible")
    W = max(float(diff @ np.linalg.solve(middle, diff)), 0.0)
    return HypothesisReport(W, chi2_sf(W, q), q, "two-sided")


def t_test(res: RegressionResult, coef_index: int | str, null_value: float = 0.0,
           alternative: Alternative = "two-sided") -> HypothesisReport:
    """HAC t test on a single coefficient against the standard normal."""
    i = res.names.index(coef_index) if isinstance(coef_index, str) else int(coef_index)
    est = float(res.coefficients[i])
    var = float(res.hac_cov[i, i])
    if not var > 0.0:
        if _negligible(est - null_value, abs(null_value)):
            return HypothesisReport(0.0, 1.0, None, alternative)
        raise ZeroVariance(f"zero HAC variance for coefficient {res.names[i]}")
    t = (est - null_value) / math.sqrt(var)
    if alternative == "less":
        p = norm_cdf(t)
    elif alternative == "greater":
        p = norm_cdf(-t)
    elif alternative == "two-sided":
        p = min(1.0, 2.0 * norm_cdf(-abs(t)))
    else:
        raise ValueError(f"unknown alternative {alternative!r}")
    return HypothesisReport(t, p, None, alternative)
