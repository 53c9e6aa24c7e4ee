"""Univariate likelihood-ratio test for ARCH(1) effects, series by series.

This is the parametric comparator to the cluster bootstrap test. Each
series is handled on its own: fit an AR(1) by conditional least squares,
take its residuals, and compare a constant-variance Gaussian likelihood
against an ARCH(1) conditional likelihood

    sigma2_t = alpha0 + alpha1 * e_{t-1}^2.

Both likelihoods are evaluated over the residual points that have a lag
available, and the null variance is the mean squared residual over those
same points, so the ARCH model nests the null exactly (alpha1 = 0 gives
the identical likelihood). The statistic 2 * (l1 - l0) is referred to a
chi-squared distribution with one degree of freedom. No boundary
adjustment is applied for alpha1 >= 0, which leaves the test mildly
conservative.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import erfc, sqrt
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .estimation import cls_ar1
from .panel import Panel

__all__ = [
    "NonConvergence",
    "Arch1MleFit",
    "LrTestResult",
    "gaussian_loglik",
    "fit_arch1_mle",
    "lr_test_arch",
    "test_each_series",
]

ALPHA1_MAX = 5.0
LOG_2PI = float(np.log(2.0 * np.pi))

# alpha1 starting points for the multi-start simplex search; alpha0
# starts at mean(e^2) * max(1 - alpha1, 0.1) so starts scale with the data.
START_ALPHA1 = (1e-3, 0.2, 0.5, 0.9 * ALPHA1_MAX)
SIMPLEX_OPTIONS = {"xatol": 1e-6, "fatol": 1e-9, "maxfev": 250}


class NonConvergence(RuntimeError):
    """Raised when no optimizer start produced a finite likelihood."""


@dataclass(frozen=True)
class Arch1MleFit:
    """Maximum-likelihood ARCH(1) variance fit for one residual series.

    alpha0 is strictly positive and alpha1 lies in [0, ALPHA1_MAX] by
    construction of the optimizer's parameterization.
    """

    alpha0: float
    alpha1: float
    loglik: float
    converged: bool


@dataclass(frozen=True)
class LrTestResult:
    """Outcome of the likelihood-ratio volatility test on one series.

    nonstationary flags |AR slope| >= 1; the test result is still
    reported, but downstream tables annotate such series.
    """

    statistic: float
    p_value: float
    reject: bool
    ar_intercept: float
    ar_phi: float
    nonstationary: bool
    mle: Arch1MleFit


def gaussian_loglik(
    residuals: Sequence[float], sigma2: Sequence[float]
) -> float:
    """Gaussian log-likelihood of residuals with per-point variances."""
    e = np.asarray(residuals, dtype=np.float64)
    s2 = np.asarray(sigma2, dtype=np.float64)
    if e.shape != s2.shape or e.ndim != 1:
        raise ValueError("residuals and sigma2 must be equal-length 1-d")
    if np.any(s2 <= 0.0):
        raise ValueError("variances must be positive")
    return float(
        -0.5 * (e.size * LOG_2PI + np.log(s2).sum() + (e * e / s2).sum())
    )


def fit_arch1_mle(
    residuals: Sequence[float], alpha1_max: float = ALPHA1_MAX
) -> Arch1MleFit:
    """Maximize the conditional ARCH(1) likelihood of a residual series.

    The likelihood conditions on the first residual: points t >= 2 enter,
    each with variance alpha0 + alpha1 * e_{t-1}^2. The search runs in
    (log alpha0, logit(alpha1 / alpha1_max)) so the constraints hold by
    construction, with a derivative-free simplex from four fixed alpha1
    starts; the best final likelihood wins.

    Raises
    ------
    NonConvergence
        When every start ends with a non-finite objective.
    ValueError
        On fewer than 8 residuals or constant input.
    """
    e = np.asarray(residuals, dtype=np.float64)
    if e.ndim != 1 or e.size < 8:
        raise ValueError("need at least 8 residuals")
    if not np.all(np.isfinite(e)):
        raise ValueError("residuals must be finite")
    if np.ptp(e) == 0.0:
        raise ValueError("residuals are constant")
    e2 = e * e
    lag = e2[:-1]
    cur = e2[1:]
    n = cur.size
    mean_e2 = float(e2.mean())

    def nll(p: np.ndarray) -> float:
        a0 = np.exp(p[0])
        a1 = alpha1_max * expit(p[1])
        s2 = a0 + a1 * lag
        return 0.5 * (n * LOG_2PI + np.log(s2).sum() + (cur / s2).sum())

    best = None
    for a1_start in START_ALPHA1:
        a0_start = mean_e2 * max(1.0 - a1_start, 0.1)
        p0 = np.array(
            [np.log(a0_start), np.log(a1_start / (alpha1_max - a1_start))]
        )
        res = minimize(nll, p0, method="Nelder-Mead", options=SIMPLEX_OPTIONS)
        if not np.isfinite(res.fun):
            continue
        if best is None or res.fun < best.fun:
            best = res
    if best is None:
        raise NonConvergence("no simplex start reached a finite likelihood")
    return Arch1MleFit(
        alpha0=float(np.exp(best.x[0])),
        alpha1=float(alpha1_max * expit(best.x[1])),
        loglik=float(-best.fun),
        converged=bool(best.success),
    )


def lr_test_arch(
    series: Sequence[float],
    significance: float = 0.05,
    alpha1_max: float = ALPHA1_MAX,
) -> LrTestResult:
    """Likelihood-ratio test of ARCH(1) against constant variance.

    Fits an AR(1) to the series, forms its residuals, and compares the
    maximized ARCH(1) conditional likelihood l1 with the constant-variance
    likelihood l0 at the mean squared residual, both over the lagged
    window. The statistic is 2 * (l1 - l0), clamped at zero, with p-value
    from the chi-squared(1) upper tail via the complementary error
    function.
    """
    arr = np.asarray(series, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 10:
        raise ValueError("need a series of at least 10 points")
    if not 0.0 < significance < 1.0:
        raise ValueError("significance must be in (0, 1)")
    intercept, phi = cls_ar1(arr)
    resid = arr[1:] - intercept - phi * arr[:-1]

    mle = fit_arch1_mle(resid, alpha1_max)
    evaluated = resid[1:]
    null_sigma2 = float((evaluated * evaluated).mean())
    l0 = gaussian_loglik(evaluated, np.full(evaluated.size, null_sigma2))
    statistic = max(0.0, 2.0 * (mle.loglik - l0))
    p_value = erfc(sqrt(statistic / 2.0))
    return LrTestResult(
        statistic=statistic,
        p_value=p_value,
        reject=p_value < significance,
        ar_intercept=intercept,
        ar_phi=phi,
        nonstationary=abs(phi) >= 1.0,
        mle=mle,
    )


def test_each_series(
    panel: Panel, significance: float = 0.05
) -> tuple[LrTestResult, ...]:
    """Run :func:`lr_test_arch` on every series of a panel, in order."""
    return tuple(
        lr_test_arch(panel.values[i], significance)
        for i in range(panel.n_series)
    )
