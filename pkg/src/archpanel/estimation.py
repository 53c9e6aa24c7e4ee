"""Backfitting estimation for the clustered AR(1) + ARCH(1) panel model.

The model for series i in cluster k is

    Y[i, t] = phi * Y[i, t-1] + lambda_i + u[i, t],
    Var(u[i, t] | past) = alpha0_k + alpha1_k * u[i, t-1]^2.

Estimation alternates between the additive components. One cycle:

1. estimate the random intercepts lambda_i (series means of the current
   autoregression-purged residuals; plain means on the first pass),
2. purge them: r1 = Y - lambda_i,
3. fit a per-series AR(1) slope on r1 by conditional least squares, then
   aggregate the N slopes into a single phi by an ordinary bootstrap
   (mean of R resample means),
4. form residuals r2 = Y - phi * lag(Y) and r3 = r2 - lambda_i,
5. regress squared r3 residuals on their lags, series by series,
6. average the per-series variance coefficients within each cluster.

Cycles repeat until no parameter moves by the tolerance, or the iteration
cap is hit. Because the least-squares slope is invariant to subtracting a
per-series constant, the slope estimates (and hence phi) are identical in
every cycle; the bootstrap therefore draws its resamples once per fit,
which also keeps refits reproducible under a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .panel import DegenerateRegressor, Panel, ols_fit

__all__ = [
    "AllSeriesDegenerate",
    "BackfitOptions",
    "FittedModel",
    "initialize_random_effects",
    "estimate_random_effects",
    "cls_ar1",
    "bootstrap_phi",
    "compute_residuals",
    "arch_ols_per_series",
    "aggregate_cluster_arch",
    "backfit",
]


class AllSeriesDegenerate(ValueError):
    """Raised when no series in the panel admits an AR(1) slope."""


@dataclass(frozen=True)
class BackfitOptions:
    """Tuning knobs for one backfitting run.

    Attributes
    ----------
    resamples:
        R, the number of bootstrap resamples aggregating the per-series
        AR(1) slopes.
    epsilon:
        Convergence tolerance on the max absolute parameter change.
    max_iterations:
        Cycle cap; the fit reports converged = False when it binds.
    seed:
        Nonnegative seed for the slope bootstrap.
    """

    resamples: int = 500
    epsilon: float = 1e-4
    max_iterations: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        if self.resamples < 1:
            raise ValueError("resamples must be >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class FittedModel:
    """Converged backfitting output.

    Attributes
    ----------
    phi_hat:
        Bootstrap-aggregated AR(1) coefficient (mean of resample means).
    phi_boot:
        The R resample means behind phi_hat.
    lambda_hat:
        Estimated random intercept per series, length N.
    arch_hat:
        Per-cluster (alpha0, alpha1) pairs, length m. Unconstrained:
        negative values are legitimate estimates.
    residuals_star3:
        N x (T-1) matrix of fully purged residuals, time points 2..T.
    iterations:
        Number of cycles run.
    converged:
        Whether the last cycle moved every parameter by less than the
        tolerance.
    """

    phi_hat: float
    phi_boot: np.ndarray
    lambda_hat: np.ndarray
    arch_hat: tuple[tuple[float, float], ...]
    residuals_star3: np.ndarray
    iterations: int
    converged: bool

    def __post_init__(self) -> None:
        for name in ("phi_boot", "lambda_hat", "residuals_star3"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_clusters(self) -> int:
        return len(self.arch_hat)


def initialize_random_effects(panel: Panel) -> np.ndarray:
    """Starting intercepts: the per-series mean of the raw observations."""
    return panel.values.mean(axis=1)


def estimate_random_effects(residual_panel: np.ndarray) -> np.ndarray:
    """Intercept update: the per-series mean of the current residuals."""
    arr = np.asarray(residual_panel, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("residual panel must be 2-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError("residual panel must be finite")
    return arr.mean(axis=1)


def cls_ar1(series: Sequence[float]) -> tuple[float, float]:
    """Conditional least squares AR(1) fit: regress y_t on y_{t-1}.

    Returns (intercept, slope). Raises :class:`DegenerateRegressor` when
    the lagged values are all equal.
    """
    arr = np.asarray(series, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 3:
        raise ValueError("series must be 1-d with at least 3 points")
    return ols_fit(arr[:-1], arr[1:])


def bootstrap_phi(
    phi_estimates: Sequence[float], resamples: int, seed: int
) -> tuple[float, np.ndarray]:
    """Aggregate per-series slopes by an ordinary bootstrap of the mean.

    Draws ``resamples`` simple random samples with replacement (each the
    size of the estimate pool) and records each resample's mean.

    Returns
    -------
    (phi_hat, phi_boot):
        phi_hat is the mean of the R resample means; phi_boot holds them.
    """
    est = np.asarray(phi_estimates, dtype=np.float64)
    if est.ndim != 1 or est.size == 0:
        raise ValueError("need at least one slope estimate")
    if resamples < 1:
        raise ValueError("resamples must be >= 1")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, est.size, size=(resamples, est.size))
    boot = est[idx].mean(axis=1)
    return float(boot.mean()), boot


def compute_residuals(
    panel: Panel, lambda_hat: Sequence[float], phi_hat: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All three residual panels over time points 2..T.

    Returns
    -------
    (r1, r2, r3), each N x (T-1):
        r1 = Y - lambda_i (intercept purged),
        r2 = Y - phi * lag(Y) (autoregression purged),
        r3 = Y - lambda_i - phi * lag(Y) (both purged),
    so r3 = r2 - lambda_i cell for cell.
    """
    lam = np.asarray(lambda_hat, dtype=np.float64).reshape(-1, 1)
    if lam.shape[0] != panel.n_series:
        raise ValueError("one intercept per series required")
    y = panel.values
    current, lagged = y[:, 1:], y[:, :-1]
    r1 = current - lam
    r2 = current - phi_hat * lagged
    r3 = r2 - lam
    return r1, r2, r3


def arch_ols_per_series(r3_series: Sequence[float]) -> tuple[float, float]:
    """Variance-law coefficients for one series of purged residuals.

    Squares the residuals and regresses u2_t on u2_{t-1}. When that
    regression is degenerate (constant squared residuals, or too few lag
    pairs) the fallback is (mean of u2, 0): constant estimated variance.
    """
    arr = np.asarray(r3_series, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("need at least 2 residuals")
    u2 = arr * arr
    if arr.size < 3:
        return float(u2.mean()), 0.0
    try:
        return ols_fit(u2[:-1], u2[1:])
    except DegenerateRegressor:
        return float(u2.mean()), 0.0


def aggregate_cluster_arch(
    per_series: Sequence[tuple[float, float]], panel: Panel
) -> tuple[tuple[float, float], ...]:
    """Average the per-series (alpha0, alpha1) pairs within each cluster."""
    pairs = np.asarray(per_series, dtype=np.float64)
    if pairs.shape != (panel.n_series, 2):
        raise ValueError("need one (alpha0, alpha1) pair per series")
    out: list[tuple[float, float]] = []
    for summary in panel.clusters():
        members = list(summary.members)
        out.append(
            (float(pairs[members, 0].mean()), float(pairs[members, 1].mean()))
        )
    return tuple(out)


def _slopes_vectorized(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-series AR(1) slopes of y_t on y_{t-1}; mask marks valid series."""
    x, z = y[:, :-1], y[:, 1:]
    xc = x - x.mean(axis=1, keepdims=True)
    zc = z - z.mean(axis=1, keepdims=True)
    sxx = (xc * xc).sum(axis=1)
    sxz = (xc * zc).sum(axis=1)
    valid = sxx != 0.0
    slopes = np.divide(sxz, sxx, out=np.zeros_like(sxx), where=valid)
    return slopes, valid


def _arch_vectorized(r3: np.ndarray) -> np.ndarray:
    """Per-series variance-law pairs, with the degenerate fallback applied."""
    u2 = r3 * r3
    x, z = u2[:, :-1], u2[:, 1:]
    xm = x.mean(axis=1, keepdims=True)
    zm = z.mean(axis=1, keepdims=True)
    xc = x - xm
    sxx = (xc * xc).sum(axis=1)
    sxz = (xc * (z - zm)).sum(axis=1)
    valid = sxx != 0.0
    a1 = np.divide(sxz, sxx, out=np.zeros_like(sxx), where=valid)
    a0 = np.where(valid, zm[:, 0] - a1 * xm[:, 0], u2.mean(axis=1))
    return np.column_stack([a0, a1])


def backfit(panel: Panel, options: BackfitOptions | None = None) -> FittedModel:
    """Run the full backfitting cycle to convergence.

    Parameters
    ----------
    panel:
        Observed panel with cluster labels.
    options:
        Bootstrap size, tolerance, iteration cap, seed. Defaults apply
        when omitted.

    Raises
    ------
    AllSeriesDegenerate
        When every series has constant values, so no AR(1) slope exists.
    """
    if options is None:
        options = BackfitOptions()
    y = panel.values
    n, _ = y.shape

    # Slopes are shift-invariant, so they match cls_ar1 on the purged
    # series at any iteration; compute them and the bootstrap once.
    slopes, valid = _slopes_vectorized(y)
    if not valid.any():
        raise AllSeriesDegenerate("no series admits an AR(1) slope")
    phi_hat, phi_boot = bootstrap_phi(
        slopes[valid], options.resamples, options.seed
    )

    cluster_idx = panel.cluster_index_array()
    m = panel.n_clusters
    counts = np.bincount(cluster_idx, minlength=m).astype(np.float64)

    lam = initialize_random_effects(panel)
    prev_state: np.ndarray | None = None
    converged = False
    iterations = 0
    r2 = None
    r3 = None
    arch = np.zeros((m, 2))
    for iterations in range(1, options.max_iterations + 1):
        if iterations > 1:
            lam = estimate_random_effects(r2)
        current, lagged = y[:, 1:], y[:, :-1]
        r2 = current - phi_hat * lagged
        r3 = r2 - lam[:, None]
        per_series = _arch_vectorized(r3)
        arch = np.column_stack(
            [
                np.bincount(cluster_idx, weights=per_series[:, 0], minlength=m),
                np.bincount(cluster_idx, weights=per_series[:, 1], minlength=m),
            ]
        ) / counts[:, None]
        state = np.concatenate(([phi_hat], lam, arch.ravel()))
        if prev_state is not None and np.abs(state - prev_state).max() < options.epsilon:
            converged = True
            break
        prev_state = state

    return FittedModel(
        phi_hat=phi_hat,
        phi_boot=phi_boot,
        lambda_hat=lam,
        arch_hat=tuple((float(a), float(b)) for a, b in arch),
        residuals_star3=r3,
        iterations=iterations,
        converged=converged,
    )
