"""Parametric-bootstrap test for cluster-level volatility.

The null hypothesis for cluster k is alpha1_k = 0 (constant conditional
variance). The test fits the panel model, then simulates B artificial
panels from the fitted model: each replicate reruns the fitted AR(1)
recursion with fresh Gaussian innovations whose variances follow the
fitted ARCH(1) law on the replicate's own innovation history. Refitting
every replicate yields B re-estimated cluster slopes alpha1*, summarised
by the percentile interval at levels alpha/(2m) and 1 - alpha/(2m) so the
familywise level stays Bonferroni-controlled at alpha.

Cluster k rejects when its whole interval sits above zero. That is the
only zero exclusion that counts as evidence: the alternative is
alpha1 > 0, and the lag regression behind every alpha1 estimate carries
a small-sample downward bias of roughly -1/T that the replicates
reproduce, so an interval entirely below zero reflects that bias rather
than volatility.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .estimation import AllSeriesDegenerate, BackfitOptions, FittedModel, backfit
from .panel import Panel, percentile

__all__ = [
    "BootstrapFailure",
    "TestOptions",
    "ClusterVolatilityDecision",
    "VolatilityTestResult",
    "reconstruct_variances",
    "generate_replicate",
    "bootstrap_test",
]

MAX_RETRIES = 3
FLOOR_SCALE = 1e-8


class BootstrapFailure(RuntimeError):
    """Raised when too few bootstrap replicates could be fitted."""


@dataclass(frozen=True)
class TestOptions:
    """Tuning knobs for the bootstrap test.

    Attributes
    ----------
    replicates:
        B, the number of simulated panels refitted under the null
        machinery. At least 20 so the extreme percentiles exist.
    alpha:
        Nominal familywise significance level.
    variance_floor:
        Lower clamp for reconstructed conditional variances. None selects
        the default: 1e-8 times the pooled variance of the purged
        residuals, guarding against negative fitted variances.
    seed:
        Nonnegative seed; replicate streams derive from it.
    """

    replicates: int = 500
    alpha: float = 0.05
    variance_floor: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.replicates < 20:
            raise ValueError("replicates must be >= 20")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.variance_floor is not None and not self.variance_floor > 0:
            raise ValueError("variance_floor must be > 0 when given")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class ClusterVolatilityDecision:
    """Bootstrap decision for one cluster.

    reject is True exactly when ci_lower > 0, meaning the whole
    percentile interval [ci_lower, ci_upper] sits above zero.
    """

    cluster: int
    alpha1_hat: float
    boot_alpha1: np.ndarray
    ci_lower: float
    ci_upper: float
    reject: bool

    def __post_init__(self) -> None:
        arr = np.asarray(self.boot_alpha1, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "boot_alpha1", arr)


@dataclass(frozen=True)
class VolatilityTestResult:
    """Full output of :func:`bootstrap_test`.

    Attributes
    ----------
    decisions:
        One :class:`ClusterVolatilityDecision` per cluster, in order.
    alpha:
        Nominal familywise level.
    corrected_level:
        Per-cluster level alpha / m.
    fitted:
        The model fitted to the observed panel.
    n_replicates:
        Number requested (B).
    n_errors:
        Replicates whose refit failed after all retries; their slots are
        simply absent from the bootstrap distributions.
    """

    decisions: tuple[ClusterVolatilityDecision, ...]
    alpha: float
    corrected_level: float
    fitted: FittedModel
    n_replicates: int
    n_errors: int

    @property
    def n_clusters(self) -> int:
        return len(self.decisions)

    def rejected_clusters(self) -> tuple[int, ...]:
        return tuple(d.cluster for d in self.decisions if d.reject)


def reconstruct_variances(
    fitted: FittedModel, panel: Panel, floor: float
) -> np.ndarray:
    """Conditional variances implied by the fit, for time points 2..T.

    sigma2[i, t] = max(alpha0_k + alpha1_k * u2[i, t-1], floor), where u2
    is the squared purged residual. The lag needed at the first residual
    time point does not exist; the series mean of u2 stands in for it.
    """
    u2 = np.asarray(fitted.residuals_star3) ** 2
    if u2.shape[0] != panel.n_series:
        raise ValueError("fitted model does not match the panel")
    lagged = np.concatenate([u2.mean(axis=1, keepdims=True), u2[:, :-1]], axis=1)
    pairs = np.asarray(fitted.arch_hat, dtype=np.float64)
    idx = panel.cluster_index_array()
    a0 = pairs[idx, 0][:, None]
    a1 = pairs[idx, 1][:, None]
    return np.maximum(a0 + a1 * lagged, floor)


def generate_replicate(
    fitted: FittedModel,
    panel: Panel,
    sigma2: np.ndarray,
    seed: int | np.random.SeedSequence,
    floor: float = 0.0,
) -> Panel:
    """Simulate one artificial panel from the fitted model.

    The first observation of every series is carried over from the data;
    later points follow Y*[t] = phi * Y*[t-1] + lambda_i + u*[t]. The
    first innovation of series i draws from Normal(0, sigma2[i, 0]); from
    then on the fitted variance law runs on the replicate's own history,

        u*[t] ~ Normal(0, max(alpha0_k + alpha1_k * u*[t-1]^2, floor)),

    so each replicate carries genuine conditional heteroskedasticity
    when the fitted alpha1 is nonzero.
    """
    n, t = panel.n_series, panel.n_time
    if sigma2.shape != (n, t - 1):
        raise ValueError(f"sigma2 must be {(n, t - 1)}, got {sigma2.shape}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, t - 1))
    pairs = np.asarray(fitted.arch_hat, dtype=np.float64)
    idx = panel.cluster_index_array()
    a0 = pairs[idx, 0]
    a1 = pairs[idx, 1]
    values = np.empty((n, t))
    values[:, 0] = panel.values[:, 0]
    lam = np.asarray(fitted.lambda_hat)
    phi = fitted.phi_hat
    var = sigma2[:, 0]
    for j in range(1, t):
        shock = z[:, j - 1] * np.sqrt(var)
        values[:, j] = phi * values[:, j - 1] + lam + shock
        var = np.maximum(a0 + a1 * shock * shock, floor)
    return Panel(values, panel.series_ids, panel.cluster_of)


def _resolve_floor(fitted: FittedModel, options: TestOptions) -> float:
    if options.variance_floor is not None:
        return options.variance_floor
    pooled = float(np.asarray(fitted.residuals_star3).var())
    return FLOOR_SCALE * pooled


def _refit_options(base: BackfitOptions, replicate: int) -> BackfitOptions:
    derived = np.random.SeedSequence([base.seed, replicate]).generate_state(1)[0]
    return replace(base, seed=int(derived))


def _one_replicate(
    replicate: int,
    fitted: FittedModel,
    panel: Panel,
    sigma2: np.ndarray,
    floor: float,
    backfit_options: BackfitOptions,
    test_seed: int,
) -> np.ndarray | None:
    """Fit one replicate, retrying with fresh streams on failure."""
    for attempt in range(MAX_RETRIES + 1):
        data_seed = np.random.SeedSequence([test_seed, replicate, attempt])
        art = generate_replicate(fitted, panel, sigma2, data_seed, floor)
        try:
            refit = backfit(art, _refit_options(backfit_options, replicate))
        except AllSeriesDegenerate:
            continue
        return np.asarray([pair[1] for pair in refit.arch_hat])
    return None


_WORKER_CTX: dict = {}


def _init_worker(*args) -> None:
    _WORKER_CTX["args"] = args


def _run_replicate(replicate: int) -> np.ndarray | None:
    return _one_replicate(replicate, *_WORKER_CTX["args"])


def bootstrap_test(
    panel: Panel,
    backfit_options: BackfitOptions | None = None,
    test_options: TestOptions | None = None,
    workers: int = 1,
) -> VolatilityTestResult:
    """Run the full cluster-volatility bootstrap test on a panel.

    Parameters
    ----------
    panel:
        Observed panel with cluster labels.
    backfit_options:
        Estimation settings, reused for every replicate refit with a
        seed derived per replicate index.
    test_options:
        Bootstrap size, level, variance floor, seed.
    workers:
        Worker processes for the replicate refits. Results are reduced by
        replicate index, so any worker count gives identical output.

    Raises
    ------
    AllSeriesDegenerate
        When the observed panel cannot be fitted at all.
    BootstrapFailure
        When every replicate refit failed.
    """
    if backfit_options is None:
        backfit_options = BackfitOptions()
    if test_options is None:
        test_options = TestOptions()
    fitted = backfit(panel, backfit_options)
    floor = _resolve_floor(fitted, test_options)
    sigma2 = reconstruct_variances(fitted, panel, floor)

    b = test_options.replicates
    args = (fitted, panel, sigma2, floor, backfit_options, test_options.seed)
    if workers > 1:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=args
        ) as pool:
            chunk = max(1, b // (4 * workers))
            outcomes = list(pool.map(_run_replicate, range(b), chunksize=chunk))
    else:
        outcomes = [_one_replicate(r, *args) for r in range(b)]

    kept = [v for v in outcomes if v is not None]
    n_errors = b - len(kept)
    if not kept:
        raise BootstrapFailure("all bootstrap replicates failed to fit")
    boot = np.vstack(kept)

    m = panel.n_clusters
    corrected = test_options.alpha / m
    lo_q = test_options.alpha / (2 * m)
    hi_q = 1.0 - lo_q
    decisions: list[ClusterVolatilityDecision] = []
    for k in range(m):
        samples = boot[:, k]
        lo = percentile(samples, lo_q)
        hi = percentile(samples, hi_q)
        decisions.append(
            ClusterVolatilityDecision(
                cluster=k + 1,
                alpha1_hat=fitted.arch_hat[k][1],
                boot_alpha1=samples,
                ci_lower=lo,
                ci_upper=hi,
                reject=lo > 0.0,
            )
        )
    return VolatilityTestResult(
        decisions=tuple(decisions),
        alpha=test_options.alpha,
        corrected_level=corrected,
        fitted=fitted,
        n_replicates=b,
        n_errors=n_errors,
    )
