"""Simulation study harness: size and power of the volatility tests.

Runs repeated simulate / test cycles for a scenario and aggregates
rejection rates. The cluster bootstrap test contributes per-cluster
rejection rates; the scalar power (size) is the mean rate over clusters
that truly are (are not) volatile in the base design. The univariate
likelihood-ratio comparator contributes per-series rejection rates,
stratified by each series' actual volatility status, contamination flips
included.

Every replication derives its simulation, estimation, and test seeds from
(master_seed, replication index), so results are bit-reproducible and
independent of how replications are scheduled across workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from math import sqrt
from typing import Sequence

import numpy as np

from .baseline import NonConvergence, test_each_series
from .dgp import ScenarioConfig, simulate_panel
from .estimation import AllSeriesDegenerate, BackfitOptions
from .nptest import BootstrapFailure, TestOptions, bootstrap_test

__all__ = [
    "SizePowerRow",
    "run_scenario",
    "run_misclassification",
    "summarize",
]

MAX_ERROR_RATE = 0.05

DESK_REPLICATIONS = 200
DESK_BACKFIT = BackfitOptions(resamples=200)
DESK_TEST = TestOptions(replicates=200)


@dataclass(frozen=True)
class SizePowerRow:
    """Aggregated rejection rates for one scenario.

    Attributes
    ----------
    scenario:
        Scenario name.
    replications:
        Requested replication count.
    completed:
        Replications that produced a usable test result.
    cluster_volatile:
        True volatility status per cluster in the base design.
    np_reject_rate_per_cluster:
        Bootstrap-test rejection rate per cluster, over completed runs.
    np_power, np_size:
        Mean per-cluster rate over truly volatile (resp. null) clusters;
        None when no cluster has that status.
    np_familywise_rate:
        Fraction of completed replications in which at least one cluster
        rejected, whatever its true status.
    param_reject_volatile, param_reject_null:
        Univariate LR rejection fraction over (replication, series) pairs,
        split by the series' actual status; None when absent or skipped.
    error_count:
        Replications that failed outright.
    """

    scenario: str
    replications: int
    completed: int
    cluster_volatile: tuple[bool, ...]
    np_reject_rate_per_cluster: tuple[float, ...]
    np_power: float | None
    np_size: float | None
    np_familywise_rate: float
    param_reject_volatile: float | None
    param_reject_null: float | None
    error_count: int

    @property
    def valid(self) -> bool:
        return self.error_count <= MAX_ERROR_RATE * self.replications


def _derived_seed(master_seed: int, replication: int, stream: int) -> int:
    state = np.random.SeedSequence(
        [master_seed, replication, stream]
    ).generate_state(1)
    return int(state[0])


def _one_replication(
    replication: int,
    scenario: ScenarioConfig,
    backfit_options: BackfitOptions,
    test_options: TestOptions,
    master_seed: int,
    include_parametric: bool,
) -> tuple[tuple[bool, ...], tuple[bool, ...] | None] | None:
    """One simulate / test cycle; None signals a failed replication."""
    sim_cfg = replace(scenario, seed=_derived_seed(master_seed, replication, 0))
    fit_opts = replace(
        backfit_options, seed=_derived_seed(master_seed, replication, 1)
    )
    t_opts = replace(test_options, seed=_derived_seed(master_seed, replication, 2))
    sim = simulate_panel(sim_cfg)
    try:
        result = bootstrap_test(sim.panel, fit_opts, t_opts)
        np_rejects = tuple(d.reject for d in result.decisions)
        param_rejects: tuple[bool, ...] | None = None
        if include_parametric:
            param_rejects = tuple(
                r.reject for r in test_each_series(sim.panel, t_opts.alpha)
            )
    except (AllSeriesDegenerate, BootstrapFailure, NonConvergence):
        return None
    return np_rejects, param_rejects


_MC_CTX: dict = {}


def _init_mc_worker(*args) -> None:
    _MC_CTX["args"] = args


def _run_mc_replication(replication: int):
    return _one_replication(replication, *_MC_CTX["args"])


def run_scenario(
    scenario: ScenarioConfig,
    replications: int = DESK_REPLICATIONS,
    backfit_options: BackfitOptions | None = None,
    test_options: TestOptions | None = None,
    master_seed: int = 0,
    workers: int = 1,
    include_parametric: bool = True,
) -> SizePowerRow:
    """Estimate size and power of the tests under one scenario.

    Parameters
    ----------
    scenario:
        Design to simulate; its own seed field is ignored in favor of
        per-replication derived seeds.
    replications:
        Monte Carlo sample size.
    backfit_options, test_options:
        Settings applied in every replication (seeds overridden per
        replication). Defaults are the desk-scale settings.
    master_seed:
        Root of all derived seeds.
    workers:
        Worker processes; output is identical for any count.
    include_parametric:
        When False, the univariate comparator is skipped and its columns
        are None. The bootstrap-test columns are unaffected.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    if backfit_options is None:
        backfit_options = DESK_BACKFIT
    if test_options is None:
        test_options = DESK_TEST
    args = (
        scenario,
        backfit_options,
        test_options,
        master_seed,
        include_parametric,
    )
    if workers > 1:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_mc_worker, initargs=args
        ) as pool:
            chunk = max(1, replications // (4 * workers))
            outcomes = list(
                pool.map(_run_mc_replication, range(replications), chunksize=chunk)
            )
    else:
        outcomes = [_one_replication(r, *args) for r in range(replications)]

    m = scenario.n_clusters
    np_counts = np.zeros(m)
    param_hits = {True: 0, False: 0}
    param_total = {True: 0, False: 0}
    volatile_by_series = tuple(a.volatile for a in scenario.effective_arch())
    completed = 0
    familywise_hits = 0
    for outcome in outcomes:
        if outcome is None:
            continue
        completed += 1
        np_rejects, param_rejects = outcome
        np_counts += np.asarray(np_rejects, dtype=np.float64)
        familywise_hits += int(any(np_rejects))
        if param_rejects is not None:
            for status, rejected in zip(volatile_by_series, param_rejects):
                param_total[status] += 1
                param_hits[status] += int(rejected)

    rates = tuple(
        float(c / completed) if completed else 0.0 for c in np_counts
    )
    cluster_volatile = tuple(a.volatile for a in scenario.arch_per_cluster)

    def mean_over(status: bool) -> float | None:
        selected = [r for r, v in zip(rates, cluster_volatile) if v is status]
        if not selected or completed == 0:
            return None
        return float(np.mean(selected))

    def param_rate(status: bool) -> float | None:
        if param_total[status] == 0:
            return None
        return param_hits[status] / param_total[status]

    return SizePowerRow(
        scenario=scenario.name,
        replications=replications,
        completed=completed,
        cluster_volatile=cluster_volatile,
        np_reject_rate_per_cluster=rates,
        np_power=mean_over(True),
        np_size=mean_over(False),
        np_familywise_rate=(
            familywise_hits / completed if completed else 0.0
        ),
        param_reject_volatile=param_rate(True),
        param_reject_null=param_rate(False),
        error_count=replications - completed,
    )


def run_misclassification(
    scenario: ScenarioConfig,
    replications: int = DESK_REPLICATIONS,
    backfit_options: BackfitOptions | None = None,
    test_options: TestOptions | None = None,
    master_seed: int = 0,
    workers: int = 1,
) -> float:
    """Rejection rate of the contaminated cluster under a mixed design.

    The target is the first cluster with a positive contamination
    fraction (cluster 1 when none is contaminated, in which case this is
    exactly the corresponding :func:`run_scenario` rate). Only the
    bootstrap test runs; the univariate comparator is skipped.
    """
    row = run_scenario(
        scenario,
        replications,
        backfit_options,
        test_options,
        master_seed,
        workers,
        include_parametric=False,
    )
    target = next(
        (k for k, f in enumerate(scenario.contamination) if f > 0), 0
    )
    return row.np_reject_rate_per_cluster[target]


def _se(rate: float | None, n: int) -> float | None:
    if rate is None or n == 0:
        return None
    return sqrt(rate * (1.0 - rate) / n)


def summarize(rows: Sequence[SizePowerRow]) -> list[dict]:
    """Flatten rows into records with binomial standard errors.

    Standard errors use sqrt(rate * (1 - rate) / replications) throughout,
    which is exact for the per-cluster rates and conservative for the
    per-series parametric rates.
    """
    if not rows:
        raise ValueError("no rows to summarize")
    records: list[dict] = []
    for row in rows:
        n = row.completed
        records.append(
            {
                "scenario": row.scenario,
                "replications": row.replications,
                "completed": n,
                "np_power": row.np_power,
                "np_power_se": _se(row.np_power, n),
                "np_size": row.np_size,
                "np_size_se": _se(row.np_size, n),
                "np_familywise": row.np_familywise_rate,
                "param_power": row.param_reject_volatile,
                "param_power_se": _se(row.param_reject_volatile, n),
                "param_size": row.param_reject_null,
                "param_size_se": _se(row.param_reject_null, n),
                "np_per_cluster": list(row.np_reject_rate_per_cluster),
                "errors": row.error_count,
                "valid": row.valid,
            }
        )
    return records
