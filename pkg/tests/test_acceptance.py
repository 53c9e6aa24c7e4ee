"""End-to-end acceptance checks for the full pipeline at desk scale.

Each test covers one numbered criterion and prints a single
`CRITERION n: PASS/FAIL` line with the measured quantities before
asserting, so the run log doubles as a scorecard. The Monte Carlo
scenario runs are shared through module-scoped fixtures; every scenario
is simulated once per session with the fixed study protocol below.
"""

import math
import time

import numpy as np
import pytest

from archpanel.baseline import lr_test_arch
from archpanel.cli import main as cli_main
from archpanel.dgp import ArchConfig, ScenarioConfig, scenario_catalog, simulate_panel
from archpanel.estimation import BackfitOptions, arch_ols_per_series, backfit, cls_ar1
from archpanel.montecarlo import run_misclassification, run_scenario
from archpanel.nptest import TestOptions
from archpanel.panel import ols_fit, percentile

MASTER_SEED = 2025
REPLICATIONS = 200
PROTOCOL_BACKFIT = BackfitOptions(resamples=200)
PROTOCOL_TEST = TestOptions(replicates=200)

CATALOG = scenario_catalog()


def protocol_run(name, include_parametric):
    return run_scenario(
        CATALOG[name],
        replications=REPLICATIONS,
        backfit_options=PROTOCOL_BACKFIT,
        test_options=PROTOCOL_TEST,
        master_seed=MASTER_SEED,
        include_parametric=include_parametric,
    )


def check(number, passed, detail):
    print(f"CRITERION {number}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, f"criterion {number}: {detail}"


@pytest.fixture(scope="module")
def single_vol_run():
    start = time.perf_counter()
    row = protocol_run("single-phi0.6-vol", include_parametric=True)
    return row, time.perf_counter() - start


@pytest.fixture(scope="module")
def single_null_run():
    return protocol_run("single-phi0.6-null", include_parametric=True)


@pytest.fixture(scope="module")
def single_null95_run():
    return protocol_run("single-phi0.95-null", include_parametric=True)


@pytest.fixture(scope="module")
def five_cluster_run():
    return protocol_run("cl5-1vol-phi0.6", include_parametric=False)


@pytest.fixture(scope="module")
def five_cluster_null_run():
    return protocol_run("cl5-1vol-phi0.6-null", include_parametric=False)


def test_criterion_01_single_cluster_power(single_vol_run):
    row, elapsed = single_vol_run
    passed = row.np_power >= 0.95 and elapsed <= 1800.0
    check(
        1,
        passed,
        f"power={row.np_power:.4f} (need >= 0.95), "
        f"elapsed={elapsed:.0f}s single worker (cap 1800s), "
        f"errors={row.error_count}",
    )


def test_criterion_02_single_cluster_size(single_null_run, single_null95_run):
    size_low = single_null_run.np_size
    size_high = single_null95_run.np_size
    passed = size_low <= 0.06 and size_high <= 0.03
    check(
        2,
        passed,
        f"size(phi=0.6)={size_low:.4f} (need <= 0.06), "
        f"size(phi=0.95)={size_high:.4f} (need <= 0.03)",
    )


def test_criterion_03_margin_over_univariate_test(single_vol_run):
    row, _ = single_vol_run
    gap = row.np_power - row.param_reject_volatile
    check(
        3,
        gap >= 0.30,
        f"cluster-test power={row.np_power:.4f}, per-series LR "
        f"rate={row.param_reject_volatile:.4f}, margin={gap:.4f} "
        f"(need >= 0.30)",
    )


def test_criterion_04_five_cluster_power_band(five_cluster_run):
    row = five_cluster_run
    power_ok = 0.45 <= row.np_power <= 0.80
    size_ok = row.np_size <= 0.05
    check(
        4,
        power_ok and size_ok,
        f"power={row.np_power:.4f} (need within [0.45, 0.80]), "
        f"size={row.np_size:.4f} (need <= 0.05)",
    )


def test_criterion_05_contaminated_cluster_still_detected():
    rate_low = run_misclassification(
        CATALOG["vol-mix2-phi0.6"],
        REPLICATIONS,
        PROTOCOL_BACKFIT,
        PROTOCOL_TEST,
        MASTER_SEED,
    )
    rate_high = run_misclassification(
        CATALOG["vol-mix2-phi0.95"],
        REPLICATIONS,
        PROTOCOL_BACKFIT,
        PROTOCOL_TEST,
        MASTER_SEED,
    )
    passed = rate_low >= 0.95 and rate_high >= 0.65
    check(
        5,
        passed,
        f"rejection with 2% quiet members: phi=0.6 -> {rate_low:.4f} "
        f"(need >= 0.95), phi=0.95 -> {rate_high:.4f} (need >= 0.65)",
    )


def test_criterion_06_univariate_size_grows_near_unit_root(
    single_null_run, single_null95_run
):
    size_low = single_null_run.param_reject_null
    size_high = single_null95_run.param_reject_null
    check(
        6,
        size_high > size_low,
        f"per-series LR size at phi=0.95 is {size_high:.4f} vs "
        f"{size_low:.4f} at phi=0.6 (need strict increase)",
    )


def test_criterion_07_estimator_recovery():
    phis = []
    alpha1s = []
    for seed in range(50):
        config = ScenarioConfig(
            name="recovery",
            n_series=50,
            series_length=50,
            phi=0.6,
            cluster_sizes=(50,),
            arch_per_cluster=(ArchConfig(1.0, 0.0),),
            seed=4000 + seed,
        )
        panel = simulate_panel(config).panel
        fit = backfit(panel, BackfitOptions(resamples=200, seed=seed))
        phis.append(fit.phi_hat)
        alpha1s.append(fit.arch_hat[0][1])
    mean_phi = float(np.mean(phis))
    mean_alpha1 = float(np.mean(alpha1s))
    passed = abs(mean_phi - 0.6) <= 0.05 and abs(mean_alpha1) <= 0.1
    check(
        7,
        passed,
        f"mean phi_hat={mean_phi:.4f} (need 0.6 +/- 0.05), "
        f"mean alpha1_hat={mean_alpha1:.4f} (need 0 +/- 0.1), 50 seeds",
    )


def test_criterion_08_familywise_error_control(five_cluster_null_run):
    rate = five_cluster_null_run.np_familywise_rate
    bound = 0.05 + 2.0 * math.sqrt(0.05 * 0.95 / REPLICATIONS)
    check(
        8,
        rate <= bound,
        f"five null clusters: any-rejection rate={rate:.4f} "
        f"(need <= {bound:.4f})",
    )


def brute_force_line(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    design = np.array([[x.size, x.sum()], [x.sum(), (x * x).sum()]])
    rhs = np.array([y.sum(), (x * y).sum()])
    intercept, slope = np.linalg.solve(design, rhs)
    return float(intercept), float(slope)


def deviation(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def test_criterion_09_oracle_equivalence():
    rng = np.random.default_rng(90125)
    worst = 0.0
    comparisons = 0
    for _ in range(100):
        n = int(rng.integers(8, 40))
        x = rng.normal(scale=rng.uniform(0.5, 3.0), size=n)
        y = rng.normal(1.0, 1.0) + rng.normal(0.0, 1.0) * x + rng.normal(size=n)
        for got, want in zip(ols_fit(x, y), brute_force_line(x, y)):
            worst = max(worst, deviation(got, want))
            comparisons += 1

        series = np.cumsum(rng.normal(size=n)) * 0.5 + rng.normal(size=n)
        for got, want in zip(
            cls_ar1(series), brute_force_line(series[:-1], series[1:])
        ):
            worst = max(worst, deviation(got, want))
            comparisons += 1

        residuals = rng.normal(scale=rng.uniform(0.5, 2.0), size=n)
        squared = residuals * residuals
        for got, want in zip(
            arch_ols_per_series(residuals),
            brute_force_line(squared[:-1], squared[1:]),
        ):
            worst = max(worst, deviation(got, want))
            comparisons += 1

        pool = rng.normal(size=int(rng.integers(20, 400)))
        q = float(rng.uniform(1e-4, 1.0 - 1e-4))
        ordered = np.sort(pool)
        rank = min(max(math.ceil(q * pool.size), 1), pool.size)
        worst = max(worst, deviation(percentile(pool, q), ordered[rank - 1]))
        comparisons += 1

    check(
        9,
        worst <= 1e-8,
        f"max relative deviation from brute-force oracles={worst:.2e} "
        f"over {comparisons} comparisons (need <= 1e-8)",
    )


def test_criterion_10_bench_reports_thread_invariant(tmp_path):
    reports = []
    for threads in (1, 8):
        out = tmp_path / f"bench-threads{threads}.csv"
        code = cli_main(
            [
                "bench",
                "--scenarios", "all",
                "--reps", "3",
                "--boot", "25",
                "--resamples", "25",
                "--skip-parametric",
                "--threads", str(threads),
                "--seed", "0",
                "--format", "csv",
                "--out", str(out),
            ]
        )
        assert code == 0
        reports.append(out.read_bytes())
    identical = reports[0] == reports[1]
    check(
        10,
        identical,
        f"bench over full catalog byte-identical at --threads 1 vs 8: "
        f"{identical} ({len(reports[0])} bytes)",
    )


def test_criterion_11_univariate_calibration():
    tail = math.erfc(math.sqrt(3.841459 / 2.0))
    tail_ok = abs(tail - 0.05) <= 1e-4
    rejections = 0
    n_seeds = 1000
    for seed in range(n_seeds):
        series = np.random.default_rng(60000 + seed).normal(size=200)
        rejections += lr_test_arch(series).reject
    rate = rejections / n_seeds
    check(
        11,
        tail_ok and rate <= 0.07,
        f"chi2(1) tail at 3.841459 = {tail:.6f} (need 0.05 +/- 1e-4), "
        f"iid rejection rate={rate:.4f} over {n_seeds} seeds (need <= 0.07)",
    )
