"""Command-line interface.

Subcommands: fit (backfit a panel), test (cluster volatility bootstrap
test), baseline (univariate LR test per series), simulate (generate a
panel from a scenario config), bench (run catalog scenarios into a
size/power table), diff (first differencing), serve (HTTP service).

Exit codes: 0 success, 2 input or validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .baseline import NonConvergence, test_each_series
from .dgp import scenario_catalog
from .estimation import AllSeriesDegenerate, BackfitOptions, backfit
from .io import (
    PanelFormatError,
    load_panel_csv,
    load_scenario_config,
    save_cluster_map,
    save_panel_csv,
)
from .montecarlo import run_scenario
from .nptest import BootstrapFailure, TestOptions, bootstrap_test
from .panel import first_difference
from .report import FORMATS, render_report

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _add_panel_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("panel", help="wide panel CSV (time column + one column per series)")
    p.add_argument("--clusters", help="two-column cluster map CSV (series_id, cluster_id)")
    p.add_argument("--diff", action="store_true",
                   help="first-difference the panel before the analysis")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=FORMATS, default="human")
    p.add_argument("--out", help="write the report here instead of stdout")


def _add_fit_args(p: argparse.ArgumentParser, resamples: int) -> None:
    p.add_argument("--resamples", type=int, default=resamples,
                   help="bootstrap resamples for the AR coefficient")
    p.add_argument("--epsilon", type=float, default=1e-4,
                   help="backfitting convergence tolerance")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="archpanel",
        description="Bootstrap test for ARCH(1) volatility in clustered panels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="backfit the panel model")
    _add_panel_args(p)
    _add_fit_args(p, resamples=500)
    _add_output_args(p)

    p = sub.add_parser("test", help="cluster volatility bootstrap test")
    _add_panel_args(p)
    _add_fit_args(p, resamples=500)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--boot", type=int, default=500,
                   help="bootstrap replicates for the test")
    p.add_argument("--threads", type=int, default=1)
    _add_output_args(p)

    p = sub.add_parser("baseline", help="univariate LR volatility tests")
    _add_panel_args(p)
    p.add_argument("--alpha", type=float, default=0.05)
    _add_output_args(p)

    p = sub.add_parser("simulate", help="generate a panel from a scenario")
    p.add_argument("config", nargs="?", help="scenario config JSON path")
    p.add_argument("--scenario", help="catalog scenario name instead of a config file")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--out", help="panel CSV destination (default stdout)")
    p.add_argument("--clusters-out", help="also write the cluster map here")

    p = sub.add_parser("bench", help="run catalog scenarios into a size/power table")
    p.add_argument("--scenarios", default="all",
                   help="comma-separated catalog names, or 'all'")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--boot", type=int, default=200)
    p.add_argument("--resamples", type=int, default=200)
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--skip-parametric", action="store_true",
                   help="skip the univariate comparator columns")
    _add_output_args(p)

    p = sub.add_parser("diff", help="first-difference a panel")
    p.add_argument("panel")
    p.add_argument("--clusters")
    p.add_argument("--out", help="differenced panel CSV destination (default stdout)")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _emit(doc: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(doc)
            if not doc.endswith("\n"):
                fh.write("\n")
    else:
        print(doc)


def _load(args):
    panel = load_panel_csv(args.panel, args.clusters)
    if getattr(args, "diff", False):
        panel = first_difference(panel)
    return panel


def _cmd_fit(args) -> int:
    panel = _load(args)
    options = BackfitOptions(
        resamples=args.resamples, epsilon=args.epsilon, seed=args.seed
    )
    _emit(render_report(backfit(panel, options), args.format), args.out)
    return EXIT_OK


def _cmd_test(args) -> int:
    panel = _load(args)
    fit_opts = BackfitOptions(
        resamples=args.resamples, epsilon=args.epsilon, seed=args.seed
    )
    test_opts = TestOptions(
        replicates=args.boot, alpha=args.alpha, seed=args.seed
    )
    result = bootstrap_test(panel, fit_opts, test_opts, workers=args.threads)
    _emit(render_report(result, args.format), args.out)
    return EXIT_OK


def _cmd_baseline(args) -> int:
    panel = _load(args)
    results = test_each_series(panel, args.alpha)
    rows = list(zip(panel.series_ids, results))
    _emit(render_report(rows, args.format), args.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    from dataclasses import replace

    from .dgp import simulate_panel

    if bool(args.config) == bool(args.scenario):
        raise PanelFormatError(
            "simulate needs exactly one of: a config path, or --scenario NAME"
        )
    if args.scenario:
        catalog = scenario_catalog()
        if args.scenario not in catalog:
            raise PanelFormatError(
                f"unknown scenario {args.scenario!r}; "
                f"choose from {', '.join(sorted(catalog))}"
            )
        config = catalog[args.scenario]
    else:
        config = load_scenario_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    sim = simulate_panel(config)
    if args.out:
        save_panel_csv(sim.panel, args.out)
    else:
        save_panel_csv(sim.panel, sys.stdout)
    if args.clusters_out:
        save_cluster_map(sim.panel, args.clusters_out)
    return EXIT_OK


def _cmd_bench(args) -> int:
    import numpy as np

    catalog = scenario_catalog()
    if args.scenarios == "all":
        names = list(catalog)
    else:
        names = [s.strip() for s in args.scenarios.split(",") if s.strip()]
        unknown = [n for n in names if n not in catalog]
        if unknown:
            raise PanelFormatError(
                f"unknown scenarios: {unknown}; "
                f"choose from {', '.join(sorted(catalog))}"
            )
    fit_opts = BackfitOptions(
        resamples=args.resamples, epsilon=args.epsilon
    )
    test_opts = TestOptions(replicates=args.boot, alpha=args.alpha)
    all_names = list(catalog)
    rows = []
    for name in names:
        master = int(
            np.random.SeedSequence(
                [args.seed, all_names.index(name)]
            ).generate_state(1)[0]
        )
        rows.append(
            run_scenario(
                catalog[name],
                replications=args.reps,
                backfit_options=fit_opts,
                test_options=test_opts,
                master_seed=master,
                workers=args.threads,
                include_parametric=not args.skip_parametric,
            )
        )
    _emit(render_report(rows, args.format), args.out)
    return EXIT_OK


def _cmd_diff(args) -> int:
    panel = load_panel_csv(args.panel, args.clusters)
    diffed = first_difference(panel)
    if args.out:
        save_panel_csv(diffed, args.out)
    else:
        save_panel_csv(diffed, sys.stdout)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


_COMMANDS = {
    "fit": _cmd_fit,
    "test": _cmd_test,
    "baseline": _cmd_baseline,
    "simulate": _cmd_simulate,
    "bench": _cmd_bench,
    "diff": _cmd_diff,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (AllSeriesDegenerate, BootstrapFailure, NonConvergence) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (PanelFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
