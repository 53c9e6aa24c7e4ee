"""HTTP service exposing the panel volatility toolkit.

Thin wrapper over the library: every endpoint builds a panel from the
request payload, calls the corresponding library function, and maps the
result into a response model. Input problems surface as 422, numerical
failures as 500.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..baseline import NonConvergence, test_each_series
from ..dgp import scenario_catalog, simulate_panel
from ..estimation import AllSeriesDegenerate, BackfitOptions, backfit
from ..nptest import BootstrapFailure, TestOptions, bootstrap_test
from ..panel import Panel, first_difference
from .schemas import (
    BaselineRequest,
    BaselineResponse,
    ClusterArchOut,
    ClusterDecisionOut,
    DiffRequest,
    DiffResponse,
    FitRequest,
    FitResponse,
    PanelPayload,
    SeriesLrOut,
    SimulateRequest,
    SimulateResponse,
    TestRequest,
    TestResponse,
)

app = FastAPI(
    title="archpanel",
    description="Bootstrap test for ARCH(1) volatility in clustered panels",
)


def _panel_from(payload: PanelPayload, difference: bool = False) -> Panel:
    try:
        panel = payload.to_panel()
        return first_difference(panel) if difference else panel
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/scenarios")
def scenarios() -> dict:
    return {name: cfg.to_dict() for name, cfg in scenario_catalog().items()}


@app.post("/fit", response_model=FitResponse)
def fit(request: FitRequest) -> FitResponse:
    panel = _panel_from(request.panel, request.difference)
    try:
        options = BackfitOptions(
            resamples=request.resamples,
            epsilon=request.epsilon,
            seed=request.seed,
        )
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    try:
        fitted = backfit(panel, options)
    except AllSeriesDegenerate as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    return FitResponse(
        phi_hat=fitted.phi_hat,
        iterations=fitted.iterations,
        converged=fitted.converged,
        lambda_hat=[float(v) for v in fitted.lambda_hat],
        clusters=[
            ClusterArchOut(cluster=k + 1, alpha0=a0, alpha1=a1)
            for k, (a0, a1) in enumerate(fitted.arch_hat)
        ],
    )


@app.post("/test", response_model=TestResponse)
def test(request: TestRequest) -> TestResponse:
    panel = _panel_from(request.panel, request.difference)
    try:
        fit_opts = BackfitOptions(
            resamples=request.resamples,
            epsilon=request.epsilon,
            seed=request.seed,
        )
        test_opts = TestOptions(
            replicates=request.boot, alpha=request.alpha, seed=request.seed
        )
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    try:
        result = bootstrap_test(panel, fit_opts, test_opts)
    except (AllSeriesDegenerate, BootstrapFailure) as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    return TestResponse(
        phi_hat=result.fitted.phi_hat,
        alpha=result.alpha,
        corrected_level=result.corrected_level,
        n_replicates=result.n_replicates,
        n_errors=result.n_errors,
        clusters=[
            ClusterDecisionOut(
                cluster=d.cluster,
                alpha1_hat=d.alpha1_hat,
                ci_lower=d.ci_lower,
                ci_upper=d.ci_upper,
                reject=d.reject,
            )
            for d in result.decisions
        ],
    )


@app.post("/baseline", response_model=BaselineResponse)
def baseline(request: BaselineRequest) -> BaselineResponse:
    panel = _panel_from(request.panel, request.difference)
    try:
        results = test_each_series(panel, request.alpha)
    except (ValueError, NonConvergence) as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    return BaselineResponse(
        series=[
            SeriesLrOut(
                series=sid,
                ar_intercept=r.ar_intercept,
                ar_phi=r.ar_phi,
                statistic=r.statistic,
                p_value=r.p_value,
                reject=r.reject,
                nonstationary=r.nonstationary,
            )
            for sid, r in zip(panel.series_ids, results)
        ]
    )


@app.post("/simulate", response_model=SimulateResponse)
def simulate(request: SimulateRequest) -> SimulateResponse:
    try:
        config = request.to_config()
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    sim = simulate_panel(config)
    return SimulateResponse(
        panel=PanelPayload.from_panel(sim.panel),
        lambdas=list(sim.lambdas),
        volatile=list(sim.volatile_by_series()),
    )


@app.post("/diff", response_model=DiffResponse)
def diff(request: DiffRequest) -> DiffResponse:
    panel = _panel_from(request.panel)
    try:
        out = first_difference(panel)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return DiffResponse(panel=PanelPayload.from_panel(out))
