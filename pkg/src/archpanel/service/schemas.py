"""Request and response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..dgp import ArchConfig, ScenarioConfig
from ..panel import Panel


class PanelPayload(BaseModel):
    """Wire form of a panel: row-major values plus optional labels."""

    values: list[list[float]]
    series_ids: list[str] | None = None
    clusters: list[int] | None = None

    def to_panel(self) -> Panel:
        return Panel(self.values, self.series_ids, self.clusters)

    @classmethod
    def from_panel(cls, panel: Panel) -> "PanelPayload":
        return cls(
            values=[[float(v) for v in row] for row in panel.values],
            series_ids=list(panel.series_ids),
            clusters=list(panel.cluster_of),
        )


class FitRequest(BaseModel):
    panel: PanelPayload
    resamples: int = 500
    epsilon: float = 1e-4
    seed: int = 0
    difference: bool = False


class ClusterArchOut(BaseModel):
    cluster: int
    alpha0: float
    alpha1: float


class FitResponse(BaseModel):
    phi_hat: float
    iterations: int
    converged: bool
    lambda_hat: list[float]
    clusters: list[ClusterArchOut]


class TestRequest(BaseModel):
    panel: PanelPayload
    resamples: int = 500
    epsilon: float = 1e-4
    boot: int = Field(default=500, description="bootstrap replicates")
    alpha: float = 0.05
    seed: int = 0
    difference: bool = False


class ClusterDecisionOut(BaseModel):
    cluster: int
    alpha1_hat: float
    ci_lower: float
    ci_upper: float
    reject: bool


class TestResponse(BaseModel):
    phi_hat: float
    alpha: float
    corrected_level: float
    n_replicates: int
    n_errors: int
    clusters: list[ClusterDecisionOut]


class BaselineRequest(BaseModel):
    panel: PanelPayload
    alpha: float = 0.05
    difference: bool = False


class SeriesLrOut(BaseModel):
    series: str
    ar_intercept: float
    ar_phi: float
    statistic: float
    p_value: float
    reject: bool
    nonstationary: bool


class BaselineResponse(BaseModel):
    series: list[SeriesLrOut]


class SimulateRequest(BaseModel):
    name: str = "adhoc"
    n_series: int
    series_length: int
    phi: float
    cluster_sizes: list[int]
    arch_per_cluster: list[list[float]]
    sigma_lambda: float = 1.0
    contamination: list[float] | None = None
    flip_alpha1: float = 1.0
    seed: int = 0

    def to_config(self) -> ScenarioConfig:
        return ScenarioConfig(
            name=self.name,
            n_series=self.n_series,
            series_length=self.series_length,
            phi=self.phi,
            cluster_sizes=tuple(self.cluster_sizes),
            arch_per_cluster=tuple(
                ArchConfig(float(p[0]), float(p[1]))
                for p in self.arch_per_cluster
            ),
            sigma_lambda=self.sigma_lambda,
            contamination=tuple(self.contamination or ()),
            flip_alpha1=self.flip_alpha1,
            seed=self.seed,
        )


class SimulateResponse(BaseModel):
    panel: PanelPayload
    lambdas: list[float]
    volatile: list[bool]


class DiffRequest(BaseModel):
    panel: PanelPayload


class DiffResponse(BaseModel):
    panel: PanelPayload
