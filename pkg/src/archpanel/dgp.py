"""Simulation of clustered panels with optional ARCH(1) innovations.

Each series follows an AR(1) recursion with a per-series random intercept:

    Y[i, t] = phi * Y[i, t-1] + lambda_i + u[i, t]

where the innovation u[i, t] = v[i, t] * sigma[i, t] and the conditional
variance follows the cluster's ARCH(1) law

    sigma[i, t]^2 = alpha0_k + alpha1_k * u[i, t-1]^2.

Shocks v are independent standard normal draws per series and time point.
Series are generated with a burn-in: 2T points are produced and only the
last T retained, so initial conditions wash out. A scenario can flip the
volatility status of a fraction of each cluster's members to study the
effect of misclassified series.

The module also enumerates a fixed catalog of study scenarios used by the
benchmark runner: single-cluster and five-cluster layouts crossed with
autoregressive levels 0.6 and 0.95, plus contaminated variants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import floor, sqrt
from typing import Mapping, Sequence

import numpy as np

from .panel import Panel

__all__ = [
    "ArchConfig",
    "ScenarioConfig",
    "SimulationResult",
    "simulate_panel",
    "scenario_catalog",
]

DEFAULT_N = 50
DEFAULT_T = 50


@dataclass(frozen=True)
class ArchConfig:
    """ARCH(1) variance law sigma_t^2 = alpha0 + alpha1 * u_{t-1}^2.

    alpha0 must be positive; alpha1 of zero means constant variance
    (no volatility). alpha1 = 1 is allowed even though the unconditional
    variance is infinite there; sample paths remain finite.
    """

    alpha0: float
    alpha1: float

    def __post_init__(self) -> None:
        if not self.alpha0 > 0:
            raise ValueError(f"alpha0 must be > 0, got {self.alpha0}")
        if self.alpha1 < 0:
            raise ValueError(f"alpha1 must be >= 0, got {self.alpha1}")

    @property
    def volatile(self) -> bool:
        return self.alpha1 > 0


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one simulated panel design.

    Parameters
    ----------
    name:
        Identifier used in reports and the scenario catalog.
    n_series, series_length:
        Panel dimensions N and T (of the retained segment).
    phi:
        Autoregressive parameter, common to all series.
    cluster_sizes:
        One positive count per cluster; must sum to n_series.
    arch_per_cluster:
        One :class:`ArchConfig` per cluster.
    sigma_lambda:
        Standard deviation of the per-series random intercept.
    contamination:
        Per-cluster fraction in [0, 1) of members whose volatility status
        is flipped. The first round(fraction * n_k) members of the cluster
        (in panel order) are affected: volatile members drop to alpha1 = 0,
        non-volatile members take alpha1 = flip_alpha1.
    flip_alpha1:
        alpha1 assigned to flipped members of a non-volatile cluster.
    seed:
        Nonnegative master seed; per-series streams derive from it.
    """

    name: str
    n_series: int
    series_length: int
    phi: float
    cluster_sizes: tuple[int, ...]
    arch_per_cluster: tuple[ArchConfig, ...]
    sigma_lambda: float = 1.0
    contamination: tuple[float, ...] = ()
    flip_alpha1: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_series < 1:
            raise ValueError("n_series must be >= 1")
        if self.series_length < 4:
            raise ValueError("series_length must be >= 4")
        if self.sigma_lambda < 0:
            raise ValueError("sigma_lambda must be >= 0")
        sizes = tuple(int(s) for s in self.cluster_sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError("cluster_sizes must be positive")
        if sum(sizes) != self.n_series:
            raise ValueError(
                f"cluster sizes sum to {sum(sizes)}, expected {self.n_series}"
            )
        object.__setattr__(self, "cluster_sizes", sizes)
        arch = tuple(self.arch_per_cluster)
        if len(arch) != len(sizes):
            raise ValueError(
                f"expected {len(sizes)} ARCH configs, got {len(arch)}"
            )
        object.__setattr__(self, "arch_per_cluster", arch)
        contam = tuple(float(f) for f in self.contamination)
        if not contam:
            contam = tuple(0.0 for _ in sizes)
        if len(contam) != len(sizes):
            raise ValueError(
                f"expected {len(sizes)} contamination fractions, got {len(contam)}"
            )
        if any(not 0.0 <= f < 1.0 for f in contam):
            raise ValueError("contamination fractions must lie in [0, 1)")
        object.__setattr__(self, "contamination", contam)
        if self.flip_alpha1 < 0:
            raise ValueError("flip_alpha1 must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_sizes)

    def cluster_labels(self) -> tuple[int, ...]:
        """Cluster label (1..m) per series, members contiguous in order."""
        labels: list[int] = []
        for k, size in enumerate(self.cluster_sizes, start=1):
            labels.extend([k] * size)
        return tuple(labels)

    def flipped_counts(self) -> tuple[int, ...]:
        """Number of flipped members per cluster: round(fraction * n_k)."""
        return tuple(
            int(floor(f * n + 0.5))
            for f, n in zip(self.contamination, self.cluster_sizes)
        )

    def effective_arch(self) -> tuple[ArchConfig, ...]:
        """Per-series ARCH law after applying contamination flips."""
        out: list[ArchConfig] = []
        for k, (size, arch) in enumerate(
            zip(self.cluster_sizes, self.arch_per_cluster)
        ):
            flipped = self.flipped_counts()[k]
            if arch.volatile:
                swapped = ArchConfig(arch.alpha0, 0.0)
            else:
                swapped = ArchConfig(arch.alpha0, self.flip_alpha1)
            out.extend([swapped] * flipped)
            out.extend([arch] * (size - flipped))
        return tuple(out)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_series": self.n_series,
            "series_length": self.series_length,
            "phi": self.phi,
            "sigma_lambda": self.sigma_lambda,
            "cluster_sizes": list(self.cluster_sizes),
            "arch_per_cluster": [
                [a.alpha0, a.alpha1] for a in self.arch_per_cluster
            ],
            "contamination": list(self.contamination),
            "flip_alpha1": self.flip_alpha1,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScenarioConfig":
        required = {"name", "n_series", "series_length", "phi",
                    "cluster_sizes", "arch_per_cluster"}
        missing = required - set(data)
        if missing:
            raise ValueError(f"scenario config missing keys: {sorted(missing)}")
        known = required | {"sigma_lambda", "contamination", "flip_alpha1", "seed"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"scenario config has unknown keys: {sorted(unknown)}")
        arch = tuple(
            ArchConfig(float(pair[0]), float(pair[1]))
            for pair in data["arch_per_cluster"]
        )
        return cls(
            name=str(data["name"]),
            n_series=int(data["n_series"]),
            series_length=int(data["series_length"]),
            phi=float(data["phi"]),
            cluster_sizes=tuple(int(s) for s in data["cluster_sizes"]),
            arch_per_cluster=arch,
            sigma_lambda=float(data.get("sigma_lambda", 1.0)),
            contamination=tuple(float(f) for f in data.get("contamination", ())),
            flip_alpha1=float(data.get("flip_alpha1", 1.0)),
            seed=int(data.get("seed", 0)),
        )


@dataclass(frozen=True)
class SimulationResult:
    """A simulated panel plus the latent quantities that produced it.

    Attributes
    ----------
    panel:
        The retained N x T observations with cluster labels.
    lambdas:
        True per-series random intercepts.
    arch_by_series:
        The ARCH law actually applied to each series (after contamination).
    """

    panel: Panel
    lambdas: tuple[float, ...]
    arch_by_series: tuple[ArchConfig, ...]

    def volatile_by_series(self) -> tuple[bool, ...]:
        return tuple(a.volatile for a in self.arch_by_series)


def _simulate_series(
    rng: np.random.Generator,
    length: int,
    burn_in: int,
    phi: float,
    sigma_lambda: float,
    arch: ArchConfig,
) -> tuple[np.ndarray, float]:
    lam = float(rng.normal(0.0, sigma_lambda)) if sigma_lambda > 0 else 0.0
    total = burn_in + length
    v = rng.standard_normal(total)
    y = np.empty(total)
    y_prev = lam
    u_prev = 0.0
    a0, a1 = arch.alpha0, arch.alpha1
    for t in range(total):
        sigma = sqrt(a0 + a1 * u_prev * u_prev)
        u = v[t] * sigma
        y_prev = phi * y_prev + lam + u
        y[t] = y_prev
        u_prev = u
    return y[burn_in:], lam


def simulate_panel(
    config: ScenarioConfig, burn_in: int | None = None
) -> SimulationResult:
    """Simulate one panel from a scenario description.

    Each series draws from its own random stream spawned from the scenario
    seed, so generation is reproducible series by series and unaffected by
    the order in which series are produced. Series i starts at Y = lambda_i
    with u = 0, runs for burn_in + T steps, and keeps the last T.

    Parameters
    ----------
    config:
        Scenario to simulate.
    burn_in:
        Number of leading points to discard. Defaults to T, so 2T points
        are generated per series.
    """
    if burn_in is None:
        burn_in = config.series_length
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    streams = np.random.SeedSequence(config.seed).spawn(config.n_series)
    arch_by_series = config.effective_arch()
    values = np.empty((config.n_series, config.series_length))
    lambdas: list[float] = []
    for i in range(config.n_series):
        series, lam = _simulate_series(
            np.random.default_rng(streams[i]),
            config.series_length,
            burn_in,
            config.phi,
            config.sigma_lambda,
            arch_by_series[i],
        )
        values[i] = series
        lambdas.append(lam)
    panel = Panel(values, cluster_of=config.cluster_labels())
    return SimulationResult(panel, tuple(lambdas), arch_by_series)


def _catalog_entries() -> list[ScenarioConfig]:
    vol = ArchConfig(1.0, 1.0)
    null = ArchConfig(1.0, 0.0)
    entries: list[ScenarioConfig] = []
    seed = 1000

    def add(name: str, sizes: tuple[int, ...], arch: tuple[ArchConfig, ...],
            phi: float, contamination: tuple[float, ...] = ()) -> None:
        nonlocal seed
        entries.append(
            ScenarioConfig(
                name=name,
                n_series=sum(sizes),
                series_length=DEFAULT_T,
                phi=phi,
                cluster_sizes=sizes,
                arch_per_cluster=arch,
                contamination=contamination,
                seed=seed,
            )
        )
        seed += 1

    five = (10, 10, 10, 10, 10)
    for phi, tag in ((0.6, "phi0.6"), (0.95, "phi0.95")):
        add(f"single-{tag}-vol", (DEFAULT_N,), (vol,), phi)
        add(f"single-{tag}-null", (DEFAULT_N,), (null,), phi)
        add(f"cl5-1vol-{tag}", five, (vol,) + (null,) * 4, phi)
        add(f"cl5-1vol-{tag}-null", five, (null,) * 5, phi)
        add(f"cl5-3vol-{tag}", five, (vol,) * 3 + (null,) * 2, phi)
        add(f"cl5-3vol-{tag}-null", five, (null,) * 5, phi)
    for phi, tag in ((0.6, "phi0.6"), (0.95, "phi0.95")):
        for frac, mix in ((0.02, "mix2"), (0.10, "mix10")):
            add(f"vol-{mix}-{tag}", (DEFAULT_N,), (vol,), phi, (frac,))
            add(f"null-{mix}-{tag}", (DEFAULT_N,), (null,), phi, (frac,))
    return entries


def scenario_catalog() -> dict[str, ScenarioConfig]:
    """Fixed catalog of the benchmark scenarios, keyed by name.

    Twelve size/power designs (single cluster, five clusters with one
    volatile, five clusters with three volatile; autoregressive parameter
    0.6 or 0.95; volatility present or absent) and eight contaminated
    designs (2% or 10% of a single 50-series cluster flipped, in both
    directions, at both autoregressive levels). All use N = 50, T = 50,
    ARCH intercept 1.0 and slope 1.0 where volatility is present.
    """
    return {entry.name: entry for entry in _catalog_entries()}
