"""Core data model and shared numerics for clustered panels of time series.

A panel is a dense N x T matrix of observations: N series measured at T
common time points. Every series carries a cluster label in 1..m, and all
higher-level routines (estimation, testing, simulation study) consume the
:class:`Panel` defined here. The scalar helpers (:func:`ols_fit`,
:func:`percentile`, :func:`first_difference`) are deliberately small and
self-contained so they can be checked against brute-force implementations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil
from typing import Sequence

import numpy as np

__all__ = [
    "DegenerateRegressor",
    "Panel",
    "ClusterSummary",
    "ols_fit",
    "percentile",
    "first_difference",
]

MIN_TIME_POINTS = 4


class DegenerateRegressor(ValueError):
    """Raised when a regressor has zero variance and no slope is defined."""


@dataclass(frozen=True)
class ClusterSummary:
    """Membership record for one cluster.

    Attributes
    ----------
    index:
        Cluster label, in 1..m.
    members:
        Row indices of the member series, in panel order.
    size:
        Number of member series.
    """

    index: int
    members: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Panel:
    """Dense rectangular panel of N series observed at T time points.

    Parameters
    ----------
    values:
        N x T real matrix, one row per series. Copied and frozen.
    series_ids:
        N labels, one per row.
    cluster_of:
        N cluster labels, each in 1..m. Every label in that range must
        appear at least once.

    Raises
    ------
    ValueError
        On shape mismatch, non-finite entries, T < 4, or a cluster label
        range with gaps.
    """

    values: np.ndarray
    series_ids: tuple[str, ...]
    cluster_of: tuple[int, ...]
    _summaries: tuple[ClusterSummary, ...] = field(
        init=False, repr=False, compare=False
    )

    def __init__(
        self,
        values: Sequence[Sequence[float]] | np.ndarray,
        series_ids: Sequence[str] | None = None,
        cluster_of: Sequence[int] | None = None,
    ) -> None:
        arr = np.array(values, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"panel values must be 2-dimensional, got ndim={arr.ndim}")
        n, t = arr.shape
        if n < 1:
            raise ValueError("panel needs at least one series")
        if t < MIN_TIME_POINTS:
            raise ValueError(
                f"panel needs at least {MIN_TIME_POINTS} time points, got {t}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("panel values must all be finite")
        arr.setflags(write=False)

        if series_ids is None:
            ids = tuple(f"series_{i + 1}" for i in range(n))
        else:
            ids = tuple(str(s) for s in series_ids)
        if len(ids) != n:
            raise ValueError(f"expected {n} series ids, got {len(ids)}")
        if len(set(ids)) != n:
            raise ValueError("series ids must be unique")

        if cluster_of is None:
            labels = tuple(1 for _ in range(n))
        else:
            labels = tuple(int(c) for c in cluster_of)
        if len(labels) != n:
            raise ValueError(f"expected {n} cluster labels, got {len(labels)}")
        m = max(labels)
        present = set(labels)
        if min(labels) < 1 or present != set(range(1, m + 1)):
            raise ValueError(
                f"cluster labels must cover 1..{m} with no gaps, got {sorted(present)}"
            )

        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "series_ids", ids)
        object.__setattr__(self, "cluster_of", labels)
        summaries = tuple(
            ClusterSummary(k, tuple(i for i, c in enumerate(labels) if c == k))
            for k in range(1, m + 1)
        )
        object.__setattr__(self, "_summaries", summaries)

    @property
    def n_series(self) -> int:
        return self.values.shape[0]

    @property
    def n_time(self) -> int:
        return self.values.shape[1]

    @property
    def n_clusters(self) -> int:
        return len(self._summaries)

    def clusters(self) -> tuple[ClusterSummary, ...]:
        """Return one :class:`ClusterSummary` per cluster, ordered by index."""
        return self._summaries

    def cluster_sizes(self) -> tuple[int, ...]:
        return tuple(s.size for s in self._summaries)

    def cluster_index_array(self) -> np.ndarray:
        """Zero-based cluster index per series, as an int array."""
        return np.asarray(self.cluster_of, dtype=np.intp) - 1


def ols_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Simple least squares of y on x with an intercept.

    Parameters
    ----------
    x, y:
        Equal-length sequences with at least 2 points.

    Returns
    -------
    (intercept, slope):
        slope = S_xy / S_xx and intercept = mean(y) - slope * mean(x).

    Raises
    ------
    DegenerateRegressor
        When x has zero variance (S_xx = 0); the caller decides the fallback.
    ValueError
        On length mismatch, fewer than 2 points, or non-finite input.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("x and y must be equal-length 1-d sequences")
    if xa.size < 2:
        raise ValueError("need at least 2 points")
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(ya))):
        raise ValueError("inputs must be finite")
    xbar = xa.mean()
    ybar = ya.mean()
    sxx = float(((xa - xbar) ** 2).sum())
    if sxx == 0.0:
        raise DegenerateRegressor("regressor has zero variance")
    sxy = float(((xa - xbar) * (ya - ybar)).sum())
    slope = sxy / sxx
    return ybar - slope * xbar, slope


def percentile(samples: Sequence[float], q: float) -> float:
    """Order-statistic percentile: the j-th smallest with j = ceil(q*B).

    No interpolation is performed, so the result is always an element of
    ``samples``; j is clamped into 1..B.

    Parameters
    ----------
    samples:
        Nonempty finite sequence of length B.
    q:
        Quantile level in (0, 1).
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("samples must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("samples must be finite")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must be in (0, 1), got {q}")
    b = arr.size
    j = min(max(ceil(q * b), 1), b)
    return float(np.sort(arr)[j - 1])


def first_difference(panel: Panel) -> Panel:
    """Difference every series: output (i, t) = Y[i, t+1] - Y[i, t].

    The differenced panel has T - 1 columns and keeps series ids and
    cluster labels. Requires T >= 5 so the result is still a valid panel.
    """
    if panel.n_time < MIN_TIME_POINTS + 1:
        raise ValueError(
            f"need at least {MIN_TIME_POINTS + 1} time points to difference, "
            f"got {panel.n_time}"
        )
    diffed = np.diff(panel.values, axis=1)
    return Panel(diffed, panel.series_ids, panel.cluster_of)
