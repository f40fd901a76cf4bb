"""Source/target partitioning around a center point."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DimensionMismatchError, NoTargetsError


@dataclass(frozen=True)
class SourceTargetSplit:
    """Sources are the n points nearest ``center``; targets lie at least
    ``xi * rho`` from it, where ``rho`` is the largest source distance.

    Sources are always excluded from the target set, whatever ``xi``.
    ``target_distances`` holds the distance of each target to ``center``,
    aligned with ``target_indices``; the rows of the interaction matrix
    follow the same order.
    """

    center: np.ndarray
    source_indices: np.ndarray
    target_indices: np.ndarray
    rho: float
    xi: float
    target_distances: np.ndarray

    @property
    def n(self):
        return len(self.source_indices)

    @property
    def m(self):
        return len(self.target_indices)


def center_distances(points, center) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64).reshape(1, -1)
    if points.ndim != 2 or points.shape[1] != center.shape[1]:
        raise DimensionMismatchError(
            f"center has d={center.shape[1]}, points have shape {points.shape}"
        )
    return cdist(points, center).ravel()


def order_by_distance(dist) -> np.ndarray:
    """Indices sorted by ascending distance, ties broken by ascending index."""
    dist = np.asarray(dist)
    return np.lexsort((np.arange(len(dist)), dist))


def split_sources_targets(points, center, n: int, xi: float) -> SourceTargetSplit:
    points = np.asarray(points, dtype=np.float64)
    N = points.shape[0]
    if not 1 <= n < N:
        raise ValueError(f"need 1 <= n < N, got n={n}, N={N}")
    if xi < 0:
        raise ValueError("xi must be nonnegative")
    dist = center_distances(points, center)
    order = order_by_distance(dist)
    sources = order[:n]
    rho = float(dist[sources[-1]])
    is_source = np.zeros(N, dtype=bool)
    is_source[sources] = True
    targets = np.flatnonzero(~is_source & (dist >= xi * rho))
    if targets.size == 0:
        raise NoTargetsError(
            f"no targets at distance >= {xi} * {rho:.6g}; lower xi or add points"
        )
    return SourceTargetSplit(
        center=np.asarray(center, dtype=np.float64).ravel(),
        source_indices=sources,
        target_indices=targets,
        rho=rho,
        xi=float(xi),
        target_distances=dist[targets],
    )


def nearest_targets(split: SourceTargetSplit, points, k: int) -> np.ndarray:
    """The k targets closest to the split center (point indices, nearest first).

    Distance to the source cluster is measured to its center rather than to
    the closest source; the two differ by at most ``rho``.
    """
    if not 1 <= k <= split.m:
        raise IndexError(f"k={k} outside [1, {split.m}]")
    dist = center_distances(np.asarray(points)[split.target_indices], split.center)
    return split.target_indices[order_by_distance(dist)[:k]]


def pairwise_distance_histogram(split: SourceTargetSplit, points, bins: int):
    """Histogram of all target-source distances.

    Returns ``(edges, counts)`` with ``bins`` equal-width bins spanning the
    observed [min, max].
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    points = np.asarray(points, dtype=np.float64)
    D = cdist(points[split.target_indices], points[split.source_indices]).ravel()
    counts, edges = np.histogram(D, bins=bins, range=(D.min(), D.max()))
    return edges, counts
