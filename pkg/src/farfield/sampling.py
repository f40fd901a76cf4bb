"""Row sampling schemes over an interaction matrix, and the sample-size and
reconstruction-error formulas for uniform column sampling.

Every scheme draws ``m_s = ceil(s * m)`` rows except Bernoulli, which keeps
each row independently with probability ``s``. Weighted draws without
replacement are sequential: pick a row with probability proportional to its
weight, remove it, renormalize, repeat. That process is realized with the
Gumbel-top-k trick (perturb log-weights with i.i.d. Gumbel noise and keep
the largest keys), which has exactly the same distribution and yields the
rows in draw order. Once every positive-weight row is taken, the remaining
draws fall back to uniform over the zero-weight rows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SamplingError
from .geometry import order_by_distance
from .lowrank import SVDFactors, leverage_scores

KINDS = ("uniform", "bernoulli", "euclidean", "distance", "leverage", "nearest")
_REPLACEMENT_KINDS = ("uniform", "euclidean")


@dataclass(frozen=True)
class SamplingScheme:
    kind: str
    replacement: bool = False
    rank_for_leverage: int | None = None
    # "inverse" weights rows by 1/distance to the source center; "direct"
    # by the distance itself
    distance_weighting: str = "inverse"

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ValueError(f"unknown sampling scheme {self.kind!r}")
        if kind not in _REPLACEMENT_KINDS and self.replacement:
            object.__setattr__(self, "replacement", False)
        if kind == "leverage" and self.rank_for_leverage is not None and self.rank_for_leverage < 1:
            raise ValueError("rank_for_leverage must be >= 1")
        if self.distance_weighting not in ("inverse", "direct"):
            raise ValueError("distance_weighting must be 'inverse' or 'direct'")

    @property
    def label(self):
        if self.kind in _REPLACEMENT_KINDS and self.replacement:
            return f"{self.kind}+repl"
        return self.kind


@dataclass(frozen=True)
class RowSample:
    indices: np.ndarray
    fraction: float
    seed: int
    scheme: SamplingScheme | None = None

    def __len__(self):
        return len(self.indices)


def sample_count(m, s):
    if not 0 < s <= 1:
        raise ValueError(f"sampling fraction must lie in (0, 1], got {s}")
    return max(1, min(m, math.ceil(s * m)))


def _weighted(weights, count, replacement, rng):
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise SamplingError("sampling weights must be finite and nonnegative")
    total = w.sum()
    if total <= 0:
        raise SamplingError("sampling weights sum to zero")
    if replacement:
        return rng.choice(len(w), size=count, replace=True, p=w / total)
    g = rng.gumbel(size=len(w))
    positive = w > 0
    with np.errstate(divide="ignore"):
        keys = np.where(positive, np.log(w) + g, g)
    # positive-weight rows first (by key), then zero-weight rows in random order
    order = np.lexsort((-keys, ~positive))
    return order[:count]


def sample_rows(
    scheme: SamplingScheme, s: float, seed: int, *, m=None, K=None, split=None, factors=None
) -> RowSample:
    """Draw rows of an m-row interaction matrix.

    ``K`` is needed by the euclidean and leverage schemes, ``split`` (the
    :class:`~farfield.geometry.SourceTargetSplit` that produced K's rows) by
    the distance and nearest-neighbor schemes. ``m`` defaults to whichever
    of those is supplied. ``factors`` may carry a precomputed SVD of K for
    the leverage scheme.
    """
    if m is None:
        if K is not None:
            m = np.shape(K)[0]
        elif split is not None:
            m = split.m
        else:
            raise SamplingError("need m, K or split to know the row count")
    kind = scheme.kind
    if kind in ("euclidean", "leverage") and K is None:
        raise SamplingError(f"the {kind} scheme needs the matrix K")
    if kind in ("distance", "nearest") and split is None:
        raise SamplingError(f"the {kind} scheme needs the source/target split")
    if K is not None and np.shape(K)[0] != m:
        raise SamplingError("K row count disagrees with m")
    if split is not None and split.m != m:
        raise SamplingError("split target count disagrees with m")

    rng = np.random.default_rng(seed)
    count = sample_count(m, s)

    if kind == "uniform":
        if scheme.replacement:
            idx = rng.integers(0, m, size=count)
        else:
            idx = rng.permutation(m)[:count]
    elif kind == "bernoulli":
        idx = np.flatnonzero(rng.random(m) < s)
        if idx.size == 0:
            idx = np.flatnonzero(rng.random(m) < s)
        if idx.size == 0:
            raise SamplingError(f"Bernoulli draw with s={s} selected no rows (twice)")
    elif kind == "euclidean":
        idx = _weighted(np.linalg.norm(K, axis=1), count, scheme.replacement, rng)
    elif kind == "leverage":
        K = np.asarray(K, dtype=np.float64)
        r = scheme.rank_for_leverage or min(K.shape)
        r = min(r, min(K.shape))
        # row scores of K are the column scores of K^T
        if factors is not None:
            factors = SVDFactors(factors.V, factors.singular_values, factors.U)
        idx = _weighted(leverage_scores(K.T, r, factors), count, False, rng)
    elif kind == "distance":
        dist = np.asarray(split.target_distances, dtype=np.float64)
        if scheme.distance_weighting == "inverse":
            if np.any(dist == 0):
                raise SamplingError("a target coincides with the source center")
            weights = 1.0 / dist
        else:
            weights = dist
        idx = _weighted(weights, count, False, rng)
    else:  # nearest
        idx = order_by_distance(split.target_distances)[:count]
    return RowSample(indices=np.asarray(idx, dtype=np.intp), fraction=float(s), seed=seed, scheme=scheme)


def chernoff_denominator(eps):
    """log((1 + eps)^(1 + eps) / e^eps)."""
    return (1 + eps) * math.log1p(eps) - eps


def sample_complexity(m: int, gamma: float, r: int, delta: float, eps: float) -> int:
    """Number of uniformly sampled columns that guarantees the reconstruction
    bound with probability at least 1 - delta."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not r / m - 1e-12 <= gamma <= 1 + 1e-12:
        raise ValueError(f"coherence {gamma} outside [r/m, 1] = [{r / m}, 1]")
    return math.ceil(m * gamma * math.log(2 * r / delta) / chernoff_denominator(eps))


def reconstruction_bound(m: int, s_count: int, eps: float, sigma_r1: float) -> float:
    """sqrt(1 + (m/s)(1 + eps)/(1 - eps)^2) * sigma_{r+1}."""
    if s_count < 1:
        raise ValueError("s_count must be >= 1")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return math.sqrt(1 + (m / s_count) * (1 + eps) / (1 - eps) ** 2) * sigma_r1
