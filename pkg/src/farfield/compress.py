"""Row-subsampled compression of an interaction matrix and its error terms.

A run samples rows of K, factors the sampled block, reconstructs the whole of
K from the factorization and reports the relative spectral-norm error.
For the ID the reconstruction is ``K[:, skeleton] @ P``: full columns of K,
not just the sampled rows.
"""
from __future__ import annotations

import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .errors import SamplingError
from .geometry import center_distances, order_by_distance
from .kernel import kernel_matrix
from .lowrank import (
    IDFactorization,
    epsilon_rank,
    interpolative_decomposition,
    singular_values,
    spectral_norm,
    svd,
)
from .sampling import RowSample, reconstruction_bound

# slack used when checking that a row subsample never has a larger
# (r+1)-th singular value than the full matrix
_DOMINATION_SLACK = 1e-8


@dataclass(frozen=True)
class RankRule:
    """Either ``eps`` (epsilon-rank of the sampled block, optionally measured
    against a supplied reference sigma_1) or a fixed rank ``fixed_r``."""

    eps: float | None = None
    fixed_r: int | None = None
    reference_sigma1: float | None = None

    def __post_init__(self):
        if (self.eps is None) == (self.fixed_r is None):
            raise ValueError("give exactly one of eps and fixed_r")
        if self.eps is not None and not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if self.fixed_r is not None and self.fixed_r < 0:
            raise ValueError("fixed_r must be nonnegative")

    def rank(self, sigma):
        if self.fixed_r is not None:
            return min(self.fixed_r, len(sigma))
        return epsilon_rank(sigma, self.eps, self.reference_sigma1)


@dataclass
class CompressionReport:
    method: str
    scheme: str
    fraction: float
    rank: int
    rel_error: float
    bound_id: float
    seed: int | None = None
    sample_size: int = 0
    mc_error: float | None = None
    bound_sampling: float | None = None
    rank_zero: bool = False
    # False only when the subsample's sigma_{r+1} exceeded the full matrix's
    # (checked when the full spectrum was supplied and rows are distinct)
    domination_ok: bool | None = None
    timings: dict = field(default_factory=dict)


class _Timer:
    def __init__(self):
        self.stages = {}

    @contextmanager
    def __call__(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = self.stages.get(name, 0.0) + time.perf_counter() - t0


def _prepare(K, sample):
    K = np.asarray(K, dtype=np.float64)
    idx = np.asarray(sample.indices if isinstance(sample, RowSample) else sample, dtype=np.intp)
    if idx.size == 0:
        raise SamplingError("empty row sample")
    if idx.min() < 0 or idx.max() >= K.shape[0]:
        raise SamplingError("row sample index out of range")
    return K, idx


def _sample_meta(sample):
    if isinstance(sample, RowSample):
        label = sample.scheme.label if sample.scheme is not None else "custom"
        return label, sample.fraction, sample.seed
    return "custom", float("nan"), None


def _sigma_at(sigma, r):
    return float(sigma[r]) if r < len(sigma) else 0.0


def _finish(report, sigma_sub, sigma_full, r, idx, m, K_norm, theorem_eps):
    if sigma_full is not None:
        sigma_full = np.asarray(sigma_full)
        s_r1 = _sigma_at(sigma_full, r)
        if len(np.unique(idx)) == len(idx):
            report.domination_ok = bool(
                _sigma_at(sigma_sub, r) <= s_r1 + _DOMINATION_SLACK * sigma_full[0]
            )
        if K_norm > 0:
            report.bound_sampling = reconstruction_bound(m, len(idx), theorem_eps, s_r1) / K_norm
    return report


def compress_id(
    K,
    sample,
    rank_rule: RankRule,
    *,
    sigma_full=None,
    K_norm=None,
    theorem_eps=0.5,
    norm_budget=None,
):
    """ID of the sampled rows of K, evaluated against all of K.

    ``sigma_full`` (singular values of K) enables the uniform-sampling bound
    and the subsample singular-value domination check. ``K_norm`` skips
    recomputing the spectral norm of K. Both bounds in the report are
    divided by the spectral norm of K so that they compare directly with
    ``rel_error``.

    Returns ``(IDFactorization or None, CompressionReport)``; a rank of
    zero yields ``None`` with ``rel_error = 1`` and ``rank_zero`` set.
    """
    timer = _Timer()
    K, idx = _prepare(K, sample)
    m, n = K.shape
    with timer("norm"):
        if K_norm is None:
            K_norm = spectral_norm(K, max_entries=norm_budget)
    with timer("factor"):
        Ks = K[idx]
        sigma_sub = singular_values(Ks)
        r = rank_rule.rank(sigma_sub)
        ident = interpolative_decomposition(Ks, r) if r > 0 else None
    with timer("error"):
        if ident is None:
            rel_error = 1.0 if K_norm > 0 else 0.0
        else:
            E = ident.reconstruct(K)
            np.subtract(K, E, out=E)
            rel_error = spectral_norm(E, max_entries=norm_budget) / K_norm if K_norm > 0 else 0.0
    scheme, fraction, seed = _sample_meta(sample)
    report = CompressionReport(
        method="id",
        scheme=scheme,
        fraction=fraction,
        rank=r,
        rel_error=float(rel_error),
        bound_id=bound_id(n, r, _sigma_at(sigma_sub, r)) / K_norm if K_norm > 0 else 0.0,
        seed=seed,
        sample_size=len(idx),
        rank_zero=r == 0,
        timings=timer.stages,
    )
    return ident, _finish(report, sigma_sub, sigma_full, r, idx, m, K_norm, theorem_eps)


def compress_svd(
    K,
    sample,
    rank_rule: RankRule,
    *,
    sigma_full=None,
    K_norm=None,
    theorem_eps=0.5,
    norm_budget=None,
):
    """Project K onto the leading right singular vectors of its sampled rows.

    Returns ``(V_r, CompressionReport)`` with error
    ``|K - K V_r V_r^T| / |K|``.
    """
    timer = _Timer()
    K, idx = _prepare(K, sample)
    m, n = K.shape
    with timer("norm"):
        if K_norm is None:
            K_norm = spectral_norm(K, max_entries=norm_budget)
    with timer("factor"):
        f = svd(K[idx])
        sigma_sub = f.singular_values
        r = rank_rule.rank(sigma_sub)
        Vr = f.V[:, :r]
    with timer("error"):
        E = K - (K @ Vr) @ Vr.T
        rel_error = spectral_norm(E, max_entries=norm_budget) / K_norm if K_norm > 0 else 0.0
    scheme, fraction, seed = _sample_meta(sample)
    report = CompressionReport(
        method="svd",
        scheme=scheme,
        fraction=fraction,
        rank=r,
        rel_error=float(rel_error),
        bound_id=bound_id(n, r, _sigma_at(sigma_sub, r)) / K_norm if K_norm > 0 else 0.0,
        seed=seed,
        sample_size=len(idx),
        rank_zero=r == 0,
        timings=timer.stages,
    )
    return Vr, _finish(report, sigma_sub, sigma_full, r, idx, m, K_norm, theorem_eps)


def mc_error(K, K_hat_apply, s_mc: float, n_mc: int, seed: int) -> list[float]:
    """Monte Carlo estimates of the relative reconstruction error.

    Each repetition keeps every row of K with probability ``s_mc`` and
    returns |K_s - Khat_s| / |K_s| on those rows. ``K_hat_apply(rows)``
    must return the matching rows of the reconstruction. Repetitions use
    independent child seeds spawned from ``seed``.
    """
    if not 0 < s_mc <= 1:
        raise ValueError("s_mc must lie in (0, 1]")
    if n_mc < 1:
        raise ValueError("n_mc must be >= 1")
    K = np.asarray(K, dtype=np.float64)
    m = K.shape[0]
    estimates = []
    for child in np.random.SeedSequence(seed).spawn(n_mc):
        rng = np.random.default_rng(child)
        rows = np.flatnonzero(rng.random(m) < s_mc)
        if rows.size == 0:
            rows = np.flatnonzero(rng.random(m) < s_mc)
        if rows.size == 0:
            raise SamplingError(f"Monte Carlo row draw with s={s_mc} was empty twice")
        Ks = K[rows]
        denom = spectral_norm(Ks)
        diff = spectral_norm(Ks - np.asarray(K_hat_apply(rows)))
        estimates.append(diff / denom if denom > 0 else 0.0)
    return estimates


def apply_skeleton(ident: IDFactorization, q, spec, targets, skeleton_points) -> np.ndarray:
    """Potentials at ``targets`` from equivalent charges ``P q`` placed on the
    skeleton sources; K itself is never formed."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (ident.P.shape[1],):
        raise ValueError(f"charge vector has shape {q.shape}, expected ({ident.P.shape[1]},)")
    skeleton_points = np.asarray(skeleton_points, dtype=np.float64)
    if len(skeleton_points) != ident.rank:
        raise ValueError("need exactly one skeleton point per skeleton index")
    q_equiv = ident.P @ q
    return kernel_matrix(spec, targets, skeleton_points) @ q_equiv


def interaction_fractions(points, spec, center, n: int, norm_budget=None):
    """Spectral-norm shares (self, nearest, far) of the N x n all-points vs
    sources matrix, split into its n source rows, the next n nearest rows and
    the remaining N - 2n rows."""
    points = np.asarray(points, dtype=np.float64)
    N = len(points)
    if N < 2 * n:
        raise ValueError(f"need N >= 2n, got N={N}, n={n}")
    order = order_by_distance(center_distances(points, center))
    K = kernel_matrix(spec, points[order], points[order[:n]])
    total = spectral_norm(K, max_entries=norm_budget)
    if total == 0:
        return 0.0, 0.0, 0.0
    parts = (K[:n], K[n : 2 * n], K[2 * n :])
    return tuple(
        spectral_norm(block, max_entries=norm_budget) / total if len(block) else 0.0
        for block in parts
    )


def bound_id(n: int, r: int, sigma_r1: float) -> float:
    """Error bound sqrt(1 + n r (n - r)) * sigma_{r+1} of a rank-r ID."""
    if not 0 <= r <= n:
        raise ValueError(f"need 0 <= r <= n, got r={r}, n={n}")
    return math.sqrt(1 + n * r * (n - r)) * sigma_r1


def bound_full_error(
    m, n, s_count, r, eps, sigma_r1_K, sigma_r1_Ks, q_norm, variant="printed"
) -> float:
    """Bound on |K q - C P q| for an ID built from s sampled rows.

    The middle (sampling) term's factor is (1 + eps)(1 - eps)^2 in the
    ``printed`` variant and (1 + eps)(1 - eps)^-2 in the ``corrected``
    variant, which matches the uniform-sampling reconstruction bound.
    """
    if variant == "printed":
        factor = (1 + eps) * (1 - eps) ** 2
    elif variant == "corrected":
        factor = (1 + eps) / (1 - eps) ** 2
    else:
        raise ValueError(f"unknown variant {variant!r}")
    sampling = math.sqrt(1 + factor * m / s_count) * sigma_r1_K
    return q_norm * (sigma_r1_K + sampling + bound_id(n, r, sigma_r1_Ks))
