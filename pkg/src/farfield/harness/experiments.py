"""Seeded experiment sweeps producing CSV rows.

Seeds
-----
Per-trial seeds are ``derive_seed(master, trial)``; the sampling seed of a
(trial, scheme) pair is ``derive_seed(trial_seed, SCHEME_CODES[scheme])``.
``derive_seed`` hashes its integer arguments with numpy's ``SeedSequence``
(``SeedSequence(first, spawn_key=rest).generate_state(1, uint64)``). The
``seed`` column of a compress row is the trial seed, which alone
regenerates the trial's data set, so a row's (seed, scheme, s, rank,
method) fields replay it in isolation (see :func:`replay_trial`).
"""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from ..bounds import (
    _flat_basis,
    improvement_holds,
    random_instance,
    verify_chernoff_tails,
    verify_deterministic_bound,
    verify_id_bound,
    verify_projection_lemma,
    verify_uniform_sampling_theorem,
)
from ..compress import (
    RankRule,
    apply_skeleton,
    bound_full_error,
    compress_id,
    compress_svd,
    interaction_fractions,
    mc_error,
)
from ..datagen import LowIntrinsicSpec, gen_low_intrinsic, gen_normal, load_points, rescale_unit_hypercube
from ..errors import FarfieldError, SearchFailure
from ..geometry import split_sources_targets
from ..kernel import KernelSpec, gaussian_from_sqdist, kernel_matrix, silverman_bandwidth
from ..lowrank import coherence, epsilon_rank, interpolative_decomposition, singular_values, svd
from ..sampling import SamplingScheme, sample_complexity, sample_rows
from .config import BandwidthSearchConfig, ExperimentConfig

SCHEME_CODES = {"uniform": 1, "bernoulli": 2, "euclidean": 3, "distance": 4, "leverage": 5, "nearest": 6}

COMPRESS_COLUMNS = [
    "dataset", "d", "N", "n", "xi", "kernel", "h", "method", "scheme", "s", "trial", "seed",
    "rank", "rel_error", "mc_error", "bound_id", "bound_sampling", "elapsed_ms", "note",
]
SPECTRA_COLUMNS = ["dataset", "d", "N", "n", "xi", "kernel", "h", "seed", "index", "sigma_normalized", "note"]
INTERACTION_COLUMNS = [
    "dataset", "d", "N", "n", "kernel", "h_scale", "h", "seed", "self_pct", "nn_pct", "far_pct", "note",
]
BANDWIDTH_COLUMNS = [
    "dataset", "d", "N", "n", "xi", "kappa", "branch", "eps", "seed", "h", "h_over_ref", "rank",
    "target_rank", "evaluations", "note",
]
VERIFY_COLUMNS = [
    "suite", "trials", "violations", "skipped", "failure_rate", "threshold", "delta", "max_slack_ratio",
    "passed", "detail",
]


def derive_seed(*keys) -> int:
    first, *rest = (int(k) for k in keys)
    seq = np.random.SeedSequence(first, spawn_key=tuple(rest))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def fmt(value):
    """Shortest round-trip text for CSV cells."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def write_csv(rows, columns, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c)) for c in columns])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


# -- data -------------------------------------------------------------------


def dataset_label(cfg: ExperimentConfig):
    ds = cfg.dataset
    if ds.kind == "low_intrinsic":
        return f"low_intrinsic(di={ds.intrinsic_dim})"
    if ds.kind == "file":
        return f"file({ds.path})"
    return "normal"


def make_points(cfg: ExperimentConfig, seed: int, d=None):
    ds = cfg.dataset
    d = ds.d if d is None else d
    if ds.kind == "normal":
        points = gen_normal(d, ds.N, seed)
    elif ds.kind == "low_intrinsic":
        spec = LowIntrinsicSpec(min(ds.intrinsic_dim, d), d, ds.noise)
        points = gen_low_intrinsic(spec, ds.N, seed)
    else:
        points = load_points(ds.path)
    if ds.rescale:
        points = rescale_unit_hypercube(points)
    return points


def resolve_center(cfg: ExperimentConfig, d):
    if cfg.geometry.center == "origin":
        return np.zeros(d)
    center = np.asarray(cfg.geometry.center, dtype=np.float64)
    if center.shape != (d,):
        raise FarfieldError(f"geometry.center has {center.size} coordinates, data has d={d}")
    return center


def make_kernel(cfg: ExperimentConfig, d, N, h_scale=None) -> KernelSpec:
    kc = cfg.kernel
    if kc.family == "laplace":
        return KernelSpec.laplace()
    # h_scale multiplies the configured bandwidth, or h_S when none is given
    ref = kc.h if kc.h is not None else silverman_bandwidth(d, N)
    h = (kc.h_scale if h_scale is None else h_scale) * ref
    if kc.family == "gaussian":
        return KernelSpec.gaussian(h)
    return KernelSpec.polynomial(h, kc.p, kc.c)


# -- compression sweep ------------------------------------------------------


@dataclass
class _Trial:
    points: np.ndarray
    split: object
    K: np.ndarray
    spec: KernelSpec
    sigma: np.ndarray
    factors: object = None
    K_norm: float = 0.0


def _prepare_trial(cfg, trial_seed, need_factors):
    points = make_points(cfg, trial_seed)
    d = points.shape[1]
    split = split_sources_targets(points, resolve_center(cfg, d), cfg.geometry.n, cfg.geometry.xi)
    spec = make_kernel(cfg, d, len(points))
    K = kernel_matrix(spec, points[split.target_indices], points[split.source_indices])
    if need_factors:
        factors = svd(K)
        sigma = factors.singular_values
    else:
        factors = None
        sigma = singular_values(K)
    return _Trial(points, split, K, spec, sigma, factors, float(sigma[0]) if sigma.size else 0.0)


def _base_row(cfg, d, N, spec, trial, seed):
    return {
        "dataset": dataset_label(cfg),
        "d": d,
        "N": N,
        "n": cfg.geometry.n,
        "xi": cfg.geometry.xi,
        "kernel": spec.family if spec is not None else cfg.kernel.family,
        "h": spec.h if spec is not None else None,
        "method": cfg.compress.method,
        "trial": trial,
        "seed": seed,
    }


def _rank_rule(cfg, sigma):
    rc = cfg.compress.rank
    if rc.fixed_r is not None:
        return RankRule(fixed_r=rc.fixed_r), rc.fixed_r
    if rc.source == "full":
        r = epsilon_rank(sigma, rc.eps)
        return RankRule(fixed_r=r), r
    ref = float(sigma[0]) if rc.reference_full_sigma1 else None
    return RankRule(eps=rc.eps, reference_sigma1=ref), None


def _schemes(cfg):
    cc = cfg.compress
    return [
        SamplingScheme(kind, replacement=cc.replacement, distance_weighting=cc.distance_weighting)
        for kind in cc.schemes
    ]


def run_experiment(cfg: ExperimentConfig, full_reference=True, progress=None):
    """One CSV row per (trial, scheme, s), a full-row reference row per trial
    (``scheme="full"``) and mean/std summary rows per (scheme, s)."""
    cc = cfg.compress
    schemes = _schemes(cfg)
    need_factors = any(s.kind == "leverage" for s in schemes)
    compress = compress_id if cc.method == "id" else compress_svd
    rows = []
    d = cfg.dataset.d
    N = cfg.dataset.N
    for trial in range(cfg.trials):
        trial_seed = derive_seed(cfg.seed, trial)
        try:
            tr = _prepare_trial(cfg, trial_seed, need_factors)
        except FarfieldError as exc:
            row = _base_row(cfg, d, N, None, trial, trial_seed)
            row.update(scheme="", note=f"error: {exc}")
            rows.append(row)
            continue
        d, N = tr.points.shape[1], tr.points.shape[0]
        rule, r_full = _rank_rule(cfg, tr.sigma)
        common = dict(sigma_full=tr.sigma, K_norm=tr.K_norm, theorem_eps=cc.theorem_eps,
                      norm_budget=cfg.memory_budget)
        jobs = []
        if full_reference:
            jobs.append(("full", None, 1.0, None))
        for scheme in schemes:
            sample_seed = derive_seed(trial_seed, SCHEME_CODES[scheme.kind])
            scheme = _leverage_rank(scheme, tr.sigma, r_full, cc.rank.eps)
            for s in cc.s_grid:
                jobs.append((scheme.label, scheme, s, sample_seed))
        for label, scheme, s, sample_seed in jobs:
            row = _base_row(cfg, d, N, tr.spec, trial, trial_seed)
            row.update(scheme=label, s=s)
            t0 = time.perf_counter()
            try:
                if scheme is None:
                    sample = np.arange(tr.K.shape[0])
                else:
                    sample = sample_rows(scheme, s, sample_seed, K=tr.K, split=tr.split, factors=tr.factors)
                fact, rep = compress(tr.K, sample, rule, **common)
                row.update(rank=rep.rank, rel_error=rep.rel_error, bound_id=rep.bound_id,
                           bound_sampling=rep.bound_sampling)
                notes = []
                if rep.rank_zero:
                    notes.append("rank zero")
                if rep.domination_ok is False:
                    notes.append("subsample sigma_{r+1} exceeds full")
                if cc.mc is not None and fact is not None:
                    approx = _reconstruction(tr.K, fact, cc.method)
                    mc_seed = derive_seed(trial_seed, 99 if scheme is None else SCHEME_CODES[scheme.kind], 99)
                    est = mc_error(tr.K, lambda rows_: approx[rows_], cc.mc.s, cc.mc.n, mc_seed)
                    row["mc_error"] = float(np.median(est))
                row["note"] = "; ".join(notes)
            except FarfieldError as exc:
                row["note"] = f"error: {exc}"
            if cc.record_timings:
                row["elapsed_ms"] = round((time.perf_counter() - t0) * 1000.0, 3)
            rows.append(row)
        if progress is not None:
            progress(trial)
    rows.extend(_summaries(rows))
    return rows


def _leverage_rank(scheme, sigma, r_full, eps):
    if scheme.kind != "leverage":
        return scheme
    r = r_full if r_full else epsilon_rank(sigma, eps or 0.5)
    return SamplingScheme("leverage", rank_for_leverage=max(1, min(r, len(sigma))))


def replay_trial(cfg: ExperimentConfig, seed: int, scheme: str, s: float, rank=None, method=None):
    """Recompute one compress row from its (seed, scheme, s, rank, method)
    fields; returns the CompressionReport."""
    method = method or cfg.compress.method
    # same spectrum route as run_experiment so that the replay is bit-exact
    need_factors = "leverage" in cfg.compress.schemes or scheme == "leverage"
    tr = _prepare_trial(cfg, seed, need_factors)
    rule, r_full = _rank_rule(cfg, tr.sigma)
    if rank is not None:
        rule = RankRule(fixed_r=int(rank))
    if scheme == "full":
        sample = np.arange(tr.K.shape[0])
    else:
        kind, _, repl = scheme.partition("+")
        sch = SamplingScheme(kind, replacement=bool(repl), distance_weighting=cfg.compress.distance_weighting)
        sch = _leverage_rank(sch, tr.sigma, r_full, cfg.compress.rank.eps)
        sample = sample_rows(sch, s, derive_seed(seed, SCHEME_CODES[kind]), K=tr.K, split=tr.split,
                             factors=tr.factors)
    compress = compress_id if method == "id" else compress_svd
    return compress(tr.K, sample, rule, sigma_full=tr.sigma, K_norm=tr.K_norm,
                    theorem_eps=cfg.compress.theorem_eps, norm_budget=cfg.memory_budget)[1]


def _reconstruction(K, fact, method):
    if method == "id":
        return fact.reconstruct(K)
    return (K @ fact) @ fact.T


def _summaries(rows):
    groups = {}
    for row in rows:
        if row.get("rel_error") is None or not isinstance(row.get("trial"), int):
            continue
        groups.setdefault((row["scheme"], row["s"]), []).append(row)
    out = []
    for (scheme, s), group in groups.items():
        errs = np.array([g["rel_error"] for g in group])
        ranks = np.array([g["rank"] for g in group], dtype=np.float64)
        base = {k: group[0][k] for k in ("dataset", "d", "N", "n", "xi", "kernel", "h", "method")}
        mean = dict(base, scheme=scheme, s=s, trial="mean", rank=int(np.floor(ranks.mean() + 0.5)),
                    rel_error=float(errs.mean()), note=f"trials={len(group)}")
        for key in ("mc_error", "bound_id", "bound_sampling"):
            vals = [g[key] for g in group if g.get(key) is not None]
            if vals:
                mean[key] = float(np.mean(vals))
        std = dict(base, scheme=scheme, s=s, trial="std",
                   rel_error=float(errs.std(ddof=1)) if len(errs) > 1 else 0.0,
                   note=f"trials={len(group)}")
        out.extend([mean, std])
    return out


# -- spectra and interactions ----------------------------------------------


def spectra_report(cfg: ExperimentConfig):
    """Normalized singular values sigma_i / sigma_1 of K for each (d, h) pair."""
    dims = cfg.spectra.dims or [cfg.dataset.d]
    scales = cfg.spectra.h_scales or [None]
    rows = []
    for d in dims:
        seed = derive_seed(cfg.seed, 0)
        try:
            points = make_points(cfg, seed, d=d)
            d_eff = points.shape[1]
            split = split_sources_targets(points, resolve_center(cfg, d_eff), cfg.geometry.n,
                                          cfg.geometry.xi)
        except FarfieldError as exc:
            rows.append(dict(dataset=dataset_label(cfg), d=d, N=cfg.dataset.N, n=cfg.geometry.n,
                             xi=cfg.geometry.xi, kernel=cfg.kernel.family, seed=seed,
                             note=f"error: {exc}"))
            continue
        for scale in scales if cfg.kernel.family != "laplace" else [None]:
            spec = make_kernel(cfg, d_eff, len(points), h_scale=scale)
            base = dict(dataset=dataset_label(cfg), d=d_eff, N=len(points), n=cfg.geometry.n,
                        xi=cfg.geometry.xi, kernel=spec.family, h=spec.h, seed=seed)
            try:
                K = kernel_matrix(spec, points[split.target_indices], points[split.source_indices])
                sigma = singular_values(K)
            except FarfieldError as exc:
                rows.append(dict(base, note=f"error: {exc}"))
                continue
            if sigma[0] == 0:
                rows.append(dict(base, note="zero matrix"))
                continue
            values = sigma / sigma[0]
            if cfg.spectra.max_values is not None:
                values = values[: cfg.spectra.max_values]
            rows.extend(dict(base, index=i + 1, sigma_normalized=float(v)) for i, v in enumerate(values))
    return rows


def interactions_report(cfg: ExperimentConfig):
    """Self / nearest-neighbor / far-field norm shares, in percent, over a
    (d, h_scale) grid."""
    rows = []
    for d in cfg.interactions.dims:
        seed = derive_seed(cfg.seed, 0)
        points = make_points(cfg, seed, d=d)
        d_eff = points.shape[1]
        center = resolve_center(cfg, d_eff)
        for scale in cfg.interactions.h_scales:
            spec = make_kernel(cfg, d_eff, len(points), h_scale=scale)
            row = dict(dataset=dataset_label(cfg), d=d_eff, N=len(points), n=cfg.geometry.n,
                       kernel=spec.family, h_scale=scale, h=spec.h, seed=seed)
            try:
                fr = interaction_fractions(points, spec, center, cfg.geometry.n,
                                           norm_budget=cfg.memory_budget)
                row.update(self_pct=100 * fr[0], nn_pct=100 * fr[1], far_pct=100 * fr[2])
            except (FarfieldError, ValueError) as exc:
                row["note"] = f"error: {exc}"
            rows.append(row)
    return rows


# -- bandwidth search -------------------------------------------------------

BandwidthSearchSpec = BandwidthSearchConfig


@dataclass
class BandwidthResult:
    h: float
    h_over_ref: float
    rank: int
    target_rank: float
    profile: list = field(default_factory=list)

    @property
    def evaluations(self):
        return len(self.profile)


def bandwidth_search(targets, sources, spec: BandwidthSearchSpec, h_ref: float) -> BandwidthResult:
    """Gaussian bandwidth whose epsilon-rank is closest to ``kappa * n``.

    The rank is small for both tiny and huge h and peaks in between, so the
    budget is usually met twice. A geometric scan over
    [1e-3 h_ref, 1e2 h_ref] locates the crossing on the requested branch
    (the first crossing for ``small_h``, the last for ``large_h``); the
    bracket is widened by doubling up to 5 times when the crossing lies
    outside it. Bisection in log h then narrows the bracket until the rank
    is within ``rank_tolerance_rows`` of the target, the bracket is
    narrower than ``rel_tol``, or ``max_iters`` is reached.
    """
    D2 = cdist(np.asarray(targets, dtype=np.float64), np.asarray(sources, dtype=np.float64), "sqeuclidean")
    n = D2.shape[1]
    target = spec.kappa * n
    method = "gram" if spec.eps >= 1e-6 else "svd"
    profile = []
    cache = {}

    def rank(h):
        if h not in cache:
            K = gaussian_from_sqdist(D2, h)
            cache[h] = epsilon_rank(singular_values(K, method=method), spec.eps)
            profile.append((h, cache[h]))
        return cache[h]

    lo, hi = 1e-3 * h_ref, 1e2 * h_ref
    steps = int(math.ceil(math.log(hi / lo) / math.log(spec.grid_factor)))
    grid = [lo * spec.grid_factor**i for i in range(steps + 1)]
    ranks = [rank(h) for h in grid]
    small = spec.branch == "small_h"
    for _ in range(5):
        hits = [i for i, r in enumerate(ranks) if r >= target]
        if small and hits and hits[0] == 0:
            grid.insert(0, grid[0] / 2)
            ranks.insert(0, rank(grid[0]))
            continue
        if hits and not small and hits[-1] == len(grid) - 1:
            grid.append(grid[-1] * 2)
            ranks.append(rank(grid[-1]))
            continue
        if not hits:
            grid.append(grid[-1] * 2)
            ranks.append(rank(grid[-1]))
            continue
        break
    hits = [i for i, r in enumerate(ranks) if r >= target]
    if not hits or (small and hits[0] == 0) or (not small and hits[-1] == len(grid) - 1):
        raise SearchFailure(
            f"no {spec.branch} bracket for rank {target:g} (peak rank {max(ranks)})",
            profile=sorted(profile),
        )
    if small:
        a, b = grid[hits[0] - 1], grid[hits[0]]  # rank(a) < target <= rank(b)
    else:
        a, b = grid[hits[-1]], grid[hits[-1] + 1]  # rank(a) >= target > rank(b)

    best = min((a, b), key=lambda h: (abs(rank(h) - target), h))
    for _ in range(spec.max_iters):
        if abs(rank(best) - target) <= spec.rank_tolerance_rows or b / a - 1 <= spec.rel_tol:
            break
        mid = math.sqrt(a * b)
        r_mid = rank(mid)
        if (r_mid >= target) == small:
            b = mid
        else:
            a = mid
        best = min((best, mid), key=lambda h: (abs(rank(h) - target), h))
    return BandwidthResult(best, best / h_ref, rank(best), target, sorted(profile))


def bandwidth_report(cfg: ExperimentConfig):
    bs = cfg.bandwidth_search
    rows = []
    d = cfg.dataset.d
    for i in range(bs.seeds):
        seed = derive_seed(cfg.seed, i)
        row = dict(dataset=dataset_label(cfg), d=d, N=cfg.dataset.N, n=cfg.geometry.n,
                   xi=cfg.geometry.xi, kappa=bs.kappa, branch=bs.branch, eps=bs.eps, seed=seed,
                   target_rank=bs.kappa * cfg.geometry.n)
        try:
            points = make_points(cfg, seed)
            d = points.shape[1]
            split = split_sources_targets(points, resolve_center(cfg, d), cfg.geometry.n, cfg.geometry.xi)
            h_ref = silverman_bandwidth(d, len(points))
            res = bandwidth_search(points[split.target_indices], points[split.source_indices], bs, h_ref)
            row.update(d=d, N=len(points), h=res.h, h_over_ref=res.h_over_ref, rank=res.rank,
                       evaluations=res.evaluations)
        except SearchFailure as exc:
            row.update(note=f"error: {exc}", evaluations=len(exc.profile))
        except FarfieldError as exc:
            row["note"] = f"error: {exc}"
        rows.append(row)
    ok = [r for r in rows if r.get("h") is not None]
    if ok:
        ratios = np.array([r["h_over_ref"] for r in ok])
        base = {k: rows[0][k] for k in ("dataset", "d", "N", "n", "xi", "kappa", "branch", "eps", "target_rank")}
        rows.append(dict(base, seed="mean", h=float(np.mean([r["h"] for r in ok])),
                         h_over_ref=float(ratios.mean()),
                         rank=int(np.floor(np.mean([r["rank"] for r in ok]) + 0.5)),
                         note=f"seeds={len(ok)}"))
        rows.append(dict(base, seed="std", h_over_ref=float(ratios.std(ddof=1)) if len(ok) > 1 else 0.0,
                         note=f"seeds={len(ok)}"))
    return rows


# -- verification suites ----------------------------------------------------


@dataclass
class SuiteResult:
    suite: str
    trials: int
    violations: int
    passed: bool
    skipped: int = 0
    failure_rate: float | None = None
    threshold: float | None = None
    delta: float | None = None
    max_slack_ratio: float | None = None
    detail: str = ""

    def row(self):
        return {c: getattr(self, c) for c in VERIFY_COLUMNS}


def _deterministic_suite(name, results):
    valid = [r for r in results if not r.skipped]
    violations = sum(not r.satisfied for r in valid)
    slack = max((r.slack_ratio for r in valid if np.isfinite(r.slack_ratio)), default=0.0)
    return SuiteResult(name, len(results), violations, violations == 0,
                       skipped=len(results) - len(valid), failure_rate=violations / max(len(valid), 1),
                       threshold=0.0, max_slack_ratio=slack)


def _suite_id_bound(vc, seed):
    out = []
    for ts in _seeds(seed, vc.trials):
        A, r = random_instance(np.random.default_rng(ts))
        out.append(verify_id_bound(A, r, vc.bound_scale, ts))
    return _deterministic_suite("id_bound", out)


def _suite_hmt(vc, seed):
    out = []
    for ts in _seeds(seed, vc.trials):
        rng = np.random.default_rng(ts)
        A, r = random_instance(rng, max_m=40, max_n=40)
        s = int(rng.integers(r, r + 10))
        Omega = rng.standard_normal((A.shape[1], s))
        out.append(verify_deterministic_bound(A, Omega, r, vc.bound_scale, ts))
    return _deterministic_suite("hmt", out)


def _suite_projection(vc, seed):
    out = []
    for ts in _seeds(seed, vc.trials):
        rng = np.random.default_rng(ts)
        A, r = random_instance(rng, max_m=40, max_n=40)
        k = int(rng.integers(1, A.shape[1] + 1))
        cols = rng.permutation(A.shape[1])[:k]
        out.append(verify_projection_lemma(A, cols, r, vc.bound_scale, ts))
    return _deterministic_suite("projection", out)


def _suite_uniform(vc, seed, replacement):
    name = "uniform_repl" if replacement else "uniform"
    res = verify_uniform_sampling_theorem(400, 60, 5, vc.eps, vc.delta, vc.trials, seed,
                                          replacement=replacement, bound_scale=vc.bound_scale)
    detail = f"m=400 n=60 r=5 s={res.s_count} coherence={res.coherence:.6g}"
    if not res.feasible:
        detail += " infeasible (s > m)"
    return SuiteResult(name, res.trials, res.violations, res.passed, failure_rate=res.failure_rate,
                       threshold=res.threshold, delta=vc.delta, max_slack_ratio=res.max_slack_ratio,
                       detail=detail)


def _suite_improvement(vc, seed):
    ratios = np.arange(1, 10_001, dtype=np.float64)
    if vc.bound_scale != 1.0:
        ok = bool(np.all(np.sqrt(1 + 6 * ratios) <= vc.bound_scale * (1 + 2 * ratios)))
    else:
        ok = improvement_holds(ratios)
    return SuiteResult("improvement", len(ratios), 0 if ok else 1, ok, detail="m/s in 1..10000")


def _suite_chernoff(vc, seed):
    r, m, s_count = 5, 400, 200
    basis = _flat_basis(m, r, np.random.default_rng(derive_seed(seed, 1)))
    results = verify_chernoff_tails(r, m, s_count, vc.trials, seed, vc.chernoff_eps, basis=basis,
                                    bound_scale=vc.bound_scale)
    failed = [res for res in results if not res.passed]
    detail = " ".join(
        f"eps={res.eps:g}:lo={res.empirical_lower:.4g}/{res.bound_lower:.4g},"
        f"hi={res.empirical_upper:.4g}/{res.bound_upper:.4g}"
        for res in results
    )
    return SuiteResult("chernoff", vc.trials, len(failed), not failed, detail=detail)


@dataclass
class SkeletonTrial:
    observed: float
    bound_printed: float
    bound_corrected: float
    rank: int
    s_count: int


def skeleton_trial(seed, d=3, N=1500, n=40, xi=2.0, rank_eps=1e-3, theorem_eps=0.5, delta=0.1):
    """Compare apply_skeleton with direct summation on a random Gaussian
    kernel instance and evaluate both variants of the full error bound."""
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((N, d))
    split = split_sources_targets(points, np.zeros(d), n, xi)
    spec = KernelSpec.gaussian(float(rng.uniform(0.5, 2.0)))
    targets = points[split.target_indices]
    sources = points[split.source_indices]
    K = kernel_matrix(spec, targets, sources)
    m = K.shape[0]
    f = svd(K)
    r = max(1, epsilon_rank(f.singular_values, rank_eps))
    r = min(r, n - 1)
    gamma = coherence(K.T, r, type(f)(f.V, f.singular_values, f.U))
    s_count = min(m, sample_complexity(m, max(gamma, r / m), r, delta, theorem_eps))
    rows = rng.permutation(m)[:s_count]
    Ks = K[rows]
    ident = interpolative_decomposition(Ks, r)
    q = rng.standard_normal(n)
    u = apply_skeleton(ident, q, spec, targets, sources[ident.skeleton])
    observed = float(np.linalg.norm(K @ q - u))
    s_K = f.singular_values[r] if r < len(f.singular_values) else 0.0
    sig_s = np.linalg.svd(Ks, compute_uv=False)
    s_Ks = sig_s[r] if r < len(sig_s) else 0.0
    qn = float(np.linalg.norm(q))
    printed = bound_full_error(m, n, s_count, r, theorem_eps, s_K, s_Ks, qn, "printed")
    corrected = bound_full_error(m, n, s_count, r, theorem_eps, s_K, s_Ks, qn, "corrected")
    return SkeletonTrial(observed, printed, corrected, r, s_count)


def _suite_skeleton(vc, seed):
    violations = 0
    worst = 0.0
    trials = _seeds(seed, vc.skeleton_trials)
    for ts in trials:
        t = skeleton_trial(ts, theorem_eps=vc.eps, delta=vc.delta)
        bound = t.bound_printed * vc.bound_scale
        if t.observed > bound * (1 + 1e-8):
            violations += 1
        if bound > 0:
            worst = max(worst, t.observed / bound)
    return SuiteResult("skeleton", len(trials), violations, violations == 0,
                       failure_rate=violations / len(trials), threshold=0.0, max_slack_ratio=worst,
                       detail="bound: printed (1-eps)^2 variant")


def _seeds(seed, count):
    return [derive_seed(seed, i) for i in range(count)]


SUITES = {
    "id_bound": _suite_id_bound,
    "hmt": _suite_hmt,
    "projection": _suite_projection,
    "uniform": lambda vc, seed: _suite_uniform(vc, seed, False),
    "uniform_repl": lambda vc, seed: _suite_uniform(vc, seed, True),
    "improvement": _suite_improvement,
    "chernoff": _suite_chernoff,
    "skeleton": _suite_skeleton,
}


def verify_command(cfg: ExperimentConfig, suites=None):
    """Run the selected verification suites. Returns ``(results, all_passed)``."""
    vc = cfg.verify
    names = suites or vc.suites
    results = []
    for i, name in enumerate(names):
        results.append(SUITES[name](vc, derive_seed(cfg.seed, 1000 + list(SUITES).index(name))))
    return results, all(r.passed for r in results)
