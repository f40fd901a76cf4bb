"""Empirical checks of the sampling and projection error bounds on
controlled synthetic matrices.

Orientation follows the column-sampling statements: a wide ``n x m`` matrix
``A`` (m > n) whose columns are sampled. Sampling rows of a tall kernel
matrix K is the same as sampling columns of K^T.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .compress import bound_id
from .lowrank import coherence, interpolative_decomposition, svd
from .sampling import chernoff_denominator, reconstruction_bound, sample_complexity

REL_SLACK = 1e-8


@dataclass
class BoundTrialResult:
    observed: float
    bound: float
    satisfied: bool
    trial_seed: int | None = None
    skipped: bool = False
    # bound plus the rounding allowance the comparison actually used
    allowance: float | None = None

    @property
    def slack_ratio(self):
        """observed / allowance; at most 1 exactly when the trial passed."""
        limit = self.bound if self.allowance is None else self.allowance
        if limit == 0:
            return 0.0 if self.observed == 0 else math.inf
        return self.observed / limit


def _judge(observed, bound, seed=None, floor=0.0):
    limit = bound * (1 + REL_SLACK) + floor
    return BoundTrialResult(float(observed), float(bound), bool(observed <= limit), seed, allowance=float(limit))


def _child_seeds(seed, count):
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in np.random.SeedSequence(seed).spawn(count)]


def _flat_basis(m, r, rng):
    """m x r orthonormal basis whose rows all have squared norm r / m.

    Built from cosine/sine pairs of distinct frequencies (each pair has
    constant row norm), plus the constant vector when r is odd, then mixed
    by a random r x r rotation and random row signs and order.
    """
    if 2 * ((r + 1) // 2) >= m:
        raise ValueError("flat basis needs m > r + 1")
    t = 2 * np.pi * np.arange(m) / m
    cols = []
    if r % 2:
        cols.append(np.full(m, 1 / np.sqrt(m)))
    for k in range(1, r // 2 + 1):
        cols.append(np.sqrt(2 / m) * np.cos(k * t))
        cols.append(np.sqrt(2 / m) * np.sin(k * t))
    B = np.column_stack(cols)
    B = B[rng.permutation(m)] * rng.choice([-1.0, 1.0], size=(m, 1))
    Z = rng.standard_normal((r, r))
    Qr, _ = np.linalg.qr(Z)
    return B @ Qr


def _orthonormal(m, k, rng, lead=None):
    """m x k orthonormal columns from a QR of a Gaussian draw, optionally
    starting with the given orthonormal block."""
    Z = rng.standard_normal((m, k))
    if lead is not None:
        Z[:, : lead.shape[1]] = lead
    Q, R = np.linalg.qr(Z)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def make_low_coherence_matrix(m, n, r, decay, seed, flat=False):
    """m x n matrix U diag(sigma) V^T with sigma_i = decay^(i-1) for i <= r
    and 1e-8 * decay^r beyond.

    U and V are orthonormalized Gaussian draws, which gives the rows of A
    near-minimal leverage. With ``flat=True`` the leading r left singular
    vectors are replaced by an exactly flat basis, so the rank-r coherence
    of A^T equals its minimum r / m.
    """
    k = min(m, n)
    if not 1 <= r <= k:
        raise ValueError(f"need 1 <= r <= min(m, n), got r={r}")
    rng = np.random.default_rng(seed)
    lead = _flat_basis(m, r, rng) if flat else None
    U = _orthonormal(m, k, rng, lead)
    if flat:
        # QR reproduces the span of the leading block; undo its rotation
        U[:, :r] = lead
    V = _orthonormal(n, k, rng)
    sigma = np.full(k, 1e-8 * decay**r, dtype=np.float64)
    sigma[:r] = decay ** np.arange(r, dtype=np.float64)
    return (U * sigma) @ V.T


def _range_basis(B):
    if B.size == 0:
        return np.zeros((B.shape[0], 0))
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return U[:, :0]
    keep = s > max(B.shape) * np.finfo(np.float64).eps * s[0]
    return U[:, keep]


def projection_residual(A, basis):
    """(I - Pi) A for the orthogonal projector Pi onto span(basis)."""
    return A - basis @ (basis.T @ A)


def verify_deterministic_bound(A, Omega, r, bound_scale=1.0, trial_seed=None) -> BoundTrialResult:
    """|(I - Pi) A|^2 <= |S2|^2 + |S2 W2 W1^+|^2 for Pi onto range(A Omega),
    where W1 = V_r^T Omega and W2 = V_rest^T Omega.

    Instances whose W1 lacks full row rank are returned with ``skipped``.
    """
    A = np.asarray(A, dtype=np.float64)
    Omega = np.asarray(Omega, dtype=np.float64)
    p, q = A.shape
    U, s, Vt = np.linalg.svd(A, full_matrices=True)
    V = Vt.T
    W1 = V[:, :r].T @ Omega
    W2 = V[:, r:].T @ Omega
    if r > 0 and np.linalg.matrix_rank(W1) < r:
        return BoundTrialResult(math.nan, math.nan, True, trial_seed, skipped=True)
    S2 = np.zeros((p - r, q - r)) if p > r else np.zeros((0, q - r))
    tail = s[r:]
    S2[np.arange(len(tail)), np.arange(len(tail))] = tail
    s2 = tail[0] if tail.size else 0.0
    cross = S2 @ W2 @ np.linalg.pinv(W1) if r > 0 else np.zeros((S2.shape[0], 0))
    cross_norm = np.linalg.norm(cross, 2) if cross.size else 0.0
    bound = (s2**2 + cross_norm**2) * bound_scale
    basis = _range_basis(A @ Omega)
    res = projection_residual(A, basis)
    observed = np.linalg.norm(res, 2) ** 2 if res.size else 0.0
    # squared norms: allow rounding of order eps * |A|^2
    floor = 1e-13 * s[0] ** 2 if s.size else 0.0
    return _judge(observed, bound, trial_seed, floor)


def verify_projection_lemma(A, sample, r, bound_scale=1.0, trial_seed=None) -> BoundTrialResult:
    """|A - best_r(Pi A)| <= sigma_{r+1}(A) + |(I - Pi) A| for Pi onto the
    span of the sampled columns of A."""
    A = np.asarray(A, dtype=np.float64)
    idx = np.asarray(sample, dtype=np.intp)
    if idx.size == 0:
        raise ValueError("empty column sample")
    basis = _range_basis(A[:, idx])
    PA = basis @ (basis.T @ A)
    f = svd(PA)
    approx = (f.U[:, :r] * f.singular_values[:r]) @ f.V[:, :r].T
    observed = np.linalg.norm(A - approx, 2)
    s = np.linalg.svd(A, compute_uv=False)
    s_r1 = s[r] if r < len(s) else 0.0
    bound = (s_r1 + np.linalg.norm(A - PA, 2)) * bound_scale
    return _judge(observed, bound, trial_seed, 1e-12 * s[0])


def verify_id_bound(A, r, bound_scale=1.0, trial_seed=None) -> BoundTrialResult:
    """|A - A[:, skel] P| <= sqrt(1 + n r (n - r)) sigma_{r+1} + 1e-8 |A|."""
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[1]
    ident = interpolative_decomposition(A, r)
    observed = np.linalg.norm(A - ident.reconstruct(A), 2)
    s = np.linalg.svd(A, compute_uv=False)
    s_r1 = s[r] if r < len(s) else 0.0
    bound = bound_id(n, r, s_r1) * bound_scale
    return _judge(observed, bound, trial_seed, 1e-8 * s[0])


@dataclass
class SamplingTheoremResult:
    failure_rate: float
    trials: int
    violations: int
    s_count: int
    m: int
    delta: float
    coherence: float
    feasible: bool = True
    max_slack_ratio: float = 0.0

    @property
    def threshold(self):
        """delta plus three binomial standard errors."""
        return self.delta + 3 * math.sqrt(self.delta * (1 - self.delta) / max(self.trials, 1))

    @property
    def passed(self):
        return self.feasible and self.failure_rate <= self.threshold


def verify_uniform_sampling_theorem(
    m,
    n,
    r,
    eps,
    delta,
    trials,
    seed,
    *,
    replacement=False,
    decay=0.5,
    flat=True,
    exact_rank=False,
    bound_scale=1.0,
) -> SamplingTheoremResult:
    """Fraction of trials in which uniform column sampling violates the
    reconstruction bound.

    Each trial draws a fresh low-coherence ``n x m`` matrix, sizes the
    sample from its coherence, samples that many columns uniformly and
    compares |(I - Pi) A| with the bound. A sample size above m makes the
    statement vacuous and is reported as infeasible.
    """
    violations = 0
    worst = 0.0
    s_count = 0
    gamma_max = 0.0
    for trial_seed in _child_seeds(seed, trials):
        rng = np.random.default_rng(trial_seed)
        A = make_low_coherence_matrix(m, n, r, decay, trial_seed, flat=flat).T
        if exact_rank:
            f = svd(A)
            A = (f.U[:, :r] * f.singular_values[:r]) @ f.V[:, :r].T
        f = svd(A)
        gamma = coherence(A, r, f)
        gamma_max = max(gamma_max, gamma)
        s_count = sample_complexity(m, max(gamma, r / m), r, delta, eps)
        if s_count > m:
            return SamplingTheoremResult(
                math.nan, trials, 0, s_count, m, delta, gamma, feasible=False
            )
        if replacement:
            cols = rng.integers(0, m, size=s_count)
        else:
            cols = rng.permutation(m)[:s_count]
        basis = _range_basis(A[:, cols])
        observed = np.linalg.norm(projection_residual(A, basis), 2)
        s_r1 = f.singular_values[r] if r < len(f.singular_values) else 0.0
        bound = reconstruction_bound(m, s_count, eps, s_r1) * bound_scale
        floor = 1e-10 * f.singular_values[0] if exact_rank else 0.0
        if observed > bound * (1 + REL_SLACK) + floor:
            violations += 1
        if bound > 0:
            worst = max(worst, observed / bound)
    return SamplingTheoremResult(
        violations / trials, trials, violations, s_count, m, delta, gamma_max, True, worst
    )


@dataclass
class ChernoffTailResult:
    eps: float
    empirical_lower: float
    empirical_upper: float
    bound_lower: float
    bound_upper: float
    trials: int

    def _margin(self, p):
        return 3 * math.sqrt(max(p * (1 - p), 0.0) / self.trials)

    @property
    def passed(self):
        return (
            self.empirical_lower <= self.bound_lower + self._margin(self.empirical_lower)
            and self.empirical_upper <= self.bound_upper + self._margin(self.empirical_upper)
        )


def chernoff_bounds(r, L, eps):
    """Closed-form lower/upper tail bounds with mu_min = mu_max = 1."""
    upper = r * math.exp(-chernoff_denominator(eps) / L)
    if eps >= 1:
        lower = r * math.exp(-1.0 / L)
    else:
        lower = r * math.exp((-eps - (1 - eps) * math.log1p(-eps)) / L)
    return lower, upper


def verify_chernoff_tails(
    r, m, s_count, trials, seed, eps=(0.2, 0.5, 0.8), *, basis=None, replacement=True, bound_scale=1.0
) -> list[ChernoffTailResult]:
    """Tail frequencies of the extreme eigenvalues of Y = sum_k X_k.

    X_k = (m/s) V_r^T e_j e_j^T V_r with j uniform on the m rows of the
    orthonormal ``basis`` (m x r; a flat random basis by default), so that
    E[Y] = I. Returns one result per eps, each with the empirical
    frequencies of lambda_min(Y) <= 1 - eps and lambda_max(Y) >= 1 + eps
    and the matching closed-form bounds with L = (m/s) * coherence.
    """
    eps_values = np.atleast_1d(np.asarray(eps, dtype=np.float64))
    rng = np.random.default_rng(seed)
    if basis is None:
        basis = _flat_basis(m, r, rng)
    basis = np.asarray(basis, dtype=np.float64)
    if basis.shape != (m, r):
        raise ValueError(f"basis must be {m} x {r}")
    if not replacement and s_count > m:
        raise ValueError("cannot draw more than m rows without replacement")
    gamma = float(np.max(np.einsum("ij,ij->i", basis, basis)))
    L = (m / s_count) * gamma
    lo = np.empty(trials)
    hi = np.empty(trials)
    for t in range(trials):
        if replacement:
            rows = rng.integers(0, m, size=s_count)
        else:
            rows = rng.permutation(m)[:s_count]
        B = basis[rows]
        Y = (m / s_count) * (B.T @ B)
        ev = np.linalg.eigvalsh(Y)
        lo[t], hi[t] = ev[0], ev[-1]
    # eigenvalues equal to the threshold up to rounding count as inside
    tol = 1e-12
    out = []
    for e in eps_values:
        b_lo, b_hi = chernoff_bounds(r, L, float(e))
        out.append(
            ChernoffTailResult(
                float(e),
                float(np.mean(lo <= 1 - e - tol)),
                float(np.mean(hi >= 1 + e + tol)),
                b_lo * bound_scale,
                b_hi * bound_scale,
                trials,
            )
        )
    return out


def improvement_holds(ratios) -> bool:
    """sqrt(1 + 6 m/s) <= 1 + 2 m/s for every ratio m/s >= 1."""
    ratios = np.asarray(ratios, dtype=np.float64)
    return bool(np.all(np.sqrt(1 + 6 * ratios) <= 1 + 2 * ratios))


def random_instance(rng, max_m=60, max_n=30):
    """Random test matrix with one of several spectral profiles, plus a rank."""
    m = int(rng.integers(2, max_m + 1))
    n = int(rng.integers(2, max_n + 1))
    k = min(m, n)
    profile = rng.integers(0, 4)
    if profile == 0:
        sigma = rng.uniform(0.1, 1.0, size=k)
    elif profile == 1:
        sigma = 0.5 ** np.arange(k) * rng.uniform(0.5, 2.0)
    elif profile == 2:
        sigma = np.exp(-np.arange(k) ** 2 / max(k, 1))
    else:
        cut = int(rng.integers(1, k + 1))
        sigma = np.where(np.arange(k) < cut, 1.0, 1e-6 * rng.uniform(size=k))
    sigma = np.sort(sigma)[::-1]
    U = _orthonormal(m, k, rng)
    V = _orthonormal(n, k, rng)
    A = (U * sigma) @ V.T
    r = int(rng.integers(1, k + 1))
    return A, r
