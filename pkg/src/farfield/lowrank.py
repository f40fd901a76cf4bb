"""Dense factorizations: SVD, column-pivoted QR, interpolative decomposition,
epsilon-rank, leverage scores and coherence.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import IllConditionedSkeletonError, NumericalError

EPS = np.finfo(np.float64).eps

# Dense spectral norms are used up to this many columns (or rows) in the
# smaller dimension; beyond it, power iteration takes over.
DENSE_NORM_LIMIT = 1000


@dataclass
class SVDFactors:
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    def truncate(self, r):
        return SVDFactors(self.U[:, :r], self.singular_values[:r], self.V[:, :r])


def svd(A) -> SVDFactors:
    """Thin SVD via LAPACK's divide-and-conquer driver (bidiagonalization).

    Wide inputs are factored through their transpose, which is markedly
    faster for the very wide matrices that arise when scoring rows of tall
    kernel matrices.
    """
    A = np.asarray(A, dtype=np.float64)
    if not np.all(np.isfinite(A)):
        raise NumericalError("svd input has non-finite entries")
    wide = A.shape[0] < A.shape[1]
    try:
        U, s, Vt = np.linalg.svd(A.T if wide else A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"svd did not converge: {exc}") from exc
    if wide:
        return SVDFactors(Vt.T, s, U)
    return SVDFactors(U, s, Vt.T)


def singular_values(A, method="svd") -> np.ndarray:
    """Singular values in nonincreasing order.

    ``method="gram"`` takes square roots of the eigenvalues of the smaller
    Gram matrix. It is several times faster for tall matrices but only
    resolves ratios sigma_i / sigma_1 down to about 1e-7; callers use it
    solely for epsilon-rank counting with eps well above that floor.
    """
    A = np.asarray(A, dtype=np.float64)
    if method == "svd":
        try:
            return np.linalg.svd(A, compute_uv=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"svd did not converge: {exc}") from exc
    if method == "gram":
        G = A.T @ A if A.shape[0] >= A.shape[1] else A @ A.T
        ev = np.linalg.eigvalsh(G)[::-1]
        return np.sqrt(np.clip(ev, 0.0, None))
    raise ValueError(f"unknown method {method!r}")


def power_iteration(A, tol=1e-6, max_iter=500, seed=0):
    """Largest singular value of A by power iteration on A^T A.

    Stops when successive estimates agree to relative tolerance ``tol``.
    Returns ``(sigma, iterations)``; running out of iterations returns the
    last estimate with a ``RuntimeWarning``.
    """
    A = np.asarray(A, dtype=np.float64)
    x = np.random.default_rng(seed).standard_normal(A.shape[1])
    x /= np.linalg.norm(x)
    sigma = 0.0
    for it in range(1, max_iter + 1):
        y = A @ x
        z = A.T @ y
        znorm = np.linalg.norm(z)
        if znorm == 0.0:
            return 0.0, it
        new = np.sqrt(znorm)
        x = z / znorm
        if abs(new - sigma) <= tol * new:
            return float(new), it
        sigma = new
    warnings.warn(
        f"power iteration stopped after {max_iter} iterations", RuntimeWarning, stacklevel=2
    )
    return float(sigma), max_iter


def spectral_norm(A, method="auto", max_entries=None, tol=1e-6, max_iter=500) -> float:
    """Spectral norm of a dense matrix.

    ``auto`` picks the dense route when the smaller dimension is at most
    ``DENSE_NORM_LIMIT`` (and the matrix has at most ``max_entries``
    entries, if given), else power iteration. The dense route takes the top
    eigenvalue of the small Gram matrix, which is accurate to machine
    precision relative to the norm itself.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.size == 0:
        return 0.0
    if method == "auto":
        dense = min(A.shape) <= DENSE_NORM_LIMIT and (
            max_entries is None or A.size <= max_entries
        )
        method = "dense" if dense else "power"
    if method == "dense":
        G = A.T @ A if A.shape[0] >= A.shape[1] else A @ A.T
        top = scipy.linalg.eigh(G, eigvals_only=True, subset_by_index=[len(G) - 1, len(G) - 1])
        return float(np.sqrt(max(top[0], 0.0)))
    if method == "svd":
        return float(np.linalg.norm(A, 2))
    if method == "power":
        return power_iteration(A, tol=tol, max_iter=max_iter)[0]
    raise ValueError(f"unknown method {method!r}")


def epsilon_rank(singular_values, eps: float, reference_sigma1: float | None = None) -> int:
    """Smallest r with sigma_{r+1} / sigma_ref < eps.

    ``sigma_ref`` is the first singular value unless ``reference_sigma1`` is
    given. Returns ``len(singular_values)`` if nothing drops below the
    threshold, and 0 for an all-zero spectrum.
    """
    s = np.asarray(singular_values, dtype=np.float64)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if s.size == 0:
        return 0
    ref = s[0] if reference_sigma1 is None else float(reference_sigma1)
    if ref <= 0:
        return 0
    below = np.flatnonzero(s < eps * ref)
    return int(below[0]) if below.size else int(s.size)


@dataclass
class PivotedQR:
    """A[:, perm] = Q @ R with Q (m x k) orthonormal, R (k x n) upper
    trapezoidal, k = min(m, n)."""

    Q: np.ndarray
    R: np.ndarray
    perm: np.ndarray


def _householder_pivoted(A, want_q=True):
    A = np.array(A, dtype=np.float64, order="F", copy=True)
    m, n = A.shape
    k = min(m, n)
    perm = np.arange(n)
    norms = np.linalg.norm(A, axis=0)
    ref = norms.copy()
    tol = np.sqrt(EPS)
    reflectors = []
    for j in range(k):
        p = j + int(np.argmax(norms[j:]))
        if p != j:
            A[:, [j, p]] = A[:, [p, j]]
            perm[[j, p]] = perm[[p, j]]
            norms[[j, p]] = norms[[p, j]]
            ref[[j, p]] = ref[[p, j]]

        x = A[j:, j]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            reflectors.append(None)
        else:
            alpha = -xnorm if x[0] >= 0 else xnorm
            v = x.copy()
            v[0] -= alpha
            v /= np.linalg.norm(v)
            A[j:, j:] -= 2.0 * np.outer(v, v @ A[j:, j:])
            A[j + 1 :, j] = 0.0
            A[j, j] = alpha
            reflectors.append(v)

        # downdate trailing column norms; recompute where cancellation has
        # eaten about half the significant digits
        if j + 1 < n:
            rest = slice(j + 1, n)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(norms[rest] > 0, A[j, rest] / norms[rest], 0.0)
                shrink = np.clip(1.0 - ratio * ratio, 0.0, None)
                check = shrink * np.where(ref[rest] > 0, (norms[rest] / ref[rest]) ** 2, 0.0)
            stale = check <= tol
            norms[rest] = norms[rest] * np.sqrt(shrink)
            if np.any(stale):
                cols = np.flatnonzero(stale) + j + 1
                if j + 1 < m:
                    fresh = np.linalg.norm(A[j + 1 :, cols], axis=0)
                else:
                    fresh = np.zeros(len(cols))
                norms[cols] = fresh
                ref[cols] = fresh

    R = np.triu(A[:k, :])
    Q = None
    if want_q:
        Q = np.eye(m, k)
        for j in range(k - 1, -1, -1):
            v = reflectors[j]
            if v is not None:
                Q[j:, :] -= 2.0 * np.outer(v, v @ Q[j:, :])
    return Q, R, perm


def pivoted_qr(A) -> PivotedQR:
    """Householder QR with greedy column pivoting.

    At each step the remaining column of largest residual norm is moved to
    the front (ties go to the lowest current position). Residual norms are
    downdated and recomputed when they lose roughly half their digits.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or min(A.shape) < 1:
        raise ValueError(f"need a nonempty 2-d matrix, got shape {A.shape}")
    Q, R, perm = _householder_pivoted(A)
    return PivotedQR(Q, R, perm)


@dataclass
class IDFactorization:
    """A ~= A[:, skeleton] @ P, with P[:, skeleton] the identity."""

    skeleton: np.ndarray
    P: np.ndarray

    @property
    def rank(self):
        return len(self.skeleton)

    def reconstruct(self, A):
        return np.asarray(A)[:, self.skeleton] @ self.P


def interpolative_decomposition(A, r: int) -> IDFactorization:
    """Rank-r column ID from a pivoted QR.

    With R partitioned as [[R11, R12], [0, R22]] (R11 of size r x r), the
    interpolation coefficients solve R11 T = R12 and P = [I | T] mapped back
    to the original column order. Tall inputs are first reduced to their
    n x n triangular factor by an unpivoted QR, which leaves the column
    pivoting and the coefficients unchanged.
    """
    A = np.asarray(A, dtype=np.float64)
    m, n = A.shape
    if not 1 <= r <= min(m, n):
        raise ValueError(f"rank r={r} outside [1, {min(m, n)}]")
    if m > n:
        A = scipy.linalg.qr(A, mode="r", check_finite=False)[0][:n].copy()
    _, R, perm = _householder_pivoted(A, want_q=False)
    lead = abs(R[0, 0])
    if lead == 0.0 or abs(R[r - 1, r - 1]) < 10 * EPS * lead:
        raise IllConditionedSkeletonError(
            f"|R[{r - 1},{r - 1}]| / |R[0,0]| below 10 eps at rank {r}; reduce the rank"
        )
    T = scipy.linalg.solve_triangular(R[:r, :r], R[:r, r:], lower=False)
    P = np.empty((r, n))
    P[:, perm[:r]] = np.eye(r)
    P[:, perm[r:]] = T
    return IDFactorization(skeleton=perm[:r].copy(), P=P)


def _right_block(A, r, factors=None):
    A = np.asarray(A, dtype=np.float64)
    if not 1 <= r <= min(A.shape):
        raise ValueError(f"rank r={r} outside [1, {min(A.shape)}]")
    f = factors if factors is not None else svd(A)
    s = f.singular_values
    if r < len(s) and s[0] > 0 and abs(s[r - 1] - s[r]) <= 1e-12 * s[0]:
        warnings.warn(
            f"sigma_{r} == sigma_{r + 1}: rank-{r} leverage scores are not unique",
            RuntimeWarning,
            stacklevel=3,
        )
    return f.V[:, :r]


def leverage_scores(A, r: int, factors: SVDFactors | None = None) -> np.ndarray:
    """Squared row norms of V_r: one score per column of A, summing to r.

    Pass precomputed ``factors`` (from :func:`svd`) to avoid refactoring.
    """
    Vr = _right_block(A, r, factors)
    return np.einsum("ij,ij->i", Vr, Vr)


def coherence(A, r: int, factors: SVDFactors | None = None) -> float:
    return float(leverage_scores(A, r, factors).max())
