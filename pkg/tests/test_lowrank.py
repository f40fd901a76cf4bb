import warnings

import numpy as np
import pytest
import scipy.linalg
import scipy.linalg.interpolative as sli
from hypothesis import given, settings
from hypothesis import strategies as st

from farfield.compress import bound_id
from farfield.errors import IllConditionedSkeletonError, NumericalError
from farfield.lowrank import (
    coherence,
    epsilon_rank,
    interpolative_decomposition,
    leverage_scores,
    pivoted_qr,
    power_iteration,
    singular_values,
    spectral_norm,
    svd,
)


def rand(shape, seed):
    return np.random.default_rng(seed).standard_normal(shape)


def test_svd_examples():
    np.testing.assert_allclose(svd(np.diag([3.0, 2.0, 1.0])).singular_values, [3, 2, 1])
    u = np.array([3.0, 4.0]) / 5
    v = np.array([1.0, 2.0, 2.0]) / 3
    s = svd(np.outer(u, v)).singular_values
    assert s[0] == pytest.approx(1.0) and s[1] < 1e-15


@pytest.mark.parametrize("shape", [(12, 7), (7, 12), (9, 9)])
def test_svd_factors(shape):
    A = rand(shape, 1)
    f = svd(A)
    k = min(shape)
    assert np.linalg.norm(f.U.T @ f.U - np.eye(k)) < 1e-10
    assert np.linalg.norm(f.V.T @ f.V - np.eye(k)) < 1e-10
    assert np.linalg.norm((f.U * f.singular_values) @ f.V.T - A) <= 1e-10 * np.linalg.norm(A)
    assert np.all(np.diff(f.singular_values) <= 0)


def test_svd_matches_eigen_oracle():
    A = rand((12, 7), 2)
    ev = np.sort(scipy.linalg.eigvalsh(A.T @ A))[::-1]
    np.testing.assert_allclose(svd(A).singular_values ** 2, ev, rtol=1e-8)
    np.testing.assert_allclose(singular_values(A, "gram") ** 2, ev, rtol=1e-8)


def test_svd_rejects_nonfinite():
    with pytest.raises(NumericalError):
        svd(np.array([[1.0, np.nan]]))


def test_epsilon_rank_examples():
    assert epsilon_rank([1, 0.5, 1e-3], 1e-2) == 2
    assert epsilon_rank(np.ones(5), 0.5) == 5
    assert epsilon_rank([1, 1e-3, 1e-4], 1e-2) == 1
    assert epsilon_rank([0.0, 0.0], 0.1) == 0
    # measured against an external reference
    assert epsilon_rank([0.5, 0.2, 0.05], 0.1, reference_sigma1=1.0) == 2


def test_spectral_norm_routes_agree():
    A = rand((300, 40), 3)
    ref = np.linalg.norm(A, 2)
    for method in ("dense", "svd", "auto"):
        assert spectral_norm(A, method) == pytest.approx(ref, rel=1e-12)
    assert spectral_norm(A, "power", tol=1e-10, max_iter=5000) == pytest.approx(ref, rel=1e-6)
    assert spectral_norm(A, max_entries=100) == pytest.approx(ref, rel=1e-5)


def test_power_iteration_warns_on_cap():
    A = np.diag([1.0, 0.999999])
    with pytest.warns(RuntimeWarning):
        power_iteration(A, tol=1e-15, max_iter=3)


def test_pivoted_qr_orthogonal_input():
    Q0, _ = np.linalg.qr(rand((6, 6), 4))
    qr = pivoted_qr(Q0)
    np.testing.assert_allclose(np.abs(np.diag(qr.R)), 1.0, rtol=1e-12)


def test_pivoted_qr_duplicate_columns():
    a, b = rand((8, 2), 5).T
    qr = pivoted_qr(np.column_stack([a, a, b]))
    assert abs(qr.R[2, 2]) < 1e-12


@pytest.mark.parametrize("shape", [(30, 20), (20, 30), (15, 15)])
def test_pivoted_qr_properties(shape):
    A = rand(shape, 6)
    qr = pivoted_qr(A)
    assert np.linalg.norm(qr.Q @ qr.R - A[:, qr.perm]) / np.linalg.norm(A) < 1e-12
    d = np.abs(np.diag(qr.R))
    assert np.all(np.diff(d) <= 1e-12 * d[0])
    assert np.allclose(np.triu(qr.R), qr.R)
    # independent oracle: LAPACK's pivoted QR makes the same greedy choices
    _, _, perm = scipy.linalg.qr(A, pivoting=True)
    np.testing.assert_array_equal(qr.perm, perm)


def test_id_all_ones():
    ident = interpolative_decomposition(np.ones((4, 3)), 1)
    np.testing.assert_array_equal(ident.skeleton, [0])
    np.testing.assert_allclose(ident.P, [[1, 1, 1]])


def test_id_full_rank_exact():
    A = rand((10, 6), 7)
    ident = interpolative_decomposition(A, 6)
    assert sorted(ident.skeleton) == list(range(6))
    assert np.linalg.norm(A - ident.reconstruct(A)) < 1e-10 * np.linalg.norm(A)


def test_id_exact_rank_two():
    rng = np.random.default_rng(8)
    A = np.outer(rng.standard_normal(6), rng.standard_normal(4)) + np.outer(
        rng.standard_normal(6), rng.standard_normal(4)
    )
    ident = interpolative_decomposition(A, 2)
    assert np.linalg.norm(A - ident.reconstruct(A), 2) < 1e-10 * np.linalg.norm(A, 2)
    np.testing.assert_allclose(ident.P[:, ident.skeleton], np.eye(2), atol=1e-15)


def test_id_rejects_ill_conditioned_rank():
    with pytest.raises(IllConditionedSkeletonError):
        interpolative_decomposition(np.ones((5, 4)), 2)
    with pytest.raises(ValueError):
        interpolative_decomposition(np.ones((5, 4)), 5)


@pytest.mark.parametrize("shape, r", [((30, 20), 5), ((200, 12), 4), ((8, 25), 6)])
def test_id_matches_reference_library(shape, r):
    A = rand(shape, 9)
    ident = interpolative_decomposition(A, r)
    idx, proj = sli.interp_decomp(A, r, rand=False)
    np.testing.assert_array_equal(ident.skeleton, idx[:r])
    oracle = sli.reconstruct_interp_matrix(idx, proj)
    np.testing.assert_allclose(ident.P, oracle, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(
    m=st.integers(2, 40),
    n=st.integers(2, 25),
    seed=st.integers(0, 2**32 - 1),
    data=st.data(),
)
def test_id_bound_property(m, n, seed, data):
    rng = np.random.default_rng(seed)
    k = min(m, n)
    sigma = np.sort(rng.uniform(1e-3, 1.0, size=k))[::-1]
    U, _ = np.linalg.qr(rng.standard_normal((m, k)))
    V, _ = np.linalg.qr(rng.standard_normal((n, k)))
    A = (U * sigma) @ V.T
    r = data.draw(st.integers(1, k))
    ident = interpolative_decomposition(A, r)
    P = ident.P
    np.testing.assert_allclose(P[:, ident.skeleton], np.eye(r), atol=1e-12)
    err = np.linalg.norm(A - ident.reconstruct(A), 2)
    s_r1 = sigma[r] if r < k else 0.0
    assert err <= bound_id(n, r, s_r1) + 1e-8 * sigma[0]


def test_leverage_examples():
    np.testing.assert_allclose(leverage_scores(np.diag([3.0, 2.0, 1.0]), 2), [1, 1, 0], atol=1e-15)
    assert coherence(np.diag([3.0, 2.0, 1.0]), 2) == pytest.approx(1.0)


def test_leverage_matches_gram_oracle():
    A = rand((15, 6), 10)
    w, Z = scipy.linalg.eigh(A.T @ A)
    Vr = Z[:, np.argsort(w)[::-1][:3]]
    np.testing.assert_allclose(leverage_scores(A, 3), np.sum(Vr**2, axis=1), atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(3, 30), n=st.integers(2, 12), data=st.data())
def test_leverage_sums_to_rank(seed, m, n, data):
    r = data.draw(st.integers(1, min(m, n)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        scores = leverage_scores(rand((m, n), seed), r)
    assert scores.sum() == pytest.approx(r, rel=1e-10)
    assert np.all(scores >= -1e-15) and np.all(scores <= 1 + 1e-12)


def test_coherence_uniform_rows():
    # V_r with rows of equal norm: Fourier-type orthonormal columns
    n = 8
    t = 2 * np.pi * np.arange(n) / n
    V = np.column_stack([np.cos(t), np.sin(t)]) * np.sqrt(2 / n)
    A = np.array([[2.0], [1.0]]) * V.T
    assert coherence(A, 2) == pytest.approx(2 / n, rel=1e-12)


def test_coherence_gaussian_range():
    g = coherence(rand((200, 40), 11), 10)
    assert 10 / 40 <= g <= 1 and g < 0.6


def test_repeated_singular_value_warns():
    with pytest.warns(RuntimeWarning):
        leverage_scores(np.eye(4), 2)
