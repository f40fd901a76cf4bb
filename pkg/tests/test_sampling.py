import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from farfield.errors import SamplingError
from farfield.geometry import split_sources_targets
from farfield.sampling import (
    SamplingScheme,
    chernoff_denominator,
    reconstruction_bound,
    sample_complexity,
    sample_rows,
)

LINE = np.array([0, 0.1, -0.1, 0.5, -0.5, 2, -2, 3.0]).reshape(-1, 1)


def test_uniform_counts():
    rs = sample_rows(SamplingScheme("uniform"), 0.3, 1, m=10)
    assert len(rs) == 3 and len(set(rs.indices)) == 3
    assert np.all((rs.indices >= 0) & (rs.indices < 10))
    full = sample_rows(SamplingScheme("uniform"), 1.0, 1, m=10)
    assert sorted(full.indices) == list(range(10))


def test_nearest_on_line():
    sp = split_sources_targets(LINE, [0.0], 3, 2.0)
    rs = sample_rows(SamplingScheme("nearest"), 0.4, 0, split=sp)
    # rows of K follow split.target_indices: rows 0, 1 are the points at +-0.5
    np.testing.assert_array_equal(sp.target_indices[rs.indices], [3, 4])


def test_euclidean_dominant_row():
    K = np.full((100, 3), 1e-6 / np.sqrt(3))
    K[37] = 1e6 / np.sqrt(3)
    hits = sum(
        sample_rows(SamplingScheme("euclidean"), 0.01, seed, K=K).indices[0] == 37 for seed in range(1000)
    )
    assert hits >= 999


def _sequential_first_two(w, rng):
    # oracle: draw, remove, renormalize
    w = np.array(w, dtype=float)
    first = rng.choice(len(w), p=w / w.sum())
    w2 = w.copy()
    w2[first] = 0
    second = rng.choice(len(w), p=w2 / w2.sum())
    return first, second


def test_weighted_draw_matches_sequential_oracle():
    weights = np.array([5.0, 3.0, 1.0, 1.0])
    K = weights[:, None] * np.ones((1, 1))
    trials = 20_000
    got = Counter(
        tuple(sample_rows(SamplingScheme("euclidean"), 0.5, s, K=K).indices) for s in range(trials)
    )
    rng = np.random.default_rng(123)
    ref = Counter(_sequential_first_two(weights, rng) for _ in range(trials))
    # analytic probabilities of each ordered pair
    for (a, b), count in got.items():
        p = weights[a] / weights.sum() * weights[b] / (weights.sum() - weights[a])
        se = math.sqrt(p * (1 - p) / trials)
        assert abs(count / trials - p) <= 5 * se
        assert abs(ref[(a, b)] / trials - p) <= 5 * se


def test_zero_weight_rows_come_last():
    K = np.zeros((6, 2))
    K[[1, 4]] = 1.0
    rs = sample_rows(SamplingScheme("euclidean"), 0.5, 3, K=K)
    assert set(rs.indices[:2]) == {1, 4} and len(set(rs.indices)) == 3


def test_leverage_prefers_high_leverage_rows():
    rng = np.random.default_rng(0)
    K = rng.standard_normal((200, 5)) * 0.01
    K[:5] = np.eye(5) * 10
    rs = sample_rows(SamplingScheme("leverage", rank_for_leverage=5), 5 / 200, 1, K=K)
    assert set(rs.indices) == set(range(5))


def test_distance_weighting():
    sp = split_sources_targets(LINE, [0.0], 3, 2.0)
    counts = Counter()
    for seed in range(4000):
        counts.update(sample_rows(SamplingScheme("distance"), 0.2, seed, split=sp).indices)
    inv = 1 / sp.target_distances
    p = inv / inv.sum()
    for i, pi in enumerate(p):
        assert abs(counts[i] / 4000 - pi) <= 5 * math.sqrt(pi * (1 - pi) / 4000)
    far = sample_rows(SamplingScheme("distance", distance_weighting="direct"), 0.2, 0, split=sp)
    assert len(far) == 1


def test_bernoulli_and_errors():
    rs = sample_rows(SamplingScheme("bernoulli"), 0.5, 2, m=1000)
    assert 400 < len(rs) < 600 and len(set(rs.indices)) == len(rs)
    with pytest.raises(SamplingError):
        sample_rows(SamplingScheme("bernoulli"), 1e-9, 0, m=5)
    with pytest.raises(SamplingError):
        sample_rows(SamplingScheme("euclidean"), 0.5, 0, m=5)
    with pytest.raises(SamplingError):
        sample_rows(SamplingScheme("nearest"), 0.5, 0, m=5)
    with pytest.raises(ValueError):
        sample_rows(SamplingScheme("uniform"), 0.0, 0, m=5)
    with pytest.raises(ValueError):
        SamplingScheme("stratified")


def test_replacement_label():
    assert SamplingScheme("uniform", replacement=True).label == "uniform+repl"
    assert SamplingScheme("nearest", replacement=True).label == "nearest"


@settings(max_examples=60, deadline=None)
@given(
    kind=st.sampled_from(["uniform", "euclidean", "distance", "leverage", "nearest"]),
    s=st.floats(0.01, 1.0),
    seed=st.integers(0, 2**63),
)
def test_without_replacement_invariants(kind, s, seed):
    pts = np.random.default_rng(seed % 1000).standard_normal((120, 2))
    sp = split_sources_targets(pts, np.zeros(2), 10, 1.0)
    K = np.exp(-np.random.default_rng(1).random((sp.m, 4)))
    rs = sample_rows(SamplingScheme(kind, rank_for_leverage=2), s, seed, K=K, split=sp)
    assert len(rs) == max(1, math.ceil(s * sp.m))
    assert len(set(rs.indices)) == len(rs)
    assert np.all((rs.indices >= 0) & (rs.indices < sp.m))


def test_sample_complexity_values():
    assert chernoff_denominator(0.5) == pytest.approx(0.108198, abs=1e-6)
    assert 1 / chernoff_denominator(0.5) == pytest.approx(9.2423, abs=1e-4)
    # independent evaluation of the closed form
    expected = math.ceil(1000 * 0.01 * math.log(200) / math.log(1.5**1.5 / math.exp(0.5)))
    assert expected == 490
    assert sample_complexity(1000, 0.01, 10, 0.1, 0.5) == 490


def test_sample_complexity_monotone_in_gamma():
    values = [sample_complexity(1000, g, 10, 0.1, 0.5) for g in np.linspace(0.01, 1, 20)]
    assert values == sorted(values) and values[0] == min(values)
    with pytest.raises(ValueError):
        sample_complexity(1000, 0.001, 10, 0.1, 0.5)


def test_reconstruction_bound_values():
    assert reconstruction_bound(100, 20, 0.5, 1.0) == pytest.approx(math.sqrt(1 + 6 * 5))
    assert reconstruction_bound(100, 20, 0.5, 0.0) == 0.0
    assert reconstruction_bound(50, 50, 0.5, 2.0) == pytest.approx(math.sqrt(7) * 2.0)


def test_with_replacement_marginals():
    w = np.arange(1.0, 11.0)
    K = w[:, None]
    counts = np.zeros(10)
    rng = np.random.default_rng(0)
    seeds = rng.integers(0, 2**63, size=100_000)
    scheme = SamplingScheme("euclidean", replacement=True)
    for s in seeds:
        counts[sample_rows(scheme, 0.1, int(s), K=K).indices[0]] += 1
    assert np.max(np.abs(counts / len(seeds) - w / w.sum())) < 0.01


def test_leverage_problem_case():
    # one row along v1 among many copies of v2: its leverage is 1 of a total 2
    v1, v2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    K = np.vstack([v1 * 1e-3] + [v2] * 49)
    hits = sum(
        0 in sample_rows(SamplingScheme("leverage", rank_for_leverage=2), 1 / 50, seed, K=K).indices
        for seed in range(2000)
    )
    assert hits / 2000 >= 0.5 - 3 * math.sqrt(0.25 / 2000)
