import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from farfield.errors import DimensionMismatchError, KernelSingularityError
from farfield.kernel import KernelSpec, eval_kernel, kernel_matrix, silverman_bandwidth


def test_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("gaussian")
    with pytest.raises(ValueError):
        KernelSpec.gaussian(0.0)
    with pytest.raises(ValueError):
        KernelSpec("laplace", h=1.0)
    with pytest.raises(ValueError):
        KernelSpec.polynomial(1.0, 0)
    with pytest.raises(ValueError):
        KernelSpec("cauchy", h=1.0)
    assert KernelSpec("Gaussian", h=1.0).family == "gaussian"


def test_eval_kernel_closed_forms():
    assert eval_kernel(KernelSpec.gaussian(1.0), [0.3, 0.4], [0.3, 0.4]) == 1.0
    assert eval_kernel(KernelSpec.gaussian(2.0), [0.0, 0.0], [2.0, 0.0]) == pytest.approx(math.exp(-0.5))
    assert eval_kernel(KernelSpec.laplace(), [0, 0, 0], [0.5, 0, 0]) == pytest.approx(2.0)
    assert eval_kernel(KernelSpec.laplace(), [0, 0], [2.0, 0]) == pytest.approx(math.log(2.0))
    assert eval_kernel(KernelSpec.polynomial(1.0, 3, 1.0), [1, 0], [0, 1]) == 1.0


def test_eval_kernel_errors():
    with pytest.raises(KernelSingularityError):
        eval_kernel(KernelSpec.laplace(), [1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    with pytest.raises(DimensionMismatchError):
        eval_kernel(KernelSpec.gaussian(1.0), [0.0, 0.0], [0.0, 0.0, 0.0])


@pytest.mark.parametrize(
    "d, expected", [(4, 0.2143), (8, 0.3396), (16, 0.5060), (32, 0.6722), (64, 0.8022)]
)
def test_silverman_table(d, expected):
    assert abs(silverman_bandwidth(d, 100_000) - expected) <= 5e-5


def test_silverman_decreases_with_n():
    assert silverman_bandwidth(3, 1000) > silverman_bandwidth(3, 10_000)


def test_kernel_matrix_small_cases():
    spec = KernelSpec.gaussian(1.0)
    K = kernel_matrix(spec, [[1.0, 0, 0], [2.0, 0, 0]], [[0.0, 0, 0]])
    np.testing.assert_allclose(K[:, 0], [math.exp(-0.5), math.exp(-2.0)], rtol=1e-15)
    one = kernel_matrix(KernelSpec.laplace(), [[1.0, 2.0, 2.0]], [[0.0, 0.0, 0.0]])
    assert one.shape == (1, 1)
    assert one[0, 0] == eval_kernel(KernelSpec.laplace(), [1.0, 2.0, 2.0], [0, 0, 0])


@pytest.mark.parametrize(
    "spec",
    [KernelSpec.gaussian(0.7), KernelSpec.laplace(), KernelSpec.polynomial(2.0, 3, 0.5)],
    ids=["gaussian", "laplace", "polynomial"],
)
@pytest.mark.parametrize("d", [2, 3, 5])
def test_kernel_matrix_matches_double_loop(spec, d):
    rng = np.random.default_rng(d)
    targets = rng.standard_normal((20, d)) + 3.0
    sources = rng.standard_normal((5, d))
    K = kernel_matrix(spec, targets, sources)
    direct = np.array([[eval_kernel(spec, t, s) for s in sources] for t in targets])
    np.testing.assert_allclose(K, direct, rtol=1e-12, atol=0)


def test_laplace_singularity_reports_index():
    targets = np.array([[5.0, 5.0], [1.0, 1.0]])
    sources = np.array([[0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(KernelSingularityError) as info:
        kernel_matrix(KernelSpec.laplace(), targets, sources)
    assert info.value.index == (1, 1)


def test_gaussian_flushes_subnormals():
    K = kernel_matrix(KernelSpec.gaussian(1e-3), [[0.0], [1.0]], [[0.0]])
    assert K[0, 0] == 1.0 and K[1, 0] == 0.0


@settings(max_examples=50, deadline=None)
@given(
    h=st.floats(0.05, 20.0),
    seed=st.integers(0, 2**32 - 1),
)
def test_gaussian_entries_in_unit_interval(h, seed):
    rng = np.random.default_rng(seed)
    K = kernel_matrix(KernelSpec.gaussian(h), rng.standard_normal((7, 3)), rng.standard_normal((4, 3)))
    assert np.all(K >= 0) and np.all(K <= 1)
