"""Kernel functions, Silverman bandwidths and dense interaction matrices.

Three kernel families are supported::

    gaussian    exp(-|x - y|^2 / (2 h^2))
    laplace     log|x - y|        (d == 2)
                |x - y|^(2 - d)   (otherwise)
    polynomial  (x.y / h + c)^p

The Gaussian is left unnormalized. A density normalization is a scalar
multiple of the whole matrix and changes neither the epsilon-rank nor any
relative error, so it is not offered.

For d == 1 the Laplace formula is applied literally and returns |x - y|;
the kernel is only of practical interest for d >= 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DimensionMismatchError, KernelSingularityError

FAMILIES = ("gaussian", "laplace", "polynomial")


@dataclass(frozen=True)
class KernelSpec:
    family: str
    h: float | None = None
    c: float = 1.0
    p: int | None = None

    def __post_init__(self):
        family = self.family.lower()
        object.__setattr__(self, "family", family)
        if family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if family == "laplace":
            if self.h is not None or self.p is not None:
                raise ValueError("the laplace kernel takes no parameters")
            return
        if self.h is None or not self.h > 0:
            raise ValueError(f"{family} kernel needs a bandwidth h > 0, got {self.h}")
        if family == "polynomial":
            if self.p is None or int(self.p) != self.p or self.p < 1:
                raise ValueError(f"polynomial degree must be an integer >= 1, got {self.p}")
            object.__setattr__(self, "p", int(self.p))
        elif self.p is not None:
            raise ValueError("only the polynomial kernel takes a degree")

    @classmethod
    def gaussian(cls, h):
        return cls("gaussian", h=float(h))

    @classmethod
    def laplace(cls):
        return cls("laplace")

    @classmethod
    def polynomial(cls, h, p, c=1.0):
        return cls("polynomial", h=float(h), c=float(c), p=p)

    def describe(self):
        if self.family == "gaussian":
            return f"gaussian(h={self.h!r})"
        if self.family == "laplace":
            return "laplace"
        return f"polynomial(h={self.h!r},c={self.c!r},p={self.p})"


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Evaluate the kernel between two points."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionMismatchError(f"points have shapes {x.shape} and {y.shape}")
    if spec.family == "polynomial":
        return float((np.dot(x, y) / spec.h + spec.c) ** spec.p)
    diff = x - y
    r2 = float(np.dot(diff, diff))
    if spec.family == "gaussian":
        return math.exp(-r2 / (2.0 * spec.h * spec.h))
    if r2 == 0.0:
        raise KernelSingularityError("laplace kernel evaluated at coincident points")
    return _laplace(math.sqrt(r2), x.shape[0])


def _laplace(r, d):
    if d == 2:
        return np.log(r)
    return r ** (2 - d)


def silverman_bandwidth(d: int, N: int) -> float:
    """Asymptotically optimal Gaussian KDE bandwidth for standard normal data."""
    if d < 1 or N < 1:
        raise ValueError("d and N must be positive")
    return (4.0 / (2 * d + 1)) ** (1.0 / (d + 4)) * N ** (-1.0 / (d + 4))


_TINY = np.finfo(np.float64).tiny


def gaussian_from_sqdist(D2, h, out=False):
    """exp(-D2 / (2 h^2)) with subnormal results flushed to zero.

    Subnormals carry no usable information at double precision but slow
    BLAS products by an order of magnitude, and tiny bandwidths produce
    them in bulk. ``out=True`` overwrites ``D2``.
    """
    K = D2 if out else np.empty_like(D2)
    np.multiply(D2, -1.0 / (2.0 * h * h), out=K)
    np.exp(K, out=K)
    K[K < _TINY] = 0.0
    return K


def kernel_matrix(spec: KernelSpec, targets, sources) -> np.ndarray:
    """Dense m x n matrix with entry (i, j) = kernel(targets[i], sources[j]).

    Squared distances come from ``scipy.spatial.distance.cdist``, which
    forms explicit coordinate differences; no |x|^2 + |y|^2 - 2 x.y
    shortcut is used, so near-coincident pairs keep full precision.
    """
    targets = _as_points(targets)
    sources = _as_points(sources)
    if targets.shape[1] != sources.shape[1]:
        raise DimensionMismatchError(
            f"targets have d={targets.shape[1]}, sources have d={sources.shape[1]}"
        )
    d = targets.shape[1]
    if spec.family == "polynomial":
        K = targets @ sources.T
        K /= spec.h
        K += spec.c
        return K ** spec.p
    if spec.family == "gaussian":
        return gaussian_from_sqdist(cdist(targets, sources, "sqeuclidean"), spec.h, out=True)
    K = cdist(targets, sources, "euclidean")
    zero = np.argwhere(K == 0.0)
    if zero.size:
        i, j = (int(v) for v in zero[0])
        raise KernelSingularityError(
            f"laplace kernel singular at target {i}, source {j} (coincident points)",
            index=(i, j),
        )
    if d == 2:
        return np.log(K, out=K)
    return np.power(K, 2 - d, out=K)


def _as_points(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise DimensionMismatchError(f"expected an (N, d) array, got shape {a.shape}")
    return a
