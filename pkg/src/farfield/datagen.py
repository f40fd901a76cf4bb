"""Synthetic point sets and point-file ingestion.

Point sets are plain ``(N, d)`` float64 arrays.

Random streams come from numpy's ``PCG64`` bit generator seeded with a
64-bit integer (``numpy.random.default_rng(seed)``); normal variates use
numpy's ziggurat sampler (``Generator.standard_normal``). The same seed
yields the same points on every platform with the same numpy release
series.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PointFileError

DEFAULT_NOISE = 1e-3


@dataclass(frozen=True)
class LowIntrinsicSpec:
    intrinsic_dim: int
    ambient_dim: int
    noise_amplitude: float = DEFAULT_NOISE

    def __post_init__(self):
        if not 1 <= self.intrinsic_dim <= self.ambient_dim:
            raise ValueError(
                f"need 1 <= intrinsic_dim <= ambient_dim, got "
                f"{self.intrinsic_dim}, {self.ambient_dim}"
            )
        if self.noise_amplitude < 0:
            raise ValueError("noise_amplitude must be nonnegative")


def gen_normal(d: int, N: int, seed: int) -> np.ndarray:
    """N i.i.d. standard normal points in d dimensions."""
    if d < 1 or N < 1:
        raise ValueError("d and N must be positive")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((N, d))


def random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed d x d orthogonal matrix.

    QR of a square Gaussian matrix, with columns sign-fixed so that R has a
    positive diagonal (this makes the factor unique and the law uniform).
    """
    Z = rng.standard_normal((d, d))
    Q, R = np.linalg.qr(Z)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def gen_low_intrinsic(spec: LowIntrinsicSpec, N: int, seed: int) -> np.ndarray:
    """Normal data in ``intrinsic_dim`` dimensions embedded in ``ambient_dim``.

    The draw is zero padded, rotated by a random orthogonal matrix and
    perturbed with uniform noise in [-noise_amplitude, noise_amplitude].
    """
    if N < 1:
        raise ValueError("N must be positive")
    rng = np.random.default_rng(seed)
    low = rng.standard_normal((N, spec.intrinsic_dim))
    Q = random_rotation(spec.ambient_dim, rng)
    # zero padding then rotating only touches the leading columns of Q
    points = low @ Q[:, : spec.intrinsic_dim].T
    if spec.noise_amplitude > 0:
        points += rng.uniform(-spec.noise_amplitude, spec.noise_amplitude, size=points.shape)
    return points


_SPLIT = re.compile(r"[,\s]+")


def load_points(path) -> np.ndarray:
    """Read a delimited text file with one point per line.

    Fields may be separated by commas and/or whitespace. Blank lines and
    lines starting with ``#`` are skipped.
    """
    rows = []
    width = None
    with open(Path(path), encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f for f in _SPLIT.split(line) if f]
            try:
                row = [float(f) for f in fields]
            except ValueError as exc:
                raise PointFileError(f"cannot parse number ({exc})", line=lineno) from None
            if not all(np.isfinite(row)):
                raise PointFileError("non-finite coordinate", line=lineno)
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise PointFileError(
                    f"inconsistent column count: expected {width}, found {len(row)}",
                    line=lineno,
                )
            rows.append(row)
    if not rows:
        raise PointFileError(f"{path}: no points found")
    return np.array(rows, dtype=np.float64)


def rescale_unit_hypercube(points) -> np.ndarray:
    """Affinely map each coordinate onto [0, 1]; constant coordinates go to 0."""
    points = np.asarray(points, dtype=np.float64)
    lo = points.min(axis=0)
    span = points.max(axis=0) - lo
    out = points - lo
    nonconst = span > 0
    out[:, nonconst] /= span[nonconst]
    out[:, ~nonconst] = 0.0
    return out
