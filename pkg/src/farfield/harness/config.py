"""Experiment configuration.

A config file is one YAML document. Every section is optional and unknown
keys are rejected. See ``docs/config.md`` for the full key list.
"""
from __future__ import annotations

from pathlib import Path
from typing import List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..errors import ConfigError

DEFAULT_S_GRID = [1e-4, 1e-3, 1e-2, 1e-1, 1.0]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DatasetConfig(_Strict):
    kind: Literal["normal", "low_intrinsic", "file"] = "normal"
    d: int = Field(4, ge=1)
    N: int = Field(100_000, ge=2)
    intrinsic_dim: int = Field(4, ge=1)
    noise: float = Field(1e-3, ge=0)
    path: Optional[str] = None
    rescale: bool = False

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "file" and not self.path:
            raise ValueError("dataset.path is required when kind is 'file'")
        if self.kind == "low_intrinsic" and self.intrinsic_dim > self.d:
            raise ValueError("dataset.intrinsic_dim exceeds dataset.d")
        return self


class GeometryConfig(_Strict):
    center: Union[Literal["origin"], List[float]] = "origin"
    n: int = Field(500, ge=1)
    xi: float = Field(1.0, ge=0)


class KernelConfig(_Strict):
    family: Literal["gaussian", "laplace", "polynomial"] = "gaussian"
    # reference bandwidth, silverman_bandwidth(d, N) when absent; the kernel
    # uses h_scale times it (spectra/interactions grids supply their own scales)
    h: Optional[float] = Field(None, gt=0)
    h_scale: float = Field(1.0, gt=0)
    c: float = 1.0
    p: int = Field(2, ge=1)


class RankConfig(_Strict):
    eps: Optional[float] = Field(1e-2, gt=0, lt=1)
    fixed_r: Optional[int] = Field(None, ge=0)
    # "sample": epsilon-rank of each sampled block; "full": epsilon-rank of
    # the whole K, then that fixed rank for every sample
    source: Literal["full", "sample"] = "sample"
    # "sample" only: measure the sampled spectrum against sigma_1 of the full K
    reference_full_sigma1: bool = False


class MonteCarloConfig(_Strict):
    s: float = Field(0.05, gt=0, le=1)
    n: int = Field(5, ge=1)


class CompressConfig(_Strict):
    method: Literal["id", "svd"] = "id"
    rank: RankConfig = RankConfig()
    schemes: List[Literal["uniform", "bernoulli", "euclidean", "distance", "leverage", "nearest"]] = [
        "uniform",
        "distance",
        "leverage",
        "nearest",
    ]
    replacement: bool = False
    distance_weighting: Literal["inverse", "direct"] = "inverse"
    s_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_S_GRID))
    theorem_eps: float = Field(0.5, gt=0, lt=1)
    mc: Optional[MonteCarloConfig] = None
    record_timings: bool = False

    @field_validator("s_grid")
    @classmethod
    def _grid(cls, v):
        if not v or any(not 0 < s <= 1 for s in v):
            raise ValueError("s_grid values must lie in (0, 1]")
        return v


class SpectraConfig(_Strict):
    dims: Optional[List[int]] = None
    h_scales: Optional[List[float]] = None
    max_values: Optional[int] = Field(None, ge=1)


class InteractionsConfig(_Strict):
    dims: List[int] = [4, 8, 16, 32, 64]
    h_scales: List[float] = [1.0]


class BandwidthSearchConfig(_Strict):
    kappa: float = Field(0.2, gt=0, le=1)
    branch: Literal["small_h", "large_h"] = "small_h"
    eps: float = Field(1e-2, gt=0, lt=1)
    max_iters: int = Field(40, ge=1)
    rank_tolerance_rows: int = Field(0, ge=0)
    rel_tol: float = Field(1e-3, gt=0)
    grid_factor: float = Field(2.0, gt=1)
    seeds: int = Field(5, ge=1)


class VerifyConfig(_Strict):
    suites: List[
        Literal["id_bound", "hmt", "projection", "uniform", "uniform_repl", "improvement", "chernoff", "skeleton"]
    ] = ["id_bound", "hmt", "projection", "uniform", "uniform_repl", "improvement", "chernoff", "skeleton"]
    trials: int = Field(200, ge=1)
    skeleton_trials: int = Field(50, ge=1)
    eps: float = Field(0.5, gt=0, lt=1)
    delta: float = Field(0.1, gt=0, lt=1)
    chernoff_eps: List[float] = [0.2, 0.5, 0.8]
    # multiplies every bound before comparison; values below 1 exercise the
    # failure path of the suite runner
    bound_scale: float = Field(1.0, ge=0)


class ExperimentConfig(_Strict):
    seed: int = 0
    trials: int = Field(15, ge=1)
    output: Optional[str] = None
    memory_budget: int = Field(200_000_000, ge=1)
    dataset: DatasetConfig = DatasetConfig()
    geometry: GeometryConfig = GeometryConfig()
    kernel: KernelConfig = KernelConfig()
    compress: CompressConfig = CompressConfig()
    spectra: SpectraConfig = SpectraConfig()
    interactions: InteractionsConfig = InteractionsConfig()
    bandwidth_search: BandwidthSearchConfig = BandwidthSearchConfig()
    verify: VerifyConfig = VerifyConfig()


def _format_errors(exc: ValidationError):
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(data) -> ExperimentConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping at the top level")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Read a YAML config (or start from defaults) and apply top-level overrides
    such as ``seed``, ``trials`` or ``output``; ``None`` overrides are ignored."""
    data = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping at the top level")
    data = dict(data)
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    return parse_config(data)
