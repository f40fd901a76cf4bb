"""Randomized compression of far-field kernel interaction matrices."""
from .compress import (
    CompressionReport,
    RankRule,
    apply_skeleton,
    bound_full_error,
    bound_id,
    compress_id,
    compress_svd,
    interaction_fractions,
    mc_error,
)
from .datagen import LowIntrinsicSpec, gen_low_intrinsic, gen_normal, load_points
from .errors import FarfieldError
from .geometry import SourceTargetSplit, split_sources_targets
from .kernel import KernelSpec, kernel_matrix, silverman_bandwidth
from .lowrank import (
    IDFactorization,
    coherence,
    epsilon_rank,
    interpolative_decomposition,
    leverage_scores,
    pivoted_qr,
    singular_values,
    spectral_norm,
    svd,
)
from .sampling import SamplingScheme, reconstruction_bound, sample_complexity, sample_rows

__version__ = "0.1.0"
