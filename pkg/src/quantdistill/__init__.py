"""Dataset distillation by weighted quantization of latent point clouds.

The package quantizes each class of a latent cloud into a few centroids with
companion weights, certifies the result with exact Wasserstein-2 distances,
carries quantized clouds through an analytic-score reverse diffusion with an
explicit stability constant, and trains small classifiers with weighted
losses. ``verification.run_checks`` measures every mathematical property the
code relies on at desk scale.
"""

from .diffusion import (
    BROWNIAN,
    ORNSTEIN_UHLENBECK,
    BoundReport,
    CorollaryScan,
    ReferenceLaw,
    SdeSpec,
    analytic_score,
    corollary_rate_check,
    explicit_constant,
    forward_marginal,
    log_explicit_constant,
    log_marginal_density,
    reverse_integrate,
    score_monotonicity_bound,
    transport_quantization,
    verify_main_theorem,
)
from .errors import (
    BadMagic,
    DimensionError,
    EmptyCluster,
    EmptyFile,
    InsufficientPoints,
    InvalidSchedule,
    InvalidSpec,
    InvalidTime,
    LatentFileError,
    NonFiniteLoss,
    NonFiniteValue,
    QuantDistillError,
    SolverFailure,
    TruncatedFile,
)
from .measures import (
    DiscreteMeasure,
    QuantizationGrid,
    VoronoiPartition,
    distortion_gradient,
    nearest_index,
    project_to_grid,
    quadratic_distortion,
    squared_distances,
    voronoi_partition,
)
from .pipeline import build_dataset, demo_dataset, diffuse, distill, train
from .quantize import (
    EmpiricalSampler,
    GaussianMixtureSampler,
    LloydInfo,
    StepSchedule,
    UniformCubeSampler,
    WeightedQuantization,
    clvq,
    empirical_distortion_trace,
    init_grid,
    lloyd,
    minibatch_kmeans,
    variance_reduced_weights,
)
from .risk import (
    GapReport,
    LipschitzFunction,
    TinyClassifier,
    WeightedDataset,
    check_lipschitz_gap,
    classification_accuracy,
    gradient_discrepancy,
    loss_and_gradient,
    majority_labels,
    train_weighted,
    weighted_expectation,
)
from .transport import (
    RateScanResult,
    TransportPlan,
    WeightingComparison,
    compare_weighting,
    rate_scan,
    w2_discrete,
    w2_to_grid,
)
from .verification import CheckRecord, run_check, run_checks

__version__ = "0.1.0"

__all__ = [
    "BROWNIAN",
    "ORNSTEIN_UHLENBECK",
    "BadMagic",
    "BoundReport",
    "CheckRecord",
    "CorollaryScan",
    "DimensionError",
    "DiscreteMeasure",
    "EmpiricalSampler",
    "EmptyCluster",
    "EmptyFile",
    "GapReport",
    "GaussianMixtureSampler",
    "InsufficientPoints",
    "InvalidSchedule",
    "InvalidSpec",
    "InvalidTime",
    "LatentFileError",
    "LipschitzFunction",
    "LloydInfo",
    "NonFiniteLoss",
    "NonFiniteValue",
    "QuantDistillError",
    "QuantizationGrid",
    "RateScanResult",
    "ReferenceLaw",
    "SdeSpec",
    "SolverFailure",
    "StepSchedule",
    "TinyClassifier",
    "TransportPlan",
    "TruncatedFile",
    "UniformCubeSampler",
    "VoronoiPartition",
    "WeightedDataset",
    "WeightedQuantization",
    "WeightingComparison",
    "analytic_score",
    "build_dataset",
    "check_lipschitz_gap",
    "classification_accuracy",
    "clvq",
    "compare_weighting",
    "corollary_rate_check",
    "demo_dataset",
    "diffuse",
    "distill",
    "distortion_gradient",
    "empirical_distortion_trace",
    "explicit_constant",
    "forward_marginal",
    "gradient_discrepancy",
    "init_grid",
    "lloyd",
    "log_explicit_constant",
    "log_marginal_density",
    "loss_and_gradient",
    "majority_labels",
    "minibatch_kmeans",
    "nearest_index",
    "project_to_grid",
    "quadratic_distortion",
    "rate_scan",
    "reverse_integrate",
    "run_check",
    "run_checks",
    "score_monotonicity_bound",
    "squared_distances",
    "train",
    "train_weighted",
    "transport_quantization",
    "variance_reduced_weights",
    "verify_main_theorem",
    "voronoi_partition",
    "w2_discrete",
    "w2_to_grid",
    "weighted_expectation",
]
