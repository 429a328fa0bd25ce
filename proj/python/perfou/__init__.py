from ._perfou import (
    DegenerateDesign,
    EstimateResult,
    FouModel,
    LimitMatrices,
    NonnegativeEmbeddingFailure,
    SamplePath,
    estimate,
    fgn_autocovariance,
    generate_fgn,
    limit_matrices,
    malliavin_trace_correction,
    simulate_path,
    singular_pair_integral,
    stationary_variance,
)

__all__ = [
    "DegenerateDesign",
    "EstimateResult",
    "FouModel",
    "LimitMatrices",
    "NonnegativeEmbeddingFailure",
    "SamplePath",
    "estimate",
    "fgn_autocovariance",
    "generate_fgn",
    "limit_matrices",
    "malliavin_trace_correction",
    "simulate_path",
    "singular_pair_integral",
    "stationary_variance",
]
