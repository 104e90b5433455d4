"""Nonlinear model reduction of 1D conservative PDEs in the Wasserstein-2 metric."""
from .measure import (
    BarycentricWeights,
    DiscreteMeasure,
    QuantileFunction,
    QuantileGrid,
    SpatialGrid,
    TangentVector,
    barycenter,
    cdf_to_icdf,
    exp_map,
    frechet_mean,
    icdf_to_measure,
    log_map,
    monotonize,
    optimal_weights,
    w2_distance,
)

__version__ = "0.1.0"
