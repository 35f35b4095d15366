"""Spectral Galerkin stochastic Navier-Stokes laboratory."""

from ._core import (
    CovarianceSpec,
    DynamicsSpec,
    Error,
    FourierState,
    InvalidArgument,
    SpectralBasis,
    __version__,
    bilinear,
    build_basis,
    compute_experiment,
    default_config,
    histogram_density,
    inner_product,
    malliavin_matrix,
    ou_reference,
    parse_config,
    predicted_exponent,
    run_experiment,
    run_trajectory,
    semigroup_apply,
    sobolev_norm,
    step,
    stokes_apply,
    truncated_bilinear,
    truncated_bilinear_derivative,
    weak_exponent_experiment,
)

__all__ = [
    "CovarianceSpec",
    "DynamicsSpec",
    "Error",
    "FourierState",
    "InvalidArgument",
    "SpectralBasis",
    "__version__",
    "bilinear",
    "build_basis",
    "compute_experiment",
    "default_config",
    "histogram_density",
    "inner_product",
    "malliavin_matrix",
    "ou_reference",
    "parse_config",
    "predicted_exponent",
    "run_experiment",
    "run_trajectory",
    "semigroup_apply",
    "sobolev_norm",
    "step",
    "stokes_apply",
    "truncated_bilinear",
    "truncated_bilinear_derivative",
    "weak_exponent_experiment",
]
