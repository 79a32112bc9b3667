"""기댓값 추정기, 진단값, 샘플 수 하한, 기준값 오라클."""

from .bounds import SampleBound, is_sample_lower_bound
from .oracles import (
    calibrate_laplace_scale,
    expand_bounds,
    held_out_error,
    laplace_swap_mean,
    long_chain_ground_truth,
    quadrature_ground_truth,
    quadrature_oracle,
)
from .weights import (
    effective_sample_size,
    naive_is_estimate,
    naive_log_weights,
    normalize_log_weights,
    posterior_error,
    prior_swap_is_estimate,
    prior_swap_log_weights,
    semiparametric_is_estimate,
    semiparametric_log_weights,
    weighted_estimate,
)

__all__ = [
    "SampleBound",
    "calibrate_laplace_scale",
    "effective_sample_size",
    "expand_bounds",
    "held_out_error",
    "is_sample_lower_bound",
    "laplace_swap_mean",
    "long_chain_ground_truth",
    "naive_is_estimate",
    "naive_log_weights",
    "normalize_log_weights",
    "posterior_error",
    "prior_swap_is_estimate",
    "prior_swap_log_weights",
    "quadrature_ground_truth",
    "quadrature_oracle",
    "semiparametric_is_estimate",
    "semiparametric_log_weights",
    "weighted_estimate",
]
