"""사전분포·가능도 로그 밀도와 합성 데이터."""

from .likelihoods import (  # noqa: F401
    likelihood_log_density,
    log_likelihood_batch,
    log_likelihood_gradient_batch,
    log_likelihood_hessian_diagonal_batch,
    pointwise_log_likelihood,
)
from .priors import (  # noqa: F401
    VERY_SPARSE_EXPONENT,
    prior_gradient_batch,
    prior_hessian_diagonal_batch,
    prior_log_density,
    prior_log_density_batch,
)
from .synthetic import generate_synthetic, train_test_split  # noqa: F401

__all__ = [
    "VERY_SPARSE_EXPONENT",
    "generate_synthetic",
    "likelihood_log_density",
    "log_likelihood_batch",
    "log_likelihood_gradient_batch",
    "log_likelihood_hessian_diagonal_batch",
    "pointwise_log_likelihood",
    "prior_gradient_batch",
    "prior_hessian_diagonal_batch",
    "prior_log_density",
    "prior_log_density_batch",
    "train_test_split",
]
