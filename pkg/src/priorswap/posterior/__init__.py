"""거짓 사후분포 p̃_f 의 표현: 정확한 켤레 가우시안, 모수족 α, semiparametric."""

from .conjugate import ExactGaussianPosterior, conjugate_linear_posterior, supports_conjugate
from .parametric import (
    ParametricAlpha,
    alpha_from_data,
    fit_parametric_alpha,
    parametric_log_density,
    parametric_log_density_batch,
    score_matching_objective,
)
from .sampling import (
    PosteriorTarget,
    initial_state,
    make_posterior_target,
    posterior_log_density_batch,
    sample_false_posterior,
)
from .semiparametric import (
    SemiparametricRep,
    build_semiparametric,
    log_correction,
    select_bandwidth,
    semiparametric_log_density,
    semiparametric_log_density_batch,
)

__all__ = [
    "ExactGaussianPosterior",
    "ParametricAlpha",
    "PosteriorTarget",
    "SemiparametricRep",
    "alpha_from_data",
    "build_semiparametric",
    "conjugate_linear_posterior",
    "fit_parametric_alpha",
    "initial_state",
    "log_correction",
    "make_posterior_target",
    "parametric_log_density",
    "parametric_log_density_batch",
    "posterior_log_density_batch",
    "sample_false_posterior",
    "score_matching_objective",
    "select_bandwidth",
    "semiparametric_log_density",
    "semiparametric_log_density_batch",
    "supports_conjugate",
]
