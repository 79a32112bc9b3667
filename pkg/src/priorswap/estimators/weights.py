"""자기정규화 중요도 샘플링 추정기와 진단값.

모든 가중치는 로그 공간에서 최댓값을 빼고 지수화한 뒤 합으로 나눈다.
정규화 상수는 이 과정에서 상쇄된다.
"""

from __future__ import annotations

import math
import time
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike

from ..data.models import FloatArray, LikelihoodModel, PriorSpec, SampleSet, TestFunction, WeightedEstimate, as_sample_matrix
from ..densities.likelihoods import DEFAULT_CHUNK_ELEMENTS, log_likelihood_batch
from ..densities.priors import prior_log_density_batch
from ..errors import DegenerateWeightsError, InvalidInputError, NumericError, SupportMismatchError
from ..posterior.parametric import ParametricAlpha, parametric_log_density_batch
from ..posterior.semiparametric import SemiparametricRep, log_correction

Samples = Union[SampleSet, ArrayLike]


def _matrix(samples: Samples) -> FloatArray:
    matrix = samples.samples if isinstance(samples, SampleSet) else as_sample_matrix(samples)
    if matrix.shape[0] == 0:
        raise InvalidInputError("가중 추정에는 최소 1개의 샘플이 필요합니다.")
    return matrix


def normalize_log_weights(log_weights: ArrayLike) -> FloatArray:
    """max-shift 후 지수화해 합이 1 인 가중치를 만든다."""

    values = np.asarray(log_weights, dtype=float)
    if np.any(np.isnan(values)):
        index = int(np.flatnonzero(np.isnan(values))[0])
        raise NumericError("로그 가중치에 NaN 이 있습니다", sample_index=index)
    peak = float(np.max(values))
    if not math.isfinite(peak):
        raise DegenerateWeightsError("모든 중요도 가중치가 0 으로 underflow 했습니다.")
    unnormalized = np.exp(values - peak)
    return unnormalized / np.sum(unnormalized)


def effective_sample_size(weights: ArrayLike) -> float:
    """정규화된 가중치의 ESS = 1/Σw²."""

    values = np.asarray(weights, dtype=float)
    return float(1.0 / np.sum(values**2))


def weighted_estimate(
    samples: Samples,
    log_weights: Optional[ArrayLike],
    h: Optional[TestFunction],
    method: str,
    *,
    started_ns: Optional[int] = None,
) -> WeightedEstimate:
    """가중치(None 이면 균등)로 μ̂_h, ESS, 가중 표준오차, 최대 가중치 비율을 계산한다."""

    matrix = _matrix(samples)
    function = h or TestFunction.identity()
    if log_weights is None:
        weights = np.full(matrix.shape[0], 1.0 / matrix.shape[0])
    else:
        weights = normalize_log_weights(log_weights)
    values = function(matrix)
    estimate = weights @ values
    spread = np.sqrt(np.sum(weights[:, None] ** 2 * (values - estimate) ** 2, axis=0))
    elapsed = 0 if started_ns is None else time.perf_counter_ns() - started_ns
    return WeightedEstimate(
        estimate=estimate,
        weights=weights,
        ess=effective_sample_size(weights),
        method=method,
        wall_ns=int(elapsed),
        standard_error=spread,
        max_weight_fraction=float(np.max(weights)),
    )


def naive_log_weights(samples: Samples, target_prior: PriorSpec, false_prior: PriorSpec) -> FloatArray:
    """log w = log π(θ) - log π_f(θ)."""

    matrix = _matrix(samples)
    log_false = prior_log_density_batch(false_prior, matrix)
    if np.any(np.isneginf(log_false)):
        index = int(np.flatnonzero(np.isneginf(log_false))[0])
        raise SupportMismatchError(matrix[index])
    return prior_log_density_batch(target_prior, matrix) - log_false


def naive_is_estimate(
    samples: Samples,
    target_prior: PriorSpec,
    false_prior: PriorSpec,
    h: Optional[TestFunction] = None,
) -> WeightedEstimate:
    """거짓 사후 샘플에 π/π_f 가중치를 준 naive IS. `max_weight_fraction` 이 가중치 퇴화 진단값이다."""

    started = time.perf_counter_ns()
    log_weights = naive_log_weights(samples, target_prior, false_prior)
    return weighted_estimate(samples, log_weights, h, "naive-is", started_ns=started)


def prior_swap_log_weights(
    samples: Samples,
    model: LikelihoodModel,
    false_prior: PriorSpec,
    alpha: ParametricAlpha,
    *,
    chunk_elements: int = DEFAULT_CHUNK_ELEMENTS,
) -> FloatArray:
    """log w = [log π_f(θ) + log L(θ|x^n)] - log p̃_f^α(θ). 유일하게 Θ(n) 데이터 작업이 필요한 보정이다."""

    matrix = _matrix(samples)[:, : model.dim]
    exact = prior_log_density_batch(false_prior, matrix) + log_likelihood_batch(
        model, matrix, chunk_elements=chunk_elements
    )
    return exact - parametric_log_density_batch(alpha, matrix)


def prior_swap_is_estimate(
    samples: Samples,
    model: LikelihoodModel,
    false_prior: PriorSpec,
    alpha: ParametricAlpha,
    h: Optional[TestFunction] = None,
    *,
    chunk_elements: int = DEFAULT_CHUNK_ELEMENTS,
) -> WeightedEstimate:
    """p_s^α 샘플을 p_f/p̃_f^α 로 가중해 p_s 기댓값을 추정한다."""

    started = time.perf_counter_ns()
    log_weights = prior_swap_log_weights(samples, model, false_prior, alpha, chunk_elements=chunk_elements)
    return weighted_estimate(samples, log_weights, h, "prior-swap-is", started_ns=started)


def semiparametric_log_weights(samples: Samples, rep: SemiparametricRep) -> FloatArray:
    """log w = log[(1/T_f) Σ_t K(‖θ-θ̃_t‖/b) / p̃_f^α(θ̃_t)]. 데이터를 읽지 않는다."""

    return log_correction(rep, _matrix(samples)[:, : rep.dim])


def semiparametric_is_estimate(
    samples: Samples,
    rep: SemiparametricRep,
    h: Optional[TestFunction] = None,
) -> WeightedEstimate:
    started = time.perf_counter_ns()
    log_weights = semiparametric_log_weights(samples, rep)
    return weighted_estimate(samples, log_weights, h, "prior-swap-semiparametric-is", started_ns=started)


def posterior_error(estimate: ArrayLike, reference: ArrayLike) -> float:
    """‖μ_h - μ̂_h‖₂."""

    left = np.atleast_1d(np.asarray(estimate, dtype=float))
    right = np.atleast_1d(np.asarray(reference, dtype=float))
    if left.shape != right.shape:
        raise InvalidInputError(f"추정값 차원 {left.shape} 와 기준값 차원 {right.shape} 가 다릅니다.")
    return float(np.linalg.norm(left - right))


__all__ = [
    "effective_sample_size",
    "naive_is_estimate",
    "naive_log_weights",
    "normalize_log_weights",
    "posterior_error",
    "prior_swap_is_estimate",
    "prior_swap_log_weights",
    "semiparametric_is_estimate",
    "semiparametric_log_weights",
    "weighted_estimate",
]
