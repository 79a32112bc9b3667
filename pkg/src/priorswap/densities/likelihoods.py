"""가능도 모형의 로그 밀도와 도함수.

모든 배치 함수는 (T, d) 모수 행렬을 받아 샘플 방향으로 나눠(chunk) 계산한다.
한 번의 평가 비용은 Θ(n·d) 이다.
"""

from __future__ import annotations

import math
from typing import Callable, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import expit

from ..data.models import FloatArray, LikelihoodModel, ModelKind, as_param_vector, as_sample_matrix
from ..errors import InvalidInputError

LOG_2PI = math.log(2.0 * math.pi)
DEFAULT_CHUNK_ELEMENTS = 4_000_000


def _check_dimension(model: LikelihoodModel, thetas: FloatArray) -> None:
    if thetas.shape[1] != model.dim:
        raise InvalidInputError(f"θ 차원({thetas.shape[1]})이 모형 차원({model.dim})과 다릅니다.")
    if not np.all(np.isfinite(thetas)):
        raise InvalidInputError("θ 에 유한하지 않은 값이 있습니다.")


def _chunked(
    model: LikelihoodModel,
    thetas: FloatArray,
    evaluate: Callable[[FloatArray], FloatArray],
    chunk_elements: int,
) -> FloatArray:
    per_chunk = max(1, chunk_elements // max(1, model.n * model.dim))
    if thetas.shape[0] <= per_chunk:
        return evaluate(thetas)
    parts = [evaluate(thetas[start : start + per_chunk]) for start in range(0, thetas.shape[0], per_chunk)]
    return np.concatenate(parts, axis=0)


def _linear_log(model: LikelihoodModel, thetas: FloatArray) -> FloatArray:
    residual = model.responses[None, :] - thetas @ model.features.T
    sigma2 = model.noise_variance
    return -0.5 * model.n * (LOG_2PI + math.log(sigma2)) - 0.5 * np.sum(residual**2, axis=1) / sigma2


def _linear_grad(model: LikelihoodModel, thetas: FloatArray) -> FloatArray:
    residual = model.responses[None, :] - thetas @ model.features.T
    return residual @ model.features / model.noise_variance


def _logistic_log(model: LikelihoodModel, thetas: FloatArray) -> FloatArray:
    eta = thetas @ model.features.T
    return np.sum(model.responses[None, :] * eta - np.logaddexp(0.0, eta), axis=1)


def _logistic_grad(model: LikelihoodModel, thetas: FloatArray) -> FloatArray:
    eta = thetas @ model.features.T
    return (model.responses[None, :] - expit(eta)) @ model.features


def _normal_mean_log(model: LikelihoodModel, thetas: FloatArray) -> FloatArray:
    diff = model.features[None, :, :] - thetas[:, None, :]
    return -0.5 * model.n * model.dim * LOG_2PI - 0.5 * np.sum(diff**2, axis=(1, 2))


def _normal_mean_grad(model: LikelihoodModel, thetas: FloatArray) -> FloatArray:
    diff = model.features[None, :, :] - thetas[:, None, :]
    return np.sum(diff, axis=1)


_LOG = {
    ModelKind.LINEAR_REGRESSION: _linear_log,
    ModelKind.LOGISTIC_REGRESSION: _logistic_log,
    ModelKind.NORMAL_MEAN: _normal_mean_log,
}
_GRAD = {
    ModelKind.LINEAR_REGRESSION: _linear_grad,
    ModelKind.LOGISTIC_REGRESSION: _logistic_grad,
    ModelKind.NORMAL_MEAN: _normal_mean_grad,
}


def likelihood_log_density(model: LikelihoodModel, theta: ArrayLike) -> Tuple[float, FloatArray]:
    """Σ_i log p(x_i|θ) 와 그 기울기를 반환한다."""

    vector = as_param_vector(theta)[None, :]
    _check_dimension(model, vector)
    return float(_LOG[model.kind](model, vector)[0]), _GRAD[model.kind](model, vector)[0]


def log_likelihood_batch(
    model: LikelihoodModel,
    thetas: ArrayLike,
    *,
    chunk_elements: int = DEFAULT_CHUNK_ELEMENTS,
) -> FloatArray:
    matrix = as_sample_matrix(thetas)
    _check_dimension(model, matrix)
    return _chunked(model, matrix, lambda block: _LOG[model.kind](model, block), chunk_elements)


def log_likelihood_gradient_batch(
    model: LikelihoodModel,
    thetas: ArrayLike,
    *,
    chunk_elements: int = DEFAULT_CHUNK_ELEMENTS,
) -> FloatArray:
    matrix = as_sample_matrix(thetas)
    _check_dimension(model, matrix)
    return _chunked(model, matrix, lambda block: _GRAD[model.kind](model, block), chunk_elements)


def log_likelihood_hessian_diagonal_batch(model: LikelihoodModel, thetas: ArrayLike) -> FloatArray:
    """∂²_i Σ_j log p(x_j|θ). score matching 목적함수에서 쓴다."""

    matrix = as_sample_matrix(thetas)
    _check_dimension(model, matrix)
    if model.kind is ModelKind.LINEAR_REGRESSION:
        curvature = -np.sum(model.features**2, axis=0) / model.noise_variance
        return np.broadcast_to(curvature, matrix.shape).copy()
    if model.kind is ModelKind.LOGISTIC_REGRESSION:
        p = expit(matrix @ model.features.T)
        return -(p * (1.0 - p)) @ (model.features**2)
    return np.full(matrix.shape, -float(model.n))


def pointwise_log_likelihood(model: LikelihoodModel, theta: ArrayLike) -> FloatArray:
    """각 데이터 점의 log p(x_i|θ)."""

    vector = as_param_vector(theta, dim=model.dim)
    if model.kind is ModelKind.LINEAR_REGRESSION:
        residual = model.responses - model.features @ vector
        return -0.5 * (LOG_2PI + math.log(model.noise_variance)) - 0.5 * residual**2 / model.noise_variance
    if model.kind is ModelKind.LOGISTIC_REGRESSION:
        eta = model.features @ vector
        return model.responses * eta - np.logaddexp(0.0, eta)
    diff = model.features - vector
    return -0.5 * model.dim * LOG_2PI - 0.5 * np.sum(diff**2, axis=1)


__all__ = [
    "likelihood_log_density",
    "log_likelihood_batch",
    "log_likelihood_gradient_batch",
    "log_likelihood_hessian_diagonal_batch",
    "pointwise_log_likelihood",
]
