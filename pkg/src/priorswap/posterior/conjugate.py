"""정규 거짓 사전분포와 가우시안 잡음 모형의 정확한 켤레 사후분포."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike

from ..data.models import FloatArray, LikelihoodModel, ModelKind, PriorFamily, PriorSpec, SampleSet, as_param_vector, as_sample_matrix
from ..errors import InvalidInputError, NumericError

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)
MAX_CONDITION_NUMBER = 1e12


@dataclass(frozen=True, slots=True, eq=False)
class ExactGaussianPosterior:
    """N(θ | m, S). 공분산은 1e-12 이내로 대칭이고 양의 정부호여야 한다."""

    mean: FloatArray
    covariance: FloatArray
    precision: FloatArray = field(init=False, repr=False)
    cholesky: FloatArray = field(init=False, repr=False)
    log_det_covariance: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        mean = as_param_vector(self.mean)
        covariance = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if covariance.shape != (mean.size, mean.size):
            raise InvalidInputError(f"공분산 shape {covariance.shape} 가 평균 차원 {mean.size} 와 맞지 않습니다.")
        if not np.allclose(covariance, covariance.T, rtol=0.0, atol=1e-12):
            raise InvalidInputError("공분산 행렬이 대칭이 아닙니다.")
        try:
            cholesky = np.linalg.cholesky(covariance)
        except np.linalg.LinAlgError as exc:
            raise InvalidInputError("공분산 행렬이 양의 정부호가 아닙니다.") from exc
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", covariance)
        object.__setattr__(self, "cholesky", cholesky)
        object.__setattr__(self, "precision", np.linalg.inv(covariance))
        object.__setattr__(self, "log_det_covariance", float(2.0 * np.sum(np.log(np.diag(cholesky)))))

    @property
    def dim(self) -> int:
        return int(self.mean.size)

    def log_density_batch(self, thetas: ArrayLike) -> FloatArray:
        residual = as_sample_matrix(thetas) - self.mean
        quad = np.einsum("ti,ij,tj->t", residual, self.precision, residual)
        return -0.5 * (self.dim * LOG_2PI + self.log_det_covariance + quad)

    def gradient_batch(self, thetas: ArrayLike) -> FloatArray:
        return -(as_sample_matrix(thetas) - self.mean) @ self.precision

    def log_density(self, theta: ArrayLike) -> Tuple[float, FloatArray]:
        vector = as_param_vector(theta, dim=self.dim)[None, :]
        return float(self.log_density_batch(vector)[0]), self.gradient_batch(vector)[0]

    def sample(self, size: int, seed: int) -> SampleSet:
        """독립 가우시안 표본. `wall_ns` 는 표본별 누적 생성 시간을 균등 배분한 값이다."""

        if size < 1:
            raise InvalidInputError("표본 수는 1 이상이어야 합니다.")
        start = time.perf_counter_ns()
        rng = np.random.default_rng(seed)
        draws = self.mean + rng.standard_normal((size, self.dim)) @ self.cholesky.T
        elapsed = time.perf_counter_ns() - start
        stamps = np.linspace(elapsed / size, elapsed, size).astype(np.int64)
        return SampleSet(samples=draws, wall_ns=stamps, source="exact")


def prior_precision(prior: PriorSpec, d: int) -> Tuple[FloatArray, FloatArray]:
    """정규 사전분포의 (정밀도 행렬 Σ0⁻¹, 평균 μ0)."""

    if prior.family is not PriorFamily.NORMAL:
        raise InvalidInputError(f"켤레 사후분포는 정규 사전분포만 지원합니다: {prior.family.value}")
    if prior.precision is not None:
        if prior.precision.shape != (d, d):
            raise InvalidInputError(f"사전 공분산 차원 {prior.precision.shape} 가 모수 차원 {d} 와 다릅니다.")
        precision = prior.precision
    else:
        precision = np.eye(d) / prior.variance
    mean = np.broadcast_to(np.asarray(prior.location, dtype=float), (d,)).astype(float)
    return precision, mean


def supports_conjugate(model: LikelihoodModel, prior: PriorSpec) -> bool:
    return prior.family is PriorFamily.NORMAL and model.kind in (ModelKind.LINEAR_REGRESSION, ModelKind.NORMAL_MEAN)


def conjugate_linear_posterior(model: LikelihoodModel, prior: PriorSpec) -> ExactGaussianPosterior:
    """S = (Σ0⁻¹ + XᵀX/σ²)⁻¹, m = S(Σ0⁻¹μ0 + Xᵀy/σ²). n = 0 이면 사전분포 그대로다."""

    if model.kind is ModelKind.LOGISTIC_REGRESSION:
        raise InvalidInputError("로지스틱 회귀에는 켤레 정규 사후분포가 없습니다.")
    d = model.dim
    precision0, mean0 = prior_precision(prior, d)
    if model.kind is ModelKind.LINEAR_REGRESSION:
        gram = model.features.T @ model.features / model.noise_variance
        moment = model.features.T @ model.responses / model.noise_variance
    else:
        gram = model.n * np.eye(d)
        moment = model.features.sum(axis=0)
    precision = precision0 + gram
    condition = float(np.linalg.cond(precision))
    if not math.isfinite(condition) or condition > MAX_CONDITION_NUMBER:
        raise NumericError("사후 정밀도 행렬이 특이에 가깝습니다", condition_number=condition)
    try:
        covariance = np.linalg.inv(precision)
    except np.linalg.LinAlgError as exc:
        raise NumericError("사후 정밀도 행렬의 역행렬을 구할 수 없습니다", condition_number=condition) from exc
    covariance = 0.5 * (covariance + covariance.T)
    mean = covariance @ (precision0 @ mean0 + moment)
    logger.debug("켤레 사후분포 계산: n=%d d=%d cond=%.3e", model.n, d, condition)
    return ExactGaussianPosterior(mean=mean, covariance=covariance)


__all__ = [
    "ExactGaussianPosterior",
    "conjugate_linear_posterior",
    "prior_precision",
    "supports_conjugate",
]
