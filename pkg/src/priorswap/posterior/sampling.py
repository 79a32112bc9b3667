"""사전분포 × 가능도 사후분포 목표와 거짓 사후분포 샘플링."""

from __future__ import annotations

import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np

from ..data.models import FloatArray, LikelihoodModel, PriorSpec, SampleSet, as_sample_matrix
from ..densities.likelihoods import likelihood_log_density, log_likelihood_batch
from ..densities.priors import prior_log_density, prior_log_density_batch
from ..errors import InvalidInputError
from ..samplers.base import TargetDensity
from ..samplers.runner import SamplerSettings, find_mode, run_sampler
from ..samplers.summary import retained_samples
from ..samplers.transforms import LogTransformedTarget
from .conjugate import conjugate_linear_posterior, supports_conjugate

logger = logging.getLogger(__name__)


class PosteriorTarget(TargetDensity):
    """log π(θ) + log L(θ|x^n). 증강 사전분포면 상태는 (θ, α) 이고 가능도는 θ 에만 걸린다.

    매 평가가 Θ(n·d) 이므로 direct MCMC 와 기준값 계산에만 쓴다.
    """

    def __init__(self, model: LikelihoodModel, prior: PriorSpec) -> None:
        self._model = model
        self._prior = prior

    @property
    def model(self) -> LikelihoodModel:
        return self._model

    @property
    def prior(self) -> PriorSpec:
        return self._prior

    @property
    def dim(self) -> int:
        return self._model.dim + (1 if self._prior.is_augmented else 0)

    @property
    def has_gradient(self) -> bool:
        return True

    def log_density(self, theta: FloatArray) -> float:
        return self.log_density_and_gradient(theta)[0]

    def log_density_and_gradient(self, theta: FloatArray) -> Tuple[float, FloatArray]:
        state = np.asarray(theta, dtype=float)
        log_prior, grad = prior_log_density(self._prior, state)
        if not math.isfinite(log_prior):
            return -math.inf, np.zeros_like(state)
        log_lik, grad_lik = likelihood_log_density(self._model, state[: self._model.dim])
        grad = np.array(grad, dtype=float)
        grad[: self._model.dim] += grad_lik
        return log_prior + log_lik, grad


def make_posterior_target(model: LikelihoodModel, prior: PriorSpec) -> TargetDensity:
    """증강 사전분포면 α 를 로그 공간으로 옮긴 목표를 돌려준다."""

    target = PosteriorTarget(model, prior)
    if prior.is_augmented:
        return LogTransformedTarget(target, [model.dim])
    return target


def initial_state(model: LikelihoodModel, prior: PriorSpec) -> FloatArray:
    """샘플러 상태 공간(증강 시 log α 포함)의 기본 시작점."""

    start = np.zeros(model.dim + (1 if prior.is_augmented else 0))
    if prior.is_augmented:
        start[-1] = math.log(prior.shape)
    return start


def posterior_log_density_batch(model: LikelihoodModel, prior: PriorSpec) -> Callable[[FloatArray], FloatArray]:
    """구적용 벡터화 평가기 (T, d) → (T,)."""

    if prior.is_augmented:
        raise InvalidInputError("증강 사전분포의 사후분포는 구적 기준값을 지원하지 않습니다.")

    def evaluate(thetas: FloatArray) -> FloatArray:
        matrix = as_sample_matrix(thetas)
        return prior_log_density_batch(prior, matrix) + log_likelihood_batch(model, matrix)

    return evaluate


def sample_false_posterior(
    model: LikelihoodModel,
    false_prior: PriorSpec,
    settings: SamplerSettings,
    seed: int,
    *,
    use_exact: bool = True,
    size: Optional[int] = None,
) -> SampleSet:
    """켤레 사후분포가 있으면 독립 표본을, 없으면 burn-in 을 제거한 MCMC 체인을 돌려준다.

    `size` 가 있으면 정확히 그 개수를 돌려준다. 체인에서는 burn-in 뒤의 마지막 `size` 개다.
    """

    if false_prior.is_augmented:
        raise InvalidInputError("거짓 사전분포는 θ 위의 분포여야 합니다.")
    if use_exact and supports_conjugate(model, false_prior):
        posterior = conjugate_linear_posterior(model, false_prior)
        count = size or settings.n_samples
        logger.info("거짓 사후분포 정확 표본 %d개 생성 (d=%d)", count, model.dim)
        return posterior.sample(count, seed)
    target = PosteriorTarget(model, false_prior)
    init = find_mode(target, initial_state(model, false_prior))
    chain = run_sampler(target, settings, init, seed)
    retained = retained_samples(chain, settings.burn_in_fraction)
    if size is not None:
        if size > retained.shape[0]:
            raise InvalidInputError(f"burn-in 뒤 남은 샘플({retained.shape[0]})이 요청한 {size}개보다 적습니다.")
        retained = retained[retained.shape[0] - size :]
    dropped = chain.length - retained.shape[0]
    logger.info(
        "거짓 사후분포 MCMC 완료: T=%d retained=%d acceptance=%.3f",
        chain.length,
        retained.shape[0],
        chain.acceptance_rate,
    )
    return SampleSet(samples=retained, wall_ns=chain.wall_ns[dropped:], source=f"mcmc:{settings.kind.value}")


__all__ = [
    "PosteriorTarget",
    "initial_state",
    "make_posterior_target",
    "posterior_log_density_batch",
    "sample_false_posterior",
]
