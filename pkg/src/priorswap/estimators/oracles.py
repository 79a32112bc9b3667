"""기준 사후 기댓값: 저차원 구적, 긴 체인, 그리고 held-out 평가."""

from __future__ import annotations

import logging
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import simpson
from scipy.optimize import brentq

from ..data.models import FloatArray, GroundTruth, LikelihoodModel, ModelKind, PriorSpec, TestFunction, as_param_vector
from ..densities.priors import prior_log_density_batch
from ..errors import BoundsTooTightError, InvalidInputError, NumericError
from ..posterior.conjugate import ExactGaussianPosterior
from ..posterior.sampling import initial_state, make_posterior_target, posterior_log_density_batch
from ..samplers.runner import SamplerSettings, find_mode, run_sampler
from ..samplers.summary import monte_carlo_standard_error, retained_samples
from ..samplers.transforms import LogTransformedTarget

logger = logging.getLogger(__name__)

LogDensityBatch = Callable[[FloatArray], FloatArray]

DEFAULT_GRID_SIZE = 257
DEFAULT_TOLERANCE = 1e-6
BOUNDARY_TOLERANCE = 1e-8
MAX_GRID_POINTS = {1: 65_537, 2: 1_025}


def _box(bounds: ArrayLike) -> FloatArray:
    box = np.asarray(bounds, dtype=float).reshape(-1, 2)
    if box.shape[0] not in (1, 2):
        raise InvalidInputError("구적 기준값은 1차원 또는 2차원만 지원합니다.")
    if not np.all(np.isfinite(box)) or np.any(box[:, 1] <= box[:, 0]):
        raise InvalidInputError(f"구적 범위가 올바르지 않습니다: {box.tolist()}")
    return box


def _simpson_moments(
    log_density: LogDensityBatch,
    box: FloatArray,
    h: TestFunction,
    points: int,
) -> Tuple[FloatArray, float]:
    """격자 Simpson 적분으로 (E[h], 경계 질량 비율) 을 구한다."""

    axes = [np.linspace(low, high, points) for low, high in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.column_stack([axis.ravel() for axis in mesh])
    log_values = np.asarray(log_density(grid), dtype=float)
    peak = float(np.max(log_values))
    if not math.isfinite(peak):
        raise NumericError("구적 격자 전체에서 밀도가 0 이거나 정의되지 않습니다")
    density = np.exp(log_values - peak)
    values = h(grid)
    shape = tuple(points for _ in axes)

    def integrate(field: FloatArray) -> float:
        result = field.reshape(shape)
        for axis in reversed(axes):
            result = simpson(result, x=axis, axis=-1)
        return float(result)

    mass = integrate(density)
    if not mass > 0:
        raise NumericError("구적으로 구한 정규화 상수가 0 입니다")
    estimate = np.array([integrate(density * values[:, j]) for j in range(values.shape[1])]) / mass

    cell = float(np.prod([axis[1] - axis[0] for axis in axes]))
    edge = np.zeros(shape, dtype=bool)
    for dim in range(len(axes)):
        index = [slice(None)] * len(axes)
        index[dim] = [0, points - 1]
        edge[tuple(index)] = True
    boundary = float(np.sum(density.reshape(shape)[edge])) * cell / mass
    return estimate, boundary


def quadrature_oracle(
    log_density: LogDensityBatch,
    bounds: ArrayLike,
    h: Optional[TestFunction] = None,
    *,
    grid_size: int = DEFAULT_GRID_SIZE,
    tolerance: float = DEFAULT_TOLERANCE,
) -> FloatArray:
    """정규화되지 않은 1·2차원 밀도의 E[h]. 격자 간격을 반으로 줄여 가며 연속 추정값의 상대 차이가
    `tolerance` 아래가 될 때까지 세분한다. 경계 질량이 1e-8 을 넘으면 BoundsTooTightError.
    """

    box = _box(bounds)
    function = h or TestFunction.identity()
    points = max(5, grid_size | 1)
    limit = MAX_GRID_POINTS[box.shape[0]]
    previous: Optional[FloatArray] = None
    while True:
        estimate, boundary = _simpson_moments(log_density, box, function, points)
        if boundary > BOUNDARY_TOLERANCE:
            raise BoundsTooTightError(f"구적 범위 경계의 질량 비율 {boundary:.3e} 가 허용치를 넘습니다: {box.tolist()}")
        if previous is not None:
            change = float(np.max(np.abs(estimate - previous)))
            if change <= tolerance * max(1.0, float(np.max(np.abs(estimate)))):
                break
        if points >= limit:
            logger.warning("구적 세분이 한계(%d점)에 도달했습니다. 마지막 추정값을 사용합니다.", points)
            break
        previous = estimate
        points = 2 * points - 1
    logger.debug("구적 완료: 격자 %d점/축, 추정값 %s", points, np.round(estimate, 8).tolist())
    return estimate


def expand_bounds(
    log_density: LogDensityBatch,
    bounds: ArrayLike,
    h: Optional[TestFunction] = None,
    *,
    grid_size: int = DEFAULT_GRID_SIZE,
    tolerance: float = DEFAULT_TOLERANCE,
    attempts: int = 6,
) -> Tuple[FloatArray, FloatArray]:
    """경계 질량이 남으면 범위를 중심 기준 두 배로 넓혀 다시 시도한다. (추정값, 사용한 범위)."""

    box = _box(bounds)
    for _ in range(attempts):
        try:
            return quadrature_oracle(log_density, box, h, grid_size=grid_size, tolerance=tolerance), box
        except BoundsTooTightError:
            center = box.mean(axis=1, keepdims=True)
            box = center + 2.0 * (box - center)
            logger.debug("구적 범위 확장: %s", box.tolist())
    return quadrature_oracle(log_density, box, h, grid_size=grid_size, tolerance=tolerance), box


def quadrature_ground_truth(
    model: LikelihoodModel,
    prior: PriorSpec,
    bounds: ArrayLike,
    *,
    name: str,
    grid_size: int = DEFAULT_GRID_SIZE,
    tolerance: float = DEFAULT_TOLERANCE,
) -> GroundTruth:
    estimate, box = expand_bounds(
        posterior_log_density_batch(model, prior), bounds, grid_size=grid_size, tolerance=tolerance
    )
    return GroundTruth(
        target=name,
        mean=estimate,
        method="quadrature",
        settings={"bounds": box.tolist(), "grid_size": grid_size, "tolerance": tolerance},
    )


def long_chain_ground_truth(
    model: LikelihoodModel,
    prior: PriorSpec,
    settings: SamplerSettings,
    seed: int,
    *,
    name: str = "target",
) -> GroundTruth:
    """참 사후분포 위의 긴 체인 하나로 θ 의 사후 평균과 batch-means 표준오차를 구한다."""

    target = make_posterior_target(model, prior)
    init = find_mode(target, initial_state(model, prior))
    chain = run_sampler(target, settings, init, seed)
    states = chain.samples
    if isinstance(target, LogTransformedTarget):
        states = target.to_constrained(states)
    retained = retained_samples(states, settings.burn_in_fraction)[:, : model.dim]
    standard_error = monte_carlo_standard_error(retained)
    logger.info(
        "긴 체인 기준값 완료: %s T=%d acceptance=%.3f max SE=%.3g",
        name,
        chain.length,
        chain.acceptance_rate,
        float(np.max(standard_error)),
    )
    echo = dict(chain.config)
    echo.update({"seed": seed, "acceptance": chain.acceptance_rate, "divergences": chain.divergences})
    return GroundTruth(
        target=name,
        mean=retained.mean(axis=0),
        method="long-chain",
        standard_error=standard_error,
        settings=echo,
    )


def laplace_swap_mean(
    false_posterior: ExactGaussianPosterior,
    false_prior: PriorSpec,
    location: float,
    scale: float,
    bounds: Optional[Sequence[float]] = None,
) -> float:
    """p_f · Laplace(location, b) / π_f 의 1차원 사후 평균."""

    if false_posterior.dim != 1:
        raise InvalidInputError("Laplace 척도 보정은 1차원 예제만 지원합니다.")
    target_prior = PriorSpec.laplace(location, scale)

    def log_density(thetas: FloatArray) -> FloatArray:
        return (
            false_posterior.log_density_batch(thetas)
            + prior_log_density_batch(target_prior, thetas)
            - prior_log_density_batch(false_prior, thetas)
        )

    center = float(false_posterior.mean[0])
    box = bounds if bounds is not None else (min(center, location) - 30.0, max(center, location) + 30.0)
    return float(quadrature_oracle(log_density, box)[0])


def calibrate_laplace_scale(
    false_posterior: ExactGaussianPosterior,
    false_prior: PriorSpec,
    location: float,
    target_mean: float,
    *,
    bracket: Tuple[float, float] = (0.01, 1.0),
    bounds: Optional[Sequence[float]] = None,
) -> float:
    """구적 사후 평균이 보고된 μ_h 와 같아지는 Laplace 척도 b 를 찾는다."""

    def gap(scale: float) -> float:
        return laplace_swap_mean(false_posterior, false_prior, location, scale, bounds) - target_mean

    low, high = bracket
    if gap(low) * gap(high) > 0:
        raise InvalidInputError(f"척도 구간 {bracket} 안에서 사후 평균 {target_mean} 를 만들 수 없습니다.")
    scale = float(brentq(gap, low, high, xtol=1e-10))
    logger.info("Laplace 척도 보정: location=%.4g μ_h=%.6g → b=%.6g", location, target_mean, scale)
    return scale


def held_out_error(model: LikelihoodModel, theta: ArrayLike) -> float:
    """로지스틱은 분류 오류율, 선형 회귀와 평균 모형은 RMSE."""

    vector = as_param_vector(theta, dim=model.dim)
    if model.n == 0:
        raise InvalidInputError("held-out 데이터가 비어 있습니다.")
    if model.kind is ModelKind.LOGISTIC_REGRESSION:
        predicted = (model.features @ vector > 0).astype(float)
        return float(np.mean(predicted != model.responses))
    if model.kind is ModelKind.LINEAR_REGRESSION:
        residual = model.responses - model.features @ vector
    else:
        residual = model.features - vector
    return float(np.sqrt(np.mean(residual**2)))


__all__ = [
    "calibrate_laplace_scale",
    "expand_bounds",
    "held_out_error",
    "laplace_swap_mean",
    "long_chain_ground_truth",
    "quadrature_ground_truth",
    "quadrature_oracle",
]
