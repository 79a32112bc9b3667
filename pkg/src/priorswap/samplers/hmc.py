"""Hamiltonian Monte Carlo 와 그 L=1 특수형인 Langevin 동역학."""

from __future__ import annotations

import logging
import math
import time
from typing import Any, Callable, Mapping, NamedTuple, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike

from ..data.models import Chain, FloatArray, as_param_vector
from ..errors import InvalidInputError, InvalidStartError
from .base import TargetDensity

logger = logging.getLogger(__name__)

Evaluator = Callable[[FloatArray], Tuple[float, FloatArray]]

DEFAULT_WARMUP_STEPS = 500
DEFAULT_TARGET_ACCEPTANCE = (0.6, 0.9)
TUNING_BLOCK = 50
INITIAL_STEP_SIZE = 0.1


class Trajectory(NamedTuple):
    theta: FloatArray
    momentum: FloatArray
    log_density: float
    gradient: FloatArray
    finite: bool


def leapfrog(
    evaluate: Evaluator,
    theta: ArrayLike,
    momentum: ArrayLike,
    step_size: float,
    n_steps: int,
    *,
    gradient: Optional[FloatArray] = None,
) -> Trajectory:
    """반 스텝 운동량, L 번의 위치 이동(사이사이 L-1 번의 운동량 전체 스텝), 마지막 반 스텝.

    `evaluate` 는 θ → (log p(θ), ∇ log p(θ)). 도중에 값이 유한하지 않으면 `finite=False` 로 멈춘다.
    """

    position = np.array(theta, dtype=float)
    r = np.array(momentum, dtype=float)
    log_p = math.nan
    grad = evaluate(position)[1] if gradient is None else gradient
    r = r + 0.5 * step_size * grad
    for step in range(1, n_steps + 1):
        position = position + step_size * r
        log_p, grad = evaluate(position)
        if not (math.isfinite(log_p) and np.all(np.isfinite(grad))):
            return Trajectory(position, r, log_p, grad, False)
        if step < n_steps:
            r = r + step_size * grad
    r = r + 0.5 * step_size * grad
    return Trajectory(position, r, log_p, grad, bool(np.all(np.isfinite(r))))


def _safe_evaluator(target: TargetDensity) -> Evaluator:
    def evaluate(theta: FloatArray) -> Tuple[float, FloatArray]:
        if not np.all(np.isfinite(theta)):
            return -math.inf, np.full(theta.shape, math.nan)
        return target.log_density_and_gradient(theta)

    return evaluate


def _transition(
    evaluate: Evaluator,
    theta: FloatArray,
    log_p: float,
    grad: FloatArray,
    momentum: FloatArray,
    log_u: float,
    step_size: float,
    n_leapfrog: int,
) -> Tuple[FloatArray, float, FloatArray, bool, bool, float]:
    """HMC 한 단계. (θ, log p, ∇, 수락, 발산, ΔH) 를 반환한다."""

    with np.errstate(over="ignore", invalid="ignore"):
        trajectory = leapfrog(evaluate, theta, momentum, step_size, n_leapfrog, gradient=grad)
        if not trajectory.finite:
            return theta, log_p, grad, False, True, math.nan
        start_energy = -log_p + 0.5 * float(momentum @ momentum)
        end_energy = -trajectory.log_density + 0.5 * float(trajectory.momentum @ trajectory.momentum)
    delta = end_energy - start_energy
    if not math.isfinite(delta):
        return theta, log_p, grad, False, True, math.nan
    if log_u < -delta:
        return trajectory.theta, trajectory.log_density, trajectory.gradient, True, False, delta
    return theta, log_p, grad, False, False, delta


def tune_step_size(
    target: TargetDensity,
    init: ArrayLike,
    n_leapfrog: int,
    seed: int,
    *,
    warmup: int = DEFAULT_WARMUP_STEPS,
    target_acceptance: Tuple[float, float] = DEFAULT_TARGET_ACCEPTANCE,
    initial_step_size: float = INITIAL_STEP_SIZE,
) -> Tuple[float, FloatArray]:
    """워밍업 동안 블록별 수락률을 보고 ε 을 두 배/절반으로 조정한다.

    반환값은 (조정된 ε, 워밍업 마지막 상태). 워밍업 샘플은 출력에 포함되지 않는다.
    """

    low, high = target_acceptance
    if not 0.0 < low < high <= 1.0:
        raise InvalidInputError("목표 수락률 구간은 0 < low < high <= 1 이어야 합니다.")
    evaluate = _safe_evaluator(target)
    theta = as_param_vector(init, dim=target.dim).copy()
    log_p, grad = evaluate(theta)
    if not (math.isfinite(log_p) and np.all(np.isfinite(grad))):
        raise InvalidStartError(f"초기값에서 목표 밀도나 기울기가 유한하지 않습니다: θ0={theta.tolist()}")
    rng = np.random.default_rng(seed)
    step_size = initial_step_size
    accepted_in_block = 0
    for step in range(1, warmup + 1):
        momentum = rng.standard_normal(theta.size)
        log_u = math.log(rng.random() or 1e-300)
        theta, log_p, grad, accepted, _, _ = _transition(
            evaluate, theta, log_p, grad, momentum, log_u, step_size, n_leapfrog
        )
        accepted_in_block += int(accepted)
        if step % TUNING_BLOCK == 0:
            rate = accepted_in_block / TUNING_BLOCK
            if rate < low:
                step_size *= 0.5
            elif rate > high:
                step_size *= 2.0
            accepted_in_block = 0
    logger.debug("HMC step size 조정 완료: ε=%.6g (warmup=%d, L=%d)", step_size, warmup, n_leapfrog)
    return step_size, theta


def hmc_sample(
    target: TargetDensity,
    step_size: Optional[float],
    n_leapfrog: int,
    n_samples: int,
    init: ArrayLike,
    seed: int,
    *,
    warmup: int = DEFAULT_WARMUP_STEPS,
    target_acceptance: Tuple[float, float] = DEFAULT_TARGET_ACCEPTANCE,
    config: Optional[Mapping[str, Any]] = None,
) -> Chain:
    """운동량 r ~ N(0, I), leapfrog 적분 후 exp{-ΔH} 로 수락한다.

    `step_size=None` 이면 `warmup` 단계 동안 ε 을 조정하고 워밍업 마지막 상태에서 시작한다.
    기울기가 도중에 유한하지 않으면 그 단계를 거절하고 발산 횟수에 더한다.
    """

    if not target.has_gradient:
        raise InvalidInputError(f"{type(target).__name__} 는 기울기를 제공하지 않아 HMC 를 쓸 수 없습니다.")
    if n_leapfrog < 1:
        raise InvalidInputError("leapfrog 스텝 수 L 은 1 이상이어야 합니다.")
    if n_samples < 0:
        raise InvalidInputError("n_samples 는 0 이상이어야 합니다.")
    theta = as_param_vector(init, dim=target.dim).copy()
    warmup_seed, chain_seed = np.random.SeedSequence(seed).spawn(2)
    if step_size is None:
        step_size, theta = tune_step_size(
            target,
            theta,
            n_leapfrog,
            int(warmup_seed.generate_state(1)[0]),
            warmup=warmup,
            target_acceptance=target_acceptance,
        )
    elif not step_size > 0:
        raise InvalidInputError("step size ε 는 양수여야 합니다.")

    evaluate = _safe_evaluator(target)
    log_p, grad = evaluate(theta)
    if not (math.isfinite(log_p) and np.all(np.isfinite(grad))):
        raise InvalidStartError(f"초기값에서 목표 밀도나 기울기가 유한하지 않습니다: θ0={theta.tolist()}")

    rng = np.random.default_rng(chain_seed)
    momenta = rng.standard_normal((n_samples, theta.size))
    with np.errstate(divide="ignore"):
        log_u = np.log(rng.random(n_samples))

    samples = np.empty((n_samples, theta.size))
    accepted = np.zeros(n_samples, dtype=bool)
    energy = np.empty(n_samples)
    stamps = np.empty(n_samples, dtype=np.int64)
    divergences = 0
    start = time.perf_counter_ns()
    for t in range(n_samples):
        theta, log_p, grad, accepted[t], diverged, energy[t] = _transition(
            evaluate, theta, log_p, grad, momenta[t], float(log_u[t]), step_size, n_leapfrog
        )
        divergences += int(diverged)
        samples[t] = theta
        stamps[t] = time.perf_counter_ns() - start

    if divergences:
        logger.info("HMC 발산 %d회 (T=%d, ε=%.4g, L=%d)", divergences, n_samples, step_size, n_leapfrog)
    echo = dict(config or {})
    echo.update(
        {
            "sampler": "hmc" if n_leapfrog > 1 else "langevin",
            "step_size": step_size,
            "n_leapfrog": n_leapfrog,
            "n_samples": n_samples,
        }
    )
    return Chain(
        samples=samples,
        accepted=accepted,
        wall_ns=stamps,
        seed=seed,
        config=echo,
        divergences=divergences,
        energy_change=energy,
    )


def langevin_sample(
    target: TargetDensity,
    step_size: Optional[float],
    n_samples: int,
    init: ArrayLike,
    seed: int,
    **kwargs: Any,
) -> Chain:
    """L = 1 인 HMC (Metropolis 보정 Langevin)."""

    return hmc_sample(target, step_size, 1, n_samples, init, seed, **kwargs)


__all__ = ["Trajectory", "hmc_sample", "langevin_sample", "leapfrog", "tune_step_size"]
