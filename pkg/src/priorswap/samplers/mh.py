"""가우시안 랜덤워크 Metropolis-Hastings."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Mapping, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike

from ..data.models import Chain, FloatArray, as_param_vector
from ..errors import InvalidInputError, InvalidStartError
from .base import TargetDensity

logger = logging.getLogger(__name__)

ProposalScale = Union[float, Sequence[float], FloatArray]


def mh_sample(
    target: TargetDensity,
    proposal_std: ProposalScale,
    n_samples: int,
    init: ArrayLike,
    seed: int,
    *,
    config: Optional[Mapping[str, Any]] = None,
) -> Chain:
    """대칭 제안분포이므로 min{1, p(θ')/p(θ)} 로 수락한다. 같은 seed 면 같은 체인이다."""

    if n_samples < 0:
        raise InvalidInputError("n_samples 는 0 이상이어야 합니다.")
    theta = as_param_vector(init, dim=target.dim).copy()
    current = target.log_density(theta)
    if not math.isfinite(current):
        raise InvalidStartError(f"초기값에서 목표 밀도가 유한하지 않습니다: θ0={theta.tolist()}")
    scale = np.broadcast_to(np.asarray(proposal_std, dtype=float), theta.shape)
    if np.any(scale < 0) or not np.all(np.isfinite(scale)):
        raise InvalidInputError("제안분포 표준편차는 0 이상의 유한값이어야 합니다.")

    rng = np.random.default_rng(seed)
    steps = rng.standard_normal((n_samples, theta.size)) * scale
    with np.errstate(divide="ignore"):
        log_u = np.log(rng.random(n_samples))

    samples = np.empty((n_samples, theta.size))
    accepted = np.zeros(n_samples, dtype=bool)
    stamps = np.empty(n_samples, dtype=np.int64)
    start = time.perf_counter_ns()
    for t in range(n_samples):
        proposal = theta + steps[t]
        proposed = target.log_density(proposal)
        # 유한하지 않은 제안은 자동 거절한다.
        if math.isfinite(proposed) and log_u[t] < proposed - current:
            theta = proposal
            current = proposed
            accepted[t] = True
        samples[t] = theta
        stamps[t] = time.perf_counter_ns() - start

    echo = dict(config or {})
    echo.update({"sampler": "mh", "proposal_std": scale.tolist(), "n_samples": n_samples})
    return Chain(samples=samples, accepted=accepted, wall_ns=stamps, seed=seed, config=echo)


def tune_proposal_std(
    target: TargetDensity,
    init: ArrayLike,
    seed: int,
    *,
    pilot_steps: int = 1000,
    rounds: int = 3,
    initial_std: float = 0.5,
) -> FloatArray:
    """파일럿 체인의 척도 추정 ŝ 로 2.4·ŝ/√d 를 만든다."""

    theta = as_param_vector(init, dim=target.dim)
    d = theta.size
    std = np.full(d, initial_std)
    for round_index in range(rounds):
        pilot = mh_sample(target, std, pilot_steps, theta, seed + round_index)
        tail = pilot.samples[pilot_steps // 2 :]
        spread = tail.std(axis=0) if tail.size else np.zeros(d)
        if pilot.acceptance_rate == 0.0 or not np.any(spread > 0):
            std = std / 4.0
            continue
        spread = np.where(spread > 0, spread, np.max(spread))
        std = 2.4 * spread / math.sqrt(d)
        theta = pilot.samples[-1]
    logger.debug("MH 제안 표준편차 조정 완료: %s", np.round(std, 6).tolist())
    return std


def run_chains(
    sample_fn: Callable[[int], Chain],
    seeds: Sequence[int],
    *,
    max_workers: int = 1,
) -> List[Chain]:
    """서로 다른 seed 의 독립 체인을 병렬로 돌리고 seed 순서대로 반환한다."""

    if max_workers <= 1:
        return [sample_fn(seed) for seed in seeds]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(sample_fn, seeds))


__all__ = ["mh_sample", "run_chains", "tune_proposal_std"]
