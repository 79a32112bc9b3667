"""샘플러 설정과 종류별 실행 진입점."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import minimize

from ..data.models import Chain, FloatArray, as_param_vector
from ..errors import InvalidInputError
from .base import TargetDensity
from .hmc import DEFAULT_TARGET_ACCEPTANCE, DEFAULT_WARMUP_STEPS, hmc_sample, langevin_sample
from .mh import mh_sample, tune_proposal_std
from .summary import DEFAULT_BURN_IN

logger = logging.getLogger(__name__)


class SamplerKind(str, Enum):
    MH = "mh"
    HMC = "hmc"
    LANGEVIN = "langevin"


@dataclass(frozen=True, slots=True)
class SamplerSettings:
    """`proposal_std`, `step_size` 가 None 이면 파일럿/워밍업으로 자동 조정한다."""

    kind: SamplerKind = SamplerKind.MH
    n_samples: int = 10_000
    proposal_std: Optional[Union[float, Tuple[float, ...]]] = None
    pilot_steps: int = 1_000
    step_size: Optional[float] = None
    n_leapfrog: int = 20
    warmup: int = DEFAULT_WARMUP_STEPS
    target_acceptance: Tuple[float, float] = DEFAULT_TARGET_ACCEPTANCE
    burn_in_fraction: float = DEFAULT_BURN_IN

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise InvalidInputError("샘플 수 T 는 1 이상이어야 합니다.")
        if self.n_leapfrog < 1:
            raise InvalidInputError("leapfrog 스텝 수는 1 이상이어야 합니다.")
        if not 0.0 <= self.burn_in_fraction < 1.0:
            raise InvalidInputError("burn-in 비율은 [0, 1) 범위여야 합니다.")
        if self.pilot_steps < 1 or self.warmup < 0:
            raise InvalidInputError("pilot_steps 는 1 이상, warmup 은 0 이상이어야 합니다.")

    def replace(self, **changes: Any) -> "SamplerSettings":
        values = asdict(self)
        values.update(changes)
        return SamplerSettings(**values)

    def describe(self) -> Dict[str, object]:
        payload = asdict(self)
        payload["kind"] = self.kind.value
        return payload


def find_mode(target: TargetDensity, init: ArrayLike) -> FloatArray:
    """체인 시작점으로 쓸 근사 최빈값. 실패하면 초기값을 그대로 돌려준다."""

    start = as_param_vector(init, dim=target.dim)

    def negative(theta: FloatArray) -> float:
        value = target.log_density(theta)
        return -value if np.isfinite(value) else 1e300

    def jac(theta: FloatArray) -> FloatArray:
        value, grad = target.log_density_and_gradient(theta)
        return -grad if np.isfinite(value) else np.zeros_like(theta)

    result = minimize(negative, start, jac=jac if target.has_gradient else None, method="L-BFGS-B")
    candidate = np.asarray(result.x, dtype=float)
    if np.all(np.isfinite(candidate)) and np.isfinite(target.log_density(candidate)):
        return candidate
    logger.debug("최빈값 탐색 실패, 초기값을 사용합니다: %s", result.message)
    return start


def run_sampler(
    target: TargetDensity,
    settings: SamplerSettings,
    init: ArrayLike,
    seed: int,
    *,
    n_samples: Optional[int] = None,
) -> Chain:
    """설정된 종류의 샘플러로 체인 하나를 만든다. 조정 단계는 같은 seed 에서 파생한다."""

    total = settings.n_samples if n_samples is None else n_samples
    echo = settings.describe()
    if settings.kind is SamplerKind.MH:
        scale = settings.proposal_std
        if scale is None:
            scale = tune_proposal_std(target, init, seed + 1, pilot_steps=settings.pilot_steps)
        echo["proposal_std"] = np.atleast_1d(scale).tolist()
        return mh_sample(target, scale, total, init, seed, config=echo)
    if settings.kind is SamplerKind.HMC:
        return hmc_sample(
            target,
            settings.step_size,
            settings.n_leapfrog,
            total,
            init,
            seed,
            warmup=settings.warmup,
            target_acceptance=settings.target_acceptance,
            config=echo,
        )
    return langevin_sample(
        target,
        settings.step_size,
        total,
        init,
        seed,
        warmup=settings.warmup,
        target_acceptance=settings.target_acceptance,
        config=echo,
    )


__all__ = ["SamplerKind", "SamplerSettings", "find_mode", "run_sampler"]
