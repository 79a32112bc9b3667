"""데이터 크기 n 에 따른 반복당 샘플링 시간 측정."""

from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..config.experiment import ExperimentConfig
from ..config.settings import AppSettings
from ..data.io import BENCHMARK_COLUMNS
from ..data.models import Method
from ..densities.synthetic import generate_synthetic
from ..errors import InvalidInputError
from ..posterior.parametric import fit_parametric_alpha
from ..posterior.sampling import PosteriorTarget, sample_false_posterior
from ..samplers.base import TargetDensity
from ..samplers.mh import mh_sample
from ..swap.target import make_prior_swap
from .pipeline import derive_seed

logger = logging.getLogger(__name__)

BENCHMARK_PROPOSAL_STD = 0.05
BENCHMARK_FALSE_SAMPLES = 2_000


def _per_iteration_ns(target: TargetDensity, init: np.ndarray, steps: int, seed: int) -> float:
    chain = mh_sample(target, BENCHMARK_PROPOSAL_STD, steps, init, seed)
    return float(chain.wall_ns[-1]) / steps


def benchmark_timing(
    config: ExperimentConfig,
    settings: AppSettings,
    n_grid: Optional[Sequence[int]] = None,
) -> pd.DataFrame:
    """n 마다 direct-mcmc 와 prior-swap-parametric 의 반복당 시간을 잰다.

    두 체인 모두 같은 고정 제안 표준편차의 MH 를 쓰므로 차이는 목표 밀도 평가 비용뿐이다.
    빈 격자는 헤더만 있는 표를 돌려준다.
    """

    if config.model.csv is not None:
        raise InvalidInputError("benchmark 는 합성 데이터 모형에서만 실행합니다.")
    grid = list(config.benchmark.n_grid if n_grid is None else n_grid)
    steps = config.benchmark.steps
    spec = config.model
    false_prior = config.false_prior_spec()
    name, target_prior = next(iter(config.target_priors().items()))
    rows: List[Dict[str, object]] = []
    for n in grid:
        seed = derive_seed(config.seed, "benchmark", str(n))
        model = generate_synthetic(
            spec.tag,
            int(n),
            spec.d,
            spec.theta_true,
            config.model_seed,
            noise_variance=spec.noise_variance,
            observation_sum=spec.observation_sum,
        )
        init = np.zeros(model.dim)
        direct = PosteriorTarget(model, false_prior if target_prior.is_augmented else target_prior)
        rows.append(
            {
                "n": int(n),
                "method": Method.DIRECT_MCMC.value,
                "steps": steps,
                "per_iteration_ns": _per_iteration_ns(direct, init, steps, seed),
            }
        )

        false_samples = sample_false_posterior(
            model,
            false_prior,
            config.sampler_settings(settings, n_samples=BENCHMARK_FALSE_SAMPLES),
            derive_seed(seed, "false-posterior"),
        )
        alpha = fit_parametric_alpha(
            false_samples,
            min(config.pseudo_points(settings), false_samples.size),
            model.kind,
            false_prior,
            model.n,
            seed=derive_seed(seed, "alpha"),
            restarts=1,
            noise_variance=model.noise_variance,
        )
        swap = make_prior_swap(alpha, target_prior, false_prior)
        swap_init = np.zeros(swap.dim)
        rows.append(
            {
                "n": int(n),
                "method": Method.PRIOR_SWAP_PARAMETRIC.value,
                "steps": steps,
                "per_iteration_ns": _per_iteration_ns(swap, swap_init, steps, seed),
            }
        )
        logger.info(
            "benchmark n=%d (%s): direct %.0fns, swap %.0fns",
            n,
            name,
            rows[-2]["per_iteration_ns"],
            rows[-1]["per_iteration_ns"],
        )
    return pd.DataFrame(rows, columns=BENCHMARK_COLUMNS)


__all__ = ["BENCHMARK_FALSE_SAMPLES", "BENCHMARK_PROPOSAL_STD", "benchmark_timing"]
