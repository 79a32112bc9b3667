"""체인의 1차원 주변 밀도를 고정 격자 위의 Gaussian KDE 로 그린다."""

from __future__ import annotations

import logging
from typing import Mapping

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from scipy.integrate import trapezoid
from scipy.stats import gaussian_kde, norm

from ..data.models import FloatArray, Method, as_sample_matrix
from ..errors import InvalidInputError
from ..samplers.summary import retained_samples
from .pipeline import ExperimentPipeline

logger = logging.getLogger(__name__)


def make_grid(low: float, high: float, count: int) -> FloatArray:
    if not high > low or count < 2:
        raise InvalidInputError("격자는 low < high, count ≥ 2 여야 합니다.")
    return np.linspace(low, high, int(count))


def kde_marginal(values: ArrayLike, grid: ArrayLike) -> FloatArray:
    """값이 모두 같으면 격자 간격 폭의 정규 스파이크로 대신한다."""

    sample = np.asarray(values, dtype=float).reshape(-1)
    points = np.asarray(grid, dtype=float)
    if sample.size == 0:
        raise InvalidInputError("주변 밀도를 그릴 샘플이 없습니다.")
    if sample.size < 2 or np.ptp(sample) == 0.0:
        width = float(points[1] - points[0]) if points.size > 1 else 1.0
        return norm.pdf(points, loc=float(sample[0]), scale=width)
    return gaussian_kde(sample)(points)


def kde_marginals(
    chains: Mapping[str, ArrayLike],
    dimension: int,
    grid: ArrayLike,
) -> pd.DataFrame:
    """열: grid, density_<이름>... 이름 순서는 입력 순서를 따른다."""

    if not chains:
        raise InvalidInputError("주변 밀도를 그릴 체인이 없습니다.")
    points = np.asarray(grid, dtype=float)
    frame = pd.DataFrame({"grid": points})
    for name, samples in chains.items():
        matrix = as_sample_matrix(samples)
        if not 0 <= dimension < matrix.shape[1]:
            raise InvalidInputError(f"차원 {dimension} 이 체인 차원 {matrix.shape[1]} 밖입니다.")
        frame[f"density_{name}"] = kde_marginal(matrix[:, dimension], points)
        logger.debug("주변 밀도 %s: 샘플 %d개", name, matrix.shape[0])
    return frame


def central_mass(frame: pd.DataFrame, name: str, radius: float) -> float:
    """|θ| < radius 구간의 밀도 질량 (사다리꼴 적분)."""

    inside = frame["grid"].abs() < radius
    grid = frame.loc[inside, "grid"].to_numpy()
    density = frame.loc[inside, f"density_{name}"].to_numpy()
    if grid.size < 2:
        return 0.0
    return float(trapezoid(density, grid))


def chain_marginals(pipeline: ExperimentPipeline, dimension: int, grid: ArrayLike) -> pd.DataFrame:
    """목표 사전분포마다 설정의 첫 체인 방법으로 체인을 만들고 burn-in 뒤 θ 주변 밀도를 그린다."""

    methods = [method for method in pipeline.config.experiment.methods if method is not Method.NAIVE_IS]
    if not methods:
        raise InvalidInputError("marginals 에는 체인을 만드는 방법(direct-mcmc 또는 prior-swap-*)이 필요합니다.")
    method = methods[0]
    pipeline.prepare([method])
    burn_in = pipeline.config.burn_in(pipeline.settings)
    chains = {}
    for name in pipeline.priors:
        run = pipeline.sample_for(name, method)
        chains[name] = retained_samples(run.states, burn_in)[:, : pipeline.model.dim]
    logger.info("주변 밀도: 방법 %s, 목표 %d개, 차원 %d", method.value, len(chains), dimension)
    return kde_marginals(chains, dimension, grid)


__all__ = ["central_mass", "chain_marginals", "kde_marginal", "kde_marginals", "make_grid"]
