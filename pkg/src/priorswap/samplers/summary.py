"""체인 요약: burn-in 제거 후 적률과 batch-means 표준오차."""

from __future__ import annotations

import math
from typing import Union

import numpy as np
from numpy.typing import ArrayLike

from ..data.models import Chain, ChainSummary, FloatArray, as_sample_matrix
from ..errors import InvalidInputError

DEFAULT_BURN_IN = 0.25


def retained_samples(samples: Union[Chain, ArrayLike], burn_in_fraction: float = DEFAULT_BURN_IN) -> FloatArray:
    """앞의 floor(burn_in·T) 개를 버린 나머지 샘플."""

    if not 0.0 <= burn_in_fraction < 1.0:
        raise InvalidInputError("burn-in 비율은 [0, 1) 범위여야 합니다.")
    matrix = samples.samples if isinstance(samples, Chain) else as_sample_matrix(samples)
    drop = int(math.floor(burn_in_fraction * matrix.shape[0]))
    retained = matrix[drop:]
    if retained.shape[0] == 0:
        raise InvalidInputError("burn-in 이후 남은 샘플이 없습니다.")
    return retained


def chain_summary(chain: Union[Chain, ArrayLike], burn_in_fraction: float = DEFAULT_BURN_IN) -> ChainSummary:
    retained = retained_samples(chain, burn_in_fraction)
    return ChainSummary(
        mean=retained.mean(axis=0),
        variance=retained.var(axis=0),
        retained=int(retained.shape[0]),
    )


def monte_carlo_standard_error(samples: ArrayLike, n_batches: int | None = None) -> FloatArray:
    """batch means 로 추정한 체인 평균의 표준오차. 기본 배치 수는 floor(√T)."""

    matrix = as_sample_matrix(samples)
    total = matrix.shape[0]
    if total < 2:
        return np.full(matrix.shape[1], math.inf)
    batches = n_batches or max(2, int(math.isqrt(total)))
    batches = min(batches, total)
    size = total // batches
    trimmed = matrix[: size * batches].reshape(batches, size, matrix.shape[1])
    means = trimmed.mean(axis=1)
    return np.sqrt(means.var(axis=0, ddof=1) / batches)


__all__ = ["DEFAULT_BURN_IN", "chain_summary", "monte_carlo_standard_error", "retained_samples"]
