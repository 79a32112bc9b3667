"""재현 가능한 합성 데이터 생성기."""

from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import expit

from ..data.models import LikelihoodModel, ModelKind
from ..errors import InvalidInputError

logger = logging.getLogger(__name__)


def generate_synthetic(
    kind: ModelKind,
    n: int,
    d: int,
    theta_true: Optional[ArrayLike] = None,
    seed: int = 0,
    *,
    noise_variance: float = 1.0,
    observation_sum: Optional[ArrayLike] = None,
) -> LikelihoodModel:
    """같은 seed 에 대해 비트 단위로 동일한 데이터셋을 만든다.

    NORMAL_MEAN 에서 `observation_sum` 을 주면 관측값 합(충분통계량)을 그 값으로 맞춘다.
    N(0,1) 거짓 사전분포에서 사후분포는 N(Σx/(n+1), 1/(n+1)) 이 된다.
    """

    if n < 0:
        raise InvalidInputError("n 은 0 이상이어야 합니다.")
    if d < 1:
        raise InvalidInputError("d 는 1 이상이어야 합니다.")
    theta = np.zeros(d) if theta_true is None else np.asarray(theta_true, dtype=float).reshape(-1)
    if theta.size != d:
        raise InvalidInputError(f"theta_true 의 길이({theta.size})가 d({d})와 다릅니다.")
    rng = np.random.default_rng(seed)

    if kind is ModelKind.NORMAL_MEAN:
        observations = theta[None, :] + rng.standard_normal((n, d))
        if observation_sum is not None and n > 0:
            target = np.broadcast_to(np.asarray(observation_sum, dtype=float), (d,))
            observations += (target - observations.sum(axis=0)) / n
        model = LikelihoodModel(kind=kind, features=observations)
    else:
        features = rng.standard_normal((n, d))
        eta = features @ theta
        if kind is ModelKind.LINEAR_REGRESSION:
            responses = eta + np.sqrt(noise_variance) * rng.standard_normal(n)
        else:
            responses = (rng.random(n) < expit(eta)).astype(float)
        model = LikelihoodModel(kind=kind, features=features, responses=responses, noise_variance=noise_variance)
    logger.debug("합성 데이터 생성: kind=%s n=%d d=%d seed=%d", kind.value, n, d, seed)
    return model


def train_test_split(
    model: LikelihoodModel,
    holdout_fraction: float,
    seed: int,
) -> Tuple[LikelihoodModel, Optional[LikelihoodModel]]:
    """데이터의 일부를 held-out 평가용으로 떼어 낸다."""

    if not 0.0 <= holdout_fraction < 1.0:
        raise InvalidInputError("holdout_fraction 은 [0, 1) 범위여야 합니다.")
    holdout = int(round(model.n * holdout_fraction))
    if holdout == 0:
        return model, None
    order = np.random.default_rng(seed).permutation(model.n)
    return model.subset(np.sort(order[holdout:])), model.subset(np.sort(order[:holdout]))


__all__ = ["generate_synthetic", "train_test_split"]
