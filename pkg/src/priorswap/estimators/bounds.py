"""가우시안 거짓 사후분포에서 naive IS 에 필요한 샘플 수 하한."""

from __future__ import annotations

import math
from typing import NamedTuple

from ..errors import InvalidInputError


class SampleBound(NamedTuple):
    value: float
    vacuous: bool
    log_value: float

    def __float__(self) -> float:
        return self.value


def is_sample_lower_bound(m: float, s2: float, mu_h: float, delta: float) -> SampleBound:
    """T ≥ exp{(|μ_h - m| - δ)² / (2s²)}. δ ≥ |μ_h - m| 이면 하한은 의미가 없어 1 을 돌려준다."""

    if not s2 > 0:
        raise InvalidInputError("s² 는 양수여야 합니다.")
    gap = abs(mu_h - m)
    if delta >= gap:
        return SampleBound(value=1.0, vacuous=True, log_value=0.0)
    log_value = (gap - delta) ** 2 / (2.0 * s2)
    value = math.exp(log_value) if log_value < 709.0 else math.inf
    return SampleBound(value=value, vacuous=False, log_value=log_value)


__all__ = ["SampleBound", "is_sample_lower_bound"]
