"""샘플러가 소비하는 목표 밀도 공통 인터페이스."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from ..data.models import FloatArray


class TargetDensity(ABC):
    """정규화되지 않은 로그 밀도와 (선택적) 기울기를 제공하는 기본 인터페이스."""

    @property
    @abstractmethod
    def dim(self) -> int:
        """상태 공간의 차원."""

    @abstractmethod
    def log_density(self, theta: FloatArray) -> float:
        """θ 에서의 정규화되지 않은 로그 밀도."""

    @property
    def has_gradient(self) -> bool:
        return False

    def log_density_and_gradient(self, theta: FloatArray) -> Tuple[float, FloatArray]:
        """로그 밀도와 기울기를 함께 계산한다. 기울기가 없으면 NotImplementedError."""

        raise NotImplementedError(f"{type(self).__name__} 는 기울기를 제공하지 않습니다.")

    def gradient(self, theta: FloatArray) -> FloatArray:
        return self.log_density_and_gradient(theta)[1]


@dataclass(frozen=True)
class FunctionTarget(TargetDensity):
    """함수 한두 개로 정의하는 목표 밀도."""

    log_fn: Callable[[FloatArray], float]
    dimension: int
    grad_fn: Optional[Callable[[FloatArray], FloatArray]] = None

    @property
    def dim(self) -> int:
        return self.dimension

    @property
    def has_gradient(self) -> bool:
        return self.grad_fn is not None

    def log_density(self, theta: FloatArray) -> float:
        return float(self.log_fn(theta))

    def log_density_and_gradient(self, theta: FloatArray) -> Tuple[float, FloatArray]:
        if self.grad_fn is None:
            return super().log_density_and_gradient(theta)
        return float(self.log_fn(theta)), np.asarray(self.grad_fn(theta), dtype=float)


__all__ = ["FunctionTarget", "TargetDensity"]
