"""양수 제약 좌표를 로그 공간으로 옮기는 목표 밀도 래퍼."""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike

from ..data.models import FloatArray
from ..errors import InvalidInputError
from .base import TargetDensity


class LogTransformedTarget(TargetDensity):
    """z_i = log θ_i 로 재매개화한 밀도. 로그 야코비안 Σ z_i 를 더한다."""

    def __init__(self, base: TargetDensity, positive_indices: Sequence[int]) -> None:
        indices = np.asarray(sorted(set(int(i) for i in positive_indices)), dtype=int)
        if indices.size and (indices.min() < 0 or indices.max() >= base.dim):
            raise InvalidInputError("양수 좌표 인덱스가 상태 차원을 벗어났습니다.")
        self._base = base
        self._indices = indices

    @property
    def base(self) -> TargetDensity:
        return self._base

    @property
    def positive_indices(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in self._indices)

    @property
    def dim(self) -> int:
        return self._base.dim

    @property
    def has_gradient(self) -> bool:
        return self._base.has_gradient

    def to_constrained(self, z: ArrayLike) -> FloatArray:
        """(T, d) 또는 (d,) 배열의 양수 좌표에 exp 를 적용한다."""

        theta = np.array(z, dtype=float)
        with np.errstate(over="ignore"):
            theta[..., self._indices] = np.exp(theta[..., self._indices])
        return theta

    def to_unconstrained(self, theta: ArrayLike) -> FloatArray:
        z = np.array(theta, dtype=float)
        if np.any(z[..., self._indices] <= 0):
            raise InvalidInputError("양수 제약 좌표에 0 이하 값이 있습니다.")
        z[..., self._indices] = np.log(z[..., self._indices])
        return z

    def log_density(self, z: FloatArray) -> float:
        theta = self.to_constrained(z)
        if not np.all(np.isfinite(theta)):
            return -np.inf
        return self._base.log_density(theta) + float(np.sum(np.asarray(z)[self._indices]))

    def log_density_and_gradient(self, z: FloatArray) -> Tuple[float, FloatArray]:
        theta = self.to_constrained(z)
        if not np.all(np.isfinite(theta)):
            return -np.inf, np.full(theta.shape, np.nan)
        log_p, grad = self._base.log_density_and_gradient(theta)
        grad = np.array(grad, dtype=float)
        grad[self._indices] = grad[self._indices] * theta[self._indices] + 1.0
        return log_p + float(np.sum(np.asarray(z)[self._indices])), grad


__all__ = ["LogTransformedTarget"]
