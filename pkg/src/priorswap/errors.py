"""prior swapping 전반에서 공유하는 예외 계층."""

from __future__ import annotations

from typing import Optional, Sequence


class PriorSwapError(RuntimeError):
    """모든 도메인 오류의 기반 클래스. `code` 는 CLI 오류 라인에 그대로 쓰인다."""

    code = "priorswap_error"

    def __init__(self, message: str) -> None:
        self.message = message
        super().__init__(message)


class InvalidInputError(PriorSwapError, ValueError):
    """입력 값이 유한하지 않거나 차원이 맞지 않을 때 발생."""

    code = "invalid_input"


class ConfigError(InvalidInputError):
    """실험 설정 파일 오류."""

    code = "config_error"


class NumericError(PriorSwapError):
    """수치 계산이 불안정하거나 정의되지 않을 때 발생."""

    code = "numeric_error"

    def __init__(
        self,
        message: str,
        *,
        condition_number: Optional[float] = None,
        sample_index: Optional[int] = None,
    ) -> None:
        self.condition_number = condition_number
        self.sample_index = sample_index
        details = []
        if condition_number is not None:
            details.append(f"condition_number={condition_number:.3e}")
        if sample_index is not None:
            details.append(f"sample_index={sample_index}")
        if details:
            message = f"{message} ({', '.join(details)})"
        super().__init__(message)


class InvalidStartError(PriorSwapError):
    """초기 상태에서 목표 밀도가 유한하지 않을 때 발생."""

    code = "invalid_start"


class SupportMismatchError(PriorSwapError):
    """목표 사전분포는 양수인데 거짓 사전분포가 0인 지점을 방문했을 때 발생."""

    code = "support_mismatch"

    def __init__(self, theta: Sequence[float]) -> None:
        self.theta = tuple(float(value) for value in theta)
        super().__init__(f"π_f(θ) = 0 이지만 π(θ) > 0 인 지점: θ={list(self.theta)}")


class DegenerateWeightsError(PriorSwapError):
    """모든 중요도 가중치가 0으로 underflow 했을 때 발생."""

    code = "degenerate_weights"


class BoundsTooTightError(PriorSwapError):
    """구적 범위 경계에 무시할 수 없는 질량이 남아 있을 때 발생."""

    code = "bounds_too_tight"


class ConvergenceWarning(UserWarning):
    """최적화가 진전 없이 종료되었음을 알린다. 최선의 결과는 그대로 반환된다."""


__all__ = [
    "BoundsTooTightError",
    "ConfigError",
    "ConvergenceWarning",
    "DegenerateWeightsError",
    "InvalidInputError",
    "InvalidStartError",
    "NumericError",
    "PriorSwapError",
    "SupportMismatchError",
]
