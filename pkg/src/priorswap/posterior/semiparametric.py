"""커널 보정을 더한 semiparametric 거짓 사후분포 추정.

p̃_f^{sp}(θ) = (1/T_f) Σ_t b^{-d} K(‖θ-θ̃_t‖/b) · p̃_f^α(θ) / p̃_f^α(θ̃_t), K 는 가우시안 커널.
모든 합은 log-sum-exp 로 계산한다.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.spatial.distance import cdist
from scipy.special import logsumexp, softmax

from ..data.models import FloatArray, SampleSet, as_param_vector, as_sample_matrix
from ..errors import InvalidInputError
from .parametric import ParametricAlpha, parametric_gradient_batch, parametric_log_density_batch

LOG_2PI = math.log(2.0 * math.pi)
DEFAULT_CHUNK_ELEMENTS = 4_000_000
GAUSSIAN_KERNEL = "gaussian"


def select_bandwidth(t_f: int, d: int, c_b: float = 1.0) -> float:
    """b = c_b · T_f^{-1/(4+d)} 를 (0, 1] 로 자른다."""

    if t_f < 1:
        raise InvalidInputError("T_f 는 1 이상이어야 합니다.")
    if d < 1:
        raise InvalidInputError("d 는 1 이상이어야 합니다.")
    if not c_b > 0:
        raise InvalidInputError("bandwidth 상수 c_b 는 양수여야 합니다.")
    return min(1.0, c_b * float(t_f) ** (-1.0 / (4.0 + d)))


@dataclass(frozen=True, slots=True, eq=False)
class SemiparametricRep:
    """거짓 사후 샘플, bandwidth, 기반 α. `base_log_density` 는 p̃_f^α(θ̃_t) 를 미리 계산한 값이다."""

    samples: FloatArray
    bandwidth: float
    base: ParametricAlpha
    kernel: str = GAUSSIAN_KERNEL
    base_log_density: FloatArray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        samples = self.samples.samples if isinstance(self.samples, SampleSet) else as_sample_matrix(self.samples)
        if samples.shape[0] < 1:
            raise InvalidInputError("semiparametric 표현에는 최소 1개의 샘플이 필요합니다.")
        if samples.shape[1] != self.base.dim:
            raise InvalidInputError(f"샘플 차원({samples.shape[1]})이 α 의 모수 차원({self.base.dim})과 다릅니다.")
        if not (self.bandwidth > 0 and math.isfinite(self.bandwidth)):
            raise InvalidInputError("bandwidth 는 양의 유한값이어야 합니다.")
        if self.kernel != GAUSSIAN_KERNEL:
            raise InvalidInputError(f"지원하지 않는 커널입니다: {self.kernel}")
        base_log = parametric_log_density_batch(self.base, samples)
        if not np.all(np.isfinite(base_log)):
            raise InvalidInputError("일부 샘플에서 p̃_f^α 가 유한한 양수가 아닙니다.")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "base_log_density", base_log)

    @property
    def size(self) -> int:
        return int(self.samples.shape[0])

    @property
    def dim(self) -> int:
        return int(self.samples.shape[1])

    def with_bandwidth(self, bandwidth: float) -> "SemiparametricRep":
        return SemiparametricRep(samples=self.samples, bandwidth=bandwidth, base=self.base, kernel=self.kernel)


def build_semiparametric(
    samples: Union[SampleSet, ArrayLike],
    base: ParametricAlpha,
    *,
    bandwidth: float | None = None,
    c_b: float = 1.0,
) -> SemiparametricRep:
    matrix = samples.samples if isinstance(samples, SampleSet) else as_sample_matrix(samples)
    width = bandwidth if bandwidth is not None else select_bandwidth(matrix.shape[0], matrix.shape[1], c_b)
    return SemiparametricRep(samples=matrix, bandwidth=width, base=base)


def _log_terms(rep: SemiparametricRep, thetas: FloatArray) -> FloatArray:
    """(T, T_f) 행렬: log K(‖θ-θ̃_t‖/b) - d log b - log p̃_f^α(θ̃_t)."""

    with np.errstate(over="ignore", divide="ignore"):
        squared = cdist(thetas, rep.samples, "sqeuclidean") / rep.bandwidth**2
    d = rep.dim
    return -0.5 * squared - 0.5 * d * LOG_2PI - d * math.log(rep.bandwidth) - rep.base_log_density[None, :]


def log_correction(rep: SemiparametricRep, thetas: ArrayLike) -> FloatArray:
    """log[(1/T_f) Σ_t b^{-d} K(‖θ-θ̃_t‖/b) / p̃_f^α(θ̃_t)]. 모두 underflow 하면 -inf."""

    matrix = as_sample_matrix(thetas)
    if matrix.shape[1] != rep.dim:
        raise InvalidInputError(f"θ 차원({matrix.shape[1]})이 표현 차원({rep.dim})과 다릅니다.")
    rows = max(1, DEFAULT_CHUNK_ELEMENTS // rep.size)
    log_size = math.log(rep.size)
    parts = []
    for start in range(0, matrix.shape[0], rows):
        terms = _log_terms(rep, matrix[start : start + rows])
        with np.errstate(divide="ignore", invalid="ignore"):
            parts.append(logsumexp(terms, axis=1) - log_size)
    if not parts:
        return np.zeros(0)
    values = np.concatenate(parts)
    return np.where(np.isnan(values), -np.inf, values)


def log_correction_and_gradient(rep: SemiparametricRep, theta: ArrayLike) -> Tuple[float, FloatArray]:
    """보정항의 로그와 θ 에 대한 기울기 Σ_t w_t (θ̃_t - θ)/b²."""

    vector = as_param_vector(theta, dim=rep.dim)
    terms = _log_terms(rep, vector[None, :])[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        value = float(logsumexp(terms)) - math.log(rep.size)
    if not math.isfinite(value):
        return -math.inf, np.zeros(rep.dim)
    weights = softmax(terms)
    grad = weights @ (rep.samples - vector) / rep.bandwidth**2
    return value, grad


def semiparametric_log_density_batch(rep: SemiparametricRep, thetas: ArrayLike) -> FloatArray:
    matrix = as_sample_matrix(thetas)
    return parametric_log_density_batch(rep.base, matrix) + log_correction(rep, matrix)


def semiparametric_log_density(rep: SemiparametricRep, theta: ArrayLike) -> float:
    """log p̃_f^{sp}(θ). 비용은 Θ(T_f·d), 커널 항이 모두 underflow 하면 -inf."""

    vector = as_param_vector(theta, dim=rep.dim)
    return float(semiparametric_log_density_batch(rep, vector[None, :])[0])


def semiparametric_gradient(rep: SemiparametricRep, theta: ArrayLike) -> FloatArray:
    vector = as_param_vector(theta, dim=rep.dim)
    _, correction = log_correction_and_gradient(rep, vector)
    return parametric_gradient_batch(rep.base, vector[None, :])[0] + correction


__all__ = [
    "GAUSSIAN_KERNEL",
    "SemiparametricRep",
    "build_semiparametric",
    "log_correction",
    "log_correction_and_gradient",
    "select_bandwidth",
    "semiparametric_gradient",
    "semiparametric_log_density",
    "semiparametric_log_density_batch",
]
