"""의사 데이터 모수족 p̃_f^α(θ) ∝ π_f(θ) ∏_j p(α_j|θ)^{n/k} 와 score matching 적합."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.cluster.vq import kmeans2
from scipy.optimize import minimize
from scipy.special import expit

from ..data.models import FloatArray, LikelihoodModel, ModelKind, PriorSpec, SampleSet, as_param_vector, as_sample_matrix
from ..densities.likelihoods import (
    log_likelihood_batch,
    log_likelihood_gradient_batch,
    log_likelihood_hessian_diagonal_batch,
)
from ..densities.priors import prior_gradient_batch, prior_hessian_diagonal_batch, prior_log_density_batch
from ..errors import ConvergenceWarning, InvalidInputError, NumericError

logger = logging.getLogger(__name__)

DEFAULT_RESTARTS = 5
DEFAULT_MAX_ITERATIONS = 500


@dataclass(frozen=True, slots=True, eq=False)
class ParametricAlpha:
    """k 개의 의사 데이터 점 α_j ∈ ℝ^p. 평가 비용은 n 과 무관한 Θ(k·d) 이다."""

    points: FloatArray
    n: int
    false_prior: PriorSpec
    kind: ModelKind
    noise_variance: float = 1.0
    pseudo_model: LikelihoodModel = field(init=False, repr=False)

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2 or points.shape[0] < 1:
            raise InvalidInputError("α 는 최소 1개의 의사 데이터 점을 가진 (k, p) 행렬이어야 합니다.")
        if not np.all(np.isfinite(points)):
            raise InvalidInputError("α 에 유한하지 않은 값이 있습니다.")
        if self.n < 0:
            raise InvalidInputError("n 은 0 이상이어야 합니다.")
        object.__setattr__(self, "points", points)
        object.__setattr__(
            self,
            "pseudo_model",
            LikelihoodModel.from_points(self.kind, points, noise_variance=self.noise_variance, pseudo=True),
        )

    @property
    def k(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return self.pseudo_model.dim

    @property
    def exponent(self) -> float:
        """각 의사 가능도 항의 지수 n/k."""

        return self.n / self.k

    def with_points(self, points: ArrayLike) -> "ParametricAlpha":
        return ParametricAlpha(
            points=np.asarray(points, dtype=float).reshape(self.points.shape),
            n=self.n,
            false_prior=self.false_prior,
            kind=self.kind,
            noise_variance=self.noise_variance,
        )


def parametric_log_density_batch(alpha: ParametricAlpha, thetas: ArrayLike) -> FloatArray:
    matrix = as_sample_matrix(thetas)
    values = prior_log_density_batch(alpha.false_prior, matrix)
    if alpha.n:
        values = values + alpha.exponent * log_likelihood_batch(alpha.pseudo_model, matrix)
    return values


def parametric_gradient_batch(alpha: ParametricAlpha, thetas: ArrayLike) -> FloatArray:
    matrix = as_sample_matrix(thetas)
    grad = prior_gradient_batch(alpha.false_prior, matrix)
    if alpha.n:
        grad = grad + alpha.exponent * log_likelihood_gradient_batch(alpha.pseudo_model, matrix)
    return grad


def parametric_hessian_diagonal_batch(alpha: ParametricAlpha, thetas: ArrayLike) -> FloatArray:
    matrix = as_sample_matrix(thetas)
    hess = prior_hessian_diagonal_batch(alpha.false_prior, matrix)
    if alpha.n:
        hess = hess + alpha.exponent * log_likelihood_hessian_diagonal_batch(alpha.pseudo_model, matrix)
    return hess


def parametric_log_density(alpha: ParametricAlpha, theta: ArrayLike) -> Tuple[float, FloatArray]:
    """log π_f(θ) + (n/k) Σ_j log p(α_j|θ) 와 그 기울기 (정규화되지 않음)."""

    vector = as_param_vector(theta, dim=alpha.dim)[None, :]
    return float(parametric_log_density_batch(alpha, vector)[0]), parametric_gradient_batch(alpha, vector)[0]


def _sample_matrix(samples: Union[SampleSet, ArrayLike]) -> FloatArray:
    return samples.samples if isinstance(samples, SampleSet) else as_sample_matrix(samples)


def score_matching_objective(alpha: ParametricAlpha, samples: Union[SampleSet, ArrayLike]) -> float:
    """J(α) = (1/T_f) Σ_t Σ_i [∂²_i log p̃ + ½ (∂_i log p̃)²]. 정규화 상수와 무관하다."""

    thetas = _sample_matrix(samples)
    grad = parametric_gradient_batch(alpha, thetas)
    hess = parametric_hessian_diagonal_batch(alpha, thetas)
    terms = np.sum(hess + 0.5 * grad**2, axis=1)
    finite = np.isfinite(terms)
    if not np.all(finite):
        index = int(np.flatnonzero(~finite)[0])
        raise NumericError("score matching 도함수가 유한하지 않습니다", sample_index=index)
    return float(np.mean(terms))


def _initial_points(
    thetas: FloatArray,
    k: int,
    kind: ModelKind,
    n: int,
    rng: np.random.Generator,
) -> FloatArray:
    """k-means 대표 샘플을 데이터 공간으로 옮긴 초기 α."""

    if k == 1:
        centroids = thetas.mean(axis=0, keepdims=True)
    else:
        centroids, _ = kmeans2(thetas, k, minit="++", seed=rng)
    if kind is ModelKind.NORMAL_MEAN:
        # 평균 모형의 충분통계량 역변환: p̃ 의 평균이 중심점이 되도록 (n+1)/n 배 한다.
        factor = (n + 1.0) / n if n else 1.0
        return centroids * factor
    features = rng.standard_normal(centroids.shape)
    eta = np.sum(features * centroids, axis=1)
    response = eta if kind is ModelKind.LINEAR_REGRESSION else expit(eta)
    return np.column_stack([features, response])


def fit_parametric_alpha(
    samples: Union[SampleSet, ArrayLike],
    k: int,
    kind: ModelKind,
    false_prior: PriorSpec,
    n: int,
    *,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
    noise_variance: float = 1.0,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> ParametricAlpha:
    """다중 재시작 L-BFGS-B 로 J(α) 를 최소화한다. 진전이 없으면 ConvergenceWarning 과 함께 최선값을 돌려준다."""

    thetas = _sample_matrix(samples)
    if k < 1:
        raise InvalidInputError("k 는 1 이상이어야 합니다.")
    if thetas.shape[0] < k:
        raise InvalidInputError(f"T_f({thetas.shape[0]}) 가 k({k}) 보다 작습니다.")
    if restarts < 1:
        raise InvalidInputError("restarts 는 1 이상이어야 합니다.")
    # 샘플 순서와 무관한 결과를 위해 사전식으로 정렬한다.
    thetas = thetas[np.lexsort(thetas.T[::-1])]

    template: Optional[ParametricAlpha] = None
    best: Optional[Tuple[float, FloatArray]] = None
    converged = False
    for restart, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        rng = np.random.default_rng(child)
        start = _initial_points(thetas, k, kind, n, rng)
        if template is None:
            template = ParametricAlpha(points=start, n=n, false_prior=false_prior, kind=kind, noise_variance=noise_variance)

        def objective(flat: FloatArray, shape: Tuple[int, ...] = start.shape) -> float:
            try:
                value = score_matching_objective(template.with_points(flat.reshape(shape)), thetas)
            except (NumericError, InvalidInputError):
                return float("inf")
            return value

        result = minimize(objective, start.ravel(), method="L-BFGS-B", options={"maxiter": max_iterations})
        value = float(result.fun)
        logger.debug("score matching 재시작 %d: J=%.6g success=%s nit=%d", restart, value, result.success, result.nit)
        converged = converged or bool(result.success)
        if np.isfinite(value) and (best is None or value < best[0]):
            best = (value, np.asarray(result.x, dtype=float).reshape(start.shape))

    assert template is not None
    if best is None:
        raise NumericError("모든 재시작에서 score matching 목적함수가 유한하지 않습니다")
    if not converged:
        warnings.warn(
            f"score matching 최적화가 {max_iterations}회 안에 수렴하지 않았습니다. 최선값 J={best[0]:.6g} 를 사용합니다.",
            ConvergenceWarning,
            stacklevel=2,
        )
    logger.info("α 적합 완료: k=%d n=%d J=%.6g", k, n, best[0])
    return template.with_points(best[1])


def alpha_from_data(model: LikelihoodModel, false_prior: PriorSpec) -> ParametricAlpha:
    """k = n, α = 실제 데이터. 이때 p̃_f^α 는 상수배를 제외하면 거짓 사후분포와 같다."""

    return ParametricAlpha(
        points=model.points(),
        n=model.n,
        false_prior=false_prior,
        kind=model.kind,
        noise_variance=model.noise_variance,
    )


__all__ = [
    "ParametricAlpha",
    "alpha_from_data",
    "fit_parametric_alpha",
    "parametric_gradient_batch",
    "parametric_hessian_diagonal_batch",
    "parametric_log_density",
    "parametric_log_density_batch",
    "score_matching_objective",
]
