"""사전분포 로그 밀도와 그 도함수."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import Dict, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import gammaln

from ..data.models import FloatArray, PriorFamily, PriorSpec, as_param_vector, as_sample_matrix
from ..errors import InvalidInputError

VERY_SPARSE_EXPONENT = 0.4
LOG_2PI = math.log(2.0 * math.pi)


class PriorKernel(ABC):
    """한 사전분포 계열의 (T, d) 배치 평가기."""

    @abstractmethod
    def log_density(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        """각 행의 정규화된 log π(θ)."""

    @abstractmethod
    def gradient(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        """각 행의 ∇θ log π(θ)."""

    @abstractmethod
    def hessian_diagonal(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        """각 행의 ∂²_i log π(θ)."""


class NormalKernel(PriorKernel):
    def log_density(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        residual = thetas - prior.location
        d = thetas.shape[1]
        if prior.precision is not None:
            quad = np.einsum("ti,ij,tj->t", residual, prior.precision, residual)
            return -0.5 * (d * LOG_2PI + prior.log_det_covariance + quad)
        quad = np.sum(residual**2, axis=1) / prior.variance
        return -0.5 * (d * (LOG_2PI + math.log(prior.variance)) + quad)

    def gradient(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        residual = thetas - prior.location
        if prior.precision is not None:
            return -residual @ prior.precision
        return -residual / prior.variance

    def hessian_diagonal(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        if prior.precision is not None:
            return np.broadcast_to(-np.diag(prior.precision), thetas.shape).copy()
        return np.full(thetas.shape, -1.0 / prior.variance)


class LaplaceKernel(PriorKernel):
    def log_density(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        scale = np.broadcast_to(np.asarray(prior.scale, dtype=float), thetas.shape)
        return np.sum(-np.log(2.0 * scale) - np.abs(thetas - prior.location) / scale, axis=1)

    def gradient(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        # 꼭짓점(θ_i = location)에서는 부호 함수가 0 을 돌려준다.
        return -np.sign(thetas - prior.location) / np.asarray(prior.scale, dtype=float)

    def hessian_diagonal(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        return np.zeros_like(thetas)


class StudentTKernel(PriorKernel):
    def log_density(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        nu = prior.dof
        scale = np.broadcast_to(np.asarray(prior.scale, dtype=float), thetas.shape)
        z = (thetas - prior.location) / scale
        constant = gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0) - 0.5 * math.log(nu * math.pi)
        terms = constant - np.log(scale) - (nu + 1.0) / 2.0 * np.log1p(z**2 / nu)
        return np.sum(terms, axis=1)

    def gradient(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        nu = prior.dof
        scale = np.asarray(prior.scale, dtype=float)
        residual = thetas - prior.location
        return -(nu + 1.0) * residual / (nu * scale**2 + residual**2)

    def hessian_diagonal(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        nu = prior.dof
        scale = np.asarray(prior.scale, dtype=float)
        residual = thetas - prior.location
        spread = nu * scale**2
        return -(nu + 1.0) * (spread - residual**2) / (spread + residual**2) ** 2


class VerySparseKernel(PriorKernel):
    """∏ c(σ) exp{-|θ_i|^0.4 / σ}. 정규화 상수는 2σ^2.5 Γ(3.5) 이다.

    기본값은 정규화된 밀도(`normalized=True`)다. `normalized=False` 이면 좌표마다 상수를 -log(2σ) 로 둔다.
    이 경우 밀도는 적분이 1 이 아니며, 사후분포 상수가 상쇄되는 MCMC·IS 에서만 쓴다.
    """

    def log_constant(self, prior: PriorSpec) -> float:
        sigma = float(prior.scale)
        if not prior.normalized:
            return -math.log(2.0 * sigma)
        power = 1.0 / VERY_SPARSE_EXPONENT
        return -(math.log(2.0) + power * math.log(sigma) + float(gammaln(1.0 + power)))

    def log_density(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        sigma = float(prior.scale)
        d = thetas.shape[1]
        return d * self.log_constant(prior) - np.sum(np.abs(thetas) ** VERY_SPARSE_EXPONENT, axis=1) / sigma

    def gradient(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        sigma = float(prior.scale)
        magnitude = np.abs(thetas)
        safe = np.where(magnitude > 0, magnitude, 1.0)
        slope = -VERY_SPARSE_EXPONENT * safe ** (VERY_SPARSE_EXPONENT - 1.0) * np.sign(thetas) / sigma
        # θ_i = 0 에서는 발산하는 도함수 대신 subgradient 0 을 쓴다.
        return np.where(magnitude > 0, slope, 0.0)

    def hessian_diagonal(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        sigma = float(prior.scale)
        p = VERY_SPARSE_EXPONENT
        magnitude = np.abs(thetas)
        safe = np.where(magnitude > 0, magnitude, 1.0)
        curvature = -p * (p - 1.0) * safe ** (p - 2.0) / sigma
        return np.where(magnitude > 0, curvature, 0.0)


class HierarchicalNormalGammaKernel(PriorKernel):
    """증강 상태 (θ, α): log N(θ|0, α⁻¹I) + log Gamma(α|γ, 1). α 는 마지막 좌표."""

    def _split(self, thetas: FloatArray) -> Tuple[FloatArray, FloatArray]:
        if thetas.shape[1] < 2:
            raise InvalidInputError("계층 사전분포의 상태는 (θ, α) 로 최소 2차원이어야 합니다.")
        return thetas[:, :-1], thetas[:, -1]

    def log_density(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        theta, alpha = self._split(thetas)
        d = theta.shape[1]
        gamma = prior.shape
        positive = alpha > 0
        safe_alpha = np.where(positive, alpha, 1.0)
        log_alpha = np.log(safe_alpha)
        normal = 0.5 * d * (log_alpha - LOG_2PI) - 0.5 * safe_alpha * np.sum(theta**2, axis=1)
        gamma_term = (gamma - 1.0) * log_alpha - safe_alpha - float(gammaln(gamma))
        return np.where(positive, normal + gamma_term, -np.inf)

    def gradient(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        theta, alpha = self._split(thetas)
        d = theta.shape[1]
        gamma = prior.shape
        positive = alpha > 0
        safe_alpha = np.where(positive, alpha, 1.0)
        grad_theta = -safe_alpha[:, None] * theta
        grad_alpha = 0.5 * d / safe_alpha - 0.5 * np.sum(theta**2, axis=1) + (gamma - 1.0) / safe_alpha - 1.0
        grad = np.column_stack([grad_theta, grad_alpha])
        return np.where(positive[:, None], grad, 0.0)

    def hessian_diagonal(self, prior: PriorSpec, thetas: FloatArray) -> FloatArray:
        theta, alpha = self._split(thetas)
        d = theta.shape[1]
        gamma = prior.shape
        positive = alpha > 0
        safe_alpha = np.where(positive, alpha, 1.0)
        hess_theta = np.broadcast_to(-safe_alpha[:, None], theta.shape)
        hess_alpha = -(0.5 * d + gamma - 1.0) / safe_alpha**2
        hess = np.column_stack([hess_theta, hess_alpha])
        return np.where(positive[:, None], hess, 0.0)


_KERNELS: Dict[PriorFamily, PriorKernel] = {
    PriorFamily.NORMAL: NormalKernel(),
    PriorFamily.LAPLACE: LaplaceKernel(),
    PriorFamily.STUDENT_T: StudentTKernel(),
    PriorFamily.VERY_SPARSE: VerySparseKernel(),
    PriorFamily.HIERARCHICAL_NORMAL_GAMMA: HierarchicalNormalGammaKernel(),
}


def _checked_matrix(thetas: ArrayLike) -> FloatArray:
    matrix = as_sample_matrix(thetas)
    if not np.all(np.isfinite(matrix)):
        raise InvalidInputError("θ 에 유한하지 않은 값이 있습니다.")
    return matrix


def prior_log_density(prior: PriorSpec, theta: ArrayLike) -> Tuple[float, FloatArray]:
    """정규화된 log π(θ) 와 ∇θ log π(θ) 를 반환한다."""

    vector = as_param_vector(theta)[None, :]
    kernel = _KERNELS[prior.family]
    return float(kernel.log_density(prior, vector)[0]), kernel.gradient(prior, vector)[0]


def prior_log_density_batch(prior: PriorSpec, thetas: ArrayLike) -> FloatArray:
    return _KERNELS[prior.family].log_density(prior, _checked_matrix(thetas))


def prior_gradient_batch(prior: PriorSpec, thetas: ArrayLike) -> FloatArray:
    return _KERNELS[prior.family].gradient(prior, _checked_matrix(thetas))


def prior_hessian_diagonal_batch(prior: PriorSpec, thetas: ArrayLike) -> FloatArray:
    return _KERNELS[prior.family].hessian_diagonal(prior, _checked_matrix(thetas))


__all__ = [
    "VERY_SPARSE_EXPONENT",
    "PriorKernel",
    "prior_gradient_batch",
    "prior_hessian_diagonal_batch",
    "prior_log_density",
    "prior_log_density_batch",
]
