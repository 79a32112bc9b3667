"""prior swap 밀도 p_s(θ) ∝ p̃_f(θ) π(θ) / π_f(θ).

SwapTarget 은 p̃_f 표현과 두 사전분포만 닫아 두며 데이터셋을 참조하지 않는다.
따라서 평가 비용은 n 과 무관하다.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike

from ..data.models import FloatArray, PriorSpec, as_param_vector
from ..densities.priors import prior_log_density
from ..errors import InvalidInputError, SupportMismatchError
from ..posterior.conjugate import ExactGaussianPosterior
from ..posterior.parametric import ParametricAlpha, parametric_log_density
from ..posterior.semiparametric import SemiparametricRep, log_correction_and_gradient
from ..samplers.base import TargetDensity
from ..samplers.transforms import LogTransformedTarget

FalsePosteriorRep = Union[ExactGaussianPosterior, ParametricAlpha, SemiparametricRep]


@dataclass(frozen=True)
class SwapProvenance:
    """SwapTarget 이 닫고 있는 구성 요소의 기록."""

    false_posterior: str
    target_prior: Dict[str, object]
    false_prior: Dict[str, object]
    correction: Optional[Dict[str, object]] = None
    log_transformed: Tuple[int, ...] = field(default_factory=tuple)

    def describe(self) -> Dict[str, object]:
        return {
            "false_posterior": self.false_posterior,
            "target_prior": self.target_prior,
            "false_prior": self.false_prior,
            "correction": self.correction,
            "log_transformed": list(self.log_transformed),
        }


def _representation_tag(rep: FalsePosteriorRep) -> str:
    if isinstance(rep, ExactGaussianPosterior):
        return "exact"
    if isinstance(rep, ParametricAlpha):
        return f"parametric(k={rep.k}, n={rep.n})"
    return f"semiparametric(T_f={rep.size}, b={rep.bandwidth:.4g}, k={rep.base.k})"


class SwapTarget(TargetDensity):
    """log p_s(θ) = log p̃_f(θ) + log π(θ) - log π_f(θ) (정규화되지 않음).

    `correction` 이 있으면 semiparametric 보정항 log[(1/T_f) Σ K/p̃_f^α(θ̃_t)] 을 더한다.
    목표 사전분포가 증강 상태 (θ, α) 위에 있으면 p̃_f 와 π_f 는 앞의 d 좌표만 본다.
    """

    def __init__(
        self,
        false_posterior: Union[ExactGaussianPosterior, ParametricAlpha],
        target_prior: PriorSpec,
        false_prior: PriorSpec,
        *,
        correction: Optional[SemiparametricRep] = None,
    ) -> None:
        if false_prior.is_augmented:
            raise InvalidInputError("거짓 사전분포는 θ 위의 분포여야 합니다.")
        if correction is not None and correction.base is not false_posterior:
            raise InvalidInputError("semiparametric 보정의 기반 α 가 p̃_f 와 다릅니다.")
        self._false_posterior = false_posterior
        self._target_prior = target_prior
        self._false_prior = false_prior
        self._correction = correction
        self._theta_dim = false_posterior.dim
        self._provenance = SwapProvenance(
            false_posterior=_representation_tag(correction if correction is not None else false_posterior),
            target_prior=target_prior.describe(),
            false_prior=false_prior.describe(),
            correction=None if correction is None else {"T_f": correction.size, "bandwidth": correction.bandwidth},
        )

    @property
    def dim(self) -> int:
        return self._theta_dim + (1 if self._target_prior.is_augmented else 0)

    @property
    def theta_dim(self) -> int:
        return self._theta_dim

    @property
    def has_gradient(self) -> bool:
        return True

    @property
    def provenance(self) -> SwapProvenance:
        return self._provenance

    @property
    def false_posterior(self) -> Union[ExactGaussianPosterior, ParametricAlpha]:
        return self._false_posterior

    @property
    def correction(self) -> Optional[SemiparametricRep]:
        return self._correction

    def _false_log_density(self, theta: FloatArray) -> Tuple[float, FloatArray]:
        rep = self._false_posterior
        if isinstance(rep, ExactGaussianPosterior):
            return rep.log_density(theta)
        return parametric_log_density(rep, theta)

    def log_density(self, theta: FloatArray) -> float:
        return self.log_density_and_gradient(theta)[0]

    def log_density_and_gradient(self, theta: FloatArray) -> Tuple[float, FloatArray]:
        state = as_param_vector(theta, dim=self.dim)
        core = state[: self._theta_dim]
        log_target, grad_target = prior_log_density(self._target_prior, state)
        log_false, grad_false = prior_log_density(self._false_prior, core)
        if not math.isfinite(log_false) and math.isfinite(log_target):
            raise SupportMismatchError(state)
        if not math.isfinite(log_target):
            return -math.inf, np.zeros(self.dim)
        log_rep, grad_rep = self._false_log_density(core)
        total = log_rep + log_target - log_false
        grad = np.array(grad_target, dtype=float)
        grad[: self._theta_dim] += grad_rep - grad_false
        if self._correction is not None:
            log_corr, grad_corr = log_correction_and_gradient(self._correction, core)
            if not math.isfinite(log_corr):
                return -math.inf, np.zeros(self.dim)
            total += log_corr
            grad[: self._theta_dim] += grad_corr
        return total, grad


class HierarchicalSwapTarget(LogTransformedTarget):
    """(θ, log α) 위에서 샘플링하는 계층 사전분포 swap. 로그 야코비안 log α 를 포함한다."""

    def __init__(self, swap: SwapTarget) -> None:
        super().__init__(swap, [swap.theta_dim])
        self._swap = swap

    @property
    def swap(self) -> SwapTarget:
        return self._swap

    @property
    def theta_dim(self) -> int:
        return self._swap.theta_dim

    @property
    def provenance(self) -> SwapProvenance:
        base = self._swap.provenance
        return SwapProvenance(
            false_posterior=base.false_posterior,
            target_prior=base.target_prior,
            false_prior=base.false_prior,
            correction=base.correction,
            log_transformed=self.positive_indices,
        )

    def natural_log_density(self, theta: ArrayLike, alpha: float) -> float:
        """야코비안 없이 (θ, α) 에서 평가한 log p_s(θ, α)."""

        return self._swap.log_density(np.append(as_param_vector(theta), float(alpha)))


def make_prior_swap(
    false_posterior: FalsePosteriorRep,
    target_prior: PriorSpec,
    false_prior: PriorSpec,
) -> Union[SwapTarget, HierarchicalSwapTarget]:
    """p̃_f 표현과 사전분포 쌍으로 swap 목표를 만든다. 지지집합 불일치는 평가 시점에 검사한다."""

    if isinstance(false_posterior, SemiparametricRep):
        return make_semiparametric_swap(false_posterior, target_prior, false_prior)
    swap = SwapTarget(false_posterior, target_prior, false_prior)
    if target_prior.is_augmented:
        return HierarchicalSwapTarget(swap)
    return swap


def make_semiparametric_swap(
    rep: SemiparametricRep,
    target_prior: PriorSpec,
    false_prior: PriorSpec,
) -> Union[SwapTarget, HierarchicalSwapTarget]:
    """log p_s^{sp}(θ) = log p_s^α(θ) + log 보정항. 평가 비용은 Θ(T_f·d)."""

    swap = SwapTarget(rep.base, target_prior, false_prior, correction=rep)
    if target_prior.is_augmented:
        return HierarchicalSwapTarget(swap)
    return swap


def make_hierarchical_swap(
    false_posterior: FalsePosteriorRep,
    gamma: float,
    false_prior: PriorSpec,
) -> HierarchicalSwapTarget:
    """π = N(θ|0, α⁻¹I), α ~ Gamma(γ, 1) 로 swap 한 (θ, log α) 위의 목표."""

    target = make_prior_swap(false_posterior, PriorSpec.hierarchical_normal_gamma(gamma), false_prior)
    assert isinstance(target, HierarchicalSwapTarget)
    return target


def to_state_samples(target: TargetDensity, samples: FloatArray) -> FloatArray:
    """샘플러 좌표를 자연 좌표 (θ, α) 로 되돌린다."""

    if isinstance(target, LogTransformedTarget):
        return target.to_constrained(samples)
    return np.asarray(samples)


__all__ = [
    "FalsePosteriorRep",
    "HierarchicalSwapTarget",
    "SwapProvenance",
    "SwapTarget",
    "make_hierarchical_swap",
    "make_prior_swap",
    "make_semiparametric_swap",
    "to_state_samples",
]
