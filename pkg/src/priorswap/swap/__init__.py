"""p̃_f 표현과 사전분포 쌍으로 만드는 prior swap 목표 밀도."""

from .target import (
    FalsePosteriorRep,
    HierarchicalSwapTarget,
    SwapProvenance,
    SwapTarget,
    make_hierarchical_swap,
    make_prior_swap,
    make_semiparametric_swap,
    to_state_samples,
)

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
