"""임의의 정규화되지 않은 로그 밀도 위의 MCMC 커널."""

from .base import FunctionTarget, TargetDensity
from .hmc import hmc_sample, langevin_sample, leapfrog, tune_step_size
from .mh import mh_sample, run_chains, tune_proposal_std
from .runner import SamplerKind, SamplerSettings, find_mode, run_sampler
from .summary import DEFAULT_BURN_IN, chain_summary, monte_carlo_standard_error, retained_samples
from .transforms import LogTransformedTarget

__all__ = [
    "DEFAULT_BURN_IN",
    "FunctionTarget",
    "LogTransformedTarget",
    "SamplerKind",
    "SamplerSettings",
    "TargetDensity",
    "chain_summary",
    "find_mode",
    "hmc_sample",
    "langevin_sample",
    "leapfrog",
    "mh_sample",
    "monte_carlo_standard_error",
    "retained_samples",
    "run_chains",
    "run_sampler",
    "tune_proposal_std",
    "tune_step_size",
]
