"""거짓 사전분포로 얻은 추론 결과를 목표 사전분포로 교체하는 prior swapping 패키지."""

from .config.experiment import ExperimentConfig, load_experiment_config  # noqa: F401
from .config.settings import AppSettings, get_settings  # noqa: F401
from .data import (  # noqa: F401
    Chain,
    LikelihoodModel,
    Method,
    MethodResult,
    ModelKind,
    PriorFamily,
    PriorSpec,
    RunRecord,
    RunRepository,
    SampleSet,
    TestFunction,
    WeightedEstimate,
)
from .errors import (  # noqa: F401
    ConfigError,
    ConvergenceWarning,
    DegenerateWeightsError,
    InvalidInputError,
    NumericError,
    PriorSwapError,
    SupportMismatchError,
)
from .runtime.bootstrap import build_runtime  # noqa: F401
from .runtime.orchestrator import ExperimentOrchestrator  # noqa: F401
from .services.pipeline import ExperimentPipeline  # noqa: F401

__all__ = [
    "AppSettings",
    "Chain",
    "ConfigError",
    "ConvergenceWarning",
    "DegenerateWeightsError",
    "ExperimentConfig",
    "ExperimentOrchestrator",
    "ExperimentPipeline",
    "InvalidInputError",
    "LikelihoodModel",
    "Method",
    "MethodResult",
    "ModelKind",
    "NumericError",
    "PriorFamily",
    "PriorSpec",
    "PriorSwapError",
    "RunRecord",
    "RunRepository",
    "SampleSet",
    "SupportMismatchError",
    "TestFunction",
    "WeightedEstimate",
    "build_runtime",
    "get_settings",
    "load_experiment_config",
]
