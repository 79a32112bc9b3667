"""데이터 모델과 실행 기록 저장소."""

from .models import (
    Chain,
    ChainSummary,
    CurvePoint,
    GroundTruth,
    LikelihoodModel,
    Method,
    MethodResult,
    ModelKind,
    PriorFamily,
    PriorSpec,
    RunRecord,
    SampleSet,
    TestFunction,
    WeightedEstimate,
)
from .repository import MethodScore, RunRepository

__all__ = [
    "Chain",
    "ChainSummary",
    "CurvePoint",
    "GroundTruth",
    "LikelihoodModel",
    "Method",
    "MethodResult",
    "MethodScore",
    "ModelKind",
    "PriorFamily",
    "PriorSpec",
    "RunRecord",
    "RunRepository",
    "SampleSet",
    "TestFunction",
    "WeightedEstimate",
]
