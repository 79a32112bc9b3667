"""실험 설정: 점으로 구분한 섹션 키를 쓰는 평면 `key = value` 파일.

예::

    experiment.seed = 7
    experiment.methods = naive-is, prior-swap-exact
    model.tag = normal_mean
    model.n = 3
    model.observation_sum = 4
    false_prior.family = normal
    target.laplace.family = laplace
    target.laplace.location = 10
    target.laplace.scale = 0.7071067811865476

모르는 키는 오류다. 전체 키 목록은 docs/CONFIG_REFERENCE.md 에 있다.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..data.models import Method, ModelKind, PriorFamily, PriorSpec
from ..errors import ConfigError, InvalidInputError
from ..samplers.runner import SamplerKind, SamplerSettings
from .settings import AppSettings

logger = logging.getLogger(__name__)


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    if isinstance(value, (int, float)):
        return [value]
    return value


FloatList = Annotated[List[float], BeforeValidator(_split_list)]
IntList = Annotated[List[int], BeforeValidator(_split_list)]
MethodList = Annotated[List[Method], BeforeValidator(_split_list)]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class ExperimentSection(_Section):
    name: str = "experiment"
    seed: int = Field(ge=0, description="실험 전체의 기준 seed (필수)")
    output_dir: Optional[Path] = None
    methods: MethodList = Field(min_length=1)
    checkpoints: Literal["samples", "wall"] = "samples"
    worker_slots: Optional[int] = Field(default=None, ge=1)


class ModelSection(_Section):
    tag: ModelKind
    n: int = Field(default=100, ge=0)
    d: int = Field(default=1, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)
    theta_true: Optional[FloatList] = None
    noise_variance: float = Field(default=1.0, gt=0.0)
    observation_sum: Optional[FloatList] = None
    csv: Optional[Path] = None
    holdout_fraction: float = Field(default=0.0, ge=0.0, lt=1.0)

    @field_validator("csv")
    @classmethod
    def _csv_exists(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.is_file():
            raise ValueError(f"데이터셋 CSV 가 없습니다: {value}")
        return value


class PriorSection(_Section):
    family: PriorFamily
    location: FloatList = Field(default_factory=lambda: [0.0])
    scale: FloatList = Field(default_factory=lambda: [1.0])
    variance: float = Field(default=1.0, gt=0.0)
    covariance: Optional[FloatList] = Field(default=None, description="Normal 공분산, 행 우선 d×d 값")
    dof: float = Field(default=3.0, gt=0.0)
    shape: float = Field(default=1.0, gt=0.0)
    normalized: bool = True

    @model_validator(mode="after")
    def _covariance_matrix(self) -> "PriorSection":
        if self.covariance is None:
            return self
        if self.family is not PriorFamily.NORMAL:
            raise ValueError("covariance 는 normal 사전분포에만 쓸 수 있습니다.")
        if self.dimension is None:
            raise ValueError(f"covariance 값 개수({len(self.covariance)})가 d×d 가 아닙니다.")
        try:
            self.to_spec()
        except InvalidInputError as exc:
            raise ValueError(str(exc)) from exc
        return self

    @property
    def dimension(self) -> Optional[int]:
        """covariance 가 정한 차원. 없거나 정방이 아니면 None."""

        if not self.covariance:
            return None
        size = math.isqrt(len(self.covariance))
        return size if size * size == len(self.covariance) else None

    def to_spec(self) -> PriorSpec:
        location = self.location[0] if len(self.location) == 1 else self.location
        scale = self.scale[0] if len(self.scale) == 1 else self.scale
        if self.family is PriorFamily.NORMAL:
            if self.covariance is not None and self.dimension is not None:
                matrix = np.reshape(np.asarray(self.covariance, dtype=float), (self.dimension, self.dimension))
                return PriorSpec.normal(location, covariance=matrix)
            return PriorSpec.normal(location, self.variance)
        if self.family is PriorFamily.LAPLACE:
            return PriorSpec.laplace(location, scale)
        if self.family is PriorFamily.STUDENT_T:
            return PriorSpec.student_t(location, scale, self.dof)
        if self.family is PriorFamily.VERY_SPARSE:
            return PriorSpec.very_sparse(float(self.scale[0]), normalized=self.normalized)
        return PriorSpec.hierarchical_normal_gamma(self.shape)


class MHSection(_Section):
    stddev: Optional[FloatList] = None
    pilot_steps: Optional[int] = Field(default=None, ge=10)


class HMCSection(_Section):
    step_size: Optional[float] = Field(default=None, gt=0.0)
    leapfrog_steps: int = Field(default=20, ge=1)
    warmup: Optional[int] = Field(default=None, ge=0)


class SamplerSection(_Section):
    kind: SamplerKind = SamplerKind.MH
    samples: int = Field(default=10_000, ge=1, alias="T")
    burn_in: Optional[float] = Field(default=None, ge=0.0, lt=1.0)
    mh: MHSection = Field(default_factory=MHSection)
    hmc: HMCSection = Field(default_factory=HMCSection)


class FalsePosteriorSection(_Section):
    samples: int = Field(default=10_000, ge=1, alias="T_f")
    exact: bool = True
    k: Optional[int] = Field(default=None, ge=1)
    restarts: Optional[int] = Field(default=None, ge=1)
    bandwidth: Optional[float] = Field(default=None, gt=0.0)
    bandwidth_constant: Optional[float] = Field(default=None, gt=0.0)


class GroundTruthSection(_Section):
    method: Literal["auto", "quadrature", "chain"] = "auto"
    steps: Optional[int] = Field(default=None, ge=1)
    bounds: Optional[FloatList] = None
    grid_size: int = Field(default=257, ge=5)
    seed: Optional[int] = Field(default=None, ge=0)

    @field_validator("bounds")
    @classmethod
    def _pairs(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None and len(value) not in (2, 4):
            raise ValueError("bounds 는 'lo, hi' (1차원) 또는 'lo1, hi1, lo2, hi2' (2차원) 이어야 합니다.")
        return value


class BenchmarkSection(_Section):
    n_grid: IntList = Field(default_factory=lambda: [1_000, 10_000, 100_000])
    steps: int = Field(default=2_000, ge=1)

    @field_validator("n_grid", mode="before")
    @classmethod
    def _allow_empty(cls, value: Any) -> Any:
        if isinstance(value, str) and not value.strip():
            return []
        return value


class MarginalsSection(_Section):
    dimension: int = Field(default=0, ge=0)
    grid: FloatList = Field(default_factory=lambda: [-3.0, 3.0, 401.0])

    @field_validator("grid")
    @classmethod
    def _triple(cls, value: List[float]) -> List[float]:
        if len(value) != 3 or value[1] <= value[0] or value[2] < 2:
            raise ValueError("grid 는 'lo, hi, count' (lo < hi, count ≥ 2) 이어야 합니다.")
        return value


class ExperimentConfig(_Section):
    experiment: ExperimentSection
    model: ModelSection
    false_prior: PriorSection
    target: Dict[str, PriorSection] = Field(min_length=1)
    sampler: SamplerSection = Field(default_factory=SamplerSection)
    false_posterior: FalsePosteriorSection = Field(default_factory=FalsePosteriorSection)
    ground_truth: GroundTruthSection = Field(default_factory=GroundTruthSection)
    benchmark: BenchmarkSection = Field(default_factory=BenchmarkSection)
    marginals: MarginalsSection = Field(default_factory=MarginalsSection)

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        if self.false_prior.family is PriorFamily.HIERARCHICAL_NORMAL_GAMMA:
            raise ValueError("false_prior 는 θ 위의 분포여야 합니다 (hierarchical_normal_gamma 불가).")
        if self.model.csv is None and self.model.tag is ModelKind.NORMAL_MEAN and self.model.observation_sum:
            if len(self.model.observation_sum) not in (1, self.model.d):
                raise ValueError("observation_sum 길이는 1 또는 d 여야 합니다.")
        if self.model.csv is None:
            sections = {"false_prior": self.false_prior}
            sections.update({f"target.{name}": section for name, section in self.target.items()})
            for label, section in sections.items():
                if section.dimension is not None and section.dimension != self.model.d:
                    raise ValueError(f"{label}.covariance 는 {self.model.d}×{self.model.d} 행렬이어야 합니다.")
        return self

    @property
    def seed(self) -> int:
        return self.experiment.seed

    @property
    def model_seed(self) -> int:
        return self.model.seed if self.model.seed is not None else self.experiment.seed

    def target_priors(self) -> Dict[str, PriorSpec]:
        return {name: section.to_spec() for name, section in self.target.items()}

    def false_prior_spec(self) -> PriorSpec:
        return self.false_prior.to_spec()

    def output_dir(self, settings: AppSettings) -> Path:
        return Path(self.experiment.output_dir or settings.output_dir)

    def worker_slots(self, settings: AppSettings) -> int:
        return self.experiment.worker_slots or settings.worker_slots

    def burn_in(self, settings: AppSettings) -> float:
        return self.sampler.burn_in if self.sampler.burn_in is not None else settings.burn_in_fraction

    def sampler_settings(self, settings: AppSettings, *, n_samples: Optional[int] = None) -> SamplerSettings:
        stddev: Optional[Union[float, tuple]] = None
        if self.sampler.mh.stddev:
            values = self.sampler.mh.stddev
            stddev = values[0] if len(values) == 1 else tuple(values)
        return SamplerSettings(
            kind=self.sampler.kind,
            n_samples=n_samples or self.sampler.samples,
            proposal_std=stddev,
            pilot_steps=self.sampler.mh.pilot_steps or settings.mh_pilot_steps,
            step_size=self.sampler.hmc.step_size,
            n_leapfrog=self.sampler.hmc.leapfrog_steps,
            warmup=self.sampler.hmc.warmup if self.sampler.hmc.warmup is not None else settings.hmc_warmup_steps,
            target_acceptance=(settings.hmc_target_acceptance_low, settings.hmc_target_acceptance_high),
            burn_in_fraction=self.burn_in(settings),
        )

    def false_sampler_settings(self, settings: AppSettings) -> SamplerSettings:
        # 체인이면 burn-in 제거 후 T_f 개가 남도록 늘려 잡는다.
        burn = self.burn_in(settings)
        total = math.ceil(self.false_posterior.samples / (1.0 - burn))
        return self.sampler_settings(settings, n_samples=max(total, self.false_posterior.samples))

    def ground_truth_settings(self, settings: AppSettings) -> SamplerSettings:
        return self.sampler_settings(settings, n_samples=self.ground_truth.steps or settings.ground_truth_steps)

    def pseudo_points(self, settings: AppSettings) -> int:
        """k = min(k, T_f)."""

        return min(self.false_posterior.k or settings.default_k, self.false_posterior.samples)

    def describe(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


def parse_flat_config(text: str) -> Dict[str, Any]:
    """`a.b.c = value` 줄들을 중첩 dict 로 바꾼다. `#` 뒤는 주석이다."""

    nested: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{number}행: 'key = value' 형식이 아닙니다: {raw.strip()}")
        key, value = (part.strip() for part in line.split("=", 1))
        parts = key.split(".")
        if not key or any(not part for part in parts):
            raise ConfigError(f"{number}행: 키가 올바르지 않습니다: {key!r}")
        node = nested
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"{number}행: '{part}' 는 값과 섹션으로 동시에 쓰였습니다.")
            node = child
        if parts[-1] in node:
            raise ConfigError(f"{number}행: 중복된 키입니다: {key}")
        node[parts[-1]] = value
    return nested


def _format_validation_error(exc: ValidationError) -> str:
    problems = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"])
        problems.append(f"{location}: {error['msg']}")
    return "; ".join(problems)


def build_experiment_config(
    data: Dict[str, Any],
    *,
    seed: Optional[int] = None,
    output_dir: Optional[Path] = None,
) -> ExperimentConfig:
    """중첩 dict 에 CLI 덮어쓰기를 적용하고 검증한다."""

    payload = {key: (dict(value) if isinstance(value, dict) else value) for key, value in data.items()}
    section = payload.setdefault("experiment", {})
    if not isinstance(section, dict):
        raise ConfigError("experiment 는 섹션이어야 합니다.")
    if seed is not None:
        section["seed"] = seed
    if output_dir is not None:
        section["output_dir"] = str(output_dir)
    try:
        return ExperimentConfig.model_validate(payload)
    except ValidationError as exc:
        raise ConfigError(f"실험 설정이 올바르지 않습니다: {_format_validation_error(exc)}") from exc


def load_experiment_config(
    path: Path,
    *,
    seed: Optional[int] = None,
    output_dir: Optional[Path] = None,
) -> ExperimentConfig:
    """설정 파일을 읽는다. 상대 CSV 경로는 설정 파일 위치 기준으로 해석한다."""

    source = Path(path)
    if not source.is_file():
        raise ConfigError(f"설정 파일이 없습니다: {source}")
    data = parse_flat_config(source.read_text(encoding="utf-8"))
    model = data.get("model")
    if isinstance(model, dict) and isinstance(model.get("csv"), str):
        csv = Path(model["csv"])
        if not csv.is_absolute():
            model["csv"] = str((source.parent / csv).resolve())
    config = build_experiment_config(data, seed=seed, output_dir=output_dir)
    logger.debug("실험 설정 로드: %s (methods=%s)", source, [m.value for m in config.experiment.methods])
    return config


__all__ = [
    "ExperimentConfig",
    "PriorSection",
    "build_experiment_config",
    "load_experiment_config",
    "parse_flat_config",
]
