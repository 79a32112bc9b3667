"""사전분포, 가능도 모형, 체인과 추정 결과를 표현하는 공용 데이터 모델."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import InvalidInputError

FloatArray = NDArray[np.float64]
ParamVector = FloatArray
"""d 차원 모수 공간의 한 점 θ. 모든 샘플러가 움직이는 상태."""


def as_param_vector(values: ArrayLike, *, dim: Optional[int] = None) -> ParamVector:
    """입력을 유한한 1차원 float 배열로 변환한다."""

    vector = np.atleast_1d(np.asarray(values, dtype=float))
    if vector.ndim != 1:
        raise InvalidInputError(f"θ 는 1차원 벡터여야 합니다: shape={vector.shape}")
    if vector.size == 0:
        raise InvalidInputError("θ 의 차원은 1 이상이어야 합니다.")
    if not np.all(np.isfinite(vector)):
        raise InvalidInputError(f"θ 에 유한하지 않은 값이 있습니다: {vector.tolist()}")
    if dim is not None and vector.size != dim:
        raise InvalidInputError(f"θ 차원이 맞지 않습니다: 기대 {dim}, 입력 {vector.size}")
    return vector


def as_sample_matrix(values: ArrayLike) -> FloatArray:
    """(T, d) 샘플 행렬로 변환한다. 1차원 입력은 d=1 로 본다."""

    matrix = np.asarray(values, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if matrix.ndim != 2:
        raise InvalidInputError(f"샘플은 (T, d) 행렬이어야 합니다: shape={matrix.shape}")
    return matrix


class PriorFamily(str, Enum):
    """사전분포 계열."""

    NORMAL = "normal"
    LAPLACE = "laplace"
    STUDENT_T = "student_t"
    VERY_SPARSE = "very_sparse"
    HIERARCHICAL_NORMAL_GAMMA = "hierarchical_normal_gamma"


@dataclass(frozen=True, slots=True, eq=False)
class PriorSpec:
    """계열 태그와 초모수로 정의되는 사전분포.

    - NORMAL: `location`(μ0), `variance`(스칼라) 또는 `covariance`(d×d)
    - LAPLACE: `location`, `scale`(b)
    - STUDENT_T: `location`, `scale`, `dof`(ν)
    - VERY_SPARSE: `scale`(σ), `normalized`
    - HIERARCHICAL_NORMAL_GAMMA: `shape`(γ), 증강 상태 (θ, α) 위의 분포
    """

    family: PriorFamily
    location: Union[float, FloatArray] = 0.0
    scale: Union[float, FloatArray] = 1.0
    variance: float = 1.0
    covariance: Optional[FloatArray] = None
    dof: float = 3.0
    shape: float = 1.0
    normalized: bool = True
    precision: Optional[FloatArray] = field(default=None, init=False, repr=False)
    log_det_covariance: float = field(default=0.0, init=False, repr=False)

    def __post_init__(self) -> None:
        if np.any(~np.isfinite(np.asarray(self.location, dtype=float))):
            raise InvalidInputError("location 은 유한해야 합니다.")
        if np.any(np.asarray(self.scale, dtype=float) <= 0):
            raise InvalidInputError("scale 은 양수여야 합니다.")
        if not self.variance > 0:
            raise InvalidInputError("variance 는 양수여야 합니다.")
        if not self.dof > 0:
            raise InvalidInputError("dof 는 양수여야 합니다.")
        if not self.shape > 0:
            raise InvalidInputError("shape(γ) 는 양수여야 합니다.")
        if self.covariance is not None:
            covariance = np.atleast_2d(np.asarray(self.covariance, dtype=float))
            if covariance.shape[0] != covariance.shape[1]:
                raise InvalidInputError("covariance 는 정방행렬이어야 합니다.")
            if not np.allclose(covariance, covariance.T, atol=1e-12):
                raise InvalidInputError("covariance 는 대칭이어야 합니다.")
            try:
                cholesky = np.linalg.cholesky(covariance)
            except np.linalg.LinAlgError as exc:
                raise InvalidInputError("covariance 가 양의 정부호가 아닙니다.") from exc
            object.__setattr__(self, "covariance", covariance)
            object.__setattr__(self, "precision", np.linalg.inv(covariance))
            object.__setattr__(self, "log_det_covariance", float(2.0 * np.sum(np.log(np.diag(cholesky)))))

    @classmethod
    def normal(
        cls,
        mean: Union[float, ArrayLike] = 0.0,
        variance: float = 1.0,
        *,
        covariance: Optional[ArrayLike] = None,
    ) -> "PriorSpec":
        location = _scalar_or_array(mean)
        cov = None if covariance is None else np.asarray(covariance, dtype=float)
        return cls(family=PriorFamily.NORMAL, location=location, variance=variance, covariance=cov)

    @classmethod
    def laplace(cls, location: Union[float, ArrayLike] = 0.0, scale: Union[float, ArrayLike] = 1.0) -> "PriorSpec":
        return cls(family=PriorFamily.LAPLACE, location=_scalar_or_array(location), scale=_scalar_or_array(scale))

    @classmethod
    def student_t(
        cls,
        location: Union[float, ArrayLike] = 0.0,
        scale: Union[float, ArrayLike] = 1.0,
        dof: float = 3.0,
    ) -> "PriorSpec":
        return cls(
            family=PriorFamily.STUDENT_T,
            location=_scalar_or_array(location),
            scale=_scalar_or_array(scale),
            dof=dof,
        )

    @classmethod
    def very_sparse(cls, scale: float = 1.0, *, normalized: bool = True) -> "PriorSpec":
        return cls(family=PriorFamily.VERY_SPARSE, scale=scale, normalized=normalized)

    @classmethod
    def hierarchical_normal_gamma(cls, shape: float) -> "PriorSpec":
        return cls(family=PriorFamily.HIERARCHICAL_NORMAL_GAMMA, shape=shape)

    @property
    def is_augmented(self) -> bool:
        """(θ, α) 증강 상태 위에서 정의되는지 여부."""

        return self.family is PriorFamily.HIERARCHICAL_NORMAL_GAMMA

    def describe(self) -> Dict[str, object]:
        payload: Dict[str, object] = {"family": self.family.value}
        if self.family is PriorFamily.NORMAL:
            payload["location"] = _jsonable(self.location)
            if self.covariance is not None:
                payload["covariance"] = self.covariance.tolist()
            else:
                payload["variance"] = self.variance
        elif self.family in (PriorFamily.LAPLACE, PriorFamily.STUDENT_T):
            payload["location"] = _jsonable(self.location)
            payload["scale"] = _jsonable(self.scale)
            if self.family is PriorFamily.STUDENT_T:
                payload["dof"] = self.dof
        elif self.family is PriorFamily.VERY_SPARSE:
            payload["scale"] = _jsonable(self.scale)
            payload["normalized"] = self.normalized
        else:
            payload["shape"] = self.shape
        return payload


def _scalar_or_array(value: Union[float, ArrayLike]) -> Union[float, FloatArray]:
    if np.isscalar(value):
        return float(value)  # type: ignore[arg-type]
    return np.asarray(value, dtype=float)


def _jsonable(value: Union[float, FloatArray]) -> object:
    if isinstance(value, np.ndarray):
        return value.tolist()
    return float(value)


class ModelKind(str, Enum):
    """가능도 모형 종류."""

    LINEAR_REGRESSION = "linear_regression"
    LOGISTIC_REGRESSION = "logistic_regression"
    NORMAL_MEAN = "normal_mean"

    @property
    def is_regression(self) -> bool:
        return self is not ModelKind.NORMAL_MEAN


@dataclass(frozen=True, slots=True, eq=False)
class LikelihoodModel:
    """가능도 모형과 데이터.

    회귀 모형은 `features` 가 X(n×d), `responses` 가 y(n) 이다.
    NORMAL_MEAN 은 `features` 에 관측값 x^n(n×d) 을 두고 `responses` 는 비어 있다.
    `pseudo=True` 는 score matching 으로 얻은 의사 데이터로, 로지스틱 레이블이 {0,1} 일 필요가 없다.
    """

    kind: ModelKind
    features: FloatArray
    responses: FloatArray = field(default_factory=lambda: np.zeros(0))
    noise_variance: float = 1.0
    pseudo: bool = False

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=float)
        if features.ndim != 2:
            raise InvalidInputError(f"features 는 (n, d) 행렬이어야 합니다: shape={features.shape}")
        if features.shape[1] < 1:
            raise InvalidInputError("모수 차원 d 는 1 이상이어야 합니다.")
        responses = np.asarray(self.responses, dtype=float).reshape(-1)
        if not self.noise_variance > 0:
            raise InvalidInputError("noise_variance(σ²) 는 양수여야 합니다.")
        if self.kind.is_regression:
            if responses.shape[0] != features.shape[0]:
                raise InvalidInputError(
                    f"X 의 행 수({features.shape[0]})와 y 길이({responses.shape[0]})가 다릅니다."
                )
            if self.kind is ModelKind.LOGISTIC_REGRESSION and not self.pseudo:
                if not np.all(np.isin(responses, (0.0, 1.0))):
                    raise InvalidInputError("로지스틱 회귀 레이블은 0 또는 1 이어야 합니다.")
        elif responses.size:
            raise InvalidInputError("normal_mean 모형은 responses 를 갖지 않습니다.")
        if not (np.all(np.isfinite(features)) and np.all(np.isfinite(responses))):
            raise InvalidInputError("데이터에 유한하지 않은 값이 있습니다.")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "responses", responses)

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def dim(self) -> int:
        """모수 θ 의 차원 d."""

        return int(self.features.shape[1])

    @property
    def point_dim(self) -> int:
        """데이터 한 점의 차원 p (회귀는 d+1)."""

        return self.dim + 1 if self.kind.is_regression else self.dim

    def points(self) -> FloatArray:
        """데이터를 점 단위 (n, p) 행렬로 반환한다."""

        if self.kind.is_regression:
            return np.column_stack([self.features, self.responses])
        return self.features.copy()

    @classmethod
    def from_points(
        cls,
        kind: ModelKind,
        points: ArrayLike,
        *,
        noise_variance: float = 1.0,
        pseudo: bool = False,
    ) -> "LikelihoodModel":
        matrix = np.asarray(points, dtype=float)
        if matrix.ndim == 1:
            matrix = matrix[:, None]
        if kind.is_regression:
            return cls(
                kind=kind,
                features=matrix[:, :-1],
                responses=matrix[:, -1],
                noise_variance=noise_variance,
                pseudo=pseudo,
            )
        return cls(kind=kind, features=matrix, noise_variance=noise_variance, pseudo=pseudo)

    def subset(self, indices: Sequence[int] | NDArray[np.int64]) -> "LikelihoodModel":
        index = np.asarray(indices, dtype=int)
        responses = self.responses[index] if self.kind.is_regression else self.responses
        return LikelihoodModel(
            kind=self.kind,
            features=self.features[index],
            responses=responses,
            noise_variance=self.noise_variance,
            pseudo=self.pseudo,
        )

    def concat(self, other: "LikelihoodModel") -> "LikelihoodModel":
        if other.kind is not self.kind or other.dim != self.dim:
            raise InvalidInputError("종류나 차원이 다른 모형은 이어 붙일 수 없습니다.")
        return LikelihoodModel(
            kind=self.kind,
            features=np.vstack([self.features, other.features]),
            responses=np.concatenate([self.responses, other.responses]),
            noise_variance=self.noise_variance,
            pseudo=self.pseudo or other.pseudo,
        )


@dataclass(frozen=True, slots=True, eq=False)
class SampleSet:
    """거짓 사후분포 샘플 {θ̃_t}. `wall_ns` 는 시작 시점부터의 누적 시간."""

    samples: FloatArray
    wall_ns: Optional[NDArray[np.int64]] = None
    source: str = "unknown"

    def __post_init__(self) -> None:
        samples = as_sample_matrix(self.samples)
        if samples.shape[0] < 1:
            raise InvalidInputError("SampleSet 은 최소 1개의 샘플이 필요합니다.")
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("SampleSet 에 유한하지 않은 샘플이 있습니다.")
        object.__setattr__(self, "samples", samples)
        if self.wall_ns is not None:
            object.__setattr__(self, "wall_ns", np.asarray(self.wall_ns, dtype=np.int64))

    @property
    def size(self) -> int:
        return int(self.samples.shape[0])

    @property
    def dim(self) -> int:
        return int(self.samples.shape[1])


@dataclass(frozen=True, slots=True, eq=False)
class Chain:
    """MCMC 체인. 생성 후에는 변경하지 않는다."""

    samples: FloatArray
    accepted: NDArray[np.bool_]
    wall_ns: NDArray[np.int64]
    seed: int
    config: Mapping[str, Any] = field(default_factory=dict)
    divergences: int = 0
    energy_change: Optional[FloatArray] = None

    @property
    def length(self) -> int:
        return int(self.samples.shape[0])

    @property
    def dim(self) -> int:
        return int(self.samples.shape[1])

    @property
    def acceptance_rate(self) -> float:
        if self.length == 0:
            return 0.0
        return float(np.mean(self.accepted))

    def to_sample_set(self, source: str = "chain") -> SampleSet:
        return SampleSet(samples=self.samples, wall_ns=self.wall_ns, source=source)


@dataclass(frozen=True, slots=True, eq=False)
class ChainSummary:
    """burn-in 이후 체인의 적률."""

    mean: FloatArray
    variance: FloatArray
    retained: int


@dataclass(frozen=True, slots=True, eq=False)
class TestFunction:
    """기댓값을 구할 검정 함수 h. `evaluator` 는 (T, d) 를 받아 (T, m) 을 돌려준다."""

    __test__ = False

    evaluator: Callable[[FloatArray], FloatArray]
    tag: str = "identity"

    @classmethod
    def identity(cls) -> "TestFunction":
        return cls(evaluator=lambda thetas: thetas, tag="identity")

    @classmethod
    def second_moment(cls) -> "TestFunction":
        return cls(evaluator=lambda thetas: thetas**2, tag="second_moment")

    @classmethod
    def coordinates(cls, indices: Sequence[int]) -> "TestFunction":
        index = list(indices)
        return cls(evaluator=lambda thetas: thetas[:, index], tag=f"coordinates{index}")

    def __call__(self, thetas: ArrayLike) -> FloatArray:
        values = np.asarray(self.evaluator(as_sample_matrix(thetas)), dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        return values


@dataclass(frozen=True, slots=True, eq=False)
class WeightedEstimate:
    """자기정규화 중요도 가중 추정 결과."""

    estimate: FloatArray
    weights: FloatArray
    ess: float
    method: str
    wall_ns: int
    standard_error: FloatArray
    max_weight_fraction: float

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])


class Method(str, Enum):
    """하네스가 비교하는 추정 방법."""

    NAIVE_IS = "naive-is"
    PRIOR_SWAP_EXACT = "prior-swap-exact"
    PRIOR_SWAP_PARAMETRIC = "prior-swap-parametric"
    PRIOR_SWAP_IS = "prior-swap-is"
    PRIOR_SWAP_SEMIPARAMETRIC = "prior-swap-semiparametric"
    PRIOR_SWAP_SEMIPARAMETRIC_IS = "prior-swap-semiparametric-is"
    DIRECT_MCMC = "direct-mcmc"

    @property
    def uses_parametric_alpha(self) -> bool:
        return self in (
            Method.PRIOR_SWAP_PARAMETRIC,
            Method.PRIOR_SWAP_IS,
            Method.PRIOR_SWAP_SEMIPARAMETRIC,
            Method.PRIOR_SWAP_SEMIPARAMETRIC_IS,
        )


@dataclass(frozen=True, slots=True, eq=False)
class GroundTruth:
    """하나의 목표 사전분포에 대한 기준 사후 기댓값."""

    target: str
    mean: FloatArray
    method: str
    standard_error: Optional[FloatArray] = None
    settings: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class CurvePoint:
    """체크포인트 하나의 (wall time, posterior error)."""

    checkpoint: int
    retained: int
    wall_ns: int
    posterior_error: float


@dataclass(frozen=True, slots=True, eq=False)
class MethodResult:
    """한 (목표 사전분포, 방법) 조합의 실행 결과.

    IS 방법이면 `log_weights` 가 burn-in 이전을 포함한 모든 상태의 비정규화 로그 가중치를 담는다.
    """

    target: str
    method: Method
    curve: List[CurvePoint] = field(default_factory=list)
    estimate: Optional[FloatArray] = None
    posterior_error: Optional[float] = None
    samples: int = 0
    false_samples: int = 0
    wall_ns: int = 0
    ess: Optional[float] = None
    acceptance: Optional[float] = None
    divergences: int = 0
    held_out_error: Optional[float] = None
    chain: Optional[Chain] = None
    log_weights: Optional[FloatArray] = None
    error: Optional[str] = None

    @property
    def succeeded(self) -> bool:
        return self.error is None


@dataclass(frozen=True, slots=True, eq=False)
class RunRecord:
    """실험 한 번의 전체 결과."""

    experiment: str
    seed: int
    ground_truths: Mapping[str, GroundTruth]
    results: List[MethodResult]
    config: Mapping[str, Any] = field(default_factory=dict)

    def result(self, target: str, method: Method) -> MethodResult:
        for item in self.results:
            if item.target == target and item.method is method:
                return item
        raise KeyError(f"{target}/{method.value} 결과가 없습니다.")


__all__ = [
    "Chain",
    "ChainSummary",
    "CurvePoint",
    "FloatArray",
    "GroundTruth",
    "LikelihoodModel",
    "Method",
    "MethodResult",
    "ModelKind",
    "ParamVector",
    "PriorFamily",
    "PriorSpec",
    "RunRecord",
    "SampleSet",
    "TestFunction",
    "WeightedEstimate",
    "as_param_vector",
    "as_sample_matrix",
]
