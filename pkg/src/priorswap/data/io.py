"""pandas 기반 CSV 입출력. 모든 파일은 헤더를 가지며 소수점은 항상 '.' 이다."""

from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike

from ..errors import InvalidInputError
from ..posterior.parametric import ParametricAlpha
from .models import Chain, FloatArray, GroundTruth, LikelihoodModel, MethodResult, ModelKind, PriorSpec, SampleSet

logger = logging.getLogger(__name__)

WALL_COLUMN = "t_wall_ns"
ACCEPTED_COLUMN = "accepted"
LOG_WEIGHT_COLUMN = "log_weight"
ESTIMATE_COLUMNS = ["target", "method", "T", "T_f", "wall_ns", "posterior_error", "ess"]
CURVE_COLUMNS = ["target", "method", "checkpoint", "T", "wall_ns", "posterior_error"]
BENCHMARK_COLUMNS = ["n", "method", "steps", "per_iteration_ns"]
_META_PATTERN = re.compile(r"(\w+)=([^,]+)")


def _prepare(path: Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    return target


def theta_columns(d: int, prefix: str = "theta") -> List[str]:
    return [f"{prefix}_{index}" for index in range(d)]


def write_dataset(model: LikelihoodModel, path: Path) -> Path:
    """특성 열 다음에 응답 열. normal_mean 은 관측값 열만 쓴다."""

    target = _prepare(path)
    frame = pd.DataFrame(model.features, columns=theta_columns(model.dim, "x"))
    if model.kind.is_regression:
        frame["y"] = model.responses
    frame.to_csv(target, index=False, float_format="%.17g")
    return target


def read_dataset(path: Path, kind: ModelKind, *, noise_variance: float = 1.0) -> LikelihoodModel:
    source = Path(path)
    if not source.is_file():
        raise InvalidInputError(f"데이터셋 CSV 가 없습니다: {source}")
    frame = pd.read_csv(source, decimal=".")
    if frame.empty or frame.shape[1] < (2 if kind.is_regression else 1):
        raise InvalidInputError(f"데이터셋 CSV 열이 부족합니다: {source}")
    try:
        values = frame.to_numpy(dtype=float)
    except ValueError as exc:
        raise InvalidInputError(f"데이터셋 CSV 에 숫자가 아닌 값이 있습니다: {source}") from exc
    model = LikelihoodModel.from_points(kind, values, noise_variance=noise_variance)
    logger.info("데이터셋 로드: %s n=%d d=%d", source.name, model.n, model.dim)
    return model


def _attach_log_weights(frame: pd.DataFrame, log_weights: Optional[ArrayLike]) -> None:
    if log_weights is None:
        return
    weights = np.asarray(log_weights, dtype=float).reshape(-1)
    if weights.shape[0] != frame.shape[0]:
        raise InvalidInputError(f"log_weight 길이({weights.shape[0]})가 행 수({frame.shape[0]})와 다릅니다.")
    frame[LOG_WEIGHT_COLUMN] = weights


def write_sample_set(samples: SampleSet, path: Path, *, log_weights: Optional[ArrayLike] = None) -> Path:
    target = _prepare(path)
    frame = pd.DataFrame(samples.samples, columns=theta_columns(samples.dim))
    if samples.wall_ns is not None:
        frame[WALL_COLUMN] = samples.wall_ns
    _attach_log_weights(frame, log_weights)
    frame.to_csv(target, index=False, float_format="%.17g")
    return target


def read_sample_set(path: Path, *, source: str = "csv") -> SampleSet:
    frame = pd.read_csv(Path(path))
    columns = [column for column in frame.columns if column.startswith("theta_")]
    if not columns:
        raise InvalidInputError(f"theta_* 열이 없습니다: {path}")
    wall = frame[WALL_COLUMN].to_numpy(dtype=np.int64) if WALL_COLUMN in frame else None
    return SampleSet(samples=frame[columns].to_numpy(dtype=float), wall_ns=wall, source=source)


def write_alpha(alpha: ParametricAlpha, path: Path) -> Path:
    """첫 줄은 `# k=..,n=..,model=..,noise_variance=..` 메타데이터, 이후 k 행 × p 열."""

    target = _prepare(path)
    header = f"# k={alpha.k},n={alpha.n},model={alpha.kind.value},noise_variance={alpha.noise_variance!r}\n"
    columns = theta_columns(alpha.pseudo_model.dim, "x")
    if alpha.kind.is_regression:
        columns.append("y")
    frame = pd.DataFrame(alpha.points, columns=columns)
    with target.open("w", encoding="utf-8", newline="") as handle:
        handle.write(header)
        frame.to_csv(handle, index=False, float_format="%.17g")
    return target


def read_alpha(path: Path, false_prior: PriorSpec) -> ParametricAlpha:
    source = Path(path)
    with source.open("r", encoding="utf-8") as handle:
        first = handle.readline()
    if not first.startswith("#"):
        raise InvalidInputError(f"α CSV 의 메타데이터 줄이 없습니다: {source}")
    meta = dict(_META_PATTERN.findall(first))
    try:
        kind = ModelKind(meta["model"].strip())
        n = int(meta["n"])
        k = int(meta["k"])
        noise_variance = float(meta.get("noise_variance", 1.0))
    except (KeyError, ValueError) as exc:
        raise InvalidInputError(f"α 메타데이터를 해석할 수 없습니다: {first.strip()}") from exc
    frame = pd.read_csv(source, comment="#")
    if frame.shape[0] != k:
        raise InvalidInputError(f"α 행 수({frame.shape[0]})가 메타데이터 k={k} 와 다릅니다.")
    return ParametricAlpha(
        points=frame.to_numpy(dtype=float),
        n=n,
        false_prior=false_prior,
        kind=kind,
        noise_variance=noise_variance,
    )


def write_chain(
    chain: Chain,
    path: Path,
    *,
    columns: Optional[Sequence[str]] = None,
    log_weights: Optional[ArrayLike] = None,
) -> Path:
    target = _prepare(path)
    names = list(columns) if columns is not None else theta_columns(chain.dim)
    if len(names) != chain.dim:
        raise InvalidInputError(f"열 이름 수({len(names)})와 체인 차원({chain.dim})이 다릅니다.")
    frame = pd.DataFrame(chain.samples, columns=names)
    frame[ACCEPTED_COLUMN] = chain.accepted.astype(int)
    frame[WALL_COLUMN] = chain.wall_ns
    _attach_log_weights(frame, log_weights)
    frame.to_csv(target, index=False, float_format="%.17g")
    return target


def read_chain(path: Path, *, seed: int = 0) -> Chain:
    frame = pd.read_csv(Path(path))
    missing = {ACCEPTED_COLUMN, WALL_COLUMN} - set(frame.columns)
    if missing:
        raise InvalidInputError(f"체인 CSV 에 열이 없습니다: {sorted(missing)}")
    state = [column for column in frame.columns if column not in (ACCEPTED_COLUMN, WALL_COLUMN, LOG_WEIGHT_COLUMN)]
    return Chain(
        samples=frame[state].to_numpy(dtype=float),
        accepted=frame[ACCEPTED_COLUMN].to_numpy().astype(bool),
        wall_ns=frame[WALL_COLUMN].to_numpy(dtype=np.int64),
        seed=seed,
        config={"source": str(path)},
    )


def read_log_weights(path: Path) -> Optional[FloatArray]:
    """체인·샘플 CSV 의 `log_weight` 열. 가중치 없이 기록된 파일이면 None."""

    frame = pd.read_csv(Path(path))
    if LOG_WEIGHT_COLUMN not in frame:
        return None
    return frame[LOG_WEIGHT_COLUMN].to_numpy(dtype=float)


def estimate_frame(results: Iterable[MethodResult]) -> pd.DataFrame:
    rows = [
        {
            "target": result.target,
            "method": result.method.value,
            "T": result.samples,
            "T_f": result.false_samples,
            "wall_ns": result.wall_ns,
            "posterior_error": result.posterior_error,
            "ess": result.ess,
        }
        for result in results
        if result.succeeded
    ]
    return pd.DataFrame(rows, columns=ESTIMATE_COLUMNS)


def curve_frame(results: Iterable[MethodResult]) -> pd.DataFrame:
    rows = [
        {
            "target": result.target,
            "method": result.method.value,
            "checkpoint": point.checkpoint,
            "T": point.retained,
            "wall_ns": point.wall_ns,
            "posterior_error": point.posterior_error,
        }
        for result in results
        for point in result.curve
    ]
    return pd.DataFrame(rows, columns=CURVE_COLUMNS)


def ground_truth_frame(truths: Mapping[str, GroundTruth]) -> pd.DataFrame:
    """목표 사전분포마다 한 행: target, method, mean_i, se_i."""

    rows: List[Dict[str, object]] = []
    for name, truth in truths.items():
        row: Dict[str, object] = {"target": name, "method": truth.method}
        for index, value in enumerate(np.asarray(truth.mean, dtype=float)):
            row[f"mean_{index}"] = float(value)
        if truth.standard_error is not None:
            for index, value in enumerate(np.asarray(truth.standard_error, dtype=float)):
                row[f"se_{index}"] = float(value)
        rows.append(row)
    return pd.DataFrame(rows)


def read_ground_truths(path: Path) -> Dict[str, GroundTruth]:
    frame = pd.read_csv(Path(path))
    truths: Dict[str, GroundTruth] = {}
    means = [column for column in frame.columns if column.startswith("mean_")]
    errors = [column for column in frame.columns if column.startswith("se_")]
    for row in frame.itertuples(index=False):
        record = row._asdict()
        standard_error = None
        if errors and not any(pd.isna(record[column]) for column in errors):
            standard_error = np.array([record[column] for column in errors], dtype=float)
        truths[str(record["target"])] = GroundTruth(
            target=str(record["target"]),
            mean=np.array([record[column] for column in means], dtype=float),
            method=str(record["method"]),
            standard_error=standard_error,
        )
    return truths


def write_frame(frame: pd.DataFrame, path: Path) -> Path:
    target = _prepare(path)
    frame.to_csv(target, index=False, float_format="%.17g")
    return target


__all__ = [
    "BENCHMARK_COLUMNS",
    "CURVE_COLUMNS",
    "ESTIMATE_COLUMNS",
    "LOG_WEIGHT_COLUMN",
    "curve_frame",
    "estimate_frame",
    "ground_truth_frame",
    "read_alpha",
    "read_chain",
    "read_dataset",
    "read_ground_truths",
    "read_log_weights",
    "read_sample_set",
    "theta_columns",
    "write_alpha",
    "write_chain",
    "write_dataset",
    "write_frame",
    "write_sample_set",
]
