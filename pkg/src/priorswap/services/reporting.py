"""실험 결과 요약과 CSV 산출물 기록."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from ..data.io import (
    curve_frame,
    estimate_frame,
    ground_truth_frame,
    theta_columns,
    write_alpha,
    write_chain,
    write_frame,
    write_sample_set,
)
from ..data.models import RunRecord, SampleSet
from ..data.repository import MethodScore, RunRepository
from ..posterior.parametric import ParametricAlpha

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunSummary:
    experiment: str
    seed: int
    scores: Sequence[MethodScore]

    def format_markdown(self) -> str:
        lines = [f"* 실험: {self.experiment} (seed {self.seed})"]
        succeeded = [score for score in self.scores if score.status == "ok"]
        lines.append(f"* 방법 수: {len(self.scores)} (성공 {len(succeeded)} / 실패 {len(self.scores) - len(succeeded)})")
        for score in self.scores:
            if score.status != "ok":
                lines.append(f"* {score.target} / {score.method}: 실패 ({score.error})")
                continue
            error = f"{score.posterior_error:.4g}" if score.posterior_error is not None else "-"
            ess = f", ESS {score.ess:.1f}" if score.ess is not None else ""
            lines.append(f"* {score.target} / {score.method}: posterior error {error}{ess}")
        if succeeded:
            best = min(
                (score for score in succeeded if score.posterior_error is not None),
                key=lambda score: score.posterior_error or 0.0,
                default=None,
            )
            if best is not None:
                lines.append(f"* 최소 오차: {best.target} / {best.method}")
        return "\n".join(lines)

    @classmethod
    def from_record(cls, record: RunRecord) -> "RunSummary":
        scores = [
            MethodScore(
                target=result.target,
                method=result.method.value,
                posterior_error=result.posterior_error,
                ess=result.ess,
                status="ok" if result.succeeded else "error",
                error=result.error,
            )
            for result in record.results
        ]
        return cls(experiment=record.experiment, seed=record.seed, scores=scores)


class RunReporter:
    """저장된 실행 기록에서 요약을 만든다."""

    def __init__(self, repository: RunRepository) -> None:
        self._repository = repository

    async def generate(self, experiment_id: int) -> Optional[RunSummary]:
        run = await self._repository.get_run(experiment_id)
        if run is None:
            return None
        scores = await self._repository.estimates_for(experiment_id)
        return RunSummary(experiment=str(run["name"]), seed=int(run["seed"]), scores=scores)  # type: ignore[arg-type]


def write_run_artifacts(
    record: RunRecord,
    output_dir: Path,
    *,
    theta_dim: Optional[int] = None,
    false_samples: Optional[SampleSet] = None,
    alpha: Optional[ParametricAlpha] = None,
) -> Dict[str, Path]:
    """estimates.csv, curves.csv, ground_truth.csv, chains/*.csv, false_samples.csv, alpha.csv, config.json, summary.md.

    IS 방법의 파일에는 `log_weight` 열이 붙는다. naive-is 는 체인 대신 가중치를 붙인 거짓 사후분포 샘플을 쓴다.
    """

    root = Path(output_dir)
    written: Dict[str, Path] = {
        "estimates": write_frame(estimate_frame(record.results), root / "estimates.csv"),
        "curves": write_frame(curve_frame(record.results), root / "curves.csv"),
        "ground_truth": write_frame(ground_truth_frame(record.ground_truths), root / "ground_truth.csv"),
    }
    if false_samples is not None:
        written["false_samples"] = write_sample_set(false_samples, root / "false_samples.csv")
    if alpha is not None:
        written["alpha"] = write_alpha(alpha, root / "alpha.csv")
    for result in record.results:
        if not result.succeeded:
            continue
        key = f"chain:{result.target}:{result.method.value}"
        path = root / "chains" / f"{result.target}__{result.method.value}.csv"
        if result.chain is not None:
            columns: Optional[List[str]] = None
            if theta_dim is not None and result.chain.dim == theta_dim + 1:
                columns = theta_columns(theta_dim) + ["log_alpha"]
            written[key] = write_chain(result.chain, path, columns=columns, log_weights=result.log_weights)
        elif false_samples is not None and result.log_weights is not None:
            written[key] = write_sample_set(false_samples, path, log_weights=result.log_weights)
    config_path = root / "config.json"
    config_path.write_text(json.dumps(record.config, ensure_ascii=False, indent=2, sort_keys=True, default=str), encoding="utf-8")
    written["config"] = config_path
    summary_path = root / "summary.md"
    summary_path.write_text(RunSummary.from_record(record).format_markdown() + "\n", encoding="utf-8")
    written["summary"] = summary_path
    logger.info("산출물 %d개 기록: %s", len(written), root)
    return written


__all__ = ["RunReporter", "RunSummary", "write_run_artifacts"]
