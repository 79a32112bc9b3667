"""실험 오케스트레이션: 방법별 병렬 슬롯과 단일 결과 수집기."""

from __future__ import annotations

import asyncio
import logging
from datetime import datetime, timezone
from typing import Dict, List, Optional, Tuple

from ..config.experiment import ExperimentConfig
from ..config.settings import AppSettings, get_settings
from ..data.models import Method, MethodResult, RunRecord
from ..data.repository import RunRepository
from ..services.pipeline import ExperimentPipeline
from ..services.reporting import write_run_artifacts

logger = logging.getLogger(__name__)


class ExperimentOrchestrator:
    """거짓 사후분포 단계와 기준값을 한 번 만들고, (목표, 방법) 작업을 worker 슬롯에서 돌린다.

    완료된 결과는 큐 하나를 거쳐 수집기로만 모인다. CSV 와 저장소 기록은 수집이 끝난 뒤 한 번 한다.
    """

    def __init__(
        self,
        repository: Optional[RunRepository] = None,
        *,
        settings: Optional[AppSettings] = None,
    ) -> None:
        self._repository = repository
        self._settings = settings or get_settings()
        self._lock = asyncio.Lock()
        self._running = False
        self._last_result: Optional[RunRecord] = None
        self._last_error: Optional[str] = None
        self._last_experiment_id: Optional[int] = None

    def is_running(self) -> bool:
        return self._running

    async def run(
        self,
        config: ExperimentConfig,
        *,
        pipeline: Optional[ExperimentPipeline] = None,
        write_artifacts: bool = True,
    ) -> RunRecord:
        pipeline = pipeline or ExperimentPipeline(config, self._settings)
        async with self._lock:
            self._running = True
            started_at = datetime.now(timezone.utc)
            try:
                record = await self._execute(config, pipeline)
                self._last_result = record
                self._last_error = None
            except Exception as exc:
                self._last_error = str(exc)
                raise
            finally:
                self._running = False
            if write_artifacts:
                output_dir = config.output_dir(self._settings)
                stage = pipeline.stage
                await asyncio.to_thread(
                    write_run_artifacts,
                    record,
                    output_dir,
                    theta_dim=pipeline.model.dim,
                    false_samples=stage.samples,
                    alpha=stage.alpha,
                )
            if self._repository is not None:
                try:
                    self._last_experiment_id = await self._repository.record_run(record, started_at=started_at)
                except Exception as exc:  # pragma: no cover - 저장소 장애
                    logger.error("실행 기록 저장 실패: %s", exc)
                    self._last_error = str(exc)
            return record

    async def _execute(self, config: ExperimentConfig, pipeline: ExperimentPipeline) -> RunRecord:
        await asyncio.to_thread(pipeline.load_data)
        await asyncio.to_thread(pipeline.prepare)
        truths = await asyncio.to_thread(pipeline.compute_ground_truths)

        jobs: List[Tuple[int, str, Method]] = []
        for name in pipeline.priors:
            for method in config.experiment.methods:
                jobs.append((len(jobs), name, method))

        slots = asyncio.Semaphore(config.worker_slots(self._settings))
        queue: "asyncio.Queue[Tuple[int, MethodResult]]" = asyncio.Queue()

        async def worker(index: int, name: str, method: Method) -> None:
            async with slots:
                result = await asyncio.to_thread(pipeline.run_method, name, method)
            await queue.put((index, result))

        collected: Dict[int, MethodResult] = {}

        async def collector() -> None:
            while len(collected) < len(jobs):
                index, result = await queue.get()
                collected[index] = result
                if not result.succeeded:
                    logger.warning("방법 실패 기록: %s/%s %s", result.target, result.method.value, result.error)

        await asyncio.gather(collector(), *(worker(*job) for job in jobs))
        results = [collected[index] for index in range(len(jobs))]
        logger.info(
            "실험 %s 완료: 작업 %d개, 실패 %d개",
            config.experiment.name,
            len(results),
            sum(1 for result in results if not result.succeeded),
        )
        return RunRecord(
            experiment=config.experiment.name,
            seed=config.seed,
            ground_truths=truths,
            results=results,
            config=config.describe(),
        )

    def status(self) -> dict[str, object]:
        record = self._last_result
        return {
            "running": self.is_running(),
            "last_result": self._format_record(record),
            "last_experiment_id": self._last_experiment_id,
            "last_error": self._last_error,
        }

    def _format_record(self, record: Optional[RunRecord]) -> Optional[dict[str, object]]:
        if record is None:
            return None
        return {
            "experiment": record.experiment,
            "seed": record.seed,
            "targets": sorted(record.ground_truths),
            "results": [
                {
                    "target": result.target,
                    "method": result.method.value,
                    "status": "ok" if result.succeeded else "error",
                    "posterior_error": result.posterior_error,
                    "error": result.error,
                }
                for result in record.results
            ],
        }


__all__ = ["ExperimentOrchestrator"]
