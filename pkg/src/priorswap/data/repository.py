"""실험 실행 기록 저장소."""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import List, Optional

import numpy as np
from sqlalchemy import DateTime, Float, ForeignKey, Integer, String, Text, func, select
from sqlalchemy.ext.asyncio import AsyncSession, async_sessionmaker
from sqlalchemy.orm import Mapped, mapped_column, relationship

from .database import Base
from .models import RunRecord


class ExperimentRecord(Base):
    __tablename__ = "experiments"

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    name: Mapped[str] = mapped_column(String(100), index=True)
    seed: Mapped[str] = mapped_column(String(20))
    config: Mapped[str] = mapped_column(Text)
    status: Mapped[str] = mapped_column(String(20))
    started_at: Mapped[datetime] = mapped_column(DateTime(timezone=True), index=True)
    created_at: Mapped[datetime] = mapped_column(DateTime(timezone=True), server_default=func.now())


class GroundTruthRecord(Base):
    __tablename__ = "ground_truths"

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    experiment_id: Mapped[int] = mapped_column(ForeignKey("experiments.id"), index=True)
    target: Mapped[str] = mapped_column(String(100))
    method: Mapped[str] = mapped_column(String(20))
    mean: Mapped[str] = mapped_column(Text)
    standard_error: Mapped[Optional[str]] = mapped_column(Text, nullable=True)

    experiment: Mapped[ExperimentRecord] = relationship("ExperimentRecord")


class EstimateRecord(Base):
    __tablename__ = "estimates"

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    experiment_id: Mapped[int] = mapped_column(ForeignKey("experiments.id"), index=True)
    target: Mapped[str] = mapped_column(String(100), index=True)
    method: Mapped[str] = mapped_column(String(40), index=True)
    samples: Mapped[int] = mapped_column(Integer)
    false_samples: Mapped[int] = mapped_column(Integer)
    wall_ns: Mapped[int] = mapped_column(Integer)
    posterior_error: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    ess: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    acceptance: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    divergences: Mapped[int] = mapped_column(Integer, default=0)
    held_out_error: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    status: Mapped[str] = mapped_column(String(20))
    error: Mapped[Optional[str]] = mapped_column(Text, nullable=True)

    experiment: Mapped[ExperimentRecord] = relationship("ExperimentRecord")


@dataclass(frozen=True)
class MethodScore:
    target: str
    method: str
    posterior_error: Optional[float]
    ess: Optional[float]
    status: str
    error: Optional[str]


def _dump_vector(values: Optional[np.ndarray]) -> Optional[str]:
    if values is None:
        return None
    return json.dumps(np.asarray(values, dtype=float).tolist())


class RunRepository:
    """실험 설정, 기준값, 방법별 최종 추정을 SQLite 에 보관한다."""

    def __init__(self, session_factory: "async_sessionmaker[AsyncSession]") -> None:
        self._session_factory = session_factory

    async def record_run(self, record: RunRecord, *, started_at: Optional[datetime] = None) -> int:
        async with self._session_factory() as session:
            experiment = ExperimentRecord(
                name=record.experiment,
                seed=str(record.seed),
                config=json.dumps(record.config, ensure_ascii=False, sort_keys=True, default=str),
                status=self._determine_status(record),
                started_at=started_at or datetime.now(timezone.utc),
            )
            session.add(experiment)
            await session.flush()

            for name, truth in record.ground_truths.items():
                session.add(
                    GroundTruthRecord(
                        experiment_id=experiment.id,
                        target=name,
                        method=truth.method,
                        mean=_dump_vector(truth.mean) or "[]",
                        standard_error=_dump_vector(truth.standard_error),
                    )
                )
            for result in record.results:
                session.add(
                    EstimateRecord(
                        experiment_id=experiment.id,
                        target=result.target,
                        method=result.method.value,
                        samples=result.samples,
                        false_samples=result.false_samples,
                        wall_ns=result.wall_ns,
                        posterior_error=result.posterior_error,
                        ess=result.ess,
                        acceptance=result.acceptance,
                        divergences=result.divergences,
                        held_out_error=result.held_out_error,
                        status="ok" if result.succeeded else "error",
                        error=result.error,
                    )
                )
            await session.commit()
            return experiment.id

    def _determine_status(self, record: RunRecord) -> str:
        if not record.results:
            return "empty"
        failed = sum(1 for result in record.results if not result.succeeded)
        if failed == 0:
            return "ok"
        if failed == len(record.results):
            return "error"
        return "partial"

    async def recent_runs(self, limit: int = 20) -> List[dict[str, object]]:
        stmt = select(ExperimentRecord).order_by(ExperimentRecord.id.desc()).limit(limit)
        async with self._session_factory() as session:
            rows = (await session.execute(stmt)).scalars().all()
        return [
            {
                "id": row.id,
                "name": row.name,
                "seed": int(row.seed),
                "status": row.status,
                "started_at": row.started_at,
            }
            for row in rows
        ]

    async def get_run(self, experiment_id: int) -> Optional[dict[str, object]]:
        async with self._session_factory() as session:
            row = await session.get(ExperimentRecord, experiment_id)
        if row is None:
            return None
        return {
            "id": row.id,
            "name": row.name,
            "seed": int(row.seed),
            "status": row.status,
            "started_at": row.started_at,
            "config": json.loads(row.config),
        }

    async def estimates_for(self, experiment_id: int) -> List[MethodScore]:
        stmt = (
            select(EstimateRecord)
            .where(EstimateRecord.experiment_id == experiment_id)
            .order_by(EstimateRecord.target, EstimateRecord.method)
        )
        async with self._session_factory() as session:
            rows = (await session.execute(stmt)).scalars().all()
        return [
            MethodScore(
                target=row.target,
                method=row.method,
                posterior_error=row.posterior_error,
                ess=row.ess,
                status=row.status,
                error=row.error,
            )
            for row in rows
        ]

    async def ground_truth_for(self, experiment_id: int, target: str) -> Optional[np.ndarray]:
        stmt = select(GroundTruthRecord.mean).where(
            GroundTruthRecord.experiment_id == experiment_id,
            GroundTruthRecord.target == target,
        )
        async with self._session_factory() as session:
            value = (await session.execute(stmt)).scalar_one_or_none()
        if value is None:
            return None
        return np.asarray(json.loads(value), dtype=float)


__all__ = [
    "EstimateRecord",
    "ExperimentRecord",
    "GroundTruthRecord",
    "MethodScore",
    "RunRepository",
]
