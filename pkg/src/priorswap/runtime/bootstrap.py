"""런타임 구성: 실행 기록 저장소와 오케스트레이터 연결."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from sqlalchemy.ext.asyncio import AsyncEngine

from ..config.settings import AppSettings, get_settings
from ..data.database import create_engine, create_session_factory, init_models
from ..data.repository import RunRepository
from ..services.reporting import RunReporter
from .orchestrator import ExperimentOrchestrator


@dataclass
class Runtime:
    engine: AsyncEngine
    repository: RunRepository
    reporter: RunReporter
    orchestrator: ExperimentOrchestrator

    async def aclose(self) -> None:
        await self.engine.dispose()


async def build_runtime(
    settings: Optional[AppSettings] = None,
    *,
    output_dir: Optional[Path] = None,
) -> Runtime:
    settings = settings or get_settings()
    engine = create_engine(settings.resolved_database_url(output_dir))
    await init_models(engine)
    repository = RunRepository(create_session_factory(engine))
    orchestrator = ExperimentOrchestrator(repository, settings=settings)
    return Runtime(
        engine=engine,
        repository=repository,
        reporter=RunReporter(repository),
        orchestrator=orchestrator,
    )


def configure_logging(settings: Optional[AppSettings] = None) -> None:
    settings = settings or get_settings()
    logging.basicConfig(
        level=settings.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


__all__ = ["Runtime", "build_runtime", "configure_logging"]
