from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pytest

from priorswap.config.experiment import build_experiment_config, parse_flat_config
from priorswap.config.settings import AppSettings
from priorswap.data.database import create_engine, create_session_factory, init_models
from priorswap.data.models import CurvePoint, GroundTruth, Method, MethodResult, RunRecord
from priorswap.data.repository import RunRepository
from priorswap.runtime.bootstrap import build_runtime
from priorswap.services.reporting import RunReporter, RunSummary


def build_record(seed: int = 2**64 - 1) -> RunRecord:
    truth = GroundTruth(
        target="laplace",
        mean=np.array([1.8047]),
        method="long-chain",
        standard_error=np.array([0.003]),
    )
    ok = MethodResult(
        target="laplace",
        method=Method.PRIOR_SWAP_EXACT,
        curve=[CurvePoint(checkpoint=0, retained=48, wall_ns=1_000, posterior_error=0.05)],
        estimate=np.array([1.85]),
        posterior_error=0.05,
        samples=48,
        false_samples=500,
        wall_ns=1_000,
        acceptance=0.4,
    )
    failed = MethodResult(target="laplace", method=Method.NAIVE_IS, error="DegenerateWeightsError: 모든 가중치가 0")
    return RunRecord(
        experiment="running",
        seed=seed,
        ground_truths={"laplace": truth},
        results=[ok, failed],
        config={"experiment": {"seed": seed}},
    )


async def build_repository(tmp_path: Path) -> RunRepository:
    engine = create_engine(f"sqlite+aiosqlite:///{tmp_path / 'runs.db'}")
    await init_models(engine)
    return RunRepository(create_session_factory(engine))


@pytest.mark.asyncio
async def test_repository_records_run(tmp_path: Path) -> None:
    repository = await build_repository(tmp_path)
    started = datetime(2024, 1, 1, tzinfo=timezone.utc)

    run_id = await repository.record_run(build_record(), started_at=started)

    runs = await repository.recent_runs(5)
    assert len(runs) == 1
    assert runs[0]["id"] == run_id
    assert runs[0]["seed"] == 2**64 - 1
    assert runs[0]["status"] == "partial"

    stored = await repository.get_run(run_id)
    assert stored is not None
    assert stored["config"] == {"experiment": {"seed": 2**64 - 1}}
    assert await repository.get_run(run_id + 1) is None

    scores = await repository.estimates_for(run_id)
    assert [(score.method, score.status) for score in scores] == [
        ("naive-is", "error"),
        ("prior-swap-exact", "ok"),
    ]
    assert scores[1].posterior_error == pytest.approx(0.05)
    assert scores[0].error is not None and scores[0].error.startswith("DegenerateWeightsError")

    np.testing.assert_allclose(await repository.ground_truth_for(run_id, "laplace"), [1.8047])
    assert await repository.ground_truth_for(run_id, "missing") is None


@pytest.mark.asyncio
async def test_recent_runs_are_newest_first(tmp_path: Path) -> None:
    repository = await build_repository(tmp_path)
    first = await repository.record_run(build_record(seed=1))
    second = await repository.record_run(build_record(seed=2))
    runs = await repository.recent_runs(1)
    assert [run["id"] for run in runs] == [second]
    assert first < second


@pytest.mark.asyncio
async def test_reporter_summarizes_stored_run(tmp_path: Path) -> None:
    repository = await build_repository(tmp_path)
    run_id = await repository.record_run(build_record(seed=3))

    summary = await RunReporter(repository).generate(run_id)

    assert summary is not None
    text = summary.format_markdown()
    assert "running (seed 3)" in text
    assert "성공 1 / 실패 1" in text
    assert "laplace / prior-swap-exact: posterior error 0.05" in text
    assert "최소 오차: laplace / prior-swap-exact" in text
    assert await RunReporter(repository).generate(run_id + 10) is None


def test_summary_from_record_matches_stored_form() -> None:
    summary = RunSummary.from_record(build_record(seed=4))
    assert [score.status for score in summary.scores] == ["ok", "error"]
    assert "naive-is: 실패" in summary.format_markdown()


@pytest.mark.asyncio
async def test_orchestrator_runs_experiment_and_records_it(tmp_path: Path) -> None:
    text = """
experiment.name = orchestrated
experiment.seed = 9
experiment.methods = naive-is, prior-swap-exact, direct-mcmc
experiment.worker_slots = 2
model.tag = normal_mean
model.n = 3
model.observation_sum = 4
false_prior.family = normal
target.laplace.family = laplace
target.laplace.location = 10
target.laplace.scale = 0.7071067811865476
target.hier.family = hierarchical_normal_gamma
target.hier.shape = 2
sampler.T = 1000
false_posterior.T_f = 300
ground_truth.steps = 4000
"""
    config = build_experiment_config(parse_flat_config(text), output_dir=tmp_path / "out")
    settings = AppSettings(output_dir=tmp_path, database_url=None, mh_pilot_steps=200)
    runtime = await build_runtime(settings, output_dir=tmp_path / "out")
    try:
        record = await runtime.orchestrator.run(config)
        status = runtime.orchestrator.status()
        runs = await runtime.repository.recent_runs(1)
    finally:
        await runtime.aclose()

    assert [(result.target, result.method) for result in record.results] == [
        ("laplace", Method.NAIVE_IS),
        ("laplace", Method.PRIOR_SWAP_EXACT),
        ("laplace", Method.DIRECT_MCMC),
        ("hier", Method.NAIVE_IS),
        ("hier", Method.PRIOR_SWAP_EXACT),
        ("hier", Method.DIRECT_MCMC),
    ]
    assert record.ground_truths["laplace"].method == "quadrature"
    assert record.ground_truths["hier"].method == "long-chain"
    assert not record.result("hier", Method.NAIVE_IS).succeeded
    assert record.result("laplace", Method.PRIOR_SWAP_EXACT).succeeded
    assert status["running"] is False
    assert status["last_experiment_id"] == runs[0]["id"]
    assert runs[0]["status"] == "partial"
    chain_file = tmp_path / "out" / "chains" / "hier__prior-swap-exact.csv"
    assert chain_file.read_text(encoding="utf-8").splitlines()[0].startswith("theta_0,log_alpha")
