"""`priorswap` 명령줄 인터페이스."""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from .config.experiment import ExperimentConfig, load_experiment_config
from .config.settings import AppSettings, get_settings
from .data.io import ground_truth_frame, write_alpha, write_chain, write_dataset, write_frame, write_sample_set
from .data.models import Method
from .errors import ConfigError, InvalidInputError, PriorSwapError
from .runtime.bootstrap import build_runtime, configure_logging
from .services.benchmark import benchmark_timing
from .services.marginals import chain_marginals, make_grid
from .services.pipeline import ExperimentPipeline
from .services.reporting import RunSummary

logger = logging.getLogger(__name__)

Command = Callable[[ExperimentConfig, AppSettings, Path], None]


def _gen_data(config: ExperimentConfig, settings: AppSettings, out: Path) -> None:
    pipeline = ExperimentPipeline(config, settings)
    train, test = pipeline.load_data()
    write_dataset(train, out / "dataset.csv")
    if test is not None:
        write_dataset(test, out / "test.csv")


def _infer_false(config: ExperimentConfig, settings: AppSettings, out: Path) -> None:
    pipeline = ExperimentPipeline(config, settings)
    methods: List[Method] = list(config.experiment.methods)
    if Method.PRIOR_SWAP_PARAMETRIC not in methods:
        methods.append(Method.PRIOR_SWAP_PARAMETRIC)
    stage = pipeline.prepare(methods)
    stage.require("samples")
    assert stage.samples is not None
    write_sample_set(stage.samples, out / "false_samples.csv")
    stage.require("parametric")
    if stage.alpha is not None:
        write_alpha(stage.alpha, out / "alpha.csv")


def _swap(config: ExperimentConfig, settings: AppSettings, out: Path) -> None:
    pipeline = ExperimentPipeline(config, settings)
    methods = [method for method in config.experiment.methods if method not in (Method.NAIVE_IS, Method.DIRECT_MCMC)]
    if not methods:
        raise InvalidInputError("swap 에는 prior-swap-* 방법이 하나 이상 필요합니다.")
    pipeline.prepare(methods)
    failures: Dict[str, str] = {}
    for name in pipeline.priors:
        for method in methods:
            try:
                run = pipeline.sample_for(name, method)
            except PriorSwapError as exc:
                logger.error("swap 실패 %s/%s: %s", name, method.value, exc)
                failures[f"{name}/{method.value}"] = str(exc)
                continue
            write_chain(run.chain, out / "chains" / f"swap_{name}__{method.value}.csv")
    if failures and len(failures) == len(methods) * len(pipeline.priors):
        raise PriorSwapError(f"모든 swap 체인이 실패했습니다: {failures}")


def _estimate(config: ExperimentConfig, settings: AppSettings, out: Path) -> None:
    async def run() -> RunSummary:
        runtime = await build_runtime(settings, output_dir=out)
        try:
            record = await runtime.orchestrator.run(config)
        finally:
            await runtime.aclose()
        return RunSummary.from_record(record)

    summary = asyncio.run(run())
    print(summary.format_markdown())


def _oracle(config: ExperimentConfig, settings: AppSettings, out: Path) -> None:
    pipeline = ExperimentPipeline(config, settings)
    pipeline.prepare()
    truths = pipeline.compute_ground_truths()
    write_frame(ground_truth_frame(truths), out / "ground_truth.csv")
    missing = sorted(set(pipeline.priors) - set(truths))
    if missing:
        raise PriorSwapError(f"기준값을 계산하지 못한 목표가 있습니다: {missing}")


def _benchmark(config: ExperimentConfig, settings: AppSettings, out: Path) -> None:
    write_frame(benchmark_timing(config, settings), out / "benchmark.csv")


def _marginals(config: ExperimentConfig, settings: AppSettings, out: Path) -> None:
    low, high, count = config.marginals.grid
    frame = chain_marginals(
        ExperimentPipeline(config, settings),
        config.marginals.dimension,
        make_grid(low, high, int(count)),
    )
    write_frame(frame, out / "marginals.csv")


COMMANDS: Dict[str, Command] = {
    "gen-data": _gen_data,
    "infer-false": _infer_false,
    "swap": _swap,
    "estimate": _estimate,
    "benchmark": _benchmark,
    "oracle": _oracle,
    "marginals": _marginals,
}

_HELP = {
    "gen-data": "합성 데이터셋(dataset.csv, test.csv)을 만든다",
    "infer-false": "거짓 사후분포 샘플과 α 를 만든다 (false_samples.csv, alpha.csv)",
    "swap": "목표 사전분포마다 prior swap 체인을 만든다 (chains/swap_*.csv)",
    "estimate": "전체 실험을 실행한다 (estimates.csv, curves.csv, ground_truth.csv, summary.md)",
    "benchmark": "n 에 따른 반복당 시간을 잰다 (benchmark.csv)",
    "oracle": "기준 사후 기댓값만 계산한다 (ground_truth.csv)",
    "marginals": "1차원 KDE 주변 밀도 곡선을 만든다 (marginals.csv)",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="priorswap", description="prior swapping 실험 도구")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        command = sub.add_parser(name, help=_HELP[name])
        command.add_argument("--config", type=Path, required=True, help="실험 설정 파일 경로")
        command.add_argument("--seed", type=int, default=None, help="experiment.seed 덮어쓰기 (u64)")
        command.add_argument("--out", type=Path, default=None, help="experiment.output_dir 덮어쓰기")
    return parser


def _error_line(code: str, message: str) -> None:
    print(json.dumps({"error": code, "message": message}, ensure_ascii=False), file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None, *, settings: Optional[AppSettings] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = settings or get_settings()
    configure_logging(settings)
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError(f"--seed 는 0 이상 2^64 미만이어야 합니다: {args.seed}")
        config = load_experiment_config(args.config, seed=args.seed, output_dir=args.out)
        out = Path(config.output_dir(settings))
        out.mkdir(parents=True, exist_ok=True)
        logger.info("%s 시작: 설정 %s, 출력 %s", args.command, args.config, out)
        COMMANDS[args.command](config, settings, out)
    except ConfigError as exc:
        _error_line(exc.code, exc.message)
        return 2
    except PriorSwapError as exc:
        _error_line(exc.code, exc.message)
        return 1
    except Exception as exc:  # pragma: no cover - 예상하지 못한 오류도 한 줄로 보고한다
        logger.exception("%s 실패", args.command)
        _error_line("internal_error", f"{type(exc).__name__}: {exc}")
        return 1
    logger.info("%s 완료", args.command)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
