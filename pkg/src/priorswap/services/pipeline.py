"""실험 파이프라인: 거짓 사후분포 단계, 기준값, 방법별 샘플링과 체크포인트 곡선."""

from __future__ import annotations

import logging
import time
import zlib
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from ..config.experiment import ExperimentConfig
from ..config.settings import AppSettings
from ..data.io import read_dataset
from ..data.models import (
    Chain,
    CurvePoint,
    FloatArray,
    GroundTruth,
    LikelihoodModel,
    Method,
    MethodResult,
    PriorSpec,
    SampleSet,
    TestFunction,
)
from ..densities.synthetic import generate_synthetic, train_test_split
from ..errors import InvalidInputError, PriorSwapError
from ..estimators.oracles import held_out_error, long_chain_ground_truth, quadrature_ground_truth
from ..estimators.weights import (
    naive_log_weights,
    posterior_error,
    prior_swap_log_weights,
    semiparametric_log_weights,
    weighted_estimate,
)
from ..posterior.conjugate import ExactGaussianPosterior, conjugate_linear_posterior, supports_conjugate
from ..posterior.parametric import ParametricAlpha, fit_parametric_alpha
from ..posterior.sampling import initial_state, make_posterior_target, sample_false_posterior
from ..posterior.semiparametric import SemiparametricRep, build_semiparametric
from ..samplers.base import TargetDensity
from ..samplers.runner import find_mode, run_sampler
from ..samplers.summary import retained_samples
from ..swap.target import FalsePosteriorRep, make_prior_swap, to_state_samples

logger = logging.getLogger(__name__)

Evaluator = Callable[[FloatArray], Tuple[FloatArray, Optional[float]]]
LogWeights = Callable[[FloatArray], FloatArray]

EXACT = "exact"
PARAMETRIC = "parametric"
SEMIPARAMETRIC = "semiparametric"

_CHAIN_REPRESENTATION: Dict[Method, str] = {
    Method.PRIOR_SWAP_EXACT: EXACT,
    Method.PRIOR_SWAP_PARAMETRIC: PARAMETRIC,
    Method.PRIOR_SWAP_IS: PARAMETRIC,
    Method.PRIOR_SWAP_SEMIPARAMETRIC: SEMIPARAMETRIC,
    Method.PRIOR_SWAP_SEMIPARAMETRIC_IS: PARAMETRIC,
}


def derive_seed(seed: int, *labels: str) -> int:
    """기준 seed 와 이름표로 결정적인 하위 seed 를 만든다."""

    entropy = [int(seed)] + [zlib.crc32(label.encode("utf-8")) for label in labels]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint32)[0])


def checkpoint_counts(
    wall_ns: NDArray[np.int64],
    *,
    mode: str,
    start_samples: int,
    start_ns: int,
) -> List[int]:
    """체크포인트마다 그 시점 이전에 뽑힌 샘플 수. 마지막 값은 항상 전체 길이다."""

    total = int(wall_ns.shape[0])
    counts: List[int] = []
    if mode == "samples":
        count = start_samples
        while count < total:
            counts.append(count)
            count *= 2
    else:
        moment = max(1, int(start_ns))
        final = int(wall_ns[-1]) if total else 0
        while moment < final:
            count = int(np.searchsorted(wall_ns, moment, side="right"))
            if count > 0 and (not counts or count > counts[-1]):
                counts.append(count)
            moment *= 2
    if total and (not counts or counts[-1] != total):
        counts.append(total)
    return counts


@dataclass(eq=False)
class FalseStage:
    """실험마다 한 번 만드는 거짓 사후분포 산출물. 모든 목표 사전분포가 공유한다."""

    samples: Optional[SampleSet] = None
    exact: Optional[ExactGaussianPosterior] = None
    alpha: Optional[ParametricAlpha] = None
    semiparametric: Optional[SemiparametricRep] = None
    sampling_ns: int = 0
    exact_ns: int = 0
    fit_ns: int = 0
    correction_ns: int = 0
    errors: Dict[str, str] = field(default_factory=dict)

    def require(self, component: str) -> None:
        if component in self.errors:
            raise InvalidInputError(f"거짓 사후분포 단계 실패({component}): {self.errors[component]}")

    def representation(self, tag: str) -> Tuple[FalsePosteriorRep, int]:
        """(p̃_f 표현, 그 표현을 만드는 데 든 시간)."""

        if tag == EXACT:
            self.require(EXACT)
            if self.exact is None:
                raise InvalidInputError("prior-swap-exact 는 켤레 사후분포가 있는 모형에서만 쓸 수 있습니다.")
            return self.exact, self.exact_ns
        self.require("samples")
        self.require(PARAMETRIC)
        if tag == PARAMETRIC:
            assert self.alpha is not None
            return self.alpha, self.sampling_ns + self.fit_ns
        self.require(SEMIPARAMETRIC)
        assert self.semiparametric is not None
        return self.semiparametric, self.sampling_ns + self.fit_ns + self.correction_ns


@dataclass(frozen=True, slots=True, eq=False)
class SwapRun:
    """swap 목표 위의 체인 하나. `states` 는 자연 좌표, `wall_ns` 는 상류 단계 시간을 포함한다."""

    chain: Chain
    states: FloatArray
    wall_ns: NDArray[np.int64]
    target: TargetDensity


class ExperimentPipeline:
    """실험 설정 하나에 대한 동기 파이프라인. 스레드에서 `run_method` 를 병렬로 불러도 된다."""

    def __init__(
        self,
        config: ExperimentConfig,
        settings: AppSettings,
        *,
        model: Optional[LikelihoodModel] = None,
        test_model: Optional[LikelihoodModel] = None,
    ) -> None:
        self._config = config
        self._settings = settings
        self._model = model
        self._test_model = test_model
        self._priors = config.target_priors()
        self._false_prior = config.false_prior_spec()
        self._stage: Optional[FalseStage] = None
        self._truths: Dict[str, GroundTruth] = {}
        self._truth_errors: Dict[str, str] = {}
        self._function: Optional[TestFunction] = None

    @property
    def config(self) -> ExperimentConfig:
        return self._config

    @property
    def settings(self) -> AppSettings:
        return self._settings

    @property
    def priors(self) -> Dict[str, PriorSpec]:
        return dict(self._priors)

    @property
    def false_prior(self) -> PriorSpec:
        return self._false_prior

    @property
    def ground_truths(self) -> Dict[str, GroundTruth]:
        return dict(self._truths)

    @property
    def stage(self) -> FalseStage:
        if self._stage is None:
            raise InvalidInputError("거짓 사후분포 단계가 아직 준비되지 않았습니다.")
        return self._stage

    def load_data(self) -> Tuple[LikelihoodModel, Optional[LikelihoodModel]]:
        """(학습 데이터, held-out 데이터). 처음 한 번만 만든다."""

        if self._model is None:
            spec = self._config.model
            if spec.csv is not None:
                full = read_dataset(spec.csv, spec.tag, noise_variance=spec.noise_variance)
            else:
                full = generate_synthetic(
                    spec.tag,
                    spec.n,
                    spec.d,
                    spec.theta_true,
                    self._config.model_seed,
                    noise_variance=spec.noise_variance,
                    observation_sum=spec.observation_sum,
                )
            self._model, self._test_model = train_test_split(
                full, spec.holdout_fraction, derive_seed(self._config.model_seed, "holdout")
            )
            logger.info("데이터 준비: %s n=%d d=%d", spec.tag.value, self._model.n, self._model.dim)
        return self._model, self._test_model

    @property
    def model(self) -> LikelihoodModel:
        return self.load_data()[0]

    def _theta_function(self) -> TestFunction:
        if self._function is None:
            self._function = TestFunction.coordinates(range(self.model.dim))
        return self._function

    def prepare(self, methods: Optional[List[Method]] = None) -> FalseStage:
        """선택된 방법에 필요한 p̃_f 구성요소만 만든다. 구성요소 실패는 기록만 하고 넘어간다."""

        if self._stage is not None:
            return self._stage
        selected = list(methods or self._config.experiment.methods)
        model = self.model
        stage = FalseStage()
        seed = self._config.seed

        needs_samples = any(method is Method.NAIVE_IS or method.uses_parametric_alpha for method in selected)
        needs_exact = Method.PRIOR_SWAP_EXACT in selected
        needs_alpha = any(method.uses_parametric_alpha for method in selected)
        needs_correction = any(
            method in (Method.PRIOR_SWAP_SEMIPARAMETRIC, Method.PRIOR_SWAP_SEMIPARAMETRIC_IS) for method in selected
        )

        if needs_exact:
            started = time.perf_counter_ns()
            try:
                if supports_conjugate(model, self._false_prior):
                    stage.exact = conjugate_linear_posterior(model, self._false_prior)
            except PriorSwapError as exc:
                stage.errors[EXACT] = str(exc)
            stage.exact_ns = time.perf_counter_ns() - started

        if needs_samples:
            started = time.perf_counter_ns()
            try:
                stage.samples = sample_false_posterior(
                    model,
                    self._false_prior,
                    self._config.false_sampler_settings(self._settings),
                    derive_seed(seed, "false-posterior"),
                    use_exact=self._config.false_posterior.exact,
                    size=self._config.false_posterior.samples,
                )
            except PriorSwapError as exc:
                logger.warning("거짓 사후분포 샘플링 실패: %s", exc)
                stage.errors["samples"] = str(exc)
            else:
                stamps = stage.samples.wall_ns
                stage.sampling_ns = int(stamps[-1]) if stamps is not None else time.perf_counter_ns() - started

        if needs_alpha and stage.samples is not None:
            started = time.perf_counter_ns()
            try:
                stage.alpha = fit_parametric_alpha(
                    stage.samples,
                    self._config.pseudo_points(self._settings),
                    model.kind,
                    self._false_prior,
                    model.n,
                    seed=derive_seed(seed, "alpha"),
                    restarts=self._config.false_posterior.restarts or self._settings.fit_restarts,
                    noise_variance=model.noise_variance,
                )
            except PriorSwapError as exc:
                logger.warning("α 적합 실패: %s", exc)
                stage.errors[PARAMETRIC] = str(exc)
            stage.fit_ns = time.perf_counter_ns() - started

        if needs_correction and stage.alpha is not None and stage.samples is not None:
            started = time.perf_counter_ns()
            try:
                stage.semiparametric = build_semiparametric(
                    stage.samples,
                    stage.alpha,
                    bandwidth=self._config.false_posterior.bandwidth,
                    c_b=self._config.false_posterior.bandwidth_constant or self._settings.bandwidth_constant,
                )
            except PriorSwapError as exc:
                stage.errors[SEMIPARAMETRIC] = str(exc)
            stage.correction_ns = time.perf_counter_ns() - started

        self._stage = stage
        logger.info(
            "거짓 사후분포 단계 완료: samples=%s exact=%s k=%s 실패=%s",
            stage.samples.size if stage.samples is not None else None,
            stage.exact is not None,
            stage.alpha.k if stage.alpha is not None else None,
            sorted(stage.errors),
        )
        return stage

    def _default_bounds(self) -> List[float]:
        stage = self._stage
        if stage is not None and stage.samples is not None:
            samples = stage.samples.samples
            center, spread = samples.mean(axis=0), samples.std(axis=0)
        elif stage is not None and stage.exact is not None:
            center, spread = stage.exact.mean, np.sqrt(np.diag(stage.exact.covariance))
        else:
            center, spread = np.zeros(self.model.dim), np.ones(self.model.dim)
        half = 10.0 * np.maximum(spread, 1e-3)
        return np.column_stack([center - half, center + half]).ravel().tolist()

    def compute_ground_truths(self) -> Dict[str, GroundTruth]:
        """목표 사전분포마다 정확히 한 번 계산한다. 실패는 그 목표의 모든 방법에 기록된다."""

        section = self._config.ground_truth
        model = self.model
        for name, prior in self._priors.items():
            if name in self._truths or name in self._truth_errors:
                continue
            try:
                if not prior.is_augmented and supports_conjugate(model, prior) and section.method == "auto":
                    posterior = conjugate_linear_posterior(model, prior)
                    truth = GroundTruth(target=name, mean=posterior.mean, method="exact")
                elif section.method == "quadrature" or (
                    section.method == "auto" and model.dim <= 2 and not prior.is_augmented
                ):
                    truth = quadrature_ground_truth(
                        model,
                        prior,
                        section.bounds or self._default_bounds(),
                        name=name,
                        grid_size=section.grid_size,
                        tolerance=self._settings.quadrature_tolerance,
                    )
                else:
                    truth = long_chain_ground_truth(
                        model,
                        prior,
                        self._config.ground_truth_settings(self._settings),
                        section.seed if section.seed is not None else derive_seed(self._config.seed, "truth", name),
                        name=name,
                    )
            except PriorSwapError as exc:
                logger.error("기준값 계산 실패 (%s): %s", name, exc)
                self._truth_errors[name] = str(exc)
                continue
            self._truths[name] = truth
            logger.info("기준값 %s (%s): %s", name, truth.method, np.round(truth.mean, 6).tolist())
        return dict(self._truths)

    def set_ground_truths(self, truths: Dict[str, GroundTruth]) -> None:
        self._truths.update(truths)

    def _initial(self, target: TargetDensity, prior: PriorSpec) -> FloatArray:
        start = initial_state(self.model, prior)
        stage = self._stage
        if stage is not None and stage.samples is not None:
            start[: self.model.dim] = stage.samples.samples.mean(axis=0)
        elif stage is not None and stage.exact is not None:
            start[: self.model.dim] = stage.exact.mean
        return find_mode(target, start)

    def _run_chain(self, target: TargetDensity, prior: PriorSpec, seed: int, upstream_ns: int) -> SwapRun:
        started = time.perf_counter_ns()
        init = self._initial(target, prior)
        chain = run_sampler(target, self._config.sampler_settings(self._settings), init, seed)
        elapsed = time.perf_counter_ns() - started
        overhead = max(0, elapsed - int(chain.wall_ns[-1]))
        states = to_state_samples(target, chain.samples)
        return SwapRun(chain=chain, states=states, wall_ns=chain.wall_ns + upstream_ns + overhead, target=target)

    def sample_swap(self, name: str, representation: str) -> SwapRun:
        """목표 `name` 에 대해 p̃_f 표현 `representation` 으로 swap 체인을 만든다."""

        prior = self._priors[name]
        rep, upstream = self.stage.representation(representation)
        target = make_prior_swap(rep, prior, self._false_prior)
        run = self._run_chain(target, prior, derive_seed(self._config.seed, "swap", name, representation), upstream)
        logger.info(
            "swap 체인 완료: %s/%s T=%d acceptance=%.3f divergences=%d",
            name,
            representation,
            run.chain.length,
            run.chain.acceptance_rate,
            run.chain.divergences,
        )
        return run

    def sample_direct(self, name: str) -> SwapRun:
        prior = self._priors[name]
        target = make_posterior_target(self.model, prior)
        return self._run_chain(target, prior, derive_seed(self._config.seed, "direct", name), 0)

    def sample_for(self, name: str, method: Method) -> SwapRun:
        if method is Method.DIRECT_MCMC:
            return self.sample_direct(name)
        if method is Method.NAIVE_IS:
            raise InvalidInputError("naive-is 는 체인을 만들지 않습니다.")
        return self.sample_swap(name, _CHAIN_REPRESENTATION[method])

    def _log_weight_function(self, name: str, method: Method) -> Optional[LogWeights]:
        """IS 방법이면 상태 행렬을 비정규화 로그 가중치로 바꾸는 함수, 아니면 None."""

        prior = self._priors[name]
        if method is Method.NAIVE_IS:
            if prior.is_augmented:
                raise InvalidInputError("naive-is 는 증강(계층) 목표 사전분포를 지원하지 않습니다.")
            false_prior = self._false_prior
            return lambda states: naive_log_weights(states, prior, false_prior)
        if method is Method.PRIOR_SWAP_IS:
            stage = self.stage
            stage.require("samples")
            stage.require(PARAMETRIC)
            alpha = stage.alpha
            assert alpha is not None
            model, false_prior, chunk = self.model, self._false_prior, self._settings.likelihood_chunk_size
            return lambda states: prior_swap_log_weights(states, model, false_prior, alpha, chunk_elements=chunk)
        if method is Method.PRIOR_SWAP_SEMIPARAMETRIC_IS:
            stage = self.stage
            stage.require(SEMIPARAMETRIC)
            rep = stage.semiparametric
            assert rep is not None
            return lambda states: semiparametric_log_weights(states, rep)
        return None

    def _evaluator(self, method: Method, weigh: Optional[LogWeights]) -> Evaluator:
        function = self._theta_function()
        if weigh is None:

            def mean(states: FloatArray) -> Tuple[FloatArray, Optional[float]]:
                return function(states).mean(axis=0), None

            return mean

        def weighted(states: FloatArray) -> Tuple[FloatArray, Optional[float]]:
            result = weighted_estimate(states, weigh(states), function, method.value)
            return result.estimate, result.ess

        return weighted

    def _trace(
        self,
        states: FloatArray,
        wall_ns: NDArray[np.int64],
        evaluate: Evaluator,
        reference: FloatArray,
    ) -> Tuple[List[CurvePoint], FloatArray, Optional[float], int]:
        """체크포인트마다 이전 샘플만 남기고 앞 burn-in 을 버린 뒤 보정 시간을 더해 오차를 기록한다."""

        burn_in = self._config.burn_in(self._settings)
        counts = checkpoint_counts(
            wall_ns,
            mode=self._config.experiment.checkpoints,
            start_samples=self._settings.checkpoint_start_samples,
            start_ns=int(self._settings.checkpoint_start_ms * 1_000_000),
        )
        curve: List[CurvePoint] = []
        latest = 0
        estimate: FloatArray = np.zeros_like(reference)
        ess: Optional[float] = None
        retained_count = 0
        for index, count in enumerate(counts):
            retained = retained_samples(states[:count], burn_in)
            started = time.perf_counter_ns()
            estimate, ess = evaluate(retained)
            correction = time.perf_counter_ns() - started
            latest = max(latest, int(wall_ns[count - 1]) + correction)
            retained_count = retained.shape[0]
            curve.append(
                CurvePoint(
                    checkpoint=index,
                    retained=retained_count,
                    wall_ns=latest,
                    posterior_error=posterior_error(estimate, reference),
                )
            )
        return curve, estimate, ess, retained_count

    def run_method(self, name: str, method: Method) -> MethodResult:
        """한 (목표, 방법) 조합을 실행한다. 어떤 단계의 오류든 결과의 `error` 로 남기고 예외를 올리지 않는다."""

        try:
            if name in self._truth_errors:
                raise InvalidInputError(f"기준값이 없습니다: {self._truth_errors[name]}")
            truth = self._truths.get(name)
            if truth is None:
                raise InvalidInputError(f"기준값이 계산되지 않았습니다: {name}")
            reference = np.asarray(truth.mean, dtype=float)
            weigh = self._log_weight_function(name, method)
            evaluate = self._evaluator(method, weigh)

            run: Optional[SwapRun] = None
            false_samples = 0
            if method is Method.NAIVE_IS:
                stage = self.stage
                stage.require("samples")
                assert stage.samples is not None
                states = stage.samples.samples
                wall = stage.samples.wall_ns
                if wall is None:
                    wall = np.full(stage.samples.size, stage.sampling_ns, dtype=np.int64)
                false_samples = stage.samples.size
            else:
                run = self.sample_for(name, method)
                states, wall = run.states, run.wall_ns
                if method is not Method.DIRECT_MCMC and self._stage is not None and self._stage.samples is not None:
                    false_samples = self._stage.samples.size

            curve, estimate, ess, retained = self._trace(states, wall, evaluate, reference)
            log_weights = weigh(states) if weigh is not None else None
            held_out = None
            _, test_model = self.load_data()
            if test_model is not None:
                held_out = held_out_error(test_model, estimate)
            final = curve[-1]
            logger.info(
                "%s/%s 완료: error=%.4g wall=%.1fms ess=%s",
                name,
                method.value,
                final.posterior_error,
                final.wall_ns / 1e6,
                f"{ess:.1f}" if ess is not None else "-",
            )
            return MethodResult(
                target=name,
                method=method,
                curve=curve,
                estimate=estimate,
                posterior_error=final.posterior_error,
                samples=retained,
                false_samples=false_samples,
                wall_ns=final.wall_ns,
                ess=ess,
                acceptance=run.chain.acceptance_rate if run is not None else None,
                divergences=run.chain.divergences if run is not None else 0,
                held_out_error=held_out,
                chain=run.chain if run is not None else None,
                log_weights=log_weights,
            )
        except Exception as exc:
            logger.error("%s/%s 실패: %s", name, method.value, exc)
            return MethodResult(target=name, method=method, error=f"{type(exc).__name__}: {exc}")


__all__ = [
    "EXACT",
    "PARAMETRIC",
    "SEMIPARAMETRIC",
    "ExperimentPipeline",
    "FalseStage",
    "SwapRun",
    "checkpoint_counts",
    "derive_seed",
]
