import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from priorswap.config.experiment import build_experiment_config, parse_flat_config
from priorswap.config.settings import AppSettings
from priorswap.data.models import GroundTruth, Method
from priorswap.errors import InvalidInputError
from priorswap.samplers import monte_carlo_standard_error, retained_samples
from priorswap.services.benchmark import benchmark_timing
from priorswap.services.marginals import central_mass, kde_marginal, kde_marginals, make_grid
from priorswap.services.pipeline import ExperimentPipeline, checkpoint_counts, derive_seed

SWAPPED_MEAN = (4.0 + math.sqrt(2.0)) / 3.0

RUNNING_EXAMPLE = """
experiment.name = running
experiment.seed = 7
experiment.methods = naive-is, prior-swap-exact, prior-swap-parametric, direct-mcmc
model.tag = normal_mean
model.n = 3
model.observation_sum = 4
false_prior.family = normal
target.shifted.family = normal
target.shifted.location = 0.2
target.laplace.family = laplace
target.laplace.location = 10
target.laplace.scale = 0.7071067811865476
sampler.T = 2000
false_posterior.T_f = 500
false_posterior.restarts = 2
"""


def build_config(text: str = RUNNING_EXAMPLE):
    return build_experiment_config(parse_flat_config(text))


def build_settings(tmp_path: Path, **overrides) -> AppSettings:
    values = {
        "output_dir": tmp_path,
        "database_url": None,
        "mh_pilot_steps": 200,
        "checkpoint_start_samples": 64,
        "ground_truth_steps": 5_000,
    }
    values.update(overrides)
    return AppSettings(**values)


def test_derive_seed_is_deterministic_and_label_sensitive() -> None:
    assert derive_seed(7, "swap", "a") == derive_seed(7, "swap", "a")
    assert derive_seed(7, "swap", "a") != derive_seed(7, "swap", "b")
    assert derive_seed(7, "swap") != derive_seed(8, "swap")
    assert 0 <= derive_seed(2**64 - 1, "x") < 2**32


def test_sample_checkpoints_double_and_end_at_total() -> None:
    stamps = np.arange(1, 1_001, dtype=np.int64)
    assert checkpoint_counts(stamps, mode="samples", start_samples=64, start_ns=1) == [64, 128, 256, 512, 1_000]
    assert checkpoint_counts(stamps[:512], mode="samples", start_samples=64, start_ns=1) == [64, 128, 256, 512]
    assert checkpoint_counts(stamps[:10], mode="samples", start_samples=64, start_ns=1) == [10]


def test_wall_checkpoints_count_samples_drawn_before_each_moment() -> None:
    stamps = np.arange(1, 101, dtype=np.int64) * 1_000_000
    counts = checkpoint_counts(stamps, mode="wall", start_samples=64, start_ns=10_000_000)
    assert counts == [10, 20, 40, 80, 100]


def test_wall_checkpoints_advance_from_a_zero_start() -> None:
    stamps = np.arange(1, 50, dtype=np.int64) * 1_000
    counts = checkpoint_counts(stamps, mode="wall", start_samples=64, start_ns=0)
    assert counts[-1] == 49
    assert counts == sorted(set(counts))


def test_ground_truths_use_exact_and_quadrature(tmp_path: Path) -> None:
    pipeline = ExperimentPipeline(build_config(), build_settings(tmp_path))
    pipeline.prepare()
    truths = pipeline.compute_ground_truths()
    assert truths["shifted"].method == "exact"
    assert truths["shifted"].mean[0] == pytest.approx(1.05)
    assert truths["laplace"].method == "quadrature"
    assert truths["laplace"].mean[0] == pytest.approx(SWAPPED_MEAN, abs=1e-4)


def test_false_stage_shares_exact_draws_across_targets(tmp_path: Path) -> None:
    pipeline = ExperimentPipeline(build_config(), build_settings(tmp_path))
    stage = pipeline.prepare()
    assert stage.samples is not None and stage.samples.size == 500
    assert stage.exact is not None
    assert stage.alpha is not None and stage.alpha.k == 10
    assert stage.semiparametric is None
    assert stage.errors == {}
    assert pipeline.prepare() is stage


@pytest.mark.parametrize(
    ("target", "method", "tolerance"),
    [
        ("shifted", Method.NAIVE_IS, 0.1),
        ("laplace", Method.PRIOR_SWAP_EXACT, 0.15),
        ("laplace", Method.PRIOR_SWAP_PARAMETRIC, 0.15),
        ("laplace", Method.DIRECT_MCMC, 0.15),
    ],
)
def test_methods_reach_ground_truth(tmp_path: Path, target: str, method: Method, tolerance: float) -> None:
    pipeline = ExperimentPipeline(build_config(), build_settings(tmp_path))
    pipeline.prepare()
    pipeline.compute_ground_truths()

    result = pipeline.run_method(target, method)

    assert result.succeeded, result.error
    assert result.posterior_error is not None and result.posterior_error < tolerance
    walls = [point.wall_ns for point in result.curve]
    assert walls == sorted(walls)
    assert result.curve[-1].posterior_error == result.posterior_error
    if method is Method.NAIVE_IS:
        assert result.chain is None
        assert result.samples == 375
        assert result.false_samples == 500
        assert result.ess is not None and result.ess > 100
    else:
        assert result.chain is not None and result.chain.length == 2_000
        assert [point.retained for point in result.curve][-1] == 1_500
        assert len(result.curve) == 6


def test_direct_mcmc_reports_no_false_samples(tmp_path: Path) -> None:
    pipeline = ExperimentPipeline(build_config(), build_settings(tmp_path))
    pipeline.prepare()
    pipeline.compute_ground_truths()
    result = pipeline.run_method("shifted", Method.DIRECT_MCMC)
    assert result.succeeded
    assert result.false_samples == 0
    assert result.acceptance is not None and 0.0 < result.acceptance < 1.0


def test_naive_is_rejects_hierarchical_target(tmp_path: Path) -> None:
    text = RUNNING_EXAMPLE + "target.hier.family = hierarchical_normal_gamma\ntarget.hier.shape = 2\n"
    pipeline = ExperimentPipeline(build_config(text), build_settings(tmp_path))
    pipeline.prepare([Method.NAIVE_IS])
    pipeline.set_ground_truths({"hier": GroundTruth(target="hier", mean=np.array([1.0]), method="fixed")})

    result = pipeline.run_method("hier", Method.NAIVE_IS)

    assert not result.succeeded
    assert result.error is not None and result.error.startswith("InvalidInputError")
    assert result.curve == []


def test_hierarchical_swap_chain_matches_direct_joint_chain(tmp_path: Path) -> None:
    text = RUNNING_EXAMPLE + "target.hier.family = hierarchical_normal_gamma\ntarget.hier.shape = 2\n"
    settings = build_settings(tmp_path, ground_truth_steps=40_000)
    pipeline = ExperimentPipeline(build_config(text), settings)
    pipeline.prepare([Method.PRIOR_SWAP_EXACT])
    truth = pipeline.compute_ground_truths()["hier"]
    assert truth.method == "long-chain" and truth.standard_error is not None

    result = pipeline.run_method("hier", Method.PRIOR_SWAP_EXACT)

    assert result.succeeded, result.error
    assert result.chain is not None and result.chain.dim == 2
    assert result.estimate is not None and result.estimate.shape == (1,)
    burn_in = pipeline.config.sampler_settings(settings).burn_in_fraction
    kept = retained_samples(result.chain.samples[:, :1], burn_in)
    spread = math.sqrt(float(truth.standard_error[0]) ** 2 + float(monte_carlo_standard_error(kept)[0]) ** 2)
    assert result.posterior_error is not None and result.posterior_error < 4.0 * spread + 1e-3


def test_exact_swap_without_conjugate_posterior_is_error_result(tmp_path: Path) -> None:
    text = """
experiment.seed = 3
experiment.methods = prior-swap-exact
model.tag = logistic_regression
model.n = 50
model.d = 2
false_prior.family = normal
target.sparse.family = laplace
sampler.T = 200
"""
    pipeline = ExperimentPipeline(build_config(text), build_settings(tmp_path))
    pipeline.prepare()
    pipeline.set_ground_truths({"sparse": GroundTruth(target="sparse", mean=np.zeros(2), method="fixed")})

    result = pipeline.run_method("sparse", Method.PRIOR_SWAP_EXACT)

    assert not result.succeeded
    assert "prior-swap-exact" in (result.error or "")


def test_missing_ground_truth_is_error_result(tmp_path: Path) -> None:
    pipeline = ExperimentPipeline(build_config(), build_settings(tmp_path))
    result = pipeline.run_method("laplace", Method.PRIOR_SWAP_EXACT)
    assert not result.succeeded
    assert result.method is Method.PRIOR_SWAP_EXACT


def test_holdout_split_gives_held_out_error(tmp_path: Path) -> None:
    text = """
experiment.seed = 5
experiment.methods = direct-mcmc
model.tag = linear_regression
model.n = 80
model.d = 2
model.theta_true = 1.0, -0.5
model.holdout_fraction = 0.25
false_prior.family = normal
target.wide.family = normal
target.wide.variance = 4
sampler.T = 1000
"""
    pipeline = ExperimentPipeline(build_config(text), build_settings(tmp_path))
    train, test = pipeline.load_data()
    assert train.n == 60 and test is not None and test.n == 20
    pipeline.prepare()
    pipeline.compute_ground_truths()

    result = pipeline.run_method("wide", Method.DIRECT_MCMC)

    assert result.succeeded
    assert result.held_out_error is not None and 0.0 < result.held_out_error < 3.0


def test_make_grid_validates_arguments() -> None:
    np.testing.assert_allclose(make_grid(-1.0, 1.0, 5), [-1.0, -0.5, 0.0, 0.5, 1.0])
    with pytest.raises(InvalidInputError):
        make_grid(1.0, -1.0, 5)
    with pytest.raises(InvalidInputError):
        make_grid(-1.0, 1.0, 1)


def test_constant_samples_fall_back_to_spike() -> None:
    grid = make_grid(-1.0, 1.0, 201)
    density = kde_marginal(np.zeros(50), grid)
    assert np.argmax(density) == 100
    assert np.all(np.isfinite(density))


def test_sparse_marginal_concentrates_near_zero() -> None:
    rng = np.random.default_rng(0)
    grid = make_grid(-3.0, 3.0, 601)
    frame = kde_marginals(
        {
            "sparse": rng.laplace(0.0, 0.05, size=(4_000, 2)),
            "wide": rng.normal(0.0, 1.0, size=(4_000, 2)),
        },
        1,
        grid,
    )
    assert list(frame.columns) == ["grid", "density_sparse", "density_wide"]
    assert central_mass(frame, "sparse", 0.2) > 0.8
    assert central_mass(frame, "wide", 0.2) < 0.3
    with pytest.raises(InvalidInputError):
        kde_marginals({"sparse": np.zeros((10, 2))}, 2, grid)
    assert isinstance(frame, pd.DataFrame)


BENCHMARK_EXAMPLE = """
experiment.seed = 11
experiment.methods = direct-mcmc, prior-swap-parametric
model.tag = logistic_regression
model.n = 1000
model.d = 2
model.theta_true = 1.0, -1.0
false_prior.family = normal
target.sparse.family = laplace
false_posterior.k = 5
benchmark.steps = 1000
"""


def test_swap_iteration_cost_is_flat_in_data_size(tmp_path: Path) -> None:
    config = build_config(BENCHMARK_EXAMPLE)
    settings = build_settings(tmp_path)
    runs = [benchmark_timing(config, settings, [1_000, 10_000, 100_000]) for _ in range(2)]
    # 두 번 잰 값 중 작은 쪽
    timing = pd.concat(runs).groupby(["method", "n"])["per_iteration_ns"].min()
    swap = timing.loc[Method.PRIOR_SWAP_PARAMETRIC.value]
    direct = timing.loc[Method.DIRECT_MCMC.value]
    assert swap.max() / swap.min() < 2.0
    assert direct.loc[100_000] / direct.loc[1_000] > 10.0
