from pathlib import Path

import numpy as np
import pytest

from priorswap.config.experiment import build_experiment_config, load_experiment_config, parse_flat_config
from priorswap.config.settings import AppSettings
from priorswap.data.models import Method, ModelKind, PriorFamily
from priorswap.errors import ConfigError
from priorswap.samplers import SamplerKind

RUNNING_EXAMPLE = """
# 1차원 예제
experiment.name = running
experiment.seed = 7
experiment.methods = naive-is, prior-swap-exact
model.tag = normal_mean
model.n = 3
model.observation_sum = 4
false_prior.family = normal
target.laplace.family = laplace
target.laplace.location = 10
target.laplace.scale = 0.7071067811865476   # 분산 1
sampler.T = 2000
false_posterior.T_f = 500
"""


def write_config(tmp_path: Path, text: str = RUNNING_EXAMPLE) -> Path:
    path = tmp_path / "experiment.cfg"
    path.write_text(text, encoding="utf-8")
    return path


def build_settings(tmp_path: Path) -> AppSettings:
    return AppSettings(output_dir=tmp_path / "runs", database_url=None, worker_slots=2)


def test_parse_flat_config_builds_nested_sections() -> None:
    data = parse_flat_config("a.b = 1\na.c.d = x, y  # comment\n\n# only comment\ne = 2")
    assert data == {"a": {"b": "1", "c": {"d": "x, y"}}, "e": "2"}


@pytest.mark.parametrize(
    "text",
    [
        "experiment.seed 7",
        "experiment..seed = 7",
        "experiment = 1\nexperiment.seed = 7",
        "experiment.seed = 1\nexperiment.seed = 2",
    ],
)
def test_parse_flat_config_rejects_malformed_lines(text: str) -> None:
    with pytest.raises(ConfigError):
        parse_flat_config(text)


def test_load_running_example(tmp_path: Path) -> None:
    config = load_experiment_config(write_config(tmp_path))
    settings = build_settings(tmp_path)

    assert config.seed == 7
    assert config.model_seed == 7
    assert config.experiment.methods == [Method.NAIVE_IS, Method.PRIOR_SWAP_EXACT]
    assert config.model.tag is ModelKind.NORMAL_MEAN
    assert config.model.observation_sum == [4.0]
    priors = config.target_priors()
    assert priors["laplace"].family is PriorFamily.LAPLACE
    assert priors["laplace"].location == 10.0
    assert config.false_prior_spec().family is PriorFamily.NORMAL
    assert config.output_dir(settings) == tmp_path / "runs"
    assert config.worker_slots(settings) == 2
    assert config.describe()["sampler"]["T"] == 2000


def test_sampler_settings_follow_config_and_defaults(tmp_path: Path) -> None:
    text = RUNNING_EXAMPLE + "sampler.kind = hmc\nsampler.hmc.step_size = 0.05\nsampler.burn_in = 0.5\n"
    config = load_experiment_config(write_config(tmp_path, text))
    settings = build_settings(tmp_path)

    sampler = config.sampler_settings(settings)
    assert sampler.kind is SamplerKind.HMC
    assert sampler.n_samples == 2000
    assert sampler.step_size == 0.05
    assert sampler.burn_in_fraction == 0.5
    assert sampler.warmup == settings.hmc_warmup_steps
    assert config.false_sampler_settings(settings).n_samples == 1000
    assert config.ground_truth_settings(settings).n_samples == settings.ground_truth_steps
    assert config.pseudo_points(settings) == 10


def test_pseudo_points_never_exceed_false_samples(tmp_path: Path) -> None:
    text = RUNNING_EXAMPLE.replace("false_posterior.T_f = 500", "false_posterior.T_f = 4\nfalse_posterior.k = 20")
    config = load_experiment_config(write_config(tmp_path, text))
    assert config.pseudo_points(build_settings(tmp_path)) == 4


def test_cli_overrides_replace_seed_and_output(tmp_path: Path) -> None:
    config = load_experiment_config(write_config(tmp_path), seed=2**64 - 1, output_dir=tmp_path / "other")
    assert config.seed == 2**64 - 1
    assert config.output_dir(build_settings(tmp_path)) == tmp_path / "other"


def test_missing_seed_is_config_error(tmp_path: Path) -> None:
    text = RUNNING_EXAMPLE.replace("experiment.seed = 7\n", "")
    with pytest.raises(ConfigError) as excinfo:
        load_experiment_config(write_config(tmp_path, text))
    assert "experiment.seed" in excinfo.value.message
    assert excinfo.value.code == "config_error"


def test_seed_can_come_from_command_line(tmp_path: Path) -> None:
    text = RUNNING_EXAMPLE.replace("experiment.seed = 7\n", "")
    assert load_experiment_config(write_config(tmp_path, text), seed=11).seed == 11


@pytest.mark.parametrize(
    ("old", "new"),
    [
        ("experiment.methods = naive-is, prior-swap-exact", "experiment.methods = "),
        ("experiment.methods = naive-is, prior-swap-exact", "experiment.methods = magic"),
        ("sampler.T = 2000", "sampler.T = 2000\nsampler.unknown = 1"),
        ("model.tag = normal_mean", "model.tag = poisson"),
        ("false_prior.family = normal", "false_prior.family = hierarchical_normal_gamma"),
        ("model.observation_sum = 4", "model.observation_sum = 4, 5, 6\nmodel.d = 2"),
        ("sampler.T = 2000", "sampler.T = 0"),
    ],
)
def test_invalid_values_are_config_errors(tmp_path: Path, old: str, new: str) -> None:
    with pytest.raises(ConfigError):
        load_experiment_config(write_config(tmp_path, RUNNING_EXAMPLE.replace(old, new)))


def test_missing_targets_is_config_error(tmp_path: Path) -> None:
    lines = [line for line in RUNNING_EXAMPLE.splitlines() if not line.startswith("target.")]
    with pytest.raises(ConfigError):
        load_experiment_config(write_config(tmp_path, "\n".join(lines)))


def test_missing_config_file(tmp_path: Path) -> None:
    with pytest.raises(ConfigError):
        load_experiment_config(tmp_path / "absent.cfg")


def test_relative_csv_is_resolved_against_config(tmp_path: Path) -> None:
    (tmp_path / "data.csv").write_text("x_0\n1.0\n", encoding="utf-8")
    config = load_experiment_config(write_config(tmp_path, RUNNING_EXAMPLE + "model.csv = data.csv\n"))
    assert config.model.csv == (tmp_path / "data.csv").resolve()


def test_missing_csv_is_config_error(tmp_path: Path) -> None:
    with pytest.raises(ConfigError):
        load_experiment_config(write_config(tmp_path, RUNNING_EXAMPLE + "model.csv = nowhere.csv\n"))


def test_benchmark_grid_and_marginal_grid() -> None:
    base = parse_flat_config(RUNNING_EXAMPLE)
    base["benchmark"] = {"n_grid": ""}
    assert build_experiment_config(base).benchmark.n_grid == []
    base["marginals"] = {"grid": "1, 0, 10"}
    with pytest.raises(ConfigError):
        build_experiment_config(base)


def test_very_sparse_and_vector_priors() -> None:
    base = parse_flat_config(RUNNING_EXAMPLE)
    base["model"]["d"] = "2"
    base["model"]["observation_sum"] = "4, 2"
    base["target"] = {
        "sparse": {"family": "very_sparse", "scale": "0.5", "normalized": "false"},
        "heavy": {"family": "student_t", "location": "0, 1", "scale": "1, 2", "dof": "4"},
    }
    priors = build_experiment_config(base).target_priors()
    assert priors["sparse"].scale == 0.5 and not priors["sparse"].normalized
    assert list(priors["heavy"].location) == [0.0, 1.0]
    assert priors["heavy"].dof == 4.0


def _two_dimensional_config(covariance: str, *, family: str = "normal", d: str = "2") -> dict:
    base = parse_flat_config(RUNNING_EXAMPLE)
    base["model"]["d"] = d
    base["model"]["observation_sum"] = "4, 2"
    base["false_prior"] = {"family": family, "location": "0, 0", "covariance": covariance}
    return base


def test_normal_prior_covariance_matrix() -> None:
    config = build_experiment_config(_two_dimensional_config("2, 0.5, 0.5, 1"))
    spec = config.false_prior.to_spec()
    assert spec.covariance is not None and spec.covariance.shape == (2, 2)
    np.testing.assert_allclose(spec.covariance, [[2.0, 0.5], [0.5, 1.0]])
    assert config.false_prior.dimension == 2


@pytest.mark.parametrize(
    ("covariance", "family", "d"),
    [
        ("1, 0, 1", "normal", "2"),
        ("1, 0, 0, 1", "laplace", "2"),
        ("1, 2, 2, 1", "normal", "2"),
        ("1, 0, 0, 1", "normal", "3"),
    ],
)
def test_invalid_covariance_is_config_error(covariance: str, family: str, d: str) -> None:
    base = _two_dimensional_config(covariance, family=family, d=d)
    if d == "3":
        base["model"]["observation_sum"] = "4, 2, 1"
    with pytest.raises(ConfigError):
        build_experiment_config(base)
