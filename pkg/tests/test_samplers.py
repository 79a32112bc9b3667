import math

import numpy as np
import pytest

from priorswap.errors import InvalidInputError, InvalidStartError
from priorswap.samplers import (
    FunctionTarget,
    LogTransformedTarget,
    SamplerKind,
    SamplerSettings,
    chain_summary,
    find_mode,
    hmc_sample,
    langevin_sample,
    leapfrog,
    mh_sample,
    monte_carlo_standard_error,
    retained_samples,
    run_chains,
    run_sampler,
)


def gaussian_target(mean=(0.0,), variance=(1.0,)) -> FunctionTarget:
    mu = np.asarray(mean, dtype=float)
    var = np.asarray(variance, dtype=float)
    return FunctionTarget(
        log_fn=lambda theta: float(-0.5 * np.sum((theta - mu) ** 2 / var)),
        dimension=mu.size,
        grad_fn=lambda theta: -(theta - mu) / var,
    )


def half_line_target() -> FunctionTarget:
    return FunctionTarget(
        log_fn=lambda theta: -math.inf if theta[0] < 0 else -float(theta[0]),
        dimension=1,
    )


def test_mh_recovers_standard_normal_moments() -> None:
    chain = mh_sample(gaussian_target(), 2.4, 40_000, [0.0], seed=1)
    kept = retained_samples(chain)
    assert abs(kept.mean()) < 0.06
    assert abs(kept.var() - 1.0) < 0.1
    assert 0.2 < chain.acceptance_rate < 0.7
    assert chain.config["sampler"] == "mh"


def test_mh_is_deterministic_for_seed() -> None:
    first = mh_sample(gaussian_target(), 1.0, 500, [0.3], seed=42)
    second = mh_sample(gaussian_target(), 1.0, 500, [0.3], seed=42)
    other = mh_sample(gaussian_target(), 1.0, 500, [0.3], seed=43)
    np.testing.assert_array_equal(first.samples, second.samples)
    np.testing.assert_array_equal(first.accepted, second.accepted)
    assert not np.array_equal(first.samples, other.samples)


def test_mh_rejects_proposals_outside_support() -> None:
    chain = mh_sample(half_line_target(), 1.0, 2_000, [1.0], seed=0)
    assert np.all(chain.samples >= 0.0)
    assert not np.all(chain.accepted)


def test_mh_wall_stamps_are_monotone() -> None:
    chain = mh_sample(gaussian_target(), 1.0, 200, [0.0], seed=0)
    assert chain.wall_ns.shape == (200,)
    assert np.all(np.diff(chain.wall_ns) >= 0)


def test_mh_with_zero_proposal_std_is_constant_chain() -> None:
    chain = mh_sample(gaussian_target(), 0.0, 500, [0.7], seed=5)
    assert np.all(chain.samples == 0.7)
    assert chain.acceptance_rate == 1.0


def three_cell_target(weights=(0.2, 0.3, 0.5)) -> FunctionTarget:
    """셀 [-0.5, 0.5), [0.5, 1.5), [1.5, 2.5) 위의 계단 밀도. 셀 질량이 `weights` 이다."""

    log_weights = np.log(np.asarray(weights, dtype=float))

    def log_fn(theta: np.ndarray) -> float:
        cell = math.floor(float(theta[0]) + 0.5)
        return float(log_weights[cell]) if 0 <= cell < len(log_weights) else -math.inf

    return FunctionTarget(log_fn=log_fn, dimension=1)


def test_mh_balances_transitions_between_cells() -> None:
    weights = np.array([0.2, 0.3, 0.5])
    chain = mh_sample(three_cell_target(weights), 1.0, 100_000, [1.0], seed=8)
    cells = np.floor(chain.samples[:, 0] + 0.5).astype(int)
    occupancy = np.bincount(cells, minlength=3) / cells.size
    np.testing.assert_allclose(occupancy, weights, atol=0.02)
    for a, b in ((0, 1), (0, 2), (1, 2)):
        forward = int(np.sum((cells[:-1] == a) & (cells[1:] == b)))
        backward = int(np.sum((cells[:-1] == b) & (cells[1:] == a)))
        assert forward > 100
        assert abs(forward - backward) <= 3.0 * math.sqrt(forward + backward) + 1.0


def test_hmc_energy_error_vanishes_with_step_size() -> None:
    target = gaussian_target()
    chain = hmc_sample(target, 1e-3, 20, 2_000, [0.5], seed=6)
    assert chain.energy_change is not None
    assert np.mean(np.abs(chain.energy_change)) < 1e-4
    assert chain.acceptance_rate > 0.99

    acceptance = []
    for step_size in (1e-1, 1e-2, 1e-3):
        energy = hmc_sample(target, step_size, 20, 2_000, [0.5], seed=6).energy_change
        acceptance.append(float(np.mean(np.minimum(1.0, np.exp(-energy)))))
    assert acceptance[0] <= acceptance[1] <= acceptance[2]


def test_invalid_start_is_rejected() -> None:
    with pytest.raises(InvalidStartError):
        mh_sample(half_line_target(), 1.0, 10, [-1.0], seed=0)
    target = FunctionTarget(
        log_fn=lambda theta: -math.inf,
        dimension=1,
        grad_fn=lambda theta: np.zeros(1),
    )
    with pytest.raises(InvalidStartError):
        hmc_sample(target, 0.1, 5, 10, [0.0], seed=0)


def test_hmc_recovers_gaussian_moments() -> None:
    target = gaussian_target(mean=(1.0, -2.0), variance=(0.5, 2.0))
    chain = hmc_sample(target, 0.3, 10, 6_000, [1.0, -2.0], seed=2)
    kept = retained_samples(chain)
    np.testing.assert_allclose(kept.mean(axis=0), [1.0, -2.0], atol=0.1)
    np.testing.assert_allclose(kept.var(axis=0), [0.5, 2.0], rtol=0.15)
    assert chain.divergences == 0
    assert chain.energy_change is not None and chain.energy_change.shape == (6_000,)


def test_hmc_is_deterministic_for_seed() -> None:
    target = gaussian_target(mean=(0.0, 0.0), variance=(1.0, 1.0))
    first = hmc_sample(target, None, 5, 300, [0.5, 0.5], seed=9, warmup=100)
    second = hmc_sample(target, None, 5, 300, [0.5, 0.5], seed=9, warmup=100)
    np.testing.assert_array_equal(first.samples, second.samples)
    assert first.config["step_size"] == second.config["step_size"]


def test_hmc_requires_gradient() -> None:
    with pytest.raises(InvalidInputError):
        hmc_sample(half_line_target(), 0.1, 5, 10, [1.0], seed=0)


def test_langevin_is_single_leapfrog_step() -> None:
    chain = langevin_sample(gaussian_target(), None, 2_000, [0.0], seed=4, warmup=200)
    assert chain.config["n_leapfrog"] == 1
    assert chain.config["sampler"] == "langevin"
    assert chain.acceptance_rate > 0.3


def test_leapfrog_is_reversible() -> None:
    target = gaussian_target(mean=(0.5, -1.0, 2.0), variance=(1.0, 0.3, 4.0))
    theta = np.array([0.1, 0.2, 0.3])
    momentum = np.array([1.0, -0.5, 0.25])
    forward = leapfrog(target.log_density_and_gradient, theta, momentum, 0.05, 25)
    backward = leapfrog(target.log_density_and_gradient, forward.theta, -forward.momentum, 0.05, 25)
    assert forward.finite and backward.finite
    np.testing.assert_allclose(backward.theta, theta, atol=1e-10)
    np.testing.assert_allclose(-backward.momentum, momentum, atol=1e-10)


def test_leapfrog_stops_on_non_finite_density() -> None:
    target = FunctionTarget(
        log_fn=lambda theta: -math.inf if theta[0] > 1.0 else -0.5 * float(theta[0] ** 2),
        dimension=1,
        grad_fn=lambda theta: -theta,
    )
    trajectory = leapfrog(target.log_density_and_gradient, [0.9], [5.0], 0.1, 10)
    assert not trajectory.finite


def test_run_sampler_dispatches_by_kind() -> None:
    target = gaussian_target()
    mh = run_sampler(target, SamplerSettings(kind=SamplerKind.MH, n_samples=300, pilot_steps=100), [0.0], seed=1)
    hmc = run_sampler(
        target,
        SamplerSettings(kind=SamplerKind.HMC, n_samples=300, step_size=0.2, n_leapfrog=5),
        [0.0],
        seed=1,
    )
    assert mh.config["sampler"] == "mh"
    assert len(mh.config["proposal_std"]) == 1
    assert hmc.config["sampler"] == "hmc"
    assert mh.length == hmc.length == 300


def test_sampler_settings_validation() -> None:
    with pytest.raises(InvalidInputError):
        SamplerSettings(n_samples=0)
    with pytest.raises(InvalidInputError):
        SamplerSettings(burn_in_fraction=1.0)
    assert SamplerSettings().replace(n_samples=5).n_samples == 5


def test_run_chains_keeps_seed_order() -> None:
    seeds = [3, 1, 2]
    chains = run_chains(lambda seed: mh_sample(gaussian_target(), 1.0, 50, [0.0], seed), seeds, max_workers=3)
    assert [chain.seed for chain in chains] == seeds


def test_find_mode_locates_gaussian_mean() -> None:
    target = gaussian_target(mean=(2.0, -3.0), variance=(1.0, 0.5))
    np.testing.assert_allclose(find_mode(target, [0.0, 0.0]), [2.0, -3.0], atol=1e-4)


def test_burn_in_drops_floor_fraction() -> None:
    samples = np.arange(10, dtype=float)
    np.testing.assert_array_equal(retained_samples(samples)[:, 0], np.arange(2, 10))
    summary = chain_summary(samples, 0.5)
    assert summary.retained == 5
    assert summary.mean[0] == pytest.approx(7.0)
    with pytest.raises(InvalidInputError):
        retained_samples(samples, 1.0)


def test_batch_means_standard_error_for_independent_draws() -> None:
    draws = np.random.default_rng(0).standard_normal((40_000, 1))
    error = monte_carlo_standard_error(draws)
    assert error[0] == pytest.approx(1.0 / math.sqrt(40_000), rel=0.25)
    assert monte_carlo_standard_error(np.zeros((1, 2)))[0] == math.inf


def test_log_transform_adds_jacobian() -> None:
    shape = 2.5
    base = FunctionTarget(
        log_fn=lambda theta: (shape - 1.0) * math.log(theta[0]) - theta[0] if theta[0] > 0 else -math.inf,
        dimension=1,
        grad_fn=lambda theta: np.array([(shape - 1.0) / theta[0] - 1.0]),
    )
    target = LogTransformedTarget(base, [0])
    for z in (-1.0, 0.0, 0.7, 1.5):
        value, grad = target.log_density_and_gradient(np.array([z]))
        assert value == pytest.approx(shape * z - math.exp(z))
        assert grad[0] == pytest.approx(shape - math.exp(z))
    np.testing.assert_allclose(target.to_constrained(target.to_unconstrained([2.0])), [2.0])
    with pytest.raises(InvalidInputError):
        target.to_unconstrained([0.0])
    with pytest.raises(InvalidInputError):
        LogTransformedTarget(base, [3])
