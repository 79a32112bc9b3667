import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm, t as student_t

from priorswap.data.models import LikelihoodModel, ModelKind, PriorSpec
from priorswap.densities import (
    generate_synthetic,
    likelihood_log_density,
    log_likelihood_batch,
    log_likelihood_gradient_batch,
    pointwise_log_likelihood,
    prior_gradient_batch,
    prior_log_density,
    prior_log_density_batch,
    train_test_split,
)
from priorswap.errors import InvalidInputError


def finite_difference(fn, theta: np.ndarray, step: float = 1e-6) -> np.ndarray:
    grad = np.zeros_like(theta)
    for i in range(theta.size):
        shift = np.zeros_like(theta)
        shift[i] = step
        grad[i] = (fn(theta + shift) - fn(theta - shift)) / (2 * step)
    return grad


def away_from_zero(rng: np.random.Generator, size: int, d: int, low: float = 0.2) -> np.ndarray:
    magnitude = rng.uniform(low, 3.0, size=(size, d))
    return magnitude * rng.choice([-1.0, 1.0], size=(size, d))


@pytest.mark.parametrize(
    "prior",
    [
        PriorSpec.normal(0.5, 2.0),
        PriorSpec.laplace(10.0, 1 / math.sqrt(2)),
        PriorSpec.student_t(0.0, 1.0, 3.0),
        PriorSpec.very_sparse(0.2),
    ],
)
def test_one_dimensional_priors_integrate_to_one(prior: PriorSpec) -> None:
    def density(x: float) -> float:
        return math.exp(prior_log_density(prior, [x])[0])

    center = float(np.atleast_1d(prior.location)[0]) if prior.location is not None else 0.0
    edges = [-np.inf, center - 10.0, center - 1.0, center, center + 1.0, center + 10.0, np.inf]
    pieces = list(zip(edges[:-1], edges[1:]))
    total = sum(quad(density, low, high, limit=200)[0] for low, high in pieces)
    assert total == pytest.approx(1.0, abs=1e-3)


def test_known_closed_forms() -> None:
    assert prior_log_density(PriorSpec.normal(0.0, 1.0), [0.3])[0] == pytest.approx(norm.logpdf(0.3))
    assert prior_log_density(PriorSpec.student_t(1.0, 2.0, 3.0), [0.0])[0] == pytest.approx(
        student_t.logpdf(0.0, df=3.0, loc=1.0, scale=2.0)
    )
    laplace = PriorSpec.laplace(10.0, 1 / math.sqrt(2))
    assert prior_log_density(laplace, [10.0])[0] == pytest.approx(-math.log(2 / math.sqrt(2)))


def test_very_sparse_unnormalized_constant() -> None:
    value, grad = prior_log_density(PriorSpec.very_sparse(0.5, normalized=False), [0.0, 0.0])
    assert value == pytest.approx(2 * -math.log(2 * 0.5))
    assert np.all(grad == 0.0)


def test_very_sparse_defaults_to_normalized_density() -> None:
    assert PriorSpec.very_sparse(1.0).normalized
    normalized = prior_log_density(PriorSpec.very_sparse(1.0), [0.0, 0.0])[0]
    unnormalized = prior_log_density(PriorSpec.very_sparse(1.0, normalized=False), [0.0, 0.0])[0]
    assert normalized == pytest.approx(-2 * (math.log(2.0) + math.lgamma(3.5)))
    assert unnormalized == pytest.approx(-2 * math.log(2.0))


@pytest.mark.parametrize(
    "prior",
    [
        PriorSpec.normal([0.5, -1.0, 0.0], 2.0),
        PriorSpec.normal(np.zeros(3), covariance=[[2.0, 0.3, 0.0], [0.3, 1.0, 0.1], [0.0, 0.1, 0.5]]),
        PriorSpec.laplace(0.0, 1.0),
        PriorSpec.student_t(0.0, 1.5, 4.0),
        PriorSpec.very_sparse(1.0),
    ],
)
def test_prior_gradients_match_finite_differences(prior: PriorSpec) -> None:
    rng = np.random.default_rng(3)
    for theta in away_from_zero(rng, 100, 3):
        analytic = prior_log_density(prior, theta)[1]
        numeric = finite_difference(lambda x: prior_log_density(prior, x)[0], theta)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-6)


def test_hierarchical_prior_gradient_and_support() -> None:
    prior = PriorSpec.hierarchical_normal_gamma(2.0)
    rng = np.random.default_rng(5)
    for _ in range(100):
        state = np.append(rng.normal(size=2), rng.uniform(0.5, 3.0))
        analytic = prior_log_density(prior, state)[1]
        numeric = finite_difference(lambda x: prior_log_density(prior, x)[0], state)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-6)
    assert prior_log_density(prior, [0.1, 0.2, -1.0])[0] == -math.inf
    assert prior_log_density(prior, [0.1, 0.2, 0.0])[0] == -math.inf


def test_batch_matches_single_evaluation() -> None:
    prior = PriorSpec.student_t(0.0, 1.0, 3.0)
    thetas = np.random.default_rng(0).normal(size=(20, 2))
    batch = prior_log_density_batch(prior, thetas)
    grads = prior_gradient_batch(prior, thetas)
    for row, value, grad in zip(thetas, batch, grads):
        single, single_grad = prior_log_density(prior, row)
        assert value == pytest.approx(single)
        np.testing.assert_allclose(grad, single_grad)


def test_non_finite_theta_is_rejected() -> None:
    with pytest.raises(InvalidInputError):
        prior_log_density(PriorSpec.normal(), [np.nan])
    with pytest.raises(InvalidInputError):
        prior_log_density_batch(PriorSpec.normal(), [[np.inf]])


def test_invalid_prior_parameters_are_rejected() -> None:
    with pytest.raises(InvalidInputError):
        PriorSpec.laplace(0.0, -1.0)
    with pytest.raises(InvalidInputError):
        PriorSpec.normal(0.0, covariance=[[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(InvalidInputError):
        PriorSpec.hierarchical_normal_gamma(0.0)


def test_linear_regression_likelihood_matches_scipy() -> None:
    model = generate_synthetic(ModelKind.LINEAR_REGRESSION, 50, 3, [1.0, -2.0, 0.5], seed=1, noise_variance=0.5)
    theta = np.array([0.9, -1.8, 0.4])
    expected = norm.logpdf(model.responses, loc=model.features @ theta, scale=math.sqrt(0.5)).sum()
    value, _ = likelihood_log_density(model, theta)
    assert value == pytest.approx(expected)
    assert pointwise_log_likelihood(model, theta).sum() == pytest.approx(expected)


@pytest.mark.parametrize("kind", list(ModelKind))
def test_likelihood_gradients_match_finite_differences(kind: ModelKind) -> None:
    model = generate_synthetic(kind, 40, 3, [0.5, -0.5, 1.0], seed=2)
    rng = np.random.default_rng(9)
    for theta in rng.normal(size=(100, 3)):
        analytic = likelihood_log_density(model, theta)[1]
        numeric = finite_difference(lambda x: likelihood_log_density(model, x)[0], theta)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-5)


@pytest.mark.parametrize("kind", list(ModelKind))
def test_likelihood_is_additive_over_datasets(kind: ModelKind) -> None:
    first = generate_synthetic(kind, 30, 2, seed=3)
    second = generate_synthetic(kind, 20, 2, seed=4)
    theta = np.array([0.3, -0.2])
    joined = likelihood_log_density(first.concat(second), theta)[0]
    assert joined == pytest.approx(likelihood_log_density(first, theta)[0] + likelihood_log_density(second, theta)[0])


def test_chunked_batch_matches_single_chunk() -> None:
    model = generate_synthetic(ModelKind.LOGISTIC_REGRESSION, 200, 4, seed=6)
    thetas = np.random.default_rng(1).normal(size=(50, 4))
    whole = log_likelihood_batch(model, thetas)
    chunked = log_likelihood_batch(model, thetas, chunk_elements=1_600)
    np.testing.assert_allclose(whole, chunked)
    np.testing.assert_allclose(
        log_likelihood_gradient_batch(model, thetas),
        log_likelihood_gradient_batch(model, thetas, chunk_elements=1_600),
    )


def test_empty_dataset_has_zero_likelihood() -> None:
    model = generate_synthetic(ModelKind.LINEAR_REGRESSION, 0, 2, seed=0)
    value, grad = likelihood_log_density(model, [1.0, 2.0])
    assert model.n == 0
    assert value == pytest.approx(0.0)
    np.testing.assert_allclose(grad, 0.0)


def test_dimension_mismatch_is_rejected() -> None:
    model = generate_synthetic(ModelKind.NORMAL_MEAN, 5, 2, seed=0)
    with pytest.raises(InvalidInputError):
        likelihood_log_density(model, [1.0, 2.0, 3.0])


def test_logistic_labels_must_be_binary() -> None:
    with pytest.raises(InvalidInputError):
        LikelihoodModel(kind=ModelKind.LOGISTIC_REGRESSION, features=np.ones((2, 1)), responses=[0.0, 0.5])


def test_synthetic_data_is_deterministic() -> None:
    first = generate_synthetic(ModelKind.LOGISTIC_REGRESSION, 100, 5, seed=11)
    second = generate_synthetic(ModelKind.LOGISTIC_REGRESSION, 100, 5, seed=11)
    assert np.array_equal(first.features, second.features)
    assert np.array_equal(first.responses, second.responses)


def test_running_example_observation_sum() -> None:
    model = generate_synthetic(ModelKind.NORMAL_MEAN, 3, 1, seed=0, observation_sum=4.0)
    assert model.features.sum() == pytest.approx(4.0)


def test_train_test_split_partitions_data() -> None:
    model = generate_synthetic(ModelKind.LINEAR_REGRESSION, 100, 2, seed=0)
    train, test = train_test_split(model, 0.2, seed=1)
    assert test is not None
    assert train.n == 80 and test.n == 20
    combined = np.sort(np.concatenate([train.responses, test.responses]))
    assert np.array_equal(combined, np.sort(model.responses))
    untouched, nothing = train_test_split(model, 0.0, seed=1)
    assert nothing is None and untouched.n == 100
