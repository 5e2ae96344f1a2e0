import math

import numpy as np
import pytest

from orlicz_maxima.distributions import log_gamma, mean_abs, standard_gaussian
from orlicz_maxima.errors import DomainError
from orlicz_maxima.mc import McConfig, expected_max_product, expected_max_single
from orlicz_maxima.orlicz import CoefficientMatrix

FAST = McConfig(samples=20_000, replicates=15, master_seed=1)


@pytest.mark.parametrize(
    "kwargs",
    [{"samples": 50}, {"replicates": 4}, {"replicates": 0}, {"workers": 0}, {"master_seed": -1}],
)
def test_config_validation(kwargs: dict) -> None:
    with pytest.raises(DomainError):
        McConfig(**kwargs)


def test_config_derive() -> None:
    cfg = McConfig(master_seed=9)
    assert cfg.derive(0) == cfg.derive(0)
    assert cfg.derive(0).master_seed != cfg.derive(1).master_seed
    assert cfg.derive(3).samples == cfg.samples


def test_zero_weights_give_zero() -> None:
    estimate = expected_max_single(log_gamma(2.0), CoefficientMatrix.from_vector([0.0, 0.0]), FAST)
    assert (estimate.value, estimate.spread, estimate.samples_total) == (0.0, 0.0, 0)
    product = expected_max_product(
        standard_gaussian(), standard_gaussian(), CoefficientMatrix(np.zeros((2, 3))), FAST
    )
    assert product.value == 0.0


def test_single_gaussian_weight() -> None:
    estimate = expected_max_single(standard_gaussian(), CoefficientMatrix.from_vector([2.0]), FAST)
    assert estimate.value == pytest.approx(2 * math.sqrt(2 / math.pi), rel=0.01)
    assert estimate.samples_total == 20_000 * 15
    assert estimate.estimator == "MedianOfMeans"
    assert len(estimate.replicate_means) == 15


def test_mean_estimator() -> None:
    estimate = expected_max_single(
        standard_gaussian(), CoefficientMatrix.from_vector([1.0]), FAST, estimator="Mean"
    )
    assert estimate.estimator == "Mean"
    assert estimate.value == pytest.approx(math.sqrt(2 / math.pi), rel=0.01)


def test_two_pareto_maximum() -> None:
    estimate = expected_max_single(log_gamma(2.0), CoefficientMatrix.from_vector([1.0, 1.0]), FAST)
    assert estimate.value == pytest.approx(8 / 3, rel=0.03)
    assert estimate.spread >= 0.0


def test_product_atom_factorizes() -> None:
    entries = np.zeros((3, 2))
    entries[0, 0] = 1.0
    estimate = expected_max_product(
        standard_gaussian(), standard_gaussian(), CoefficientMatrix(entries), FAST
    )
    assert estimate.value == pytest.approx(2 / math.pi, rel=0.02)


def test_product_of_pareto_maxima() -> None:
    estimate = expected_max_product(
        log_gamma(2.0), log_gamma(2.0), CoefficientMatrix(np.ones((2, 2))), FAST
    )
    assert estimate.value == pytest.approx(64 / 9, rel=0.05)


def test_product_with_single_row_factorizes() -> None:
    row = np.array([[1.0, 0.5, 0.25]])
    product = expected_max_product(standard_gaussian(), log_gamma(2.0), CoefficientMatrix(row), FAST)
    single = expected_max_single(log_gamma(2.0), CoefficientMatrix(row[0]), FAST)
    assert product.value == pytest.approx(mean_abs(standard_gaussian()).value * single.value, rel=0.05)


def test_product_dimension_mismatch() -> None:
    with pytest.raises(DomainError):
        expected_max_product(
            standard_gaussian(), standard_gaussian(), CoefficientMatrix(np.ones((2, 3))), FAST, n=3
        )


def test_scale_equivariance() -> None:
    cfg = McConfig(samples=2_000, replicates=5, master_seed=4)
    a = CoefficientMatrix.from_vector([0.3, 1.0, 0.7])
    base = expected_max_single(log_gamma(2.0), a, cfg)
    scaled = expected_max_single(log_gamma(2.0), a.scaled(-8.0), cfg)
    assert scaled.value == pytest.approx(8 * base.value, rel=1e-12)


def test_monotone_in_coefficients() -> None:
    cfg = McConfig(samples=2_000, replicates=5, master_seed=4)
    small = CoefficientMatrix.from_vector([0.5, 1.0, 0.2])
    large = CoefficientMatrix.from_vector([0.6, 1.0, 0.3])
    for model in (log_gamma(2.0), standard_gaussian()):
        assert expected_max_single(model, small, cfg).value <= expected_max_single(model, large, cfg).value


def test_results_do_not_depend_on_workers() -> None:
    serial = McConfig(samples=2_000, replicates=7, master_seed=12, workers=1)
    parallel = McConfig(samples=2_000, replicates=7, master_seed=12, workers=4)
    A = CoefficientMatrix(np.array([[1.0, 0.5], [0.25, 2.0], [0.1, 0.1]]))
    assert expected_max_product(log_gamma(2.0), standard_gaussian(), A, serial) == expected_max_product(
        log_gamma(2.0), standard_gaussian(), A, parallel
    )
    a = CoefficientMatrix.from_vector([1.0, 2.0])
    assert expected_max_single(log_gamma(1.5), a, serial) == expected_max_single(log_gamma(1.5), a, parallel)


def test_estimate_record() -> None:
    estimate = expected_max_single(
        standard_gaussian(), CoefficientMatrix.from_vector([1.0]), McConfig(samples=200, replicates=3)
    )
    record = estimate.to_record()
    assert record["samples_total"] == 600
    assert len(record["replicate_means"]) == 3
