import math

import numpy as np
import pytest

from orlicz_maxima.errors import BracketError, DivergenceError, DomainError, QuadratureError
from orlicz_maxima.numerics import (
    GAUSSIAN_DECAY,
    PowerLawDecay,
    QuadratureSpec,
    bisect_monotone,
    integrate,
    integrate_to_infinity,
    mean_with_spread,
    median_with_spread,
    upper_incomplete_gamma,
)


def test_integrate_polynomial() -> None:
    assert integrate(lambda t: t, 0.0, 1.0) == pytest.approx(0.5, rel=1e-12)


def test_integrate_power_rule() -> None:
    assert integrate(lambda t: t**0.5, 0.0, 1.0) == pytest.approx(1 / 1.5, rel=1e-9)


def test_integrate_endpoint_singularity() -> None:
    value = integrate(lambda t: t**-0.5, 0.0, 1.0, endpoint_power=-0.5)
    assert value == pytest.approx(2.0, rel=1e-10)


def test_integrate_gaussian_bell() -> None:
    expected = math.sqrt(math.pi / 2) * math.erf(6 / math.sqrt(2))
    value = integrate(lambda t: math.exp(-t * t / 2), 0.0, 6.0)
    assert value == pytest.approx(expected, rel=1e-10)


def test_integrate_empty_interval() -> None:
    assert integrate(math.exp, 2.0, 2.0) == 0.0


def test_integrate_rejects_reversed_bounds() -> None:
    with pytest.raises(DomainError):
        integrate(math.exp, 1.0, 0.0)


def test_integrate_is_linear() -> None:
    rng = np.random.default_rng(3)
    for _ in range(20):
        f = np.polynomial.Polynomial(rng.normal(size=5))
        g = np.polynomial.Polynomial(rng.normal(size=5))
        alpha, beta = rng.normal(size=2)
        combined = integrate(lambda t: alpha * f(t) + beta * g(t), 0.0, 2.0)
        separate = alpha * integrate(f, 0.0, 2.0) + beta * integrate(g, 0.0, 2.0)
        assert combined == pytest.approx(separate, abs=1e-9)


def test_integrate_reports_accuracy_failure() -> None:
    spec = QuadratureSpec(max_subdivisions=1)
    with pytest.raises(QuadratureError) as excinfo:
        integrate(lambda t: math.sin(40 * t), 0.0, 10.0, spec)
    assert excinfo.value.error_bound > 0.0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"rel_tol": 0.0},
        {"abs_tol": -1.0},
        {"max_subdivisions": 0},
        {"tail_cutoff": "guess"},
    ],
)
def test_quadrature_spec_validation(kwargs: dict) -> None:
    with pytest.raises(DomainError):
        QuadratureSpec(**kwargs)


def test_tail_integral_of_inverse_square() -> None:
    value = integrate_to_infinity(lambda u: u**-2, 1.0, decay=PowerLawDecay(2.0))
    assert value == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("p", [1.1, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
def test_tail_integral_power_law(p: float, t: float) -> None:
    value = integrate_to_infinity(lambda u: u**-p, 1 / t, decay=PowerLawDecay(p))
    assert value == pytest.approx(t ** (p - 1) / (p - 1), rel=1e-9)


def test_tail_integral_power_law_below_one() -> None:
    value = integrate_to_infinity(
        lambda u: 1.0 if u < 1 else u**-3, 0.0, decay=PowerLawDecay(3.0)
    )
    assert value == pytest.approx(1.5, rel=1e-9)


def test_tail_integral_gaussian_cutoff() -> None:
    expected = math.sqrt(math.pi / 2) * math.erfc(3 / math.sqrt(2))
    value = integrate_to_infinity(lambda u: math.exp(-u * u / 2), 3.0, decay=GAUSSIAN_DECAY)
    assert value == pytest.approx(expected, rel=1e-8)


def test_tail_integral_adaptive_policy() -> None:
    expected = math.sqrt(math.pi / 2) * math.erfc(3 / math.sqrt(2))
    spec = QuadratureSpec(tail_cutoff="adaptive")
    value = integrate_to_infinity(lambda u: math.exp(-u * u / 2), 3.0, spec, GAUSSIAN_DECAY)
    assert value == pytest.approx(expected, rel=1e-8)


def test_tail_integral_detects_divergence() -> None:
    with pytest.raises(DivergenceError):
        integrate_to_infinity(lambda u: u**-0.5, 1.0, decay=PowerLawDecay(0.5))


def test_bisect_square_root() -> None:
    assert bisect_monotone(lambda t: t * t - 2, 1.0, 2.0) == pytest.approx(math.sqrt(2), rel=1e-9)


def test_bisect_l2_luxemburg_equation() -> None:
    root = bisect_monotone(lambda t: 2 / t**2 - 1, 0.1, 10.0)
    assert root == pytest.approx(math.sqrt(2), rel=1e-9)


def test_bisect_gaussian_residual() -> None:
    root = bisect_monotone(lambda t: 2 * math.exp(-1.5) * (3 / t - 2) - 1, 0.5, 1.0)
    assert root == pytest.approx(3 / (2 + math.exp(1.5) / 2), rel=1e-9)


def test_bisect_is_invariant_to_bracket_widening() -> None:
    def g(t: float) -> float:
        return t**3 - 5

    narrow = bisect_monotone(g, 1.0, 2.0)
    wide = bisect_monotone(g, 0.5, 4.0)
    assert wide == pytest.approx(narrow, rel=1e-9)


def test_bisect_rejects_same_sign() -> None:
    with pytest.raises(BracketError):
        bisect_monotone(lambda t: t * t + 1, -1.0, 1.0)


def test_bisect_returns_exact_endpoint() -> None:
    assert bisect_monotone(lambda t: t - 1, 1.0, 3.0) == 1.0


def test_upper_incomplete_gamma_values() -> None:
    assert upper_incomplete_gamma(1.0, 1.0) == pytest.approx(math.exp(-1), rel=1e-12)
    assert upper_incomplete_gamma(0.5, 0.0) == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_upper_incomplete_gamma_recurrence_point() -> None:
    residual = (
        upper_incomplete_gamma(1.25, 0.5)
        - 0.25 * upper_incomplete_gamma(0.25, 0.5)
        - 0.5**0.25 * math.exp(-0.5)
    )
    assert abs(residual) < 1e-9


def test_upper_incomplete_gamma_recurrence_random() -> None:
    rng = np.random.default_rng(7)
    for t, x in zip(rng.uniform(0.2, 3.0, 100), rng.uniform(0.0, 5.0, 100)):
        residual = (
            upper_incomplete_gamma(t + 1, x)
            - t * upper_incomplete_gamma(t, x)
            - x**t * math.exp(-x)
        )
        assert abs(residual) < 1e-9


def test_upper_incomplete_gamma_matches_quadrature() -> None:
    value = integrate_to_infinity(lambda u: u**1.5 * math.exp(-u), 2.0)
    assert upper_incomplete_gamma(2.5, 2.0) == pytest.approx(value, rel=1e-8)


@pytest.mark.parametrize("t, x", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)])
def test_upper_incomplete_gamma_domain(t: float, x: float) -> None:
    with pytest.raises(DomainError):
        upper_incomplete_gamma(t, x)


def test_median_with_spread() -> None:
    value, spread = median_with_spread([1.0, 5.0, 2.0, 3.0, 4.0])
    assert value == 3.0
    assert spread > 0.0
    assert median_with_spread([2.5]) == (2.5, 0.0)


def test_mean_with_spread() -> None:
    value, spread = mean_with_spread([1.0, 2.0, 3.0])
    assert value == pytest.approx(2.0)
    assert spread == pytest.approx(1.0 / math.sqrt(3))
    with pytest.raises(DomainError):
        mean_with_spread([])
