"""Full-size ratio studies. Run with ``pytest -m slow``."""

import numpy as np
import pytest

from orlicz_maxima.cli import EXIT_OK, run_cli
from orlicz_maxima.config import Settings
from orlicz_maxima.distributions import log_gamma, symmetric_stable
from orlicz_maxima.mc import McConfig, expected_max_product, expected_max_single
from orlicz_maxima.orlicz import CoefficientMatrix, LogGammaOrlicz, PowerOrlicz
from orlicz_maxima.store import manifest_path
from orlicz_maxima.verify import (
    PRODUCT_THRESHOLD,
    T3Proof,
    gaussian_unit_maxima,
    study_function_equiv,
    study_gaussian_control,
    study_gaussian_not_l2,
    study_product,
    study_thm1,
    t2,
    t3,
    t5,
    t6,
)

pytestmark = pytest.mark.slow

FULL = McConfig(samples=100_000, replicates=15, master_seed=2024)
SHAPES = [(4, 4), (8, 8), (16, 16)]


def test_pareto_maxima_match_closed_forms() -> None:
    pair = expected_max_single(log_gamma(2.0), CoefficientMatrix.from_vector([1.0, 1.0]), FULL)
    assert pair.value == pytest.approx(8 / 3, rel=0.02)
    product = expected_max_product(
        log_gamma(2.0), log_gamma(2.0), CoefficientMatrix(np.ones((2, 2))), FULL
    )
    assert product.value == pytest.approx(64 / 9, rel=0.05)


def test_thm1_log_gamma() -> None:
    study = study_thm1(log_gamma(2.0), LogGammaOrlicz(2.0), [2, 8, 32, 128], 5, FULL)
    assert study.passed


def test_thm1_power_norm_corollary() -> None:
    study = study_thm1(
        log_gamma(2.0), PowerOrlicz(2.0), [2, 8, 32, 128], 5, FULL, theorem_id="Corollary"
    )
    assert study.passed


@pytest.mark.parametrize("p", [1.2, 1.5, 1.8])
def test_thm1_stable(p: float) -> None:
    study = study_thm1(
        symmetric_stable(p), PowerOrlicz(p), [2, 8, 32, 128], 5, FULL, threshold=PRODUCT_THRESHOLD
    )
    assert study.ratio_spread <= PRODUCT_THRESHOLD


@pytest.mark.parametrize(
    "theorem",
    [t2(1.2, 1.8), t2(1.4, 1.6), t3(1.5), t5(1.5), t6()],
    ids=["t2-1.2-1.8", "t2-1.4-1.6", "t3", "t5", "t6"],
)
def test_product_studies(theorem) -> None:
    assert study_product(theorem, SHAPES, 5, FULL).passed


def test_gaussian_is_not_l2() -> None:
    ns = [4, 16, 64, 256, 1024]
    estimates = gaussian_unit_maxima(ns, FULL)
    assert study_gaussian_not_l2(ns, FULL, estimates).passed
    assert study_gaussian_control(ns, FULL, estimates).passed


@pytest.mark.parametrize("p", [1.2, 1.5, 1.8])
def test_function_equivalence_t3(p: float) -> None:
    grid = [float(s) for s in np.geomspace(0.3, 3.0, 12)]
    assert study_function_equiv(T3Proof(p), grid).passed


def test_verify_replay_matches_across_workers(tmp_path) -> None:
    settings = Settings(
        workers=1,
        output_dir=str(tmp_path),
        log_level="INFO",
        stable_calibration_size=10_000_000,
        quadrature_rel_tol=1e-9,
        quadrature_abs_tol=1e-12,
        default_samples=20_000,
        default_replicates=15,
    )
    out_dir = str(tmp_path / "t5")
    argv = ["verify", "t5", "--seed", "99", "--shapes", "4x4,8x8", "--output-dir", out_dir]
    assert run_cli(argv, settings) == EXIT_OK
    with open(tmp_path / "t5" / "t5.csv", "rb") as handle:
        first = handle.read()

    replay = ["replay", manifest_path(str(tmp_path / "t5" / "t5.csv")), "--workers", "8"]
    assert run_cli(replay, settings) == EXIT_OK
    with open(tmp_path / "t5" / "t5.csv", "rb") as handle:
        assert handle.read() == first
