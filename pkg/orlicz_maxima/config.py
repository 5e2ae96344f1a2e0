from __future__ import annotations

from dataclasses import dataclass
import logging
import os

from dotenv import load_dotenv

from .distributions import DEFAULT_CALIBRATION_SIZE
from .numerics import QuadratureSpec


def _optional_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"Environment variable {name} must be an integer: {value!r}") from None


def _optional_float(name: str, default: float) -> float:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        return float(value)
    except ValueError:
        raise ValueError(f"Environment variable {name} must be a number: {value!r}") from None


def _positive(name: str, value: int) -> int:
    if value < 1:
        raise ValueError(f"Environment variable {name} must be >= 1, got {value}")
    return value


@dataclass(frozen=True)
class Settings:
    workers: int
    output_dir: str
    log_level: str
    stable_calibration_size: int
    quadrature_rel_tol: float
    quadrature_abs_tol: float
    default_samples: int
    default_replicates: int

    def quadrature_spec(self) -> QuadratureSpec:
        return QuadratureSpec(
            rel_tol=self.quadrature_rel_tol, abs_tol=self.quadrature_abs_tol
        )


def load_settings() -> Settings:
    load_dotenv()
    workers = _positive("ORLICZ_MAXIMA_WORKERS", _optional_int("ORLICZ_MAXIMA_WORKERS", 1))
    output_dir = os.getenv("ORLICZ_MAXIMA_OUTPUT_DIR", "results").strip() or "results"
    log_level = os.getenv("LOG_LEVEL", "INFO").strip().upper() or "INFO"
    if log_level not in logging.getLevelNamesMapping():
        raise ValueError(f"Environment variable LOG_LEVEL is not a logging level: {log_level!r}")
    stable_calibration_size = _positive(
        "ORLICZ_MAXIMA_STABLE_CALIBRATION",
        _optional_int("ORLICZ_MAXIMA_STABLE_CALIBRATION", DEFAULT_CALIBRATION_SIZE),
    )
    quadrature_rel_tol = _optional_float("ORLICZ_MAXIMA_REL_TOL", 1e-9)
    quadrature_abs_tol = _optional_float("ORLICZ_MAXIMA_ABS_TOL", 1e-12)
    if not quadrature_rel_tol > 0.0 or not quadrature_abs_tol > 0.0:
        raise ValueError("Quadrature tolerances must be positive")
    default_samples = _positive(
        "ORLICZ_MAXIMA_SAMPLES", _optional_int("ORLICZ_MAXIMA_SAMPLES", 100_000)
    )
    default_replicates = _positive(
        "ORLICZ_MAXIMA_REPLICATES", _optional_int("ORLICZ_MAXIMA_REPLICATES", 15)
    )
    return Settings(
        workers=workers,
        output_dir=output_dir,
        log_level=log_level,
        stable_calibration_size=stable_calibration_size,
        quadrature_rel_tol=quadrature_rel_tol,
        quadrature_abs_tol=quadrature_abs_tol,
        default_samples=default_samples,
        default_replicates=default_replicates,
    )
