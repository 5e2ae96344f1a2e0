from __future__ import annotations

import logging
from typing import Sequence

from .cli import run_cli
from .config import load_settings

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


def main(argv: Sequence[str] | None = None) -> None:
    try:
        settings = load_settings()
    except ValueError as exc:
        logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
        logging.getLogger(__name__).error("Invalid settings: %s", exc)
        raise SystemExit(2) from exc
    logging.basicConfig(level=settings.log_level, format=LOG_FORMAT)
    logging.getLogger(__name__).info(
        "Settings loaded workers=%s output_dir=%s calibration=%s rel_tol=%s abs_tol=%s samples=%s replicates=%s",
        settings.workers,
        settings.output_dir,
        settings.stable_calibration_size,
        settings.quadrature_rel_tol,
        settings.quadrature_abs_tol,
        settings.default_samples,
        settings.default_replicates,
    )
    raise SystemExit(run_cli(argv, settings))
