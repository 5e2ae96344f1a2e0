from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .distributions import DistributionModel, RngStream, sample
from .errors import DomainError
from .numerics import mean_with_spread, median_with_spread
from .orlicz import CoefficientMatrix
from .types import EstimateRecord, Estimator

# Elements drawn per chunk; fixed so results never depend on memory limits.
CHUNK_ELEMENTS = 1 << 20

logger = logging.getLogger(__name__)

ReplicateFn = Callable[[RngStream], float]


@dataclass(frozen=True)
class McConfig:
    samples: int = 100_000
    replicates: int = 15
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.samples < 100:
            raise DomainError(f"samples must be >= 100, got {self.samples}")
        if self.replicates < 1 or self.replicates % 2 == 0:
            raise DomainError(f"replicates must be odd and >= 1, got {self.replicates}")
        if self.master_seed < 0:
            raise DomainError(f"master_seed must be >= 0, got {self.master_seed}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")

    def derive(self, row: int) -> McConfig:
        """Config for one study row, seeded independently of every other row."""
        state = np.random.SeedSequence([self.master_seed, row]).generate_state(
            1, np.uint64
        )
        return McConfig(
            samples=self.samples,
            replicates=self.replicates,
            master_seed=int(state[0]),
            workers=self.workers,
        )


@dataclass(frozen=True)
class McEstimate:
    value: float
    spread: float
    samples_total: int
    estimator: Estimator
    replicate_means: tuple[float, ...] = ()

    def to_record(self) -> EstimateRecord:
        return {
            "value": self.value,
            "spread": self.spread,
            "samples_total": self.samples_total,
            "estimator": self.estimator,
            "replicate_means": list(self.replicate_means),
        }


def _chunks(total: int, per_sample: int) -> list[int]:
    rows = max(1, CHUNK_ELEMENTS // max(per_sample, 1))
    sizes = [rows] * (total // rows)
    if total % rows:
        sizes.append(total % rows)
    return sizes


async def _gather_replicates(
    replicate: ReplicateFn, cfg: McConfig
) -> list[float]:
    semaphore = asyncio.Semaphore(cfg.workers)

    async def _run(index: int) -> float:
        async with semaphore:
            return await asyncio.to_thread(
                replicate, RngStream(cfg.master_seed, index)
            )

    return list(await asyncio.gather(*(_run(r) for r in range(cfg.replicates))))


def _run_replicates(replicate: ReplicateFn, cfg: McConfig) -> list[float]:
    # Replicate r always draws from stream r; gather keeps replicate order.
    if cfg.workers == 1 or cfg.replicates == 1:
        return [replicate(RngStream(cfg.master_seed, r)) for r in range(cfg.replicates)]
    return asyncio.run(_gather_replicates(replicate, cfg))


def _aggregate(
    means: list[float], cfg: McConfig, estimator: Estimator
) -> McEstimate:
    if estimator == "MedianOfMeans":
        value, spread = median_with_spread(means)
    elif estimator == "Mean":
        value, spread = mean_with_spread(means)
    else:
        raise DomainError(f"Unknown estimator: {estimator}")
    logger.debug("Replicate means=%s value=%s spread=%s", means, value, spread)
    return McEstimate(
        value=value,
        spread=spread,
        samples_total=cfg.samples * cfg.replicates,
        estimator=estimator,
        replicate_means=tuple(means),
    )


def _zero_estimate(estimator: Estimator) -> McEstimate:
    return McEstimate(0.0, 0.0, 0, estimator, ())


def expected_max_single(
    model: DistributionModel,
    a: CoefficientMatrix,
    cfg: McConfig,
    estimator: Estimator = "MedianOfMeans",
) -> McEstimate:
    """Estimate ``E max_i |a_i xi_i|`` for iid ``xi_i`` drawn from ``model``."""
    weights = np.abs(a.vector())
    if not np.any(weights > 0.0):
        return _zero_estimate(estimator)
    n = weights.size

    def replicate(rng: RngStream) -> float:
        total = 0.0
        for rows in _chunks(cfg.samples, n):
            draws = np.abs(sample(model, rng, rows * n)).reshape(rows, n)
            total += float((draws * weights).max(axis=1).sum())
        return total / cfg.samples

    means = _run_replicates(replicate, cfg)
    return _aggregate(means, cfg, estimator)


def expected_max_product(
    model1: DistributionModel,
    model2: DistributionModel,
    A: CoefficientMatrix,
    cfg: McConfig,
    *,
    n: int | None = None,
    m: int | None = None,
    estimator: Estimator = "MedianOfMeans",
) -> McEstimate:
    """Estimate ``E max_ij |a_ij xi_i eta_j|``.

    ``xi`` (from ``model1``) carries the row index ``i`` and ``eta`` (from
    ``model2``) the column index ``j``; each sample draws one ``xi`` vector and
    one ``eta`` vector.
    """
    if (n is not None and n != A.n) or (m is not None and m != A.m):
        raise DomainError(
            f"Coefficient matrix is {A.n}x{A.m}, expected {n or A.n}x{m or A.m}"
        )
    weights = np.abs(A.entries)
    if not np.any(weights > 0.0):
        return _zero_estimate(estimator)
    rows_n, cols_m = weights.shape

    def replicate(rng: RngStream) -> float:
        total = 0.0
        for rows in _chunks(cfg.samples, rows_n * cols_m):
            xi = np.abs(sample(model1, rng, rows * rows_n)).reshape(rows, rows_n, 1)
            eta = np.abs(sample(model2, rng, rows * cols_m)).reshape(rows, 1, cols_m)
            products = xi * weights[np.newaxis, :, :] * eta
            total += float(products.reshape(rows, -1).max(axis=1).sum())
        return total / cfg.samples

    means = _run_replicates(replicate, cfg)
    return _aggregate(means, cfg, estimator)
