from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field
from typing import NamedTuple, Protocol

import numpy as np
from scipy import stats

from .errors import DomainError, UnsupportedOperationError
from .numerics import (
    GAUSSIAN_DECAY,
    DecayClass,
    ExpPowerDecay,
    PowerLawDecay,
    mean_with_spread,
    upper_incomplete_gamma,
)
from .types import ModelKind

DEFAULT_CALIBRATION_SIZE = 10_000_000
CALIBRATION_SEED = 20_240_917
CALIBRATION_BLOCKS = 15
CALIBRATION_TAIL_FRACTION = 1e-3

logger = logging.getLogger(__name__)


class RngStream:
    """A PCG64 stream addressed by ``(seed, stream_id)``.

    Equal addresses give bit-identical draws. A stream has a single owner;
    parallel work opens one stream per work unit.
    """

    def __init__(self, seed: int, stream_id: int = 0) -> None:
        if seed < 0:
            raise DomainError(f"Seed must be non-negative, got {seed}")
        if stream_id < 0:
            raise DomainError(f"stream_id must be non-negative, got {stream_id}")
        self.seed = seed
        self.stream_id = stream_id
        sequence = np.random.SeedSequence(seed, spawn_key=(stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


class TailModel(Protocol):
    @property
    def tail_class(self) -> DecayClass | None: ...

    @property
    def exact_tail(self) -> bool: ...

    @property
    def tail_knot(self) -> float: ...

    def survival(self, y: float) -> float: ...

    def label(self) -> str: ...


@dataclass(frozen=True)
class DistributionModel:
    kind: ModelKind
    p: float | None = None
    calibration_size: int = field(default=DEFAULT_CALIBRATION_SIZE, compare=False)

    def __post_init__(self) -> None:
        if self.kind == "LogGamma1p":
            if self.p is None or not self.p > 1.0:
                raise DomainError(f"LogGamma1p requires p > 1, got {self.p}")
        elif self.kind == "SymmetricStable":
            if self.p is None or not 1.0 < self.p < 2.0:
                raise DomainError(f"SymmetricStable requires 1 < p < 2, got {self.p}")
            if self.calibration_size < 1000:
                raise DomainError(
                    f"calibration_size must be >= 1000, got {self.calibration_size}"
                )
        elif self.kind == "StandardGaussian":
            if self.p is not None:
                raise DomainError("StandardGaussian takes no shape parameter")
        else:
            raise DomainError(f"Unknown model kind: {self.kind}")

    @property
    def index(self) -> float:
        if self.p is None:
            raise DomainError(f"{self.kind} has no shape index")
        return self.p

    @property
    def tail_class(self) -> DecayClass:
        if self.kind == "StandardGaussian":
            return GAUSSIAN_DECAY
        return PowerLawDecay(self.index)

    @property
    def exact_tail(self) -> bool:
        return self.kind != "SymmetricStable"

    @property
    def tail_knot(self) -> float:
        """Point where the tail stops being piecewise trivial (support edge)."""
        return 1.0 if self.kind == "LogGamma1p" else 0.0

    def survival(self, y: float) -> float:
        if self.kind == "LogGamma1p":
            if y < 1.0:
                return 1.0
            return y ** (-self.index)
        if self.kind == "StandardGaussian":
            if y <= 0.0:
                return 1.0
            return upper_incomplete_gamma(0.5, 0.5 * y * y) / math.sqrt(math.pi)
        if y <= 0.0:
            return 1.0
        calibration = calibration_sample(self.index, self.calibration_size)
        above = calibration.size - int(np.searchsorted(calibration, y, side="left"))
        return above / calibration.size

    def label(self) -> str:
        if self.kind == "LogGamma1p":
            return f"loggamma:{self.p:g}"
        if self.kind == "SymmetricStable":
            return f"stable:{self.p:g}"
        return "gaussian"


@dataclass(frozen=True)
class PoweredModel:
    """The law of ``|xi| ** power`` for a base law ``xi``."""

    base: DistributionModel | PoweredModel
    power: float

    def __post_init__(self) -> None:
        if not self.power > 0.0:
            raise DomainError(f"power must be positive, got {self.power}")

    @property
    def root(self) -> DistributionModel:
        base = self.base
        while isinstance(base, PoweredModel):
            base = base.base
        return base

    @property
    def total_power(self) -> float:
        if isinstance(self.base, PoweredModel):
            return self.base.total_power * self.power
        return self.power

    @property
    def tail_class(self) -> DecayClass | None:
        root = self.root
        power = self.total_power
        if root.kind == "StandardGaussian":
            if 2.0 / power >= 1.0:
                return ExpPowerDecay(power=2.0 / power, rate=0.5)
            return None
        return PowerLawDecay(root.index / power)

    @property
    def exact_tail(self) -> bool:
        return self.root.exact_tail

    @property
    def tail_knot(self) -> float:
        return self.root.tail_knot**self.total_power

    def survival(self, y: float) -> float:
        if y <= 0.0:
            return 1.0
        return self.root.survival(y ** (1.0 / self.total_power))

    def label(self) -> str:
        return f"{self.root.label()}^{self.total_power:g}"


class TailProbability(NamedTuple):
    value: float
    approximate: bool


class MeanAbs(NamedTuple):
    value: float
    uncertainty: float
    exact: bool


def log_gamma(p: float) -> DistributionModel:
    return DistributionModel("LogGamma1p", p)


def standard_gaussian() -> DistributionModel:
    return DistributionModel("StandardGaussian")


def symmetric_stable(
    p: float, calibration_size: int = DEFAULT_CALIBRATION_SIZE
) -> DistributionModel:
    return DistributionModel("SymmetricStable", p, calibration_size=calibration_size)


def parse_model(
    text: str, calibration_size: int = DEFAULT_CALIBRATION_SIZE
) -> DistributionModel:
    """Parse ``gaussian``, ``loggamma:<p>`` or ``stable:<p>``."""
    name, _, argument = text.strip().partition(":")
    name = name.strip().lower()
    if name == "gaussian":
        if argument.strip():
            raise ValueError(f"gaussian takes no parameter: {text!r}")
        return standard_gaussian()
    if name not in ("loggamma", "stable"):
        raise ValueError(f"Unknown distribution: {text!r}")
    try:
        p = float(argument)
    except ValueError:
        raise ValueError(f"Malformed parameter in distribution: {text!r}") from None
    if name == "loggamma":
        return log_gamma(p)
    return symmetric_stable(p, calibration_size=calibration_size)


_CALIBRATION_CACHE: dict[tuple[float, int], np.ndarray] = {}
_CALIBRATION_LOCK = threading.Lock()


def calibration_sample(p: float, size: int) -> np.ndarray:
    """Sorted absolute values of a fixed-seed p-stable sample, built once."""
    key = (p, size)
    with _CALIBRATION_LOCK:
        cached = _CALIBRATION_CACHE.get(key)
        if cached is None:
            logger.info("Building stable calibration sample p=%s size=%s", p, size)
            rng = RngStream(CALIBRATION_SEED)
            draws = _stable_draws(p, rng, size)
            cached = np.sort(np.abs(draws))
            cached.setflags(write=False)
            _CALIBRATION_CACHE[key] = cached
    return cached


def tail(model: TailModel, y: float) -> TailProbability:
    if not y >= 0.0:
        raise DomainError(f"Tail argument must be >= 0, got {y}")
    return TailProbability(model.survival(y), approximate=not model.exact_tail)


def density(model: DistributionModel, x: float) -> float:
    if model.kind == "LogGamma1p":
        if x < 1.0:
            return 0.0
        p = model.index
        return p * x ** (-p - 1.0)
    if model.kind == "StandardGaussian":
        return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    raise UnsupportedOperationError("Symmetric stable laws have no closed-form density")


def sample(model: DistributionModel, rng: RngStream, count: int) -> np.ndarray:
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    generator = rng.generator
    if model.kind == "LogGamma1p":
        # 1 - U lies in (0, 1], so every draw is >= 1.
        return (1.0 - generator.random(count)) ** (-1.0 / model.index)
    if model.kind == "StandardGaussian":
        return generator.standard_normal(count)
    return _stable_draws(model.index, rng, count)


def _stable_draws(p: float, rng: RngStream, count: int) -> np.ndarray:
    # beta=0 with unit scale: characteristic function exp(-|theta|**p).
    draws = stats.levy_stable.rvs(
        p, 0.0, size=count, random_state=rng.generator
    )
    return np.asarray(draws, dtype=float)


def mean_abs(model: DistributionModel) -> MeanAbs:
    if model.kind == "LogGamma1p":
        p = model.index
        return MeanAbs(p / (p - 1.0), 0.0, exact=True)
    if model.kind == "StandardGaussian":
        return MeanAbs(math.sqrt(2.0 / math.pi), 0.0, exact=True)
    p = model.index
    calibration = calibration_sample(p, model.calibration_size)
    value = tail_corrected_mean(calibration, p)
    # The cache is sorted; a fixed permutation restores exchangeable blocks.
    shuffled = RngStream(CALIBRATION_SEED, 1).generator.permutation(calibration)
    estimates = [
        tail_corrected_mean(np.sort(block), p)
        for block in np.array_split(shuffled, CALIBRATION_BLOCKS)
    ]
    _, spread = mean_with_spread(estimates)
    logger.debug("Stable mean_abs p=%s value=%s spread=%s", p, value, spread)
    return MeanAbs(value, spread, exact=False)


def tail_corrected_mean(ordered: np.ndarray, p: float) -> float:
    """Mean of sorted ``|X|`` draws with the top order statistics replaced by a Pareto tail.

    Above the threshold ``T`` (the largest draw outside the top fraction) the tail of a
    p-stable law is ``~ c x**-p``, so ``E[|X|; |X| > T] = P(|X| > T) * T * p / (p - 1)``.
    """
    if not p > 1.0:
        raise DomainError(f"Tail-corrected mean requires p > 1, got {p}")
    size = ordered.size
    exceedances = max(int(size * CALIBRATION_TAIL_FRACTION), 1)
    if size <= exceedances:
        raise DomainError(f"Need more than {exceedances} draws, got {size}")
    body = ordered[: size - exceedances]
    threshold = float(body[-1])
    tail_mass = exceedances * threshold * p / (p - 1.0)
    return (float(np.sum(body)) + tail_mass) / size
