from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Iterable, Protocol

import numpy as np

from .distributions import (
    DEFAULT_CALIBRATION_SIZE,
    DistributionModel,
    PoweredModel,
    TailModel,
    parse_model,
)
from .errors import BracketError, DomainError, UnsupportedOperationError
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    bisect_monotone,
    integrate,
    integrate_to_infinity,
)

_EXP_MINUS_THREE_HALVES = math.exp(-1.5)
_GRID_LOW = 1e-2
_GRID_HIGH = 1e2
_GRID_POINTS_PER_DECADE = 40
_MAX_DOUBLINGS = 1000

logger = logging.getLogger(__name__)


class OrliczFunction(Protocol):
    @property
    def label(self) -> str: ...

    def __call__(self, s: float) -> float: ...


def gaussian_m(s: float) -> float:
    """Closed-form Orlicz function generated by a standard Gaussian."""
    if s < 0.0:
        raise DomainError(f"Orlicz argument must be >= 0, got {s}")
    if s == 0.0:
        return 0.0
    if s < 1.0:
        return math.exp(-1.5 / (s * s))
    return _EXP_MINUS_THREE_HALVES * (3.0 * s - 2.0)


def loggamma_m(p: float, s: float) -> float:
    if not p > 1.0:
        raise DomainError(f"log-gamma Orlicz function requires p > 1, got {p}")
    if s < 0.0:
        raise DomainError(f"Orlicz argument must be >= 0, got {s}")
    if s <= 1.0:
        return s**p / (p - 1.0)
    return p / (p - 1.0) * s - 1.0


@dataclass(frozen=True)
class GaussianOrlicz:
    @property
    def label(self) -> str:
        return "gaussian"

    def __call__(self, s: float) -> float:
        return gaussian_m(s)


@dataclass(frozen=True)
class LogGammaOrlicz:
    p: float

    def __post_init__(self) -> None:
        if not self.p > 1.0:
            raise DomainError(f"log-gamma Orlicz function requires p > 1, got {self.p}")

    @property
    def label(self) -> str:
        return f"loggamma:{self.p:g}"

    def __call__(self, s: float) -> float:
        return loggamma_m(self.p, s)


@dataclass(frozen=True)
class PowerOrlicz:
    """``s ** p``; generates the l_p norm."""

    p: float

    def __post_init__(self) -> None:
        if not self.p >= 1.0:
            raise DomainError(f"Power Orlicz function requires p >= 1, got {self.p}")

    @property
    def label(self) -> str:
        return f"power:{self.p:g}"

    def __call__(self, s: float) -> float:
        if s < 0.0:
            raise DomainError(f"Orlicz argument must be >= 0, got {s}")
        return s**self.p


@dataclass(frozen=True, eq=False)
class QuadratureOrlicz:
    """Orlicz function of a law computed from its tail by double quadrature.

    With ``memoize`` the outer integral is accumulated once over the cells of a
    geometric grid; an argument then costs one short integral from the grid
    node below it, so memoized values keep the quadrature tolerance.
    """

    model: TailModel
    spec: QuadratureSpec = DEFAULT_QUADRATURE
    memoize: bool = True
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _table: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if not self.model.exact_tail:
            raise UnsupportedOperationError(
                f"{self.model.label()} has no exact tail; use its power surrogate"
            )

    @property
    def label(self) -> str:
        return f"quad:{self.model.label()}"

    def exact(self, s: float) -> float:
        return orlicz_from_tail(self.model, s, self.spec)

    def __call__(self, s: float) -> float:
        if s < 0.0:
            raise DomainError(f"Orlicz argument must be >= 0, got {s}")
        if not self.memoize or s == 0.0:
            return self.exact(s)
        grid, cumulative = self._prefix_table()
        if s < grid[0]:
            return self.exact(s)
        k = int(np.searchsorted(grid, s, side="right")) - 1
        return float(cumulative[k]) + _outer_integral(
            self.model, float(grid[k]), s, self.spec
        )

    def _prefix_table(self) -> tuple[np.ndarray, np.ndarray]:
        with self._lock:
            if not self._table:
                self._table.append(self._build_table())
            return self._table[0]

    def _build_table(self) -> tuple[np.ndarray, np.ndarray]:
        decades = math.log10(_GRID_HIGH / _GRID_LOW)
        grid = np.geomspace(
            _GRID_LOW, _GRID_HIGH, int(decades * _GRID_POINTS_PER_DECADE) + 1
        )
        knot = self.model.tail_knot
        if knot > 0.0 and _GRID_LOW < 1.0 / knot < _GRID_HIGH:
            grid = np.union1d(grid, [1.0 / knot])
        cumulative = np.empty_like(grid)
        running = _outer_integral(self.model, 0.0, float(grid[0]), self.spec)
        cumulative[0] = running
        for k in range(1, grid.size):
            running += _outer_integral(
                self.model, float(grid[k - 1]), float(grid[k]), self.spec
            )
            cumulative[k] = running
        logger.debug(
            "Orlicz prefix table built model=%s points=%s", self.model.label(), grid.size
        )
        grid.setflags(write=False)
        cumulative.setflags(write=False)
        return grid, cumulative


def _inner_tail_integral(model: TailModel, lo: float, spec: QuadratureSpec) -> float:
    knot = model.tail_knot
    head = 0.0
    start = lo
    if lo < knot:
        head = integrate(model.survival, lo, knot, spec)
        start = knot
    return head + integrate_to_infinity(model.survival, start, spec, model.tail_class)


def _outer_integral(
    model: TailModel, lo: float, hi: float, spec: QuadratureSpec
) -> float:
    if hi <= lo:
        return 0.0
    inner_spec = spec.tightened()

    def integrand(t: float) -> float:
        if t <= 0.0:
            return 0.0
        y = 1.0 / t
        return y * model.survival(y) + _inner_tail_integral(model, y, inner_spec)

    knot = model.tail_knot
    if knot > 0.0 and lo < 1.0 / knot < hi:
        kink = 1.0 / knot
        return integrate(integrand, lo, kink, spec) + integrate(integrand, kink, hi, spec)
    return integrate(integrand, lo, hi, spec)


def orlicz_from_tail(
    model: TailModel, s: float, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Orlicz function generated by a law, evaluated from its tail function.

    The integrand in ``t`` is ``y * P(|xi| >= y) + int_y^inf P(|xi| >= u) du``
    with ``y = 1 / t``.
    """
    if not model.exact_tail:
        raise UnsupportedOperationError(
            f"{model.label()} has no exact tail; use its power surrogate"
        )
    if s < 0.0:
        raise DomainError(f"Orlicz argument must be >= 0, got {s}")
    if s == 0.0:
        return 0.0
    return _outer_integral(model, 0.0, s, spec)


def power_composed(
    base: OrliczFunction, p: float, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> OrliczFunction:
    """Orlicz function generated by ``|xi| ** p`` when ``base`` is generated by ``xi``."""
    if not p > 0.0:
        raise DomainError(f"Composition power must be positive, got {p}")
    if isinstance(base, LogGammaOrlicz):
        # |xi|**p is log-gamma with index r / p.
        index = base.p / p
        if not index > 1.0:
            raise DomainError(
                f"log-gamma({base.p:g}) raised to {p:g} has no finite first moment"
            )
        return LogGammaOrlicz(index)
    if isinstance(base, PowerOrlicz):
        index = base.p / p
        if not index >= 1.0:
            raise DomainError(
                f"power:{base.p:g} raised to {p:g} gives exponent {index:g} < 1"
            )
        return PowerOrlicz(index)
    if isinstance(base, GaussianOrlicz):
        return QuadratureOrlicz(PoweredModel(DistributionModel("StandardGaussian"), p), spec)
    if isinstance(base, QuadratureOrlicz):
        return QuadratureOrlicz(PoweredModel(_as_powerable(base.model), p), base.spec)
    raise UnsupportedOperationError(f"Cannot compose {base.label} with a power")


def _as_powerable(model: TailModel) -> DistributionModel | PoweredModel:
    if isinstance(model, (DistributionModel, PoweredModel)):
        return model
    raise UnsupportedOperationError(f"Cannot raise {model.label()} to a power")


def paired_orlicz(model: DistributionModel) -> OrliczFunction:
    """The Orlicz function used in norm studies for a law."""
    if model.kind == "LogGamma1p":
        return LogGammaOrlicz(model.index)
    if model.kind == "StandardGaussian":
        return GaussianOrlicz()
    return PowerOrlicz(model.index)


def parse_orlicz(
    text: str,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    calibration_size: int = DEFAULT_CALIBRATION_SIZE,
) -> OrliczFunction:
    """Parse ``gaussian``, ``loggamma:<p>``, ``power:<p>`` or ``quad:<dist>``."""
    name, _, argument = text.strip().partition(":")
    name = name.strip().lower()
    if name == "gaussian" and not argument.strip():
        return GaussianOrlicz()
    if name == "quad":
        return QuadratureOrlicz(parse_model(argument, calibration_size), spec)
    if name not in ("loggamma", "power"):
        raise ValueError(f"Unknown Orlicz function: {text!r}")
    try:
        p = float(argument)
    except ValueError:
        raise ValueError(f"Malformed parameter in Orlicz function: {text!r}") from None
    if name == "loggamma":
        return LogGammaOrlicz(p)
    return PowerOrlicz(p)


def orlicz_inverse(M: OrliczFunction, y: float, rel_tol: float = 1e-12) -> float:
    """Smallest ``s`` with ``M(s) = y``."""
    if not y >= 0.0 or not math.isfinite(y):
        raise DomainError(f"Orlicz level must be finite and >= 0, got {y}")
    if y == 0.0:
        return 0.0
    hi = 1.0
    doublings = 0
    while M(hi) < y:
        hi *= 2.0
        doublings += 1
        if doublings > _MAX_DOUBLINGS:
            raise BracketError(f"{M.label} never reaches {y}")
    lo = hi / 2.0
    while M(lo) >= y:
        lo /= 2.0
        if lo == 0.0:
            raise BracketError(f"{M.label} does not vanish near 0")
    logger.debug("Orlicz inverse bracket M=%s y=%s [%s, %s]", M.label, y, lo, hi)
    return bisect_monotone(lambda s: M(s) - y, lo, hi, rel_tol)


def dilation_factor(reference: OrliczFunction, M: OrliczFunction, s: float) -> float:
    """``d`` with ``reference(d * s) = M(s)``; bounded ``d`` means equivalent norms."""
    if not s > 0.0:
        raise DomainError(f"Dilation needs s > 0, got {s}")
    return orlicz_inverse(reference, M(s)) / s


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    """Weights ``a_ij``: rows are ``i`` (size n), columns are ``j`` (size m)."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        array = np.array(self.entries, dtype=float)
        if array.ndim == 1:
            array = array.reshape(-1, 1)
        if array.ndim != 2:
            raise DomainError(f"Coefficients must be a vector or a matrix, got {array.ndim}-d")
        if array.shape[0] < 1 or array.shape[1] < 1:
            raise DomainError(f"Coefficient matrix must be non-empty, got {array.shape}")
        if not np.all(np.isfinite(array)):
            raise DomainError("Coefficient entries must be finite")
        array.setflags(write=False)
        object.__setattr__(self, "entries", array)

    @classmethod
    def from_vector(cls, values: Iterable[float]) -> CoefficientMatrix:
        return cls(np.fromiter(values, dtype=float))

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    @property
    def m(self) -> int:
        return int(self.entries.shape[1])

    def column(self, j: int) -> np.ndarray:
        return self.entries[:, j]

    def vector(self) -> np.ndarray:
        if self.m != 1:
            raise DomainError(f"Expected a vector (m = 1), got an {self.n}x{self.m} matrix")
        return self.entries[:, 0]

    def scaled(self, factor: float) -> CoefficientMatrix:
        return CoefficientMatrix(self.entries * factor)


def _as_vector(x: CoefficientMatrix | Iterable[float]) -> np.ndarray:
    if isinstance(x, CoefficientMatrix):
        return x.vector()
    return CoefficientMatrix(np.asarray(list(x), dtype=float)).vector()


def luxemburg_norm(
    M: OrliczFunction, x: CoefficientMatrix | Iterable[float], rel_tol: float = 1e-10
) -> float:
    """``inf {t > 0 : sum_i M(|x_i| / t) <= 1}``."""
    values = np.abs(_as_vector(x))
    nonzero = values[values > 0.0]
    if nonzero.size == 0:
        return 0.0
    peak = float(nonzero.max())
    if nonzero.size == 1:
        return peak / orlicz_inverse(M, 1.0)
    n = nonzero.size

    s_hi = 1.0
    doublings = 0
    while M(s_hi) < 1.0:
        s_hi *= 2.0
        doublings += 1
        if doublings > _MAX_DOUBLINGS:
            raise BracketError(f"{M.label} never reaches 1")
    s_lo = s_hi
    while M(s_lo) > 1.0 / n:
        s_lo /= 2.0
        if s_lo == 0.0:
            raise BracketError(f"{M.label} does not vanish near 0")

    def residual(t: float) -> float:
        return math.fsum(M(float(v) / t) for v in nonzero) - 1.0

    lo = peak / s_hi
    hi = n * peak / s_lo
    logger.debug("Luxemburg bracket M=%s n=%s [%s, %s]", M.label, n, lo, hi)
    return bisect_monotone(residual, lo, hi, rel_tol)


def lp_norm(x: CoefficientMatrix | Iterable[float], p: float) -> float:
    if not p >= 1.0:
        raise DomainError(f"l_p norm requires p >= 1, got {p}")
    return float(np.linalg.norm(_as_vector(x), ord=p))


@dataclass(frozen=True)
class Lq:
    q: float

    def __post_init__(self) -> None:
        if not self.q >= 1.0:
            raise DomainError(f"Inner l_q norm requires q >= 1, got {self.q}")

    @property
    def label(self) -> str:
        return f"lq:{self.q:g}"


@dataclass(frozen=True)
class OrliczInner:
    function: OrliczFunction

    @property
    def label(self) -> str:
        return f"orlicz:{self.function.label}"


InnerNorm = Lq | OrliczInner


def inner_norm(inner: InnerNorm, column: np.ndarray) -> float:
    if isinstance(inner, Lq):
        return lp_norm(column, inner.q)
    return luxemburg_norm(inner.function, column)


def mixed_norm(A: CoefficientMatrix, outer_p: float, inner: InnerNorm) -> float:
    """Outer l_p norm over columns ``j`` of the inner norms over rows ``i``."""
    if not outer_p >= 1.0:
        raise DomainError(f"Outer l_p norm requires p >= 1, got {outer_p}")
    column_norms = [inner_norm(inner, A.column(j)) for j in range(A.m)]
    return lp_norm(column_norms, outer_p)
