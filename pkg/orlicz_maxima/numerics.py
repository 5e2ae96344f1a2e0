from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Literal, Sequence

import numpy as np
from scipy import integrate as _integrate
from scipy import optimize, special

from .errors import BracketError, DivergenceError, DomainError, QuadratureError

RealFunction = Callable[[float], float]
TailCutoffPolicy = Literal["decay-bound", "adaptive"]

# Median of R replicate means has standard error ~ sqrt(pi/2) * sigma / sqrt(R);
# sigma is read off the interquartile range of a normal (IQR = 1.349 sigma).
_MEDIAN_EFFICIENCY = math.sqrt(math.pi / 2.0)
_IQR_TO_SIGMA = 1.0 / 1.3489795003921634

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PowerLawDecay:
    """Integrand bounded by C * u**-exponent for large u."""

    exponent: float


@dataclass(frozen=True)
class ExpPowerDecay:
    """Integrand bounded by C * exp(-rate * u**power); power >= 1."""

    power: float = 2.0
    rate: float = 0.5

    def __post_init__(self) -> None:
        if self.power < 1.0 or self.rate <= 0.0:
            raise DomainError(
                f"exp-power decay needs power >= 1 and rate > 0, got {self.power}, {self.rate}"
            )


DecayClass = PowerLawDecay | ExpPowerDecay
GAUSSIAN_DECAY = ExpPowerDecay(power=2.0, rate=0.5)


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    tail_cutoff: TailCutoffPolicy = "decay-bound"
    divergence_ceiling: float = 1e12

    def __post_init__(self) -> None:
        if not self.rel_tol > 0.0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if not self.abs_tol > 0.0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise DomainError(
                f"max_subdivisions must be >= 1, got {self.max_subdivisions}"
            )
        if self.tail_cutoff not in ("decay-bound", "adaptive"):
            raise DomainError(f"Unknown tail cutoff policy: {self.tail_cutoff}")

    def tightened(self, factor: float = 1e-2) -> QuadratureSpec:
        """Spec for integrals nested inside another quadrature."""
        return replace(self, rel_tol=max(self.rel_tol * factor, 1e-13))


DEFAULT_QUADRATURE = QuadratureSpec()


def _quad(f: RealFunction, lo: float, hi: float, spec: QuadratureSpec) -> float:
    result = _integrate.quad(
        f,
        lo,
        hi,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    value = float(result[0])
    error = float(result[1])
    if not math.isfinite(value):
        raise QuadratureError(
            f"Quadrature on [{lo}, {hi}] returned a non-finite estimate",
            estimate=value,
            error_bound=error,
        )
    if len(result) > 3:
        message = str(result[3])
        # QUADPACK also warns on roundoff once the target is already met.
        target = max(spec.abs_tol, spec.rel_tol * abs(value))
        if "divergent" in message or "subdivisions" in message or error > 10.0 * target:
            raise QuadratureError(
                f"Quadrature on [{lo}, {hi}] did not converge: {message}",
                estimate=value,
                error_bound=error,
            )
        logger.debug("Quadrature warning accepted on [%s, %s]: %s", lo, hi, message)
    return value


def integrate(
    f: RealFunction,
    lo: float,
    hi: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    *,
    endpoint_power: float | None = None,
) -> float:
    """Integrate ``f`` over ``[lo, hi]``.

    ``endpoint_power`` declares an integrable singularity ``(t - lo)**alpha`` at
    ``lo``; it is removed by the substitution ``t = lo + tau**k`` with
    ``k = 1 / (1 + alpha)``.
    """
    if not lo <= hi:
        raise DomainError(f"Integration bounds out of order: [{lo}, {hi}]")
    if lo == hi:
        return 0.0
    if endpoint_power is None or endpoint_power >= 0.0:
        return _quad(f, lo, hi, spec)
    if endpoint_power <= -1.0:
        raise DomainError(f"Endpoint singularity t^{endpoint_power} is not integrable")

    k = 1.0 / (1.0 + endpoint_power)

    def substituted(tau: float) -> float:
        return f(lo + tau**k) * k * tau ** (k - 1.0)

    return _quad(substituted, 0.0, (hi - lo) ** (1.0 / k), spec)


def integrate_to_infinity(
    f: RealFunction,
    lo: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    decay: DecayClass | None = None,
) -> float:
    """Integrate a non-negative, eventually decreasing ``f`` over ``[lo, inf)``."""
    if spec.tail_cutoff == "adaptive" or decay is None:
        value = _adaptive_tail(f, lo, spec)
    elif isinstance(decay, PowerLawDecay):
        value = _power_law_tail(f, lo, spec, decay)
    else:
        value = _exp_power_tail(f, lo, spec, decay)
    if not math.isfinite(value) or abs(value) > spec.divergence_ceiling:
        raise DivergenceError(
            f"Tail integral from {lo} exceeds the ceiling {spec.divergence_ceiling:g}"
        )
    return value


def _adaptive_tail(f: RealFunction, lo: float, spec: QuadratureSpec) -> float:
    try:
        return _quad(f, lo, math.inf, spec)
    except QuadratureError as exc:
        if "divergent" in exc.message or abs(exc.estimate) > spec.divergence_ceiling:
            raise DivergenceError(exc.message) from exc
        raise


def _power_law_tail(
    f: RealFunction, lo: float, spec: QuadratureSpec, decay: PowerLawDecay
) -> float:
    k = decay.exponent
    if k <= 1.0:
        raise DivergenceError(f"Integrand decaying like u^-{k} is not integrable at infinity")
    head = 0.0
    start = lo
    if start < 1.0:
        head = integrate(f, lo, 1.0, spec)
        start = 1.0
    # u = start * w**-a maps [start, inf) onto (0, 1]; an exact power law
    # becomes a constant integrand.
    a = 1.0 / (k - 1.0)

    def mapped(w: float) -> float:
        u = start * w ** (-a)
        if not math.isfinite(u):
            return 0.0
        return f(u) * a * u / w

    try:
        tail = _quad(mapped, 0.0, 1.0, spec)
    except QuadratureError as exc:
        if abs(exc.estimate) > spec.divergence_ceiling:
            raise DivergenceError(
                f"Integrand decays slower than the declared u^-{k}"
            ) from exc
        raise
    return head + tail


def _exp_power_tail(
    f: RealFunction, lo: float, spec: QuadratureSpec, decay: ExpPowerDecay
) -> float:
    start = max(lo, 0.0)
    head = integrate(f, lo, start, spec) if lo < start else 0.0
    f_start = f(start)
    if f_start <= 0.0:
        return head
    # f(u) <= f(start) * exp(rate * (start**power - u**power)); past the cut-off the
    # remainder is below abs_tol / 2 for power >= 1.
    log_budget = (
        decay.rate * start**decay.power
        + math.log(f_start)
        + math.log(4.0 / spec.abs_tol)
    )
    cutoff = start + 1.0
    if log_budget > 0.0:
        cutoff = max(cutoff, (log_budget / decay.rate) ** (1.0 / decay.power))
    logger.debug("Tail cut-off lo=%s cutoff=%s f(lo)=%s", lo, cutoff, f_start)
    return head + integrate(f, start, cutoff, spec)


def bisect_monotone(
    g: RealFunction, lo: float, hi: float, rel_tol: float = 1e-10
) -> float:
    """Root of a continuous monotone ``g`` bracketed by ``[lo, hi]``."""
    if not rel_tol > 0.0:
        raise DomainError(f"rel_tol must be positive, got {rel_tol}")
    if not lo < hi:
        raise DomainError(f"Empty bracket [{lo}, {hi}]")
    g_lo = g(lo)
    g_hi = g(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if math.copysign(1.0, g_lo) == math.copysign(1.0, g_hi):
        raise BracketError(
            f"No sign change on [{lo}, {hi}]: g(lo)={g_lo}, g(hi)={g_hi}"
        )
    root = optimize.brentq(
        g,
        lo,
        hi,
        xtol=1e-300,
        rtol=max(rel_tol, 4.0 * np.finfo(float).eps),
        maxiter=1000,
    )
    return float(root)


def upper_incomplete_gamma(t: float, x: float) -> float:
    """Gamma(t, x) = integral of u**(t-1) * exp(-u) over [x, inf)."""
    if not t > 0.0 or not x >= 0.0:
        raise DomainError(f"Upper incomplete gamma needs t > 0 and x >= 0, got ({t}, {x})")
    regularized = float(special.gammaincc(t, x))
    if regularized == 0.0:
        return 0.0
    if t < 170.0:
        return regularized * float(special.gamma(t))
    return math.exp(float(special.gammaln(t)) + math.log(regularized))


def median_with_spread(replicate_means: Sequence[float]) -> tuple[float, float]:
    """Median of replicate means and its IQR-based half-width."""
    values = np.asarray(replicate_means, dtype=float)
    if values.size == 0:
        raise DomainError("No replicate means to aggregate")
    center = float(np.median(values))
    if values.size == 1:
        return center, 0.0
    q1, q3 = np.percentile(values, [25.0, 75.0])
    spread = _MEDIAN_EFFICIENCY * float(q3 - q1) * _IQR_TO_SIGMA / math.sqrt(values.size)
    return center, spread


def mean_with_spread(replicate_means: Sequence[float]) -> tuple[float, float]:
    values = np.asarray(replicate_means, dtype=float)
    if values.size == 0:
        raise DomainError("No replicate means to aggregate")
    center = float(np.mean(values))
    if values.size == 1:
        return center, 0.0
    return center, float(np.std(values, ddof=1)) / math.sqrt(values.size)
