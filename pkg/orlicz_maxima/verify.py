from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .distributions import (
    DistributionModel,
    PoweredModel,
    RngStream,
    log_gamma,
    standard_gaussian,
    symmetric_stable,
)
from .errors import DomainError
from .mc import McConfig, McEstimate, expected_max_product, expected_max_single
from .numerics import QuadratureSpec
from .orlicz import (
    CoefficientMatrix,
    GaussianOrlicz,
    InnerNorm,
    Lq,
    OrliczFunction,
    OrliczInner,
    QuadratureOrlicz,
    luxemburg_norm,
    mixed_norm,
    orlicz_from_tail,
)
from .types import PassCriterion, StudyRowRecord, StudySummaryRecord, TheoremId

CoefficientFamily = Literal["uniform", "geometric", "spike"]
FAMILIES: tuple[CoefficientFamily, ...] = ("uniform", "geometric", "spike")
COEFFICIENT_SEED = 20_240_918
COEFFICIENT_STREAM = 2**31

T1_THRESHOLD = 2.5
PRODUCT_THRESHOLD = 4.0
GAUSS_NOT_L2_THRESHOLD = 0.5
GAUSS_CONTROL_THRESHOLD = 3.0
FUNC_T2_THRESHOLD = 3.0
FUNC_T3_THRESHOLD = 50.0
FUNC_MIN_S = 0.05

# Function studies compare values far below 1e-12, so absolute tolerance is off.
FINE_QUADRATURE = QuadratureSpec(rel_tol=1e-9, abs_tol=1e-300)

# Law on the row index i (inner norm) and on the column index j (outer norm).
INDEX_BINDING: dict[str, tuple[str, str]] = {
    "T2": ("q-stable", "p-stable"),
    "T3": ("gaussian", "p-stable"),
    "T5": ("loggamma:2", "p-stable"),
    "T6": ("gaussian", "loggamma:2"),
}

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RatioRow:
    config: str
    n: int
    m: int
    p: float | None
    q: float | None
    mc_value: float
    mc_spread: float
    norm_value: float

    @property
    def ratio(self) -> float:
        return self.mc_value / self.norm_value

    def to_record(self, theorem_id: TheoremId) -> StudyRowRecord:
        return {
            "theorem_id": theorem_id,
            "config": self.config,
            "n": self.n,
            "m": self.m,
            "p": self.p,
            "q": self.q,
            "mc_value": self.mc_value,
            "mc_spread": self.mc_spread,
            "norm_value": self.norm_value,
            "ratio": self.ratio,
        }


@dataclass(frozen=True)
class RatioStudy:
    theorem_id: TheoremId
    rows: tuple[RatioRow, ...]
    threshold: float
    criterion: PassCriterion = "spread"

    def __post_init__(self) -> None:
        if not self.rows:
            raise DomainError("A ratio study needs at least one row")
        for row in self.rows:
            if not (row.norm_value > 0.0 and row.mc_value > 0.0):
                raise DomainError(f"Non-positive ratio in row {row.config!r}")

    @property
    def ratios(self) -> list[float]:
        return [row.ratio for row in self.rows]

    @property
    def ratio_min(self) -> float:
        return min(self.ratios)

    @property
    def ratio_max(self) -> float:
        return max(self.ratios)

    @property
    def ratio_spread(self) -> float:
        return self.ratio_max / self.ratio_min

    @property
    def passed(self) -> bool:
        if self.criterion == "spread":
            return self.ratio_spread <= self.threshold
        if self.criterion == "max":
            return self.ratio_max <= self.threshold
        ratios = self.ratios
        decreasing = all(later < earlier for earlier, later in zip(ratios, ratios[1:]))
        return decreasing and ratios[-1] / ratios[0] <= self.threshold

    def summary(self) -> StudySummaryRecord:
        return {
            "ratio_min": self.ratio_min,
            "ratio_max": self.ratio_max,
            "ratio_spread": self.ratio_spread,
            "criterion": self.criterion,
            "threshold": self.threshold,
            "passed": self.passed,
        }


def coefficient_family(
    family: CoefficientFamily, n: int, m: int, rng: RngStream
) -> CoefficientMatrix:
    """Random weights from one of the stress families."""
    generator = rng.generator
    if family == "uniform":
        return CoefficientMatrix(generator.uniform(0.1, 1.0, size=(n, m)))
    if family == "geometric":
        i = generator.permutation(n)[:, np.newaxis]
        j = generator.permutation(m)[np.newaxis, :]
        return CoefficientMatrix(0.5 ** (i + j).astype(float))
    if family == "spike":
        entries = generator.uniform(0.0, 0.05, size=(n, m))
        entries[generator.integers(n), generator.integers(m)] = 1.0
        return CoefficientMatrix(entries)
    raise DomainError(f"Unknown coefficient family: {family}")


def _log_row(theorem_id: str, row: RatioRow) -> None:
    logger.info(
        "Study row theorem=%s config=%s mc=%s norm=%s ratio=%s",
        theorem_id,
        row.config,
        row.mc_value,
        row.norm_value,
        row.ratio,
    )


def study_thm1(
    model: DistributionModel,
    M: OrliczFunction,
    ns: Sequence[int],
    trials_per_n: int,
    cfg: McConfig,
    *,
    theorem_id: TheoremId = "T1",
    threshold: float = T1_THRESHOLD,
    coefficient_scale: float = 1.0,
    coefficient_seed: int = COEFFICIENT_SEED,
) -> RatioStudy:
    """E max_i |a_i xi_i| against the Luxemburg norm of ``a``, per random ``a``."""
    if trials_per_n < 1:
        raise DomainError(f"trials_per_n must be >= 1, got {trials_per_n}")
    if not ns or any(n < 1 for n in ns):
        raise DomainError(f"ns must be non-empty and positive, got {list(ns)}")
    coefficient_rng = RngStream(coefficient_seed, COEFFICIENT_STREAM)
    rows: list[RatioRow] = []
    for n in ns:
        for trial in range(trials_per_n):
            family = FAMILIES[trial % len(FAMILIES)]
            a = coefficient_family(family, n, 1, coefficient_rng).scaled(coefficient_scale)
            estimate = expected_max_single(model, a, cfg.derive(len(rows)))
            row = RatioRow(
                config=f"n={n} family={family} trial={trial}",
                n=n,
                m=1,
                p=model.p,
                q=None,
                mc_value=estimate.value,
                mc_spread=estimate.spread,
                norm_value=luxemburg_norm(M, a),
            )
            _log_row(theorem_id, row)
            rows.append(row)
    return RatioStudy(theorem_id, tuple(rows), threshold, "spread")


@dataclass(frozen=True)
class ProductTheorem:
    theorem_id: TheoremId
    model_i: DistributionModel
    model_j: DistributionModel
    inner: InnerNorm
    outer_p: float
    p: float | None = None
    q: float | None = None
    threshold: float = PRODUCT_THRESHOLD


def _check_stable_index(name: str, p: float) -> None:
    if not 1.0 < p < 2.0:
        raise DomainError(f"{name} requires 1 < p < 2, got p={p}")


def t2(p: float, q: float) -> ProductTheorem:
    if not 1.0 < p < q < 2.0:
        raise DomainError(f"T2 requires 1 < p < q < 2, got p={p}, q={q}")
    return ProductTheorem(
        "T2", symmetric_stable(q), symmetric_stable(p), Lq(q), outer_p=p, p=p, q=q
    )


def t3(p: float) -> ProductTheorem:
    _check_stable_index("T3", p)
    return ProductTheorem(
        "T3",
        standard_gaussian(),
        symmetric_stable(p),
        OrliczInner(GaussianOrlicz()),
        outer_p=p,
        p=p,
    )


def t5(p: float) -> ProductTheorem:
    _check_stable_index("T5", p)
    return ProductTheorem("T5", log_gamma(2.0), symmetric_stable(p), Lq(2.0), outer_p=p, p=p)


def t6() -> ProductTheorem:
    return ProductTheorem(
        "T6",
        standard_gaussian(),
        log_gamma(2.0),
        OrliczInner(GaussianOrlicz()),
        outer_p=2.0,
    )


def study_product(
    theorem: ProductTheorem,
    shapes: Sequence[tuple[int, int]],
    trials: int,
    cfg: McConfig,
    *,
    coefficient_scale: float = 1.0,
    coefficient_seed: int = COEFFICIENT_SEED,
) -> RatioStudy:
    """E max_ij |a_ij xi_i eta_j| against the theorem's mixed norm."""
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if not shapes or any(n < 1 or m < 1 for n, m in shapes):
        raise DomainError(f"shapes must be non-empty and positive, got {list(shapes)}")
    coefficient_rng = RngStream(coefficient_seed, COEFFICIENT_STREAM)
    rows: list[RatioRow] = []
    for n, m in shapes:
        for trial in range(trials):
            family = FAMILIES[trial % len(FAMILIES)]
            A = coefficient_family(family, n, m, coefficient_rng).scaled(coefficient_scale)
            estimate = expected_max_product(
                theorem.model_i, theorem.model_j, A, cfg.derive(len(rows)), n=n, m=m
            )
            row = RatioRow(
                config=f"n={n} m={m} family={family} trial={trial}",
                n=n,
                m=m,
                p=theorem.p,
                q=theorem.q,
                mc_value=estimate.value,
                mc_spread=estimate.spread,
                norm_value=mixed_norm(A, theorem.outer_p, theorem.inner),
            )
            _log_row(theorem.theorem_id, row)
            rows.append(row)
    return RatioStudy(theorem.theorem_id, tuple(rows), theorem.threshold, "spread")


def gaussian_unit_maxima(ns: Sequence[int], cfg: McConfig) -> list[McEstimate]:
    """E max_i |xi_i| over n unit-weight standard Gaussians, one run per n."""
    gaussian = standard_gaussian()
    return [
        expected_max_single(gaussian, CoefficientMatrix(np.ones(n)), cfg.derive(k))
        for k, n in enumerate(ns)
    ]


def _check_increasing(ns: Sequence[int]) -> None:
    if not ns or ns[0] < 1 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise DomainError(f"ns must be positive and strictly increasing, got {list(ns)}")


def _unit_norm_study(
    theorem_id: TheoremId,
    ns: Sequence[int],
    cfg: McConfig,
    estimates: Sequence[McEstimate] | None,
    norm_of_ones: OrliczFunction | None,
    threshold: float,
    criterion: PassCriterion,
) -> RatioStudy:
    _check_increasing(ns)
    if estimates is None:
        estimates = gaussian_unit_maxima(ns, cfg)
    if len(estimates) != len(ns):
        raise DomainError("One estimate per n is required")
    rows: list[RatioRow] = []
    for n, estimate in zip(ns, estimates):
        if norm_of_ones is None:
            norm_value = math.sqrt(n)
        else:
            norm_value = luxemburg_norm(norm_of_ones, np.ones(n))
        row = RatioRow(
            config=f"n={n}",
            n=n,
            m=1,
            p=None,
            q=None,
            mc_value=estimate.value,
            mc_spread=estimate.spread,
            norm_value=norm_value,
        )
        _log_row(theorem_id, row)
        rows.append(row)
    return RatioStudy(theorem_id, tuple(rows), threshold, criterion)


def study_gaussian_not_l2(
    ns: Sequence[int],
    cfg: McConfig,
    estimates: Sequence[McEstimate] | None = None,
) -> RatioStudy:
    """Unit-weight Gaussian maxima against sqrt(n); the ratio must keep falling."""
    return _unit_norm_study(
        "GaussNotL2", ns, cfg, estimates, None, GAUSS_NOT_L2_THRESHOLD, "decrease"
    )


def study_gaussian_control(
    ns: Sequence[int],
    cfg: McConfig,
    estimates: Sequence[McEstimate] | None = None,
) -> RatioStudy:
    """Same maxima against the Gaussian Orlicz norm; the ratio stays bounded."""
    return _unit_norm_study(
        "T1",
        ns,
        cfg,
        estimates,
        GaussianOrlicz(),
        GAUSS_CONTROL_THRESHOLD,
        "spread",
    )


@dataclass(frozen=True)
class T2Proof:
    """Orlicz function of |xi|**p under a tail u**-q against s**(q/p)."""

    p: float
    q: float

    def __post_init__(self) -> None:
        if not 1.0 < self.p < self.q < 2.0:
            raise DomainError(f"T2 requires 1 < p < q < 2, got p={self.p}, q={self.q}")


@dataclass(frozen=True)
class T3Proof:
    """Gaussian Orlicz function of |xi|**p at s**p against the one of xi at s."""

    p: float

    def __post_init__(self) -> None:
        _check_stable_index("T3", self.p)


FunctionEquivalence = T2Proof | T3Proof


def study_function_equiv(
    kind: FunctionEquivalence,
    s_grid: Sequence[float],
    spec: QuadratureSpec = FINE_QUADRATURE,
) -> RatioStudy:
    """Pointwise ratio of two Orlicz functions over ``s_grid``.

    Rows store the left function in ``mc_value`` and the right one in
    ``norm_value``.
    """
    if not s_grid or any(not 0.0 < s <= 10.0 for s in s_grid):
        raise DomainError(f"s grid must be non-empty and within (0, 10], got {list(s_grid)}")
    rows: list[RatioRow] = []
    if isinstance(kind, T2Proof):
        powered = PoweredModel(log_gamma(kind.q), kind.p)
        exponent = kind.q / kind.p
        for s in s_grid:
            row = RatioRow(
                config=f"s={s:g}",
                n=0,
                m=0,
                p=kind.p,
                q=kind.q,
                mc_value=orlicz_from_tail(powered, s, spec),
                mc_spread=0.0,
                norm_value=s**exponent,
            )
            _log_row("FuncEquivT2", row)
            rows.append(row)
        return RatioStudy("FuncEquivT2", tuple(rows), FUNC_T2_THRESHOLD, "max")

    gaussian = standard_gaussian()
    powered_function = QuadratureOrlicz(PoweredModel(gaussian, kind.p), spec, memoize=False)
    kept = [s for s in s_grid if s >= FUNC_MIN_S]
    if len(kept) < len(s_grid):
        logger.warning(
            "Dropped %s grid points below %s where both functions underflow",
            len(s_grid) - len(kept),
            FUNC_MIN_S,
        )
    if not kept:
        raise DomainError(f"No grid points at or above {FUNC_MIN_S}")
    for s in kept:
        row = RatioRow(
            config=f"s={s:g}",
            n=0,
            m=0,
            p=kind.p,
            q=None,
            mc_value=powered_function.exact(s**kind.p),
            mc_spread=0.0,
            norm_value=orlicz_from_tail(gaussian, s, spec),
        )
        _log_row("FuncEquivT3", row)
        rows.append(row)
    return RatioStudy("FuncEquivT3", tuple(rows), FUNC_T3_THRESHOLD, "spread")
