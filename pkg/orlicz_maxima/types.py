from typing import Literal, TypedDict

ModelKind = Literal["LogGamma1p", "StandardGaussian", "SymmetricStable"]
Estimator = Literal["Mean", "MedianOfMeans"]
TheoremId = Literal[
    "T1",
    "T2",
    "T3",
    "Corollary",
    "T5",
    "T6",
    "GaussNotL2",
    "FuncEquivT2",
    "FuncEquivT3",
]
PassCriterion = Literal["spread", "max", "decrease"]


class StudyRowRecord(TypedDict):
    theorem_id: TheoremId
    config: str
    n: int
    m: int
    p: float | None
    q: float | None
    mc_value: float
    mc_spread: float
    norm_value: float
    ratio: float


class StudySummaryRecord(TypedDict):
    ratio_min: float
    ratio_max: float
    ratio_spread: float
    criterion: PassCriterion
    threshold: float
    passed: bool


class EstimateRecord(TypedDict):
    value: float
    spread: float
    samples_total: int
    estimator: Estimator
    replicate_means: list[float]


class ManifestRecord(TypedDict):
    command: str
    argv: list[str]
    parameters: dict[str, object]
    master_seed: int | None
    tool_version: str
    duration_seconds: float
    outputs: list[str]
