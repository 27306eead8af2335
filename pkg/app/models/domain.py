"""Domain models for evidential-state reports."""

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field
from pydantic.json_schema import SkipJsonSchema


class TauSet(BaseModel):
    """Effects of the admissible members, summarized as a histogram on [-1, 1]."""

    model_config = ConfigDict(frozen=True)

    min: Optional[float] = None
    max: Optional[float] = None
    width: float = 0.0
    histogram: list[int]
    member_count: int
    bins: int


class EntropyReport(BaseModel):
    """Entropy of the tau histogram before and after the pipeline, in bits."""

    model_config = ConfigDict(frozen=True)

    h_prior: float
    h_state: float
    delta_cause: float
    bins: int


class BreadthReport(BaseModel):
    """KL divergence of the final observed table from the initial one, in bits."""

    model_config = ConfigDict(frozen=True)

    kl_bits: Optional[float] = None
    dominated: bool

    @property
    def unbounded(self) -> bool:
        return not self.dominated


class IdentificationVerdict(BaseModel):
    """Whether the effect is pinned down in a state, and by which route."""

    model_config = ConfigDict(frozen=True)

    identifiable: bool
    route: Literal["adjustment", "width", "none"]
    width: float
    eps_id: float
    adjusted_estimate: Optional[float] = None
    adjustment_set: list[str] = Field(default_factory=list)
    positivity_violation: Optional[str] = None


class StepRecord(BaseModel):
    """Entropy and divergence after one pipeline step."""

    model_config = ConfigDict(frozen=True)

    index: int
    operation: str
    member_count: int
    h_state: float
    kl_bits: Optional[float] = None
    h_increased: bool = False
    kl_decreased: bool = False


class KSettings(BaseModel):
    """Settings the residual constant k was computed under."""

    model_config = ConfigDict(frozen=True)

    grid: list[float]
    quantum: float
    bins: int
    epsilon: float


class ConstraintReport(BaseModel):
    """Audit of delta_cause * delta_breadth >= k along one pipeline."""

    model_config = ConfigDict(frozen=True)

    pipeline: str
    delta_cause: float
    delta_breadth: Optional[float] = None
    product: Optional[float] = None
    k: float
    satisfied: Optional[bool] = None
    k_settings: KSettings
    steps: list[StepRecord] = Field(default_factory=list)
    monotonicity_violations: int = 0


class CommutationReport(BaseModel):
    """Outcome of running two pipelines from the same initial state."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    label_a: str
    label_b: str
    scope_match: bool
    table_tv: Optional[float] = None
    members_equal: bool
    set_jaccard: float
    registry_match: bool
    tau_set_a: TauSet
    tau_set_b: TauSet
    tol_p: float
    verdict: Literal["commute", "diverge"]

    state_a: SkipJsonSchema[Any] = Field(default=None, exclude=True, repr=False)
    state_b: SkipJsonSchema[Any] = Field(default=None, exclude=True, repr=False)


class PipelineReport(BaseModel):
    """Everything measured on one pipeline's final state."""

    model_config = ConfigDict(frozen=True)

    label: str
    steps: list[str]
    member_count: int
    final_observed: dict[str, float]
    world_effect: Optional[float] = None
    tau_set: TauSet
    entropy: EntropyReport
    breadth: BreadthReport
    identification: IdentificationVerdict
    constraint: ConstraintReport


class SettingsEcho(BaseModel):
    """Effective settings of a run.

    Execution knobs (parallelism, block size) are left out: they never change
    a result.
    """

    model_config = ConfigDict(frozen=True)

    grid: list[float]
    epsilon: float
    eps_id: float
    bins: int
    quantum: float
    cap: int


class RunReport(BaseModel):
    """Self-contained result of running a scenario; `scenario_text` re-runs it."""

    model_config = ConfigDict(frozen=True)

    scenario: str
    settings: SettingsEcho
    scenario_text: str
    model_count: int
    k: float
    pipelines: list[PipelineReport] = Field(default_factory=list)
    comparisons: list[CommutationReport] = Field(default_factory=list)
    timings: Optional[dict[str, float]] = None
