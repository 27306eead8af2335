"""Validated scenario objects produced by the parser."""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.causal.model import CausalDiagram, StructuralModel
from app.enumeration.grid import ParameterGrid
from app.models.operations import Condition, Pipeline, Restrict


class ScenarioSettings(BaseModel):
    """Engine settings a scenario pins; unset values fall back to the engine's."""

    model_config = ConfigDict(frozen=True)

    epsilon: Optional[float] = Field(default=None, ge=0.0)
    eps_id: Optional[float] = Field(default=None, ge=0.0)
    bins: Optional[int] = Field(default=None, ge=1)
    quantum: Optional[float] = Field(default=None, gt=0.0)
    cap: Optional[int] = Field(default=None, ge=1)

    def as_overrides(self) -> dict:
        return self.model_dump(exclude_none=True)


class Scenario(BaseModel):
    """Ground truth, grid, pipelines and the pipeline pairs to compare."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    ground_truth: StructuralModel
    grid: ParameterGrid
    pipelines: tuple[Pipeline, ...]
    comparisons: tuple[tuple[str, str], ...] = ()
    settings: ScenarioSettings = ScenarioSettings()

    @model_validator(mode="after")
    def _check_references(self) -> "Scenario":
        diagram = self.diagram
        for role in ("treatment", "outcome"):
            holders = [v.name for v in diagram.variables if v.role == role]
            if len(holders) != 1:
                raise ValueError(f"scenario needs exactly one {role} variable, found {holders}")
            if holders[0] not in diagram.observed:
                raise ValueError(f"{role} variable {holders[0]!r} must be observed")
        if not self.pipelines:
            raise ValueError("scenario needs at least one pipeline")
        labels = [p.label for p in self.pipelines]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate pipeline labels: {labels}")
        for a, b in self.comparisons:
            for label in (a, b):
                if label not in labels:
                    raise ValueError(f"compare names unknown pipeline {label!r}")
        for pipeline in self.pipelines:
            for step in pipeline.steps:
                for name in step.variables:
                    if name not in diagram.names:
                        raise ValueError(f"pipeline {pipeline.label} names undeclared variable {name!r}")
                    if isinstance(step, (Restrict, Condition)) and name not in diagram.observed:
                        raise ValueError(f"pipeline {pipeline.label} acts on hidden variable {name!r}")
        return self

    @property
    def diagram(self) -> CausalDiagram:
        return self.ground_truth.diagram

    def pipeline(self, label: str) -> Pipeline:
        for pipeline in self.pipelines:
            if pipeline.label == label:
                return pipeline
        raise KeyError(label)
