# Domain models module

from app.models.domain import (
    BreadthReport,
    CommutationReport,
    ConstraintReport,
    EntropyReport,
    IdentificationVerdict,
    KSettings,
    PipelineReport,
    RunReport,
    SettingsEcho,
    StepRecord,
    TauSet,
)
from app.models.operations import Condition, Intervene, Operation, Pipeline, Restrict

__all__ = [
    "BreadthReport",
    "CommutationReport",
    "Condition",
    "ConstraintReport",
    "EntropyReport",
    "IdentificationVerdict",
    "Intervene",
    "KSettings",
    "Operation",
    "Pipeline",
    "PipelineReport",
    "Restrict",
    "RunReport",
    "SettingsEcho",
    "StepRecord",
    "TauSet",
]
