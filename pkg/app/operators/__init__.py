# Evidential states and operators

from app.models.operations import Condition, Intervene, Operation, Pipeline, Restrict
from app.operators.state import (
    AdjustmentRecord,
    EvidentialState,
    InvalidOperation,
    World,
    apply,
    initial_state,
)
from app.operators.pipeline import PipelineStepError, run_pipeline
from app.operators.commutation import compare_orders, registry_signature

__all__ = [
    "AdjustmentRecord",
    "Condition",
    "EvidentialState",
    "Intervene",
    "InvalidOperation",
    "Operation",
    "Pipeline",
    "PipelineStepError",
    "Restrict",
    "World",
    "apply",
    "compare_orders",
    "initial_state",
    "registry_signature",
    "run_pipeline",
]
