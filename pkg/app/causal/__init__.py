"""Causal diagrams, structural models and joint tables."""

from app.causal.model import (
    CausalDiagram,
    InvalidModel,
    Mechanism,
    MissingRole,
    StructuralModel,
    Variable,
    do_replace,
    joint,
    randomize,
    tau,
    tau_truncated,
)
from app.causal.tables import (
    Event,
    JointTable,
    PositivityViolation,
    ScopeMismatch,
    UnknownVariable,
    ZeroSupport,
    adjustment_estimate,
    cell_bits,
    condition_table,
    crude_risk_difference,
    marginal,
    total_variation,
)

__all__ = [
    "CausalDiagram",
    "Event",
    "InvalidModel",
    "JointTable",
    "Mechanism",
    "MissingRole",
    "PositivityViolation",
    "ScopeMismatch",
    "StructuralModel",
    "UnknownVariable",
    "Variable",
    "ZeroSupport",
    "adjustment_estimate",
    "cell_bits",
    "condition_table",
    "crude_risk_difference",
    "do_replace",
    "joint",
    "marginal",
    "randomize",
    "tau",
    "tau_truncated",
    "total_variation",
]
