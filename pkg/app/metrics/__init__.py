# Metrics module

from app.causal.tables import ScopeMismatch
from app.metrics.audit import constraint_audit
from app.metrics.identification import (
    EmptyAdmissible,
    identifiable,
    identification,
    member_taus,
    summarize_taus,
    tau_histogram,
    tau_set,
)
from app.metrics.information import delta_breadth, delta_cause, histogram_entropy, kl_bits
from app.metrics.residual import residual_k

__all__ = [
    "EmptyAdmissible",
    "ScopeMismatch",
    "constraint_audit",
    "delta_breadth",
    "delta_cause",
    "histogram_entropy",
    "identifiable",
    "identification",
    "kl_bits",
    "member_taus",
    "residual_k",
    "summarize_taus",
    "tau_histogram",
    "tau_set",
]
