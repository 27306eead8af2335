"""Comparing two operation orders from the same initial state."""

import logging

from app.causal.tables import total_variation
from app.metrics.identification import DEFAULT_BINS, tau_set
from app.models.domain import CommutationReport
from app.models.operations import Pipeline
from app.operators.pipeline import run_pipeline
from app.operators.state import EvidentialState

logger = logging.getLogger(__name__)

DEFAULT_TOL_P = 1e-9


def registry_signature(state: EvidentialState) -> tuple[tuple[str, ...], bool]:
    """Registered adjustment variables and whether the last registration was estimable."""
    if not state.adjustments:
        return (), False
    last = state.adjustments[-1]
    return last.variables, last.estimable


def compare_orders(
    initial: EvidentialState,
    a: Pipeline,
    b: Pipeline,
    *,
    tol_p: float = DEFAULT_TOL_P,
    bins: int = DEFAULT_BINS,
) -> CommutationReport:
    """Run both pipelines and report whether they reach the same evidential state.

    The orders commute when the observed tables agree within `tol_p`, the
    admissible sets are identical and both states hold the same adjustment
    registry.
    """
    state_a = run_pipeline(initial, a)[-1]
    state_b = run_pipeline(initial, b)[-1]

    scope_match = state_a.observed.scope == state_b.observed.scope
    table_tv = total_variation(state_a.observed, state_b.observed) if scope_match else None
    members_equal = state_a.admissible.same_members(state_b.admissible)
    registry_match = registry_signature(state_a) == registry_signature(state_b)
    commute = (
        table_tv is not None and table_tv <= tol_p and members_equal and registry_match
    )
    logger.info(
        f"Compare {a.label} vs {b.label}: tv={table_tv}, members_equal={members_equal}, "
        f"registry_match={registry_match} -> {'commute' if commute else 'diverge'}"
    )
    return CommutationReport(
        label_a=a.label,
        label_b=b.label,
        scope_match=scope_match,
        table_tv=table_tv,
        members_equal=members_equal,
        set_jaccard=state_a.admissible.jaccard(state_b.admissible),
        registry_match=registry_match,
        tau_set_a=tau_set(state_a, bins),
        tau_set_b=tau_set(state_b, bins),
        tol_p=tol_p,
        verdict="commute" if commute else "diverge",
        state_a=state_a,
        state_b=state_b,
    )
