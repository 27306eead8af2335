"""Audit of delta_cause * delta_breadth >= k along a pipeline."""

import logging
from typing import TYPE_CHECKING, Optional, Sequence

from app.metrics.identification import DEFAULT_BINS
from app.metrics.information import delta_breadth, delta_cause, state_entropy
from app.models.domain import ConstraintReport, KSettings, StepRecord

if TYPE_CHECKING:
    from app.operators.state import EvidentialState

logger = logging.getLogger(__name__)

PRODUCT_TOLERANCE = 1e-9
MONOTONICITY_TOLERANCE = 1e-12


def _kl_decreased(previous: Optional[float], current: Optional[float]) -> bool:
    if current is None:
        return False
    if previous is None:
        return True
    return current < previous - MONOTONICITY_TOLERANCE


def constraint_audit(
    states: Sequence["EvidentialState"],
    k: float,
    k_settings: KSettings,
    *,
    label: str = "",
    bins: int = DEFAULT_BINS,
) -> ConstraintReport:
    """Report the product bound for the final state and the per-step trend.

    Steps where the entropy rises or the divergence falls are flagged, never
    raised.
    """
    steps: list[StepRecord] = []
    for index, state in enumerate(states):
        h_state = state_entropy(state, bins)
        kl = delta_breadth(state).kl_bits
        previous = steps[-1] if steps else None
        steps.append(
            StepRecord(
                index=index,
                operation=state.trace[-1].describe() if state.trace else "initial",
                member_count=state.admissible.count,
                h_state=h_state,
                kl_bits=kl,
                h_increased=previous is not None and h_state > previous.h_state + MONOTONICITY_TOLERANCE,
                kl_decreased=previous is not None and _kl_decreased(previous.kl_bits, kl),
            )
        )
    violations = sum(1 for s in steps if s.h_increased or s.kl_decreased)
    if violations:
        logger.warning(f"Pipeline {label or '<unnamed>'}: {violations} monotonicity violations")

    final = states[-1]
    cause = delta_cause(final, bins).delta_cause
    breadth = delta_breadth(final)
    product = cause * breadth.kl_bits if breadth.dominated else None
    satisfied = product >= k - PRODUCT_TOLERANCE if product is not None else None
    return ConstraintReport(
        pipeline=label,
        delta_cause=cause,
        delta_breadth=breadth.kl_bits,
        product=product,
        k=k,
        satisfied=satisfied,
        k_settings=k_settings,
        steps=steps,
        monotonicity_violations=violations,
    )
