"""Identified sets of the average effect and identification verdicts."""

import logging
from typing import TYPE_CHECKING, Optional

import numpy as np

from app.enumeration.admissible import observed_laws
from app.enumeration.batch import map_blocks, split_blocks
from app.errors import EngineError
from app.models.domain import IdentificationVerdict, TauSet

if TYPE_CHECKING:
    from app.operators.state import AdjustmentRecord, EvidentialState

logger = logging.getLogger(__name__)

DEFAULT_BINS = 41
DEFAULT_EPS_ID = 0.05
# Agreement required between a member's effect and its adjusted estimate.
BACKDOOR_TOLERANCE = 1e-9


class EmptyAdmissible(EngineError):
    """Raised when no grid model is compatible with the state's constraints."""

    pass


def tau_bins(values: np.ndarray, bins: int) -> np.ndarray:
    """Bin index of each effect on [-1, 1]; 1 falls in the last bin."""
    index = np.floor((np.asarray(values) + 1.0) / 2.0 * bins).astype(np.int64)
    return np.clip(index, 0, bins - 1)


def tau_histogram(values: np.ndarray, bins: int) -> np.ndarray:
    return np.bincount(tau_bins(values, bins), minlength=bins).astype(np.int64)


def member_taus(state: "EvidentialState") -> np.ndarray:
    """Effect of every admissible member, in member order."""
    world = state.world
    members = state.admissible.members
    if members.shape[0] == 0:
        raise EmptyAdmissible(
            f"No admissible model after {len(state.trace)} steps; epsilon may be too tight"
        )

    def run(block: np.ndarray) -> np.ndarray:
        return world.evaluator.tau(world.model_class.thetas(block))

    return np.concatenate(map_blocks(run, split_blocks(members, world.block_size), world.parallel))


def tau_set(state: "EvidentialState", bins: int = DEFAULT_BINS) -> TauSet:
    """Summary of tau over the admissible members.

    Raises:
        EmptyAdmissible: If the admissible set is empty.
    """
    return summarize_taus(member_taus(state), bins)


def summarize_taus(values: np.ndarray, bins: int) -> TauSet:
    low, high = float(values.min()), float(values.max())
    return TauSet(
        min=low,
        max=high,
        width=high - low,
        histogram=tau_histogram(values, bins).tolist(),
        member_count=int(values.shape[0]),
        bins=bins,
    )


def _last_estimable(state: "EvidentialState") -> Optional["AdjustmentRecord"]:
    for record in reversed(state.adjustments):
        if record.estimable:
            return record
    return None


def _backdoor_holds(state: "EvidentialState", record: "AdjustmentRecord", taus: np.ndarray) -> bool:
    """Whether every member's adjusted estimate at registration equals its own tau."""
    world = state.world
    laws, alive = observed_laws(
        world.evaluator,
        state.admissible.members,
        state.trace[: record.prefix_length],
        block_size=world.block_size,
        parallel=world.parallel,
    )
    estimates, positive = world.evaluator.adjusted_estimates(laws, record.variables)
    valid = alive & positive & (np.abs(estimates - taus) <= BACKDOOR_TOLERANCE)
    return bool(valid.all())


def identification(
    state: "EvidentialState", eps_id: float = DEFAULT_EPS_ID, bins: int = DEFAULT_BINS
) -> IdentificationVerdict:
    """Decide whether tau is pinned down in `state`.

    The adjustment route applies when a registered adjustment set recovers
    every admissible member's tau from that member's own observed law. The
    width route applies when the identified set is at most `eps_id` wide.
    """
    taus = member_taus(state)
    summary = summarize_taus(taus, bins)
    record = _last_estimable(state)
    violation = None
    if state.adjustments and not state.adjustments[-1].estimable:
        violation = state.adjustments[-1].violation

    if record is not None and _backdoor_holds(state, record, taus):
        route = "adjustment"
    elif summary.width <= eps_id:
        route = "width"
    else:
        route = "none"
    logger.info(f"Identification after {len(state.trace)} steps: route={route}, width={summary.width:.4f}")
    return IdentificationVerdict(
        identifiable=route != "none",
        route=route,
        width=summary.width,
        eps_id=eps_id,
        adjusted_estimate=record.estimate if record is not None else None,
        adjustment_set=list(state.adjustment_set),
        positivity_violation=violation,
    )


def identifiable(state: "EvidentialState", eps_id: float = DEFAULT_EPS_ID) -> bool:
    return identification(state, eps_id).identifiable
