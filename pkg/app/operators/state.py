"""Evidential states and the restrict / condition / intervene operators."""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from app.causal.model import StructuralModel, joint
from app.causal.tables import (
    Event,
    JointTable,
    PositivityViolation,
    UnknownVariable,
    adjustment_estimate,
    marginal,
)
from app.enumeration.admissible import AdmissibleSet, Constraint, refine, world_after
from app.enumeration.batch import BatchEvaluator
from app.enumeration.grid import ModelClass, ParameterGrid
from app.errors import EngineError
from app.models.operations import (
    Condition,
    Operation,
    Restrict,
    changes_world,
    restricts,
)

logger = logging.getLogger(__name__)


class InvalidOperation(EngineError):
    """Raised when an operation cannot act on the diagram it is applied to."""

    pass


@dataclass(frozen=True, eq=False)
class World:
    """Everything fixed for the lifetime of a scenario run."""

    model_class: ModelClass
    ground_truth: StructuralModel
    epsilon: float
    block_size: int = 65_536
    parallel: int = 1
    evaluator: BatchEvaluator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "evaluator", BatchEvaluator(self.model_class))

    @property
    def diagram(self):
        return self.model_class.diagram


@dataclass(frozen=True)
class AdjustmentRecord:
    """One adjust step: the registered set and what it yielded on the current table."""

    variables: tuple[str, ...]
    prefix_length: int
    estimate: Optional[float] = None
    violation: Optional[str] = None

    @property
    def estimable(self) -> bool:
        return self.estimate is not None


@dataclass(frozen=True, eq=False)
class EvidentialState:
    """Observed table, the constraint trace, admissible members and adjustment registry.

    `table` is the ground truth's full joint in the current world, hidden
    variables included; `model` is the ground truth after interventions.
    """

    world: World
    model: StructuralModel
    table: JointTable
    observed: JointTable
    trace: tuple[Operation, ...]
    admissible: AdmissibleSet
    adjustments: tuple[AdjustmentRecord, ...] = ()
    origin: Optional["EvidentialState"] = None

    @property
    def root(self) -> "EvidentialState":
        return self.origin if self.origin is not None else self

    @property
    def adjustment_set(self) -> tuple[str, ...]:
        return self.adjustments[-1].variables if self.adjustments else ()

    @property
    def constraints(self) -> tuple[Constraint, ...]:
        return self.admissible.constraints


def initial_state(
    ground_truth: StructuralModel,
    grid: ParameterGrid,
    *,
    epsilon: float = 0.02,
    cap: int = 100_000_000,
    block_size: int = 65_536,
    parallel: int = 1,
) -> EvidentialState:
    """State holding the full-population observed table of `ground_truth`.

    Raises:
        SizeOverflow: If the model class exceeds `cap`.
    """
    model_class = ModelClass(diagram=ground_truth.diagram, grid=grid)
    model_class.check_size(cap)
    world = World(model_class, ground_truth, epsilon, block_size, parallel)
    table = joint(ground_truth)
    observed = marginal(table, model_class.diagram.observed)
    logger.info(f"Initial state over {model_class.size} grid models")
    members = refine(
        AdmissibleSet.full(model_class),
        Constraint((), observed, epsilon),
        evaluator=world.evaluator,
        block_size=block_size,
        parallel=parallel,
    )
    return EvidentialState(world, ground_truth, table, observed, (), members)


def _validate(state: EvidentialState, op: Operation) -> None:
    diagram = state.world.diagram
    for name in op.variables:
        variable = diagram.variable(name)
        if isinstance(op, (Restrict, Condition)) and not variable.observed:
            raise UnknownVariable(name, "observed variables")
    if isinstance(op, Condition) and op.mode == "adjust":
        if op.variable in (diagram.treatment, diagram.outcome):
            raise InvalidOperation(f"Cannot adjust for {op.variable}: it is the treatment or outcome")


def _register_adjustment(state: EvidentialState, op: Condition) -> AdjustmentRecord:
    diagram = state.world.diagram
    registered = set(state.adjustment_set) | {op.variable}
    variables = tuple(n for n in diagram.names if n in registered)
    try:
        estimate = adjustment_estimate(
            state.observed, diagram.treatment, diagram.outcome, variables
        )
    except PositivityViolation as e:
        logger.info(f"Adjustment for {list(variables)} contributes nothing: {e}")
        return AdjustmentRecord(variables, len(state.trace), violation=str(e))
    return AdjustmentRecord(variables, len(state.trace), estimate=estimate)


def _trailing_run(trace: tuple[Operation, ...]) -> tuple[int, list[Event]]:
    """Where the restrictions ending `trace` start, and their events in order.

    Adjust steps inside the run are skipped; an intervention ends it.
    """
    start = len(trace)
    events: list[Event] = []
    for index in range(len(trace) - 1, -1, -1):
        op = trace[index]
        if not changes_world(op):
            continue
        if not restricts(op):
            break
        start = index
        events.append(op.event)
    return start, events[::-1]


def _conjunction(events: tuple[Event, ...]) -> Event:
    return Event(clauses=tuple(sorted({clause for event in events for clause in event.clauses})))


def _run_constraint(
    state: EvidentialState, op: Operation, trace: tuple[Operation, ...], observed: JointTable
) -> Constraint:
    """Constraint for a restriction, anchored with the rest of its run.

    Every restriction of a run is measured against the member that best fit
    the table the run started from. Besides the table after the whole run, a
    member must reproduce every sub-conjunction that includes the new event,
    applied directly to the world the run started from.
    """
    start, earlier = _trailing_run(state.trace)
    anchor = state.constraints[-1].anchor if earlier else len(state.constraints) - 1
    root = state.root
    base = state.trace[:start]
    base_model, base_table = world_after(root.model, root.table, base)
    implied = []
    for size in range(len(earlier)):
        for subset in combinations(earlier, size):
            step = Restrict(event=_conjunction(subset + (op.event,)))
            _, world = world_after(base_model, base_table, (step,))
            implied.append((base + (step,), marginal(world, state.world.diagram.observed)))
    return Constraint(trace, observed, state.world.epsilon, anchor=anchor, implied=tuple(implied))


def apply(state: EvidentialState, op: Operation) -> EvidentialState:
    """Apply one operation.

    Raises:
        UnknownVariable: If the operation names an unknown or hidden variable.
        ZeroSupport: If a restriction empties the current world.
    """
    _validate(state, op)
    origin = state.root
    trace = state.trace + (op,)

    if isinstance(op, Condition) and op.mode == "adjust":
        record = _register_adjustment(state, op)
        return EvidentialState(
            state.world,
            state.model,
            state.table,
            state.observed,
            trace,
            state.admissible,
            state.adjustments + (record,),
            origin,
        )

    model, table = world_after(state.model, state.table, (op,))
    observed = marginal(table, state.world.diagram.observed)
    if restricts(op):
        constraint = _run_constraint(state, op, trace, observed)
    else:
        constraint = Constraint(trace, observed, state.world.epsilon)
    members = refine(
        state.admissible,
        constraint,
        evaluator=state.world.evaluator,
        block_size=state.world.block_size,
        parallel=state.world.parallel,
    )
    return EvidentialState(
        state.world, model, table, observed, trace, members, state.adjustments, origin
    )
