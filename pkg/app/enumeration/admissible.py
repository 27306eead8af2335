"""Admissible sets: grid models compatible with a sequence of observed tables.

Compatibility is anchored to the grid. Each constraint keeps the current
members whose observed law lies within `epsilon` total variation of the best
fit any current member achieves (the constraint's floor). Constraints are
applied in order, so the set after a prefix of constraints always contains
the set after the whole sequence.

An anchored constraint instead measures members against a fixed member, the
lowest-index best fit of an earlier constraint: a member is kept when it fits
every table of the constraint within `epsilon` of how well that anchor fits
it. Restrictions in one run share an anchor, so such a run keeps the same
members whatever the order of its events.

A member with no mass on a prefix's restriction is scored at the largest
possible distance, 1.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from app.causal.model import StructuralModel, do_replace, joint, randomize
from app.causal.tables import JointTable, ZeroSupport, condition_table, marginal, total_variation
from app.enumeration.batch import BatchEvaluator, map_blocks, split_blocks
from app.enumeration.grid import ModelClass, enumerate_models
from app.models.operations import Condition, Intervene, Operation, Restrict

logger = logging.getLogger(__name__)

# Absorbs rounding between the vectorized and scalar evaluation paths.
SLACK = 1e-12
UNSUPPORTED = 1.0

Target = tuple[tuple[Operation, ...], JointTable]


@dataclass(frozen=True)
class Constraint:
    """The observed table a member must reproduce after `prefix`.

    `anchor` is the position of the constraint whose best-fitting member this
    one is measured against (None: measured against its own floor). `implied`
    lists further (prefix, table) pairs checked against the same anchor.
    """

    prefix: tuple[Operation, ...]
    reference: JointTable
    epsilon: float
    kind: str = "match_observed"
    anchor: Optional[int] = None
    implied: tuple[Target, ...] = ()

    @property
    def targets(self) -> tuple[Target, ...]:
        return ((self.prefix, self.reference),) + self.implied


@dataclass(frozen=True, eq=False)
class AdmissibleSet:
    """Sorted member indices of a model class plus the constraints that produced them.

    `anchors` holds, per constraint, the member the constraint was fitted
    against (-1 once the set is empty).
    """

    model_class: ModelClass
    members: np.ndarray
    constraints: tuple[Constraint, ...] = ()
    floors: tuple[float, ...] = field(default=())
    anchors: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        members = np.unique(np.asarray(self.members, dtype=np.int64))
        members.setflags(write=False)
        object.__setattr__(self, "members", members)

    @classmethod
    def full(cls, model_class: ModelClass) -> "AdmissibleSet":
        return cls(model_class, np.arange(model_class.size, dtype=np.int64))

    @property
    def count(self) -> int:
        return int(self.members.shape[0])

    def __len__(self) -> int:
        return self.count

    def __contains__(self, index: int) -> bool:
        position = np.searchsorted(self.members, index)
        return bool(position < self.count and self.members[position] == index)

    def issubset(self, other: "AdmissibleSet") -> bool:
        return bool(np.isin(self.members, other.members, assume_unique=True).all())

    def same_members(self, other: "AdmissibleSet") -> bool:
        return bool(np.array_equal(self.members, other.members))

    def jaccard(self, other: "AdmissibleSet") -> float:
        union = np.union1d(self.members, other.members).shape[0]
        if union == 0:
            return 1.0
        return np.intersect1d(self.members, other.members).shape[0] / union


def observed_laws(
    evaluator: BatchEvaluator,
    indices: np.ndarray,
    prefix: Sequence[Operation],
    *,
    block_size: int = 65_536,
    parallel: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Observed laws of the given members after `prefix`, and their support mask."""
    model_class = evaluator.model_class

    def run(block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        table, alive = evaluator.transform(model_class.thetas(block), prefix)
        return evaluator.observed_laws(table), alive

    parts = map_blocks(run, split_blocks(np.asarray(indices, dtype=np.int64), block_size), parallel)
    width = 2 ** len(evaluator.observed)
    if not parts:
        return np.zeros((0, width)), np.zeros(0, dtype=bool)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _distances(
    evaluator: BatchEvaluator, theta: np.ndarray, prefix: Sequence[Operation], reference: np.ndarray
) -> np.ndarray:
    table, alive = evaluator.transform(theta, prefix)
    laws = evaluator.observed_laws(table)
    return np.where(alive, 0.5 * np.abs(laws - reference).sum(axis=1), UNSUPPORTED)


def refine(
    current: AdmissibleSet,
    constraint: Constraint,
    *,
    evaluator: BatchEvaluator | None = None,
    block_size: int = 65_536,
    parallel: int = 1,
) -> AdmissibleSet:
    """Apply one more constraint to an admissible set."""
    evaluator = evaluator or BatchEvaluator(current.model_class)
    if constraint.anchor is not None:
        members, floor, anchor = _refine_anchored(
            current, constraint, evaluator, block_size, parallel
        )
    else:
        members, floor, anchor = _refine_floor(current, constraint, evaluator, block_size, parallel)
    logger.info(
        f"Constraint after {len(constraint.prefix)} steps: floor={floor:.6g}, "
        f"{current.count} -> {members.shape[0]} members"
    )
    return AdmissibleSet(
        current.model_class,
        members,
        current.constraints + (constraint,),
        current.floors + (float(floor),),
        current.anchors + (anchor,),
    )


def _refine_floor(
    current: AdmissibleSet,
    constraint: Constraint,
    evaluator: BatchEvaluator,
    block_size: int,
    parallel: int,
) -> tuple[np.ndarray, float, int]:
    reference = constraint.reference.probs
    model_class = current.model_class

    def scan(block: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
        distance = _distances(evaluator, model_class.thetas(block), constraint.prefix, reference)
        if distance.shape[0] == 0:
            return block, distance, np.inf
        # Only rows near this block's best fit can survive the global floor.
        best = float(distance.min())
        keep = distance <= best + constraint.epsilon + SLACK
        return block[keep], distance[keep], best

    results = map_blocks(scan, split_blocks(current.members, block_size), parallel)
    floor = min((r[2] for r in results), default=np.inf)
    if not np.isfinite(floor):
        logger.warning("Constraint applied to an empty admissible set")
        return np.zeros(0, dtype=np.int64), floor, -1
    bound = floor + constraint.epsilon + SLACK
    members = np.concatenate([r[0][r[1] <= bound] for r in results])
    distances = np.concatenate([r[1][r[1] <= bound] for r in results])
    anchor = int(members[np.flatnonzero(distances <= floor + SLACK)[0]])
    return members, floor, anchor


def _refine_anchored(
    current: AdmissibleSet,
    constraint: Constraint,
    evaluator: BatchEvaluator,
    block_size: int,
    parallel: int,
) -> tuple[np.ndarray, float, int]:
    model_class = current.model_class
    anchor = current.anchors[constraint.anchor]
    if anchor < 0 or current.count == 0:
        logger.warning("Constraint applied to an empty admissible set")
        return np.zeros(0, dtype=np.int64), np.inf, -1

    targets = [(prefix, reference.probs) for prefix, reference in constraint.targets]
    star = model_class.thetas(np.array([anchor], dtype=np.int64))
    fits = [float(_distances(evaluator, star, prefix, reference)[0]) for prefix, reference in targets]

    def scan(block: np.ndarray) -> np.ndarray:
        theta = model_class.thetas(block)
        keep = np.ones(block.shape[0], dtype=bool)
        for (prefix, reference), fit in zip(targets, fits):
            keep &= _distances(evaluator, theta, prefix, reference) <= fit + constraint.epsilon + SLACK
        return block[keep]

    parts = map_blocks(scan, split_blocks(current.members, block_size), parallel)
    return np.concatenate(parts), fits[0], anchor


def admissible(
    model_class: ModelClass,
    constraints: Sequence[Constraint],
    *,
    cap: int = 100_000_000,
    block_size: int = 65_536,
    parallel: int = 1,
) -> AdmissibleSet:
    """Members of the class compatible with every constraint, applied in order.

    Raises:
        SizeOverflow: If the class is larger than `cap`.
    """
    model_class.check_size(cap)
    evaluator = BatchEvaluator(model_class)
    result = AdmissibleSet.full(model_class)
    for constraint in constraints:
        result = refine(
            result, constraint, evaluator=evaluator, block_size=block_size, parallel=parallel
        )
    return result


def world_after(
    model: StructuralModel, table: JointTable, ops: Sequence[Operation]
) -> tuple[StructuralModel, JointTable]:
    """Scalar counterpart of `BatchEvaluator.transform` for a single model.

    Raises:
        ZeroSupport: If a restriction empties the table.
    """
    for op in ops:
        if isinstance(op, Condition) and op.mode == "adjust":
            continue
        if isinstance(op, (Restrict, Condition)):
            table = condition_table(table, op.event)
        elif isinstance(op, Intervene):
            model = do_replace(model, op.variable, op.p)
            table = randomize(table, model, op.variable)
        else:
            raise TypeError(f"Unsupported operation {op!r}")
    return model, table


def _naive_distance(
    model: StructuralModel, table: JointTable, prefix: Sequence[Operation], reference: JointTable
) -> float:
    try:
        _, world = world_after(model, table, prefix)
    except ZeroSupport:
        return UNSUPPORTED
    return total_variation(marginal(world, reference.scope), reference)


def naive_admissible(
    model_class: ModelClass, constraints: Sequence[Constraint], *, cap: int = 100_000_000
) -> AdmissibleSet:
    """One model at a time, with the same floor and anchor rules as `admissible`."""
    models = list(enumerate_models(model_class, cap))
    tables = [joint(m) for m in models]
    members = list(range(len(models)))
    floors: list[float] = []
    anchors: list[int] = []

    def distance(index: int, prefix: Sequence[Operation], reference: JointTable) -> float:
        return _naive_distance(models[index], tables[index], prefix, reference)

    for constraint in constraints:
        if constraint.anchor is not None:
            anchor = anchors[constraint.anchor]
            if anchor < 0 or not members:
                members, floor, anchor = [], float("inf"), -1
            else:
                fits = [distance(anchor, p, r) for p, r in constraint.targets]
                members = [
                    i
                    for i in members
                    if all(
                        distance(i, p, r) <= fit + constraint.epsilon + SLACK
                        for (p, r), fit in zip(constraint.targets, fits)
                    )
                ]
                floor = fits[0]
        else:
            distances = {i: distance(i, constraint.prefix, constraint.reference) for i in members}
            floor = min(distances.values(), default=float("inf"))
            members = [i for i in members if distances[i] <= floor + constraint.epsilon + SLACK]
            anchor = next((i for i in members if distances[i] <= floor + SLACK), -1)
        floors.append(floor)
        anchors.append(anchor)
    return AdmissibleSet(
        model_class,
        np.array(members, dtype=np.int64),
        tuple(constraints),
        tuple(floors),
        tuple(anchors),
    )


def fingerprint_partition(
    model_class: ModelClass,
    quantum: float,
    *,
    indices: np.ndarray | None = None,
    block_size: int = 65_536,
    parallel: int = 1,
) -> dict[tuple[int, ...], np.ndarray]:
    """Group members by their observed law rounded to multiples of `quantum`."""
    evaluator = BatchEvaluator(model_class)
    if indices is None:
        indices = np.arange(model_class.size, dtype=np.int64)
    laws, _ = observed_laws(evaluator, indices, (), block_size=block_size, parallel=parallel)
    keys, inverse = quantize_laws(laws, quantum)
    order = np.argsort(inverse, kind="stable")
    bounds = np.cumsum(np.bincount(inverse, minlength=keys.shape[0]))[:-1]
    groups = np.split(np.asarray(indices, dtype=np.int64)[order], bounds)
    return {tuple(int(x) for x in key): group for key, group in zip(keys, groups)}


def quantize_laws(laws: np.ndarray, quantum: float) -> tuple[np.ndarray, np.ndarray]:
    """Distinct rounded laws and, per input row, the position of its class."""
    rounded = np.rint(laws / quantum).astype(np.int64)
    keys, inverse = np.unique(rounded, axis=0, return_inverse=True)
    return keys, inverse.reshape(-1)
