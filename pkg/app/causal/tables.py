"""Joint probability tables over binary variables and the estimators read off them."""

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from app.errors import EngineError

logger = logging.getLogger(__name__)

# Mass tolerance for a table to count as normalized.
NORMALIZATION_TOLERANCE = 1e-9


class UnknownVariable(EngineError):
    """Raised when an operation names a variable outside the table or diagram."""

    def __init__(self, name: str, where: str = "scope"):
        self.name = name
        super().__init__(f"Unknown variable {name!r} (not in {where})")


class ZeroSupport(EngineError):
    """Raised when conditioning on an event of probability zero."""

    pass


class PositivityViolation(EngineError):
    """Raised when a treatment arm is empty inside an adjustment stratum."""

    def __init__(self, treatment: str, treatment_value: int, stratum: Mapping[str, int]):
        self.treatment = treatment
        self.treatment_value = treatment_value
        self.stratum = dict(stratum)
        cells = ", ".join(f"{k}={v}" for k, v in self.stratum.items()) or "<empty>"
        super().__init__(
            f"Positivity fails: P({treatment}={treatment_value}, {cells}) = 0"
        )


class ScopeMismatch(EngineError):
    """Raised when two tables over different variable sets are compared."""

    def __init__(self, left: Sequence[str], right: Sequence[str]):
        self.left = tuple(left)
        self.right = tuple(right)
        super().__init__(f"Scope mismatch: {list(self.left)} vs {list(self.right)}")


@lru_cache(maxsize=64)
def cell_bits(n: int) -> np.ndarray:
    """Bit matrix of shape (2**n, n), rows in itertools.product order.

    The first variable is the most significant bit.
    """
    if n == 0:
        bits = np.zeros((1, 0), dtype=np.int8)
    else:
        bits = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int8)
    bits.setflags(write=False)
    return bits


class Event(BaseModel):
    """Conjunction of variable=value clauses."""

    model_config = ConfigDict(frozen=True)

    clauses: tuple[tuple[str, int], ...]

    @field_validator("clauses")
    @classmethod
    def _check_clauses(cls, value: tuple[tuple[str, int], ...]) -> tuple[tuple[str, int], ...]:
        if not value:
            raise ValueError("event needs at least one clause")
        names = [name for name, _ in value]
        if len(set(names)) != len(names):
            raise ValueError(f"event repeats a variable: {names}")
        for name, bit in value:
            if bit not in (0, 1):
                raise ValueError(f"value of {name} must be 0 or 1, got {bit}")
        return value

    @classmethod
    def of(cls, **assignment: int) -> "Event":
        return cls(clauses=tuple(assignment.items()))

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.clauses)

    def mask(self, scope: Sequence[str]) -> np.ndarray:
        """Boolean mask over the cells of a table with the given scope."""
        bits = cell_bits(len(scope))
        mask = np.ones(bits.shape[0], dtype=bool)
        for name, value in self.clauses:
            if name not in scope:
                raise UnknownVariable(name)
            mask &= bits[:, list(scope).index(name)] == value
        return mask

    def describe(self) -> str:
        return ",".join(f"{name}={value}" for name, value in self.clauses)


@dataclass(frozen=True, eq=False)
class JointTable:
    """Probability of every assignment of the scope variables.

    `probs[i]` is the probability of row `i` of `cell_bits(len(scope))`.
    """

    scope: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=np.float64)
        if len(set(self.scope)) != len(self.scope):
            raise ValueError(f"Duplicate variable in scope {self.scope}")
        if probs.shape != (2 ** len(self.scope),):
            raise ValueError(
                f"Table over {len(self.scope)} variables needs {2 ** len(self.scope)} cells, "
                f"got shape {probs.shape}"
            )
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("Table entries must be finite and non-negative")
        if abs(probs.sum() - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValueError(f"Table sums to {probs.sum()!r}, expected 1")
        probs.setflags(write=False)
        object.__setattr__(self, "scope", tuple(self.scope))
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_mapping(
        cls, scope: Sequence[str], mapping: Mapping[tuple[int, ...], float]
    ) -> "JointTable":
        """Build a table from {assignment tuple: probability}; missing cells are zero."""
        probs = np.zeros(2 ** len(scope))
        for row, bits in enumerate(cell_bits(len(scope))):
            probs[row] = mapping.get(tuple(int(b) for b in bits), 0.0)
        return cls(tuple(scope), probs)

    def items(self) -> Iterator[tuple[tuple[int, ...], float]]:
        for row, bits in enumerate(cell_bits(len(self.scope))):
            yield tuple(int(b) for b in bits), float(self.probs[row])

    def as_dict(self) -> dict[str, float]:
        """Cells keyed by their bit string, scope order."""
        return {"".join(map(str, bits)): p for bits, p in self.items()}

    def probability(self, event: Event) -> float:
        return float(self.probs[event.mask(self.scope)].sum())

    def allclose(self, other: "JointTable", atol: float = 1e-9) -> bool:
        return self.scope == other.scope and bool(np.allclose(self.probs, other.probs, atol=atol))


def marginal(table: JointTable, keep: Sequence[str]) -> JointTable:
    """Marginalize onto `keep`, in the order given."""
    keep = tuple(keep)
    for name in keep:
        if name not in table.scope:
            raise UnknownVariable(name)
    n = len(table.scope)
    cube = table.probs.reshape((2,) * n)
    drop = tuple(i for i, name in enumerate(table.scope) if name not in keep)
    reduced = cube.sum(axis=drop) if drop else cube
    remaining = [name for name in table.scope if name in keep]
    order = [remaining.index(name) for name in keep]
    probs = np.transpose(reduced, order).reshape(-1) if keep else np.array([reduced.sum()])
    return JointTable(keep, probs / probs.sum())


def condition_table(table: JointTable, event: Event) -> JointTable:
    """Restrict to the cells satisfying `event` and renormalize."""
    mask = event.mask(table.scope)
    mass = float(table.probs[mask].sum())
    if mass <= 0.0:
        raise ZeroSupport(f"Event {event.describe()} has probability zero")
    return JointTable(table.scope, np.where(mask, table.probs, 0.0) / mass)


def total_variation(left: JointTable, right: JointTable) -> float:
    if left.scope != right.scope:
        raise ScopeMismatch(left.scope, right.scope)
    return 0.5 * float(np.abs(left.probs - right.probs).sum())


def adjustment_estimate(
    table: JointTable, treatment: str, outcome: str, adjust: Sequence[str]
) -> float:
    """Risk difference of `outcome` in `treatment`, standardized over `adjust` strata.

    Every stratum of the adjustment variables must hold both treatment arms;
    a level of an adjustment variable that no longer occurs (for instance after
    restricting on it) is a positivity failure.

    Raises:
        PositivityViolation: Naming the first empty (treatment value, stratum).
    """
    adjust = tuple(adjust)
    if treatment in adjust or outcome in adjust or treatment == outcome:
        raise ValueError("adjustment set must exclude the treatment and the outcome")
    law = marginal(table, adjust + (treatment, outcome))
    cube = law.probs.reshape((2 ** len(adjust), 2, 2))
    estimate = 0.0
    for stratum, bits in enumerate(cell_bits(len(adjust))):
        weight = float(cube[stratum].sum())
        risks = []
        for t in (0, 1):
            arm = float(cube[stratum, t].sum())
            if arm <= 0.0:
                raise PositivityViolation(treatment, t, dict(zip(adjust, map(int, bits))))
            risks.append(float(cube[stratum, t, 1]) / arm)
        estimate += weight * (risks[1] - risks[0])
    return estimate


def crude_risk_difference(table: JointTable, treatment: str, outcome: str) -> float:
    """P(outcome=1 | treatment=1) - P(outcome=1 | treatment=0) in the table."""
    return adjustment_estimate(table, treatment, outcome, ())
