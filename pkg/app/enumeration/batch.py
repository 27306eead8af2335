"""Vectorized evaluation of many grid models at once.

A block of models is a parameter matrix `theta` of shape (b, parameter_count).
Joint tables come out as (b, 2**n) arrays in the same cell order as
`JointTable`, so every row is bit-compatible with the scalar path.
"""

import logging
from multiprocessing.pool import ThreadPool
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from app.causal.tables import cell_bits
from app.enumeration.grid import ModelClass
from app.models.operations import Condition, Intervene, Operation, Restrict

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_blocks(fn: Callable[[T], R], blocks: Iterable[T], parallel: int) -> list[R]:
    """Apply `fn` to every block, in order; `parallel` > 1 uses a thread pool."""
    blocks = list(blocks)
    if parallel <= 1 or len(blocks) <= 1:
        return [fn(block) for block in blocks]
    with ThreadPool(min(parallel, len(blocks))) as pool:
        return pool.map(fn, blocks)


def split_blocks(indices: np.ndarray, block_size: int) -> list[np.ndarray]:
    """Fixed-size slices of `indices`; the partition never depends on parallelism."""
    return [indices[start:start + block_size] for start in range(0, indices.shape[0], block_size)]


class BatchEvaluator:
    """Compiled cell/parameter layout of a model class.

    Attributes:
        model_class: The class whose members are evaluated.
        names: Variable names in declaration order.
        observed: Observed variable names in declaration order.
    """

    def __init__(self, model_class: ModelClass):
        self.model_class = model_class
        diagram = model_class.diagram
        self.diagram = diagram
        self.names = diagram.names
        self.observed = diagram.observed
        self.n = len(self.names)
        bits = cell_bits(self.n)
        self.cells = bits.shape[0]
        self._is_one = {name: bits[:, i].astype(bool) for i, name in enumerate(self.names)}
        self._columns: dict[str, np.ndarray] = {}
        offset = 0
        for name in self.names:
            parents = diagram.parents(name)
            row = np.zeros(self.cells, dtype=np.int64)
            for parent in parents:
                row = row * 2 + bits[:, self.names.index(parent)]
            self._columns[name] = offset + row
            offset += 2 ** len(parents)
        self._order = diagram.topological_order()
        self._hidden_axes = tuple(
            1 + i for i, name in enumerate(self.names) if name not in self.observed
        )

    def _factor(self, theta: np.ndarray, name: str, overrides: dict[str, float]) -> np.ndarray:
        if name in overrides:
            p = overrides[name]
            return np.where(self._is_one[name], p, 1.0 - p)
        column = theta[:, self._columns[name]]
        return np.where(self._is_one[name], column, 1.0 - column)

    def joint(self, theta: np.ndarray) -> np.ndarray:
        """Normalized joint tables, mechanisms multiplied in topological order."""
        table = np.ones((theta.shape[0], self.cells))
        for name in self._order:
            table *= self._factor(theta, name, {})
        return table / table.sum(axis=1, keepdims=True)

    def transform(
        self, theta: np.ndarray, ops: Sequence[Operation]
    ) -> tuple[np.ndarray, np.ndarray]:
        """Full-scope tables after `ops`, plus a mask of rows that kept support."""
        table = self.joint(theta)
        alive = np.ones(theta.shape[0], dtype=bool)
        overrides: dict[str, float] = {}
        for op in ops:
            if isinstance(op, Condition) and op.mode == "adjust":
                continue
            if isinstance(op, (Restrict, Condition)):
                table = table * op.event.mask(self.names)
                mass = table.sum(axis=1)
                alive &= mass > 0.0
                table = np.divide(
                    table, mass[:, None], out=np.zeros_like(table), where=mass[:, None] > 0.0
                )
            elif isinstance(op, Intervene):
                overrides[op.variable] = op.p
                table = self._randomize(theta, table, op.variable, overrides)
            else:
                raise TypeError(f"Unsupported operation {op!r}")
        return table, alive

    def _randomize(
        self, theta: np.ndarray, table: np.ndarray, target: str, overrides: dict[str, float]
    ) -> np.ndarray:
        diagram = self.diagram
        for name in overrides:
            diagram = diagram.without_incoming(name)
        regenerated = {target} | diagram.descendants(target)
        cube = table.reshape((table.shape[0],) + (2,) * self.n)
        axes = tuple(1 + i for i, name in enumerate(self.names) if name in regenerated)
        base = np.broadcast_to(cube.sum(axis=axes, keepdims=True), cube.shape)
        result = base.reshape(table.shape[0], self.cells).copy()
        for name in diagram.topological_order():
            if name in regenerated:
                result *= self._factor(theta, name, overrides)
        mass = result.sum(axis=1, keepdims=True)
        return np.divide(result, mass, out=np.zeros_like(result), where=mass > 0.0)

    def observed_laws(self, table: np.ndarray) -> np.ndarray:
        """Marginalize full-scope tables onto the observed variables."""
        cube = table.reshape((table.shape[0],) + (2,) * self.n)
        if self._hidden_axes:
            cube = cube.sum(axis=self._hidden_axes)
        return cube.reshape(table.shape[0], -1)

    def tau(self, theta: np.ndarray) -> np.ndarray:
        """Average treatment effect of every row."""
        treatment, outcome = self.diagram.treatment, self.diagram.outcome
        order = self.diagram.without_incoming(treatment).topological_order()
        arms = []
        for t in (1.0, 0.0):
            table = np.ones((theta.shape[0], self.cells))
            for name in order:
                table *= self._factor(theta, name, {treatment: t})
            table = table / table.sum(axis=1, keepdims=True)
            arms.append(table[:, self._is_one[outcome]].sum(axis=1))
        return arms[0] - arms[1]

    def adjusted_estimates(
        self, laws: np.ndarray, adjust: Sequence[str]
    ) -> tuple[np.ndarray, np.ndarray]:
        """Standardized risk differences of observed laws over `adjust` strata.

        Returns:
            (estimates, positive) where `positive` flags rows whose every
            stratum has both treatment arms, as `adjustment_estimate` demands.
        """
        treatment, outcome = self.diagram.treatment, self.diagram.outcome
        keep = tuple(adjust) + (treatment, outcome)
        m = len(self.observed)
        cube = laws.reshape((laws.shape[0],) + (2,) * m)
        drop = tuple(1 + i for i, name in enumerate(self.observed) if name not in keep)
        if drop:
            cube = cube.sum(axis=drop)
        remaining = [name for name in self.observed if name in keep]
        cube = np.transpose(cube, (0,) + tuple(1 + remaining.index(name) for name in keep))
        cube = cube.reshape(laws.shape[0], 2 ** len(adjust), 2, 2)
        weight = cube.sum(axis=(2, 3))
        arms = cube.sum(axis=3)
        risks = np.divide(cube[..., 1], arms, out=np.zeros_like(arms), where=arms > 0.0)
        estimates = (weight * (risks[..., 1] - risks[..., 0])).sum(axis=1)
        return estimates, ~np.any(arms <= 0.0, axis=(1, 2))
