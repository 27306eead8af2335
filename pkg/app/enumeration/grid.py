"""Parameter grids and the finite class of structural models they span."""

import itertools
import logging
from typing import Iterator

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from app.causal.model import CausalDiagram, InvalidModel, Mechanism, StructuralModel
from app.causal.tables import cell_bits
from app.errors import EngineError

logger = logging.getLogger(__name__)


class SizeOverflow(EngineError):
    """Raised when a model class is larger than the enumeration cap."""

    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"Model class has {size} members, cap is {cap}")


class ParameterGrid(BaseModel):
    """Strictly increasing probability levels every mechanism entry ranges over."""

    model_config = ConfigDict(frozen=True)

    levels: tuple[float, ...]

    @field_validator("levels")
    @classmethod
    def _check_levels(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value:
            raise ValueError("grid needs at least one level")
        if any(not 0.0 <= p <= 1.0 for p in value):
            raise ValueError(f"grid levels must lie in [0, 1]: {value}")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError(f"grid levels must be strictly increasing: {value}")
        return value

    @classmethod
    def from_step(cls, step: float) -> "ParameterGrid":
        """Levels 0, step, 2*step, ..., 1; `step` must divide 1."""
        count = round(1.0 / step)
        if count < 1 or abs(count * step - 1.0) > 1e-9:
            raise ValueError(f"grid step {step!r} does not divide 1")
        return cls(levels=tuple(i / count for i in range(count + 1)))

    def __len__(self) -> int:
        return len(self.levels)


class ModelClass(BaseModel):
    """Every structural model on `diagram` with mechanism entries from `grid`.

    Members are indexed in lexicographic order of their parameter vectors,
    the last parameter varying fastest.
    """

    model_config = ConfigDict(frozen=True)

    diagram: CausalDiagram
    grid: ParameterGrid

    @property
    def layout(self) -> tuple[tuple[str, tuple[int, ...]], ...]:
        """(variable, parent row) for each parameter position."""
        slots = []
        for name in self.diagram.names:
            parents = self.diagram.parents(name)
            for row in cell_bits(len(parents)):
                slots.append((name, tuple(int(b) for b in row)))
        return tuple(slots)

    @property
    def parameter_count(self) -> int:
        return sum(2 ** len(self.diagram.parents(n)) for n in self.diagram.names)

    @property
    def size(self) -> int:
        return len(self.grid) ** self.parameter_count

    def check_size(self, cap: int) -> None:
        if self.size > cap:
            raise SizeOverflow(self.size, cap)

    @property
    def shape(self) -> tuple[int, ...]:
        return (len(self.grid),) * self.parameter_count

    def thetas(self, indices: np.ndarray) -> np.ndarray:
        """Parameter matrix (len(indices), parameter_count) for member indices."""
        indices = np.asarray(indices, dtype=np.int64)
        levels = np.asarray(self.grid.levels, dtype=np.float64)
        if self.parameter_count == 0:
            return np.zeros((indices.shape[0], 0))
        digits = np.unravel_index(indices, self.shape)
        return levels[np.stack(digits, axis=1)]

    def build(self, theta) -> StructuralModel:
        """Structural model for a parameter vector laid out as in `layout`."""
        theta = tuple(float(x) for x in theta)
        if len(theta) != self.parameter_count:
            raise InvalidModel(
                f"Expected {self.parameter_count} parameters, got {len(theta)}"
            )
        mechanisms = []
        offset = 0
        for name in self.diagram.names:
            parents = self.diagram.parents(name)
            rows = [tuple(int(b) for b in r) for r in cell_bits(len(parents))]
            table = {row: theta[offset + i] for i, row in enumerate(rows)}
            offset += len(rows)
            mechanisms.append(Mechanism.model_construct(child=name, parents=parents, table=table))
        return StructuralModel.model_construct(diagram=self.diagram, mechanisms=tuple(mechanisms))

    def model_at(self, index: int) -> StructuralModel:
        return self.build(self.thetas(np.array([index]))[0])

    def index_of(self, model: StructuralModel) -> int | None:
        """Member index of `model`, or None when a parameter is off the grid."""
        levels = self.grid.levels
        digits = []
        for value in model.parameters():
            matches = [i for i, level in enumerate(levels) if abs(level - value) <= 1e-12]
            if not matches:
                return None
            digits.append(matches[0])
        if not digits:
            return 0
        return int(np.ravel_multi_index(tuple(digits), self.shape))


def enumerate_models(model_class: ModelClass, cap: int) -> Iterator[StructuralModel]:
    """Yield every member of the class in index order.

    Raises:
        SizeOverflow: If the class is larger than `cap`.
    """
    model_class.check_size(cap)
    logger.info(f"Enumerating {model_class.size} models")
    for theta in itertools.product(model_class.grid.levels, repeat=model_class.parameter_count):
        yield model_class.build(theta)
