"""Causal diagrams, structural models over binary variables and their effects."""

import itertools
import logging
from typing import Literal

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.causal.tables import JointTable, UnknownVariable, cell_bits, marginal
from app.errors import EngineError

logger = logging.getLogger(__name__)

Visibility = Literal["observed", "hidden"]
Role = Literal["treatment", "outcome", "covariate", "none"]


class MissingRole(EngineError):
    """Raised when a diagram lacks a unique treatment or outcome variable."""

    pass


class InvalidModel(EngineError):
    """Raised when mechanisms do not fit the diagram they are attached to."""

    pass


class Variable(BaseModel):
    """A binary variable of the diagram."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    visibility: Visibility = "observed"
    role: Role = "none"

    @property
    def observed(self) -> bool:
        return self.visibility == "observed"


class CausalDiagram(BaseModel):
    """Directed acyclic graph over declared variables.

    Parents are always listed in declaration order of the variables.
    """

    model_config = ConfigDict(frozen=True)

    variables: tuple[Variable, ...]
    edges: tuple[tuple[str, str], ...] = ()

    @model_validator(mode="after")
    def _check_graph(self) -> "CausalDiagram":
        names = [v.name for v in self.variables]
        if not names:
            raise ValueError("diagram needs at least one variable")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names: {names}")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("duplicate edge")
        for parent, child in self.edges:
            for end in (parent, child):
                if end not in names:
                    raise ValueError(f"edge {parent}->{child} references undeclared variable {end!r}")
            if parent == child:
                raise ValueError(f"self loop on {parent!r}")
        if not nx.is_directed_acyclic_graph(self.graph()):
            cycle = nx.find_cycle(self.graph())
            raise ValueError(f"diagram has a cycle: {cycle}")
        return self

    def graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(v.name for v in self.variables)
        graph.add_edges_from(self.edges)
        return graph

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def observed(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.observed)

    @property
    def hidden(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if not v.observed)

    def variable(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise UnknownVariable(name, "diagram")

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariable(name, "diagram") from None

    def parents(self, name: str) -> tuple[str, ...]:
        self.index(name)
        incoming = {p for p, c in self.edges if c == name}
        return tuple(n for n in self.names if n in incoming)

    def descendants(self, name: str) -> frozenset[str]:
        self.index(name)
        return frozenset(nx.descendants(self.graph(), name))

    def topological_order(self) -> tuple[str, ...]:
        """Deterministic topological order, ties broken by declaration order."""
        position = {n: i for i, n in enumerate(self.names)}
        return tuple(nx.lexicographical_topological_sort(self.graph(), key=position.__getitem__))

    def _single(self, role: Role) -> str:
        holders = [v.name for v in self.variables if v.role == role]
        if len(holders) != 1:
            raise MissingRole(f"Expected exactly one {role} variable, found {holders}")
        return holders[0]

    @property
    def treatment(self) -> str:
        return self._single("treatment")

    @property
    def outcome(self) -> str:
        return self._single("outcome")

    def without_incoming(self, name: str) -> "CausalDiagram":
        return CausalDiagram(
            variables=self.variables,
            edges=tuple(e for e in self.edges if e[1] != name),
        )


class Mechanism(BaseModel):
    """P(child = 1 | parent assignment), one entry per parent bit tuple."""

    model_config = ConfigDict(frozen=True)

    child: str
    parents: tuple[str, ...] = ()
    table: dict[tuple[int, ...], float]

    @field_validator("table")
    @classmethod
    def _check_probabilities(cls, value: dict[tuple[int, ...], float]) -> dict[tuple[int, ...], float]:
        for key, p in value.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p!r} at {key} outside [0, 1]")
        return value

    @model_validator(mode="after")
    def _check_rows(self) -> "Mechanism":
        expected = {tuple(int(b) for b in row) for row in cell_bits(len(self.parents))}
        if set(self.table) != expected:
            raise ValueError(
                f"mechanism for {self.child} needs one entry per assignment of {self.parents}"
            )
        return self

    @classmethod
    def constant(cls, child: str, p: float) -> "Mechanism":
        return cls(child=child, parents=(), table={(): p})

    def prob(self, parent_values: tuple[int, ...]) -> float:
        return self.table[parent_values]


class StructuralModel(BaseModel):
    """A diagram together with one mechanism per variable, in declaration order."""

    model_config = ConfigDict(frozen=True)

    diagram: CausalDiagram
    mechanisms: tuple[Mechanism, ...]

    @model_validator(mode="after")
    def _check_mechanisms(self) -> "StructuralModel":
        children = tuple(m.child for m in self.mechanisms)
        if children != self.diagram.names:
            raise ValueError(f"mechanisms {children} do not match variables {self.diagram.names}")
        for mech in self.mechanisms:
            if mech.parents != self.diagram.parents(mech.child):
                raise ValueError(
                    f"mechanism for {mech.child} has parents {mech.parents}, "
                    f"diagram says {self.diagram.parents(mech.child)}"
                )
        return self

    def mechanism(self, name: str) -> Mechanism:
        return self.mechanisms[self.diagram.index(name)]

    def parameters(self) -> tuple[float, ...]:
        """Flat parameter vector: variables in declaration order, parent rows ascending."""
        flat: list[float] = []
        for mech in self.mechanisms:
            for row in cell_bits(len(mech.parents)):
                flat.append(mech.table[tuple(int(b) for b in row)])
        return tuple(flat)


def _by_child(model: StructuralModel) -> dict[str, Mechanism]:
    return {m.child: m for m in model.mechanisms}


def _product(mechanisms: dict[str, Mechanism], order, cell: dict[str, int], start: float = 1.0) -> float:
    p = start
    for name in order:
        mech = mechanisms[name]
        p1 = mech.table[tuple(cell[parent] for parent in mech.parents)]
        p *= p1 if cell[name] == 1 else 1.0 - p1
    return p


def joint(model: StructuralModel) -> JointTable:
    """Full joint over every variable, product of mechanisms in topological order."""
    names = model.diagram.names
    order = model.diagram.topological_order()
    mechanisms = _by_child(model)
    probs = np.array(
        [
            _product(mechanisms, order, dict(zip(names, bits)))
            for bits in itertools.product((0, 1), repeat=len(names))
        ]
    )
    return JointTable(names, probs / probs.sum())


def do_replace(model: StructuralModel, target: str, p: float) -> StructuralModel:
    """Cut the edges into `target` and give it a constant mechanism P(target=1) = p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"intervention probability {p!r} outside [0, 1]")
    model.diagram.index(target)
    diagram = model.diagram.without_incoming(target)
    mechanisms = tuple(
        Mechanism.constant(target, p) if m.child == target else m for m in model.mechanisms
    )
    return StructuralModel(diagram=diagram, mechanisms=mechanisms)


def tau(model: StructuralModel) -> float:
    """Average effect P(Y=1 | do(T=1)) - P(Y=1 | do(T=0))."""
    treatment, outcome = model.diagram.treatment, model.diagram.outcome
    arms = []
    for t in (1.0, 0.0):
        law = marginal(joint(do_replace(model, treatment, t)), (outcome,))
        arms.append(float(law.probs[1]))
    return arms[0] - arms[1]


def tau_truncated(model: StructuralModel) -> float:
    """The same effect as `tau`, summed directly over the truncated factorization."""
    diagram = model.diagram
    treatment, outcome = diagram.treatment, diagram.outcome
    others = [n for n in diagram.names if n != treatment]
    mechanisms = _by_child(model)
    arms = []
    for t in (1, 0):
        total = 0.0
        for bits in itertools.product((0, 1), repeat=len(others)):
            cell = dict(zip(others, bits))
            if cell[outcome] != 1:
                continue
            cell[treatment] = t
            total += _product(mechanisms, others, cell)
        arms.append(total)
    return arms[0] - arms[1]


def randomize(table: JointTable, model: StructuralModel, target: str) -> JointTable:
    """Apply an intervention inside the world described by `table`.

    `model` must already carry the intervention (see `do_replace`). The law of
    the non-descendants of `target` is taken from `table`; `target` and its
    descendants are regenerated from the model's mechanisms.
    """
    diagram = model.diagram
    if table.scope != diagram.names:
        raise ValueError("table scope must list every diagram variable in declaration order")
    regenerated = {target} | diagram.descendants(target)
    keep = tuple(n for n in diagram.names if n not in regenerated)
    base = marginal(table, keep) if keep else None
    order = [n for n in diagram.topological_order() if n in regenerated]
    mechanisms = _by_child(model)
    probs = np.zeros(table.probs.shape)
    for row, bits in enumerate(cell_bits(len(diagram.names))):
        cell = dict(zip(diagram.names, (int(b) for b in bits)))
        if base is not None:
            base_row = int("".join(str(cell[n]) for n in keep), 2)
            p = float(base.probs[base_row])
        else:
            p = 1.0
        probs[row] = _product(mechanisms, order, cell, p)
    return JointTable(diagram.names, probs / probs.sum())
