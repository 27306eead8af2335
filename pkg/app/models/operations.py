"""Declarative operations on evidential states and named pipelines of them."""

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.causal.tables import Event


class Restrict(BaseModel):
    """Keep only the cells satisfying an event over observed variables."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["restrict"] = "restrict"
    event: Event

    @property
    def variables(self) -> tuple[str, ...]:
        return self.event.variables

    def describe(self) -> str:
        return f"restrict {self.event.describe()}"


class Condition(BaseModel):
    """Stratify on a value of a variable, or register it for adjustment."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["condition"] = "condition"
    variable: str
    mode: Literal["stratify", "adjust"]
    value: int | None = None

    @model_validator(mode="after")
    def _check_value(self) -> "Condition":
        if self.mode == "stratify" and self.value not in (0, 1):
            raise ValueError("stratify needs a value of 0 or 1")
        if self.mode == "adjust" and self.value is not None:
            raise ValueError("adjust takes no value")
        return self

    @property
    def variables(self) -> tuple[str, ...]:
        return (self.variable,)

    @property
    def event(self) -> Event:
        return Event(clauses=((self.variable, self.value),))

    def describe(self) -> str:
        if self.mode == "adjust":
            return f"adjust {self.variable}"
        return f"stratify {self.variable}={self.value}"


class Intervene(BaseModel):
    """Set a variable by an external coin with P(variable=1) = p."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["intervene"] = "intervene"
    variable: str
    p: float = Field(ge=0.0, le=1.0)

    @property
    def variables(self) -> tuple[str, ...]:
        return (self.variable,)

    def describe(self) -> str:
        return f"intervene {self.variable} p={self.p!r}"


Operation = Annotated[Union[Restrict, Condition, Intervene], Field(discriminator="kind")]


def changes_world(op: Operation) -> bool:
    """True for operations that transform the table (everything but adjust)."""
    return not (isinstance(op, Condition) and op.mode == "adjust")


def restricts(op: Operation) -> bool:
    """True for restrict and stratify steps, which both keep the cells of an event."""
    return isinstance(op, Restrict) or (isinstance(op, Condition) and op.mode == "stratify")


class Pipeline(BaseModel):
    """A labelled sequence of operations applied to the initial state."""

    model_config = ConfigDict(frozen=True)

    label: str = Field(min_length=1)
    steps: tuple[Operation, ...]

    @field_validator("steps")
    @classmethod
    def _check_steps(cls, value: tuple) -> tuple:
        if not value:
            raise ValueError("pipeline needs at least one step")
        return value

    def describe(self) -> str:
        return " ; ".join(step.describe() for step in self.steps)
