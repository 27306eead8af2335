"""Line-oriented scenario language.

    scenario <name>
    var <name> (obs|hidden) [treatment|outcome|covariate]
    edge <parent> <child>
    grid <p1> <p2> ...
    truth <var> [<parent bits>] = <prob>
    settings epsilon=<x> eps_id=<x> bins=<n> quantum=<x> cap=<n>
    pipeline <label>: <step> ; <step> ; ...
    compare <label> <label>

Steps are `restrict V=1[,A=0...]`, `stratify X=<0|1>`, `adjust X` and
`intervene T p=<prob>`. Parent bits follow the declaration order of the
parents. Probabilities are decimals or fractions such as 3/4. `#` starts a
comment.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from pydantic import ValidationError

from app.causal.model import CausalDiagram, Mechanism, StructuralModel, Variable
from app.causal.tables import Event
from app.enumeration.grid import ParameterGrid
from app.errors import EngineError, ScenarioError
from app.models.operations import Condition, Intervene, Operation, Pipeline, Restrict
from app.scenario.model import Scenario, ScenarioSettings

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"[:;]|[^\s:;]+")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_DECIMAL = re.compile(r"(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][-+]?[0-9]+)?\Z")
_FRACTION = re.compile(r"([0-9]{1,18})/([0-9]{1,18})\Z")
_INTEGER = re.compile(r"[0-9]{1,18}\Z")
_BITS = re.compile(r"[01]+\Z")

VISIBILITY = {"obs": "observed", "observed": "observed", "hidden": "hidden"}
ROLES = ("treatment", "outcome", "covariate")
FLOAT_SETTINGS = ("epsilon", "eps_id", "quantum")
INT_SETTINGS = ("bins", "cap")


class ParseError(ScenarioError):
    """Raised on malformed scenario text; line and column are 1-based."""

    def __init__(self, line: int, column: int, message: str, token: str = ""):
        self.line = line
        self.column = column
        self.message = message
        self.token = token
        near = f" (near {token!r})" if token else ""
        super().__init__(f"line {line}, column {column}: {message}{near}")


class ScenarioValidationError(ScenarioError):
    """Raised when well-formed scenario text describes an inconsistent scenario."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int


def tokenize(text: str, line: int) -> list[Token]:
    return [Token(m.group(), line, m.start() + 1) for m in _TOKEN.finditer(text)]


def _fail(token: Token, message: str) -> ParseError:
    return ParseError(token.line, token.column, message, token.text)


def parse_probability(token: Token) -> float:
    """Decimal or fraction literal in [0, 1]."""
    fraction = _FRACTION.match(token.text)
    if fraction:
        numerator, denominator = int(fraction.group(1)), int(fraction.group(2))
        if denominator == 0:
            raise _fail(token, "fraction has a zero denominator")
        value = numerator / denominator
    elif _DECIMAL.match(token.text):
        value = float(token.text)
    else:
        raise _fail(token, "expected a probability")
    if not 0.0 <= value <= 1.0:
        raise _fail(token, "probability must lie in [0, 1]")
    return value


def _non_negative(token: Token) -> float:
    if not _DECIMAL.match(token.text):
        raise _fail(token, "expected a non-negative number")
    value = float(token.text)
    if value == float("inf"):
        raise _fail(token, "number is too large")
    return value


def _integer(token: Token) -> int:
    if not _INTEGER.match(token.text):
        raise _fail(token, "expected an integer")
    return int(token.text)


def _ident(token: Token, what: str) -> str:
    if not _IDENT.match(token.text):
        raise _fail(token, f"expected {what}")
    return token.text


def _assignment(token: Token, text: Optional[str] = None) -> tuple[str, int]:
    text = token.text if text is None else text
    name, sep, value = text.partition("=")
    if not sep or not _IDENT.match(name) or value not in ("0", "1"):
        raise _fail(token, "expected <variable>=<0|1>")
    return name, int(value)


@dataclass
class _Draft:
    """Everything collected from the lines, before cross-line validation."""

    name: Optional[str] = None
    variables: list[tuple[Variable, int]] = field(default_factory=list)
    edges: list[tuple[str, str, int]] = field(default_factory=list)
    grid: Optional[tuple[tuple[float, ...], int]] = None
    truth: dict[str, dict[tuple[int, ...], tuple[float, int]]] = field(default_factory=dict)
    settings: dict[str, float] = field(default_factory=dict)
    settings_line: Optional[int] = None
    pipelines: list[tuple[str, tuple[Operation, ...], int]] = field(default_factory=list)
    comparisons: list[tuple[str, str, int]] = field(default_factory=list)


class ScenarioParser:
    """Parses scenario text line by line, then validates the whole scenario.

    Each directive has a `_directive_<name>` method receiving the directive
    token and the remaining tokens of its line.
    """

    def __init__(self, text: str):
        self.text = text
        self.draft = _Draft()

    def parse(self) -> Scenario:
        for number, raw in enumerate(self.text.split("\n"), start=1):
            content = raw.split("#", 1)[0].rstrip("\r")
            tokens = tokenize(content, number)
            if not tokens:
                continue
            # Missing arguments are reported at the last character of the line.
            end = Token("", number, len(content.rstrip()))
            handler: Optional[Callable] = getattr(self, f"_directive_{tokens[0].text}", None)
            if handler is None:
                raise _fail(tokens[0], "unknown directive")
            try:
                handler(tokens[0], tokens[1:], end)
            except (ValueError, EngineError) as e:
                raise _fail(tokens[0], _message(e)) from e
        try:
            return self._build()
        except (ValueError, EngineError) as e:
            raise ScenarioValidationError(_message(e)) from e

    @staticmethod
    def _arity(directive: Token, args: list[Token], end: Token, low: int, high: int) -> None:
        if len(args) < low:
            raise ParseError(end.line, end.column, f"'{directive.text}' needs at least {low} arguments")
        if len(args) > high:
            raise _fail(args[high], f"unexpected argument to '{directive.text}'")

    def _directive_scenario(self, directive: Token, args: list[Token], end: Token) -> None:
        self._arity(directive, args, end, 1, 1)
        if self.draft.name is not None:
            raise _fail(directive, "scenario name given twice")
        self.draft.name = _ident(args[0], "a scenario name")

    def _directive_var(self, directive: Token, args: list[Token], end: Token) -> None:
        self._arity(directive, args, end, 2, 3)
        name = _ident(args[0], "a variable name")
        if args[1].text not in VISIBILITY:
            raise _fail(args[1], "expected 'obs' or 'hidden'")
        role = "none"
        if len(args) == 3:
            if args[2].text not in ROLES:
                raise _fail(args[2], "expected 'treatment', 'outcome' or 'covariate'")
            role = args[2].text
        if any(v.name == name for v, _ in self.draft.variables):
            raise _fail(args[0], "variable declared twice")
        variable = Variable(name=name, visibility=VISIBILITY[args[1].text], role=role)
        self.draft.variables.append((variable, directive.line))

    def _directive_edge(self, directive: Token, args: list[Token], end: Token) -> None:
        self._arity(directive, args, end, 2, 2)
        parent = _ident(args[0], "a variable name")
        child = _ident(args[1], "a variable name")
        self.draft.edges.append((parent, child, directive.line))

    def _directive_grid(self, directive: Token, args: list[Token], end: Token) -> None:
        self._arity(directive, args, end, 1, 1_000)
        if self.draft.grid is not None:
            raise _fail(directive, "grid given twice")
        self.draft.grid = (tuple(parse_probability(t) for t in args), directive.line)

    def _directive_truth(self, directive: Token, args: list[Token], end: Token) -> None:
        self._arity(directive, args, end, 3, 4)
        name = _ident(args[0], "a variable name")
        if len(args) == 4:
            if not _BITS.match(args[1].text):
                raise _fail(args[1], "expected parent bits such as 01")
            bits = tuple(int(c) for c in args[1].text)
        else:
            bits = ()
        equals, value = args[-2], args[-1]
        if equals.text != "=":
            raise _fail(equals, "expected '='")
        entries = self.draft.truth.setdefault(name, {})
        if bits in entries:
            raise _fail(args[0], "truth entry given twice")
        entries[bits] = (parse_probability(value), directive.line)

    def _directive_settings(self, directive: Token, args: list[Token], end: Token) -> None:
        self._arity(directive, args, end, 1, len(FLOAT_SETTINGS) + len(INT_SETTINGS))
        if self.draft.settings_line is not None:
            raise _fail(directive, "settings given twice")
        self.draft.settings_line = directive.line
        for token in args:
            key, sep, raw = token.text.partition("=")
            if not sep or key not in FLOAT_SETTINGS + INT_SETTINGS:
                raise _fail(token, "expected <setting>=<value>")
            if key in self.draft.settings:
                raise _fail(token, "setting given twice")
            value_token = Token(raw, token.line, token.column + len(key) + 1)
            if key in FLOAT_SETTINGS:
                self.draft.settings[key] = _non_negative(value_token)
            else:
                self.draft.settings[key] = _integer(value_token)

    def _directive_pipeline(self, directive: Token, args: list[Token], end: Token) -> None:
        self._arity(directive, args, end, 3, 10_000)
        label = _ident(args[0], "a pipeline label")
        if args[1].text != ":":
            raise _fail(args[1], "expected ':' after the pipeline label")
        steps: list[Operation] = []
        current: list[Token] = []
        for token in args[2:] + [Token(";", end.line, end.column)]:
            if token.text != ";":
                current.append(token)
                continue
            if not current:
                raise _fail(token, "empty pipeline step")
            steps.append(self._step(current, token))
            current = []
        if any(existing == label for existing, _, _ in self.draft.pipelines):
            raise _fail(args[0], "pipeline label used twice")
        self.draft.pipelines.append((label, tuple(steps), directive.line))

    def _step(self, tokens: list[Token], end: Token) -> Operation:
        head, args = tokens[0], tokens[1:]
        expected = {"restrict": 1, "stratify": 1, "adjust": 1, "intervene": 2}
        if head.text not in expected:
            raise _fail(head, "unknown step; expected restrict, stratify, adjust or intervene")
        if len(args) < expected[head.text]:
            raise ParseError(end.line, end.column, f"'{head.text}' is missing an argument")
        if len(args) > expected[head.text]:
            raise _fail(args[expected[head.text]], f"unexpected argument to '{head.text}'")
        if head.text == "restrict":
            clauses = tuple(_assignment(args[0], part) for part in args[0].text.split(","))
            if len({name for name, _ in clauses}) != len(clauses):
                raise _fail(args[0], "restriction repeats a variable")
            return Restrict(event=Event(clauses=clauses))
        if head.text == "stratify":
            name, value = _assignment(args[0])
            return Condition(variable=name, mode="stratify", value=value)
        if head.text == "adjust":
            return Condition(variable=_ident(args[0], "a variable name"), mode="adjust")
        key, sep, raw = args[1].text.partition("=")
        if key != "p" or not sep:
            raise _fail(args[1], "expected p=<probability>")
        p = parse_probability(Token(raw, args[1].line, args[1].column + 2))
        return Intervene(variable=_ident(args[0], "a variable name"), p=p)

    def _directive_compare(self, directive: Token, args: list[Token], end: Token) -> None:
        self._arity(directive, args, end, 2, 2)
        a = _ident(args[0], "a pipeline label")
        b = _ident(args[1], "a pipeline label")
        self.draft.comparisons.append((a, b, directive.line))

    def _build(self) -> Scenario:
        draft = self.draft
        if draft.name is None:
            raise ScenarioValidationError("missing 'scenario' line")
        if not draft.variables:
            raise ScenarioValidationError("scenario declares no variables")
        if draft.grid is None:
            raise ScenarioValidationError("missing 'grid' line")
        names = [v.name for v, _ in draft.variables]
        declared_at = {v.name: line for v, line in draft.variables}

        for parent, child, line in draft.edges:
            for end in (parent, child):
                if end not in names:
                    raise ScenarioValidationError(f"edge references undeclared variable {end!r}", line)
        diagram = CausalDiagram(
            variables=tuple(v for v, _ in draft.variables),
            edges=tuple((p, c) for p, c, _ in draft.edges),
        )

        for name, entries in draft.truth.items():
            if name not in names:
                line = min(line for _, line in entries.values())
                raise ScenarioValidationError(f"truth for undeclared variable {name!r}", line)
        mechanisms = []
        for name in names:
            parents = diagram.parents(name)
            entries = draft.truth.get(name, {})
            for bits, (_, line) in entries.items():
                if len(bits) != len(parents):
                    raise ScenarioValidationError(
                        f"truth for {name} needs {len(parents)} parent bits {parents}", line
                    )
            if len(entries) != 2 ** len(parents):
                raise ScenarioValidationError(
                    f"variable {name} needs {2 ** len(parents)} truth lines, got {len(entries)}",
                    declared_at[name],
                )
            table = {bits: p for bits, (p, _) in entries.items()}
            mechanisms.append(Mechanism(child=name, parents=parents, table=table))

        levels, grid_line = draft.grid
        try:
            grid = ParameterGrid(levels=levels)
        except ValidationError as e:
            raise ScenarioValidationError(_message(e), grid_line) from e
        try:
            settings = ScenarioSettings(**draft.settings)
        except ValidationError as e:
            raise ScenarioValidationError(_message(e), draft.settings_line) from e

        pipelines = []
        for label, steps, line in draft.pipelines:
            for step in steps:
                for name in step.variables:
                    if name not in names:
                        raise ScenarioValidationError(
                            f"pipeline {label} names undeclared variable {name!r}", line
                        )
            pipelines.append(Pipeline(label=label, steps=steps))
        labels = [p.label for p in pipelines]
        for a, b, line in draft.comparisons:
            for label in (a, b):
                if label not in labels:
                    raise ScenarioValidationError(f"compare names unknown pipeline {label!r}", line)

        return Scenario(
            name=draft.name,
            ground_truth=StructuralModel(diagram=diagram, mechanisms=tuple(mechanisms)),
            grid=grid,
            pipelines=tuple(pipelines),
            comparisons=tuple((a, b) for a, b, _ in draft.comparisons),
            settings=settings,
        )


def _message(error: Exception) -> str:
    if isinstance(error, ValidationError):
        first = error.errors()[0]
        return str(first.get("msg", error)).removeprefix("Value error, ")
    return str(error)


def parse_scenario(text: str) -> Scenario:
    """Parse scenario text.

    Raises:
        ParseError: On malformed lines.
        ScenarioValidationError: When the lines do not form a consistent scenario.
    """
    return ScenarioParser(text).parse()


def parse_scenario_bytes(data: bytes) -> Scenario:
    """Decode UTF-8 scenario bytes and parse them."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        line = data.count(b"\n", 0, e.start) + 1
        column = e.start - (data.rfind(b"\n", 0, e.start) + 1) + 1
        raise ParseError(line, column, "invalid UTF-8") from e
    return parse_scenario(text)
