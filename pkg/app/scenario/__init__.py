# Scenario language: parsing, rendering and builtin scenarios

from app.scenario.builtins import BUILTIN_SCENARIOS, builtin_text, load_builtin
from app.scenario.model import Scenario, ScenarioSettings
from app.scenario.parser import (
    ParseError,
    ScenarioParser,
    ScenarioValidationError,
    parse_probability,
    parse_scenario,
    parse_scenario_bytes,
)
from app.scenario.render import render_scenario

__all__ = [
    "BUILTIN_SCENARIOS",
    "ParseError",
    "Scenario",
    "ScenarioParser",
    "ScenarioSettings",
    "ScenarioValidationError",
    "builtin_text",
    "load_builtin",
    "parse_probability",
    "parse_scenario",
    "parse_scenario_bytes",
    "render_scenario",
]
