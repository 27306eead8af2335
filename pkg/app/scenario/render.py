"""Canonical text form of a scenario; parsing it gives back an equal scenario."""

from app.causal.tables import cell_bits
from app.scenario.model import Scenario


def _number(value: float) -> str:
    return repr(float(value))


def render_scenario(scenario: Scenario) -> str:
    diagram = scenario.diagram
    lines = [f"scenario {scenario.name}"]
    for v in diagram.variables:
        visibility = "obs" if v.observed else "hidden"
        role = f" {v.role}" if v.role != "none" else ""
        lines.append(f"var {v.name} {visibility}{role}")
    for parent, child in diagram.edges:
        lines.append(f"edge {parent} {child}")
    lines.append("grid " + " ".join(_number(p) for p in scenario.grid.levels))
    for mech in scenario.ground_truth.mechanisms:
        for row in cell_bits(len(mech.parents)):
            bits = tuple(int(b) for b in row)
            key = "".join(map(str, bits))
            spacer = f" {key}" if key else ""
            lines.append(f"truth {mech.child}{spacer} = {_number(mech.table[bits])}")
    overrides = scenario.settings.as_overrides()
    if overrides:
        parts = []
        for key in ("epsilon", "eps_id", "bins", "quantum", "cap"):
            if key in overrides:
                value = overrides[key]
                parts.append(f"{key}={value if isinstance(value, int) else _number(value)}")
        lines.append("settings " + " ".join(parts))
    for pipeline in scenario.pipelines:
        lines.append(f"pipeline {pipeline.label}: {pipeline.describe()}")
    for a, b in scenario.comparisons:
        lines.append(f"compare {a} {b}")
    return "\n".join(lines) + "\n"
