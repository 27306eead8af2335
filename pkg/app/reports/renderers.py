"""JSON, CSV and text report renderers."""

import csv
import io
import logging
from pathlib import Path
from typing import Any, Iterable, Optional

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from app.models.domain import CommutationReport, ConstraintReport, PipelineReport, RunReport
from app.reports.base import ReportRenderer

logger = logging.getLogger(__name__)

TEMPLATES_DIR = Path(__file__).parent / "templates"


class JsonRenderer(ReportRenderer):
    """Report models as indented JSON; matches `RunReport.model_json_schema()`."""

    def render_run(self, report: RunReport) -> str:
        return report.model_dump_json(indent=2) + "\n"

    def render_comparison(self, report: CommutationReport) -> str:
        return report.model_dump_json(indent=2) + "\n"

    def render_audit(self, report: ConstraintReport) -> str:
        return report.model_dump_json(indent=2) + "\n"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class CsvRenderer(ReportRenderer):
    """Long format: one row per (scenario, pipeline, metric)."""

    HEADER = ("scenario", "pipeline", "metric", "value")

    def _write(self, rows: Iterable[tuple[str, str, str, Any]]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.HEADER)
        for scenario, pipeline, metric, value in rows:
            writer.writerow((scenario, pipeline, metric, _cell(value)))
        return buffer.getvalue()

    @staticmethod
    def _audit_rows(scenario: str, report: ConstraintReport):
        yield scenario, report.pipeline, "delta_cause", report.delta_cause
        yield scenario, report.pipeline, "delta_breadth", report.delta_breadth
        yield scenario, report.pipeline, "product", report.product
        yield scenario, report.pipeline, "k", report.k
        yield scenario, report.pipeline, "satisfied", report.satisfied
        yield scenario, report.pipeline, "monotonicity_violations", report.monotonicity_violations

    def _pipeline_rows(self, scenario: str, report: PipelineReport):
        label = report.label
        yield scenario, label, "member_count", report.member_count
        yield scenario, label, "tau_min", report.tau_set.min
        yield scenario, label, "tau_max", report.tau_set.max
        yield scenario, label, "tau_width", report.tau_set.width
        yield scenario, label, "h_prior", report.entropy.h_prior
        yield scenario, label, "h_state", report.entropy.h_state
        yield scenario, label, "identifiable", report.identification.identifiable
        yield scenario, label, "route", report.identification.route
        yield scenario, label, "world_effect", report.world_effect
        yield from self._audit_rows(scenario, report.constraint)

    @staticmethod
    def _comparison_rows(scenario: str, report: CommutationReport):
        pair = f"{report.label_a} vs {report.label_b}"
        yield scenario, pair, "table_tv", report.table_tv
        yield scenario, pair, "set_jaccard", report.set_jaccard
        yield scenario, pair, "members_equal", report.members_equal
        yield scenario, pair, "registry_match", report.registry_match
        yield scenario, pair, "verdict", report.verdict

    def render_run(self, report: RunReport) -> str:
        def rows():
            yield report.scenario, "", "model_count", report.model_count
            yield report.scenario, "", "k", report.k
            for pipeline in report.pipelines:
                yield from self._pipeline_rows(report.scenario, pipeline)
            for comparison in report.comparisons:
                yield from self._comparison_rows(report.scenario, comparison)

        return self._write(rows())

    def render_comparison(self, report: CommutationReport) -> str:
        return self._write(self._comparison_rows("", report))

    def render_audit(self, report: ConstraintReport) -> str:
        return self._write(self._audit_rows("", report))


def _number(value: Optional[float], digits: int = 4) -> str:
    if value is None:
        return "-"
    return f"{value:.{digits}f}"


class TextRenderer(ReportRenderer):
    """Human-readable summary rendered from Jinja2 templates."""

    def __init__(self, templates_dir: Path = TEMPLATES_DIR):
        self._env = Environment(
            loader=FileSystemLoader(str(templates_dir)),
            undefined=StrictUndefined,
            keep_trailing_newline=True,
            trim_blocks=True,
            lstrip_blocks=True,
        )
        self._env.filters["num"] = _number

    def render_run(self, report: RunReport) -> str:
        return self._env.get_template("run.txt.j2").render(report=report)

    def render_comparison(self, report: CommutationReport) -> str:
        return self._env.get_template("comparison.txt.j2").render(comparison=report)

    def render_audit(self, report: ConstraintReport) -> str:
        return self._env.get_template("audit.txt.j2").render(audit=report)


RENDERERS: dict[str, type[ReportRenderer]] = {
    "json": JsonRenderer,
    "csv": CsvRenderer,
    "text": TextRenderer,
}


def get_renderer(name: str) -> ReportRenderer:
    try:
        return RENDERERS[name]()
    except KeyError:
        raise ValueError(f"Unknown report format {name!r}; choose from {sorted(RENDERERS)}") from None
