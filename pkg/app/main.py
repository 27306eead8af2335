"""Command line entry point for the evidential-state engine.

Usage:
    evidence run builtin:fig1 --format json
    evidence compare scenario.txt CR RC
    evidence audit - RIR < scenario.txt
    evidence builtin fig1
    evidence schema

Exit codes: 0 on success, 2 on scenario or argument errors, 3 on engine errors.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from app.config import EngineSettings, get_settings
from app.core.runner import ScenarioRunner
from app.errors import EngineError, ScenarioError
from app.models.domain import RunReport
from app.reports.renderers import RENDERERS, get_renderer
from app.scenario.builtins import BUILTIN_SCENARIOS, builtin_text
from app.scenario.model import Scenario
from app.scenario.parser import parse_scenario_bytes

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SCENARIO_ERROR = 2
EXIT_ENGINE_ERROR = 3

BUILTIN_PREFIX = "builtin:"


class ScenarioSourceError(ScenarioError):
    """Raised when the scenario file cannot be read."""

    pass


def load_scenario(source: str) -> Scenario:
    """Load a scenario from a path, `-` (stdin) or `builtin:<name>`."""
    if source.startswith(BUILTIN_PREFIX):
        data = builtin_text(source[len(BUILTIN_PREFIX):]).encode("utf-8")
    elif source == "-":
        data = sys.stdin.buffer.read()
    else:
        try:
            data = Path(source).read_bytes()
        except OSError as e:
            raise ScenarioSourceError(f"Cannot read scenario {source!r}: {e}") from e
    return parse_scenario_bytes(data)


def _add_engine_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scenario", help="scenario file, '-' for stdin, or builtin:<name>")
    parser.add_argument("--grid-step", type=float, help="replace the scenario grid by 0, step, ..., 1")
    parser.add_argument("--epsilon", type=float, help="compatibility tolerance (total variation)")
    parser.add_argument("--eps-id", type=float, help="identification width threshold")
    parser.add_argument("--bins", type=int, help="tau histogram bins")
    parser.add_argument("--quantum", type=float, help="fingerprint rounding quantum")
    parser.add_argument("--cap", type=int, help="largest model class to enumerate")
    parser.add_argument("--parallel", type=int, help="worker threads for model blocks")
    parser.add_argument("--format", choices=sorted(RENDERERS), default="json")
    parser.add_argument("--out", type=Path, help="write the report here instead of stdout")
    parser.add_argument("--timings", action="store_true", help="include wall time per phase")
    parser.add_argument("--log-level", help="logging level (default from EVIDENCE_LOG_LEVEL)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evidence",
        description="Evidential states, operator orders and the causal-breadth constraint",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run every pipeline of a scenario")
    _add_engine_flags(run)
    run.add_argument(
        "--compare",
        nargs=2,
        action="append",
        default=[],
        metavar=("A", "B"),
        help="also compare pipelines A and B (repeatable)",
    )

    compare = commands.add_parser("compare", help="compare two pipeline orders")
    _add_engine_flags(compare)
    compare.add_argument("a", help="first pipeline label")
    compare.add_argument("b", help="second pipeline label")

    audit = commands.add_parser("audit", help="constraint audit of one pipeline")
    _add_engine_flags(audit)
    audit.add_argument("label", help="pipeline label")

    builtin = commands.add_parser("builtin", help="print a builtin scenario")
    builtin.add_argument("name", choices=sorted(BUILTIN_SCENARIOS))

    commands.add_parser("schema", help="print the JSON schema of the run report")
    return parser


def _settings_from(args: argparse.Namespace) -> tuple[EngineSettings, dict]:
    overrides = {
        "epsilon": args.epsilon,
        "eps_id": args.eps_id,
        "bins": args.bins,
        "quantum": args.quantum,
        "cap": args.cap,
        "parallel": args.parallel,
        "log_level": args.log_level,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return get_settings(**overrides), overrides


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")
        logger.info(f"Report written to {out}")


def _execute(args: argparse.Namespace) -> int:
    if args.command == "builtin":
        sys.stdout.write(builtin_text(args.name))
        return EXIT_OK
    if args.command == "schema":
        sys.stdout.write(json.dumps(RunReport.model_json_schema(), indent=2) + "\n")
        return EXIT_OK

    settings, overrides = _settings_from(args)
    _configure_logging(settings.log_level)
    scenario = load_scenario(args.scenario)
    runner = ScenarioRunner(settings, overrides, grid_step=args.grid_step, timings=args.timings)
    renderer = get_renderer(args.format)

    if args.command == "run":
        report = runner.run(scenario, [tuple(pair) for pair in args.compare])
        _emit(renderer.render_run(report), args.out)
    elif args.command == "compare":
        _emit(renderer.render_comparison(runner.compare(scenario, args.a, args.b)), args.out)
    else:
        _emit(renderer.render_audit(runner.audit(scenario, args.label)), args.out)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        return _execute(args)
    except (ScenarioError, ValidationError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_SCENARIO_ERROR
    except EngineError as e:
        sys.stderr.write(f"engine error: {e}\n")
        return EXIT_ENGINE_ERROR
    except ValueError as e:
        # Bad --grid-step and similar argument values.
        sys.stderr.write(f"error: {e}\n")
        return EXIT_SCENARIO_ERROR


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
