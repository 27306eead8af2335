#!/usr/bin/env python3
"""Grid-step sensitivity of identification verdicts.

Usage:
    python scripts/grid_sensitivity.py
    python scripts/grid_sensitivity.py builtin:s2 --steps 1 0.5

Runs every pipeline of a scenario on several parameter grids and prints the
admissible member count, identified-set width and identification route.
"""

import argparse
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.config import get_settings
from app.core.runner import ScenarioRunner
from app.errors import EngineError, ScenarioError
from app.main import load_scenario
from app.metrics.identification import identification
from app.operators.pipeline import run_pipeline


def sweep(source: str, steps: list[float], epsilon: float | None) -> int:
    """Print one row per (grid step, pipeline).

    Returns:
        Number of grid steps that failed
    """
    try:
        scenario = load_scenario(source)
    except ScenarioError as e:
        print(f"❌ Ошибка сценария: {e}")
        return len(steps)

    overrides = {"epsilon": epsilon} if epsilon is not None else {}
    settings = get_settings(**overrides)
    failures = 0

    print(f"{'шаг':>6}  {'конвейер':<10} {'моделей':>9} {'ширина':>8}  маршрут")
    for step in steps:
        runner = ScenarioRunner(settings, overrides, grid_step=step)
        try:
            effective, initial = runner.prepare(scenario)
            for pipeline in scenario.pipelines:
                final = run_pipeline(initial, pipeline)[-1]
                verdict = identification(final, effective.eps_id, effective.bins)
                print(
                    f"{step:>6}  {pipeline.label:<10} {final.admissible.count:>9} "
                    f"{verdict.width:>8.4f}  {verdict.route}"
                )
        except (EngineError, ValueError) as e:
            print(f"{step:>6}  ❌ {e}")
            failures += 1
    return failures


def main():
    """Entry point."""
    parser = argparse.ArgumentParser(
        description="Чувствительность вердиктов идентифицируемости к шагу сетки",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Примеры:
  python scripts/grid_sensitivity.py
  python scripts/grid_sensitivity.py builtin:trial --steps 1 0.5
  python scripts/grid_sensitivity.py my_scenario.txt --epsilon 0.05
        """
    )

    parser.add_argument(
        "scenario",
        nargs="?",
        default="builtin:fig1",
        help="Сценарий: файл, '-' или builtin:<имя> (по умолчанию: builtin:fig1)"
    )

    parser.add_argument(
        "--steps",
        type=float,
        nargs="+",
        default=[1.0, 0.5, 0.25],
        help="Шаги сетки (по умолчанию: 1 0.5 0.25)"
    )

    parser.add_argument(
        "--epsilon",
        type=float,
        help="Допуск совместимости (по умолчанию из настроек сценария)"
    )

    args = parser.parse_args()

    print("\n🔬 Чувствительность к шагу сетки\n")
    print("=" * 60)

    failures = sweep(args.scenario, args.steps, args.epsilon)

    print("=" * 60)
    print(f"📊 Результат: {len(args.steps) - failures} шагов посчитано, {failures} ошибок")
    sys.exit(0 if failures == 0 else 1)


if __name__ == "__main__":
    main()
