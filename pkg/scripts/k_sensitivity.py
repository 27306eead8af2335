#!/usr/bin/env python3
"""Residual k across model classes with different confounding.

Usage:
    python scripts/k_sensitivity.py
    python scripts/k_sensitivity.py --step 0.5 --epsilon 0.02

Computes k for a class whose treatment has no parents (no confounding
possible), for the fig1 class and for the s2 class, all on the same grid.
"""

import argparse
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.config import get_settings
from app.enumeration.grid import ModelClass, ParameterGrid
from app.errors import EngineError
from app.metrics.residual import residual_k
from app.scenario.builtins import load_builtin

CLASSES = (
    ("independent", "без конфаундинга"),
    ("fig1", "U -> X -> T, U -> Y"),
    ("s2", "U -> T напрямую"),
)


def main():
    """Entry point."""
    parser = argparse.ArgumentParser(
        description="Остаточная неопределённость k для классов моделей",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Примеры:
  python scripts/k_sensitivity.py
  python scripts/k_sensitivity.py --step 0.25 --parallel 4
        """
    )

    parser.add_argument("--step", type=float, default=0.5, help="Шаг сетки (по умолчанию: 0.5)")
    parser.add_argument("--epsilon", type=float, help="Допуск совместимости")
    parser.add_argument("--bins", type=int, help="Число корзин гистограммы tau")
    parser.add_argument("--parallel", type=int, help="Число потоков")

    args = parser.parse_args()
    overrides = {"epsilon": args.epsilon, "bins": args.bins, "parallel": args.parallel}
    settings = get_settings(**overrides)
    grid = ParameterGrid.from_step(args.step)

    print("\n🧮 Остаточная неопределённость k\n")
    print("=" * 60)
    print(f"📐 Сетка: {list(grid.levels)}, epsilon={settings.epsilon}, bins={settings.bins}\n")

    errors = 0
    for name, description in CLASSES:
        model_class = ModelClass(diagram=load_builtin(name).diagram, grid=grid)
        try:
            k = residual_k(
                model_class,
                settings.quantum,
                settings.bins,
                settings.epsilon,
                cap=settings.cap,
                block_size=settings.block_size,
                parallel=settings.parallel,
            )
        except EngineError as e:
            print(f"  ❌ {name}: {e}")
            errors += 1
            continue
        print(f"  ✅ {name:<12} ({description}): {model_class.size} моделей, k = {k:.6f} бит")

    print("\n" + "=" * 60)
    sys.exit(0 if errors == 0 else 1)


if __name__ == "__main__":
    main()
