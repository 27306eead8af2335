#!/usr/bin/env python3
"""Export the JSON schema of the run report.

Usage:
    python scripts/export_schema.py
    python scripts/export_schema.py --out docs/run_report.schema.json
"""

import argparse
import json
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.models.domain import RunReport


def main():
    """Entry point."""
    parser = argparse.ArgumentParser(description="Экспорт JSON-схемы отчёта")
    parser.add_argument(
        "--out",
        type=Path,
        default=Path("run_report.schema.json"),
        help="Файл схемы (по умолчанию: run_report.schema.json)"
    )
    args = parser.parse_args()

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(RunReport.model_json_schema(), indent=2) + "\n", encoding="utf-8")
    print(f"✅ Схема записана в {args.out}")


if __name__ == "__main__":
    main()
