#!/usr/bin/env python3
"""Audit the bundled staged-cleanup fixtures and print how the scores move.

Walks the assign_v1 -> assign_v2 -> assign_v4 -> assign_final sequence, plus
the relic pair, showing per-stage diagnostics counts, the readability score,
and what the nest-and-erase pipeline does to the reordered stage.
"""

import sys
from collections import Counter
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from sheetlint.config import AuditConfig                      # noqa: E402
from sheetlint.graph import build_graph                       # noqa: E402
from sheetlint.loaders import load_text                       # noqa: E402
from sheetlint.report import audit_workbook                   # noqa: E402
from sheetlint.simplify import plan_nesting                   # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"

STAGES = [
    ("assign_v1.wb", "four sheets, objective up front", AuditConfig()),
    ("assign_v2.wb", "one sheet, requirements above", AuditConfig()),
    ("assign_v4.wb", "per-president blocks, stale totals",
     AuditConfig(bottom_line=("Model!C51",))),
    ("assign_final.wb", "cleaned up, formulas grey",
     AuditConfig(bottom_line=("Model!C51",))),
    ("relic_v1.wb", "allocation out to IT22", AuditConfig()),
    ("relic_clean.wb", "relics removed", AuditConfig()),
]


def main() -> None:
    for name, blurb, config in STAGES:
        wb = load_text(FIXTURES / name)
        result = audit_workbook(wb, config, input_path=name)
        report = result.report
        counts = Counter(d.rule for d in report.diagnostics)
        top = ", ".join(f"{rule}x{n}" for rule, n in counts.most_common(5))
        score = "n/a" if report.score is None else f"{report.score:5.1f}"
        print(f"{name:18s} {blurb:38s} score {score}  {top or 'clean'}")

    print()
    wb = load_text(FIXTURES / "assign_v4.wb")
    plan = plan_nesting(wb, build_graph(wb))
    erased = ", ".join(a.a1() for a in plan.removed)
    print(f"nest-and-erase on assign_v4: {len(plan.removed)} cells go "
          f"({erased})")
    objective = next(a for a in plan.final_formulas if a.row == 51)
    print(f"objective becomes: {plan.final_formulas[objective]}")


if __name__ == "__main__":
    main()
