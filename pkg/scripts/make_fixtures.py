#!/usr/bin/env python3
"""Regenerate the workbook fixtures under tests/fixtures/.

The assign_* fixtures reconstruct the staged cleanup of a small employee
scheduling workbook: v1 spreads it over four sheets, v2 squeezes it onto one
sheet with constraint rows that look downward, v4 reorders it per president
with leftover row totals, and final is the cleaned-up version with formulas
marked grey. Cells that no stage of the storyline pins down are interpolated;
comments in the fixtures mark which is which.
"""

from __future__ import annotations

from pathlib import Path

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"

DAYS_SHORT = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"]
DAYS_LONG = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday",
             "Saturday", "Sunday"]

DAYS_REQD = [2, 1, 1, 3, 1, 1, 1]
EVES_REQD = [1, 1, 0, 0, 2, 1, 1]
NITES_REQD = [1, 0, 0, 0, 1, 1, 1]

PRESIDENTS = ["REAGAN", "BUSH", "FORD", "NIXON"]

# Interpolated preference scores per president, one row per shift.
PREFS = {
    "REAGAN": [[1, 0, 3, 2, 0, 0, 0], [0, 0, 0, 0, 4, 5, 0], [0, 0, 0, 0, 0, 0, 0]],
    "BUSH": [[3, 2, 0, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0, 0], [0, 0, 0, 0, 5, 4, 0]],
    "FORD": [[0, 1, 2, 0, 0, 0, 3], [4, 0, 0, 0, 1, 0, 0], [0, 0, 0, 5, 0, 0, 0]],
    "NIXON": [[0, 0, 5, 4, 3, 2, 1], [0, 1, 0, 0, 0, 0, 0], [2, 0, 0, 0, 0, 0, 0]],
}

# Interpolated solved assignments used by the final fixture (5 shifts each).
ASSIGN_FINAL = {
    "REAGAN": [[0, 0, 0, 1, 0, 0, 0], [1, 0, 0, 0, 1, 1, 1], [0, 0, 0, 0, 0, 0, 0]],
    "BUSH": [[1, 1, 0, 0, 0, 0, 0], [0, 0, 0, 0, 0, 0, 0], [0, 0, 0, 0, 1, 1, 1]],
    "FORD": [[1, 0, 0, 1, 0, 0, 1], [0, 1, 0, 0, 1, 0, 0], [0, 0, 0, 0, 0, 0, 0]],
    "NIXON": [[0, 0, 1, 1, 1, 0, 0], [0, 1, 0, 0, 0, 0, 0], [1, 0, 0, 0, 0, 0, 0]],
}

COLS = "ABCDEFGHIJKL"


def col(i: int) -> str:
    return COLS[i]


def make_v1() -> str:
    """Four sheets; the objective's precedents live on another sheet.

    Blocks sit far apart with spare rows and columns, the way the original
    spread out before the blank space was tightened up.
    """
    lines = ["# Stage 1: four sheets, objective at the top of the Model sheet.",
             "[sheet Model]",
             "A1 label MULTIPLE SHIFT ASSIGNMENT MODEL",
             "# The label sits in B4, pushed rightward with leading spaces.",
             "B4 label    Preference Total",
             "E4 formula =Preferences!K5+Preferences!K11+Preferences!K17",
             "A6 label See the Assignments, Preferences and Requirements sheets"]

    bases = [3, 9, 15]  # two blank rows between president blocks

    def grid(sheet: str, title: str, rows: dict[str, list[list[int]]]) -> None:
        lines.append(f"[sheet {sheet}]")
        lines.append(f"A1 label {title}")
        for i, day in enumerate(DAYS_SHORT):
            lines.append(f"{col(2 + i)}2 label {day}")
        for name, base in zip(PRESIDENTS[:3], bases):
            lines.append(f"A{base} label {name}")
            for r, shift_row in enumerate(rows[name]):
                for c, value in enumerate(shift_row):
                    lines.append(f"{col(2 + c)}{base + r} num {value}")

    zeros = {name: [[0] * 7 for _ in range(3)] for name in PRESIDENTS}
    grid("Assignments", "ASSIGNMENTS", zeros)
    grid("Preferences", "PREFERENCES", PREFS)
    # One product cell per president, off to the right of its block.
    for base in bases:
        lines.append(f"K{base + 2} formula "
                     f"=SUMPRODUCT(Assignments!C{base}:I{base + 2},"
                     f"C{base}:I{base + 2})")

    lines.append("[sheet Requirements]")
    for i, day in enumerate(DAYS_SHORT):
        lines.append(f"{col(2 + i)}2 label {day}")
    for label, row, reqd, shift in (("DAYS REQD:", 3, DAYS_REQD, 0),
                                    ("EVES REQD:", 6, EVES_REQD, 1),
                                    ("NITES REQD:", 9, NITES_REQD, 2)):
        lines.append(f"A{row} label {label}")
        for c, value in enumerate(reqd):
            lines.append(f"{col(2 + c)}{row} num {value}")
        for c in range(7):
            letter = col(2 + c)
            terms = "+".join(f"Assignments!{letter}{b + shift}" for b in bases)
            lines.append(f"{letter}{row + 1} formula "
                         f"=WB({terms},\">=\",{letter}{row})")
    return "\n".join(lines) + "\n"


def make_v2() -> str:
    """One sheet; constraint rows 4/6/8 reach down into the assignment rows."""
    lines = ["# Stage 2: everything on one sheet, requirements above assignments.",
             "[sheet Model]",
             "A1 label MULTIPLE SHIFT ASSIGNMENT MODEL"]
    for i, day in enumerate(DAYS_SHORT):
        lines.append(f"{col(3 + i)}2 label {day}")
    lines.append("K2 label TOTAL")
    bases = [12, 16, 20]  # president block top rows
    for label, row, reqd, shift in (("DAYS REQD:", 3, DAYS_REQD, 0),
                                    ("EVES REQD:", 5, EVES_REQD, 1),
                                    ("NITES REQD:", 7, NITES_REQD, 2)):
        lines.append(f"A{row} label {label}")
        for c, value in enumerate(reqd):
            lines.append(f"{col(3 + c)}{row} num {value}")
        lines.append(f"K{row} formula =SUM(D{row}:J{row})")
        for c in range(7):
            letter = col(3 + c)
            terms = "+".join(f"{letter}{b + shift}" for b in bases)
            lines.append(f"{letter}{row + 1} formula "
                         f"=WB({terms},\">=\",{letter}{row})")
    lines.append("A9 label ASSIGNMENTS")
    lines.append("A11 label Name")
    lines.append("B11 label #Work")
    lines.append("C11 label Shift")
    for i, day in enumerate(DAYS_SHORT):
        lines.append(f"{col(3 + i)}11 label {day}")
    for name, base in zip(PRESIDENTS[:3], bases):
        lines.append(f"A{base} label {name}")
        lines.append(f"B{base} formula =SUM(D{base}:J{base + 2})")
        for r, shift in enumerate(("Days", "Eves", "Nites")):
            lines.append(f"C{base + r} label {shift}")
            for c in range(7):
                lines.append(f"{col(3 + c)}{base + r} num 0")
    return "\n".join(lines) + "\n"


def _president_block(lines: list[str], name: str, base: int,
                     assignments: list[list[int]], grey: bool) -> None:
    shifts = ("Days", "Evenings", "Nights") if grey else ("Days", "Eves", "Nites")
    lines.append(f"A{base} label {name}")
    if grey:
        for i, day in enumerate(DAYS_LONG):
            lines.append(f"{col(2 + i)}{base} label {day}")
    lines.append(f"A{base + 1} label Assignments")
    for r, shift in enumerate(shifts):
        lines.append(f"B{base + 1 + r} label {shift}")
        for c, value in enumerate(assignments[r]):
            lines.append(f"{col(2 + c)}{base + 1 + r} num {value}")
    lines.append(f"J{base + 1} label " + ("Shifts/week" if grey else "#Work"))
    lines.append(f"J{base + 2} num 5")
    lines.append(f"J{base + 3} formula "
                 f"=WB(SUM(C{base + 1}:I{base + 3}),\"=\",J{base + 2})")
    if grey:
        lines.append(f"J{base + 3} fmt bg=D9D9D9")
    lines.append(f"A{base + 4} label Preferences")
    key = name.upper()
    for r, shift in enumerate(shifts):
        lines.append(f"B{base + 4 + r} label {shift}")
        for c, value in enumerate(PREFS[key][r]):
            lines.append(f"{col(2 + c)}{base + 4 + r} num {value}")
    if not grey:
        # Row-by-row products, each summed once by the objective below.
        for r in range(3):
            lines.append(f"J{base + 4 + r} formula "
                         f"=SUMPRODUCT(C{base + 1 + r}:I{base + 1 + r},"
                         f"C{base + 4 + r}:I{base + 4 + r})")
    lines.append(f"A{base + 7} label Constraints")
    for r, shift in enumerate(shifts):
        lines.append(f"B{base + 7 + r} label {shift}")
        for c in range(7):
            letter = col(2 + c)
            lines.append(f"{letter}{base + 7 + r} formula "
                         f"=WB({letter}{base + 1 + r},\"<=\",1)")
            if grey:
                lines.append(f"{letter}{base + 7 + r} fmt bg=D9D9D9")


def _requirements(lines: list[str], grey: bool, with_totals: bool) -> None:
    labels = (("Days required" if grey else "DAYS REQD:", 44, DAYS_REQD, 0),
              ("Evenings required" if grey else "EVES REQD:", 46, EVES_REQD, 1),
              ("Nights required" if grey else "NITES REQD:", 48, NITES_REQD, 2))
    for label, row, reqd, shift in labels:
        lines.append(f"A{row} label {label}")
        for c, value in enumerate(reqd):
            lines.append(f"{col(2 + c)}{row} num {value}")
        if with_totals:
            lines.append(f"J{row} formula =SUM(C{row}:I{row})")
        for c in range(7):
            letter = col(2 + c)
            terms = "+".join(f"{letter}{4 + 10 * p + shift}" for p in range(4))
            lines.append(f"{letter}{row + 1} formula "
                         f"=WB({terms},\">=\",{letter}{row})")
            if grey:
                lines.append(f"{letter}{row + 1} fmt bg=D9D9D9")


def make_v4() -> str:
    """One block per president; the requirement row totals are left dangling."""
    lines = ["# Stage 3: arranged by president; J44/J46/J48 totals have no "
             "dependents.",
             "[sheet Model]",
             "A1 label MULTIPLE SHIFT ASSIGNMENT MODEL"]
    for i, day in enumerate(DAYS_SHORT):
        lines.append(f"{col(2 + i)}2 label {day}")
    zeros = [[0] * 7 for _ in range(3)]
    for p, name in enumerate(PRESIDENTS):
        _president_block(lines, name, 3 + 10 * p, zeros, grey=False)
    _requirements(lines, grey=False, with_totals=True)
    lines.append("B51 label Preference Total:")
    products = "+".join(f"J{7 + 10 * p + r}" for p in range(4) for r in range(3))
    lines.append(f"C51 formula ={products}")
    return "\n".join(lines) + "\n"


def make_final() -> str:
    """Cleaned-up version: proper case, nested objective, formulas grey."""
    lines = ["# Final stage: single sheet, formulas carry a grey background.",
             "[sheet Model]"]
    for letter in "ABCDEFGHIJ":
        lines.append(f"col {letter} width=16")
    lines.append("A1 label Multiple shift assignment model")
    lines.append("I1 label Formulas are grey.")
    for p, name in enumerate(("Reagan", "Bush", "Ford", "Nixon")):
        _president_block(lines, name, 3 + 10 * p,
                         ASSIGN_FINAL[name.upper()], grey=True)
    _requirements(lines, grey=True, with_totals=False)
    lines.append("B51 label Preference total")
    terms = "+".join(f"SUMPRODUCT(C{4 + 10 * p}:I{6 + 10 * p},"
                     f"C{7 + 10 * p}:I{9 + 10 * p})" for p in range(4))
    lines.append(f"C51 formula ={terms}")
    lines.append("C51 fmt bg=D9D9D9")
    return "\n".join(lines) + "\n"


def make_relic() -> str:
    """Content stops at L18 but formats and allocation run out to IT22."""
    lines = ["# Relic fixture: allocated range far beyond the content.",
             "[sheet Model]",
             "[dimension IT22]",
             "col M width=10",
             "col AU width=12",
             "A1 label Quarterly inputs"]
    lines += _relic_content()
    lines += ["# Leftover formats from an earlier, wider layout.",
              "N5 fmt bg=CCCCCC",
              "T9 fmt bold",
              "AU12 fmt bg=EEEEEE"]
    return "\n".join(lines) + "\n"


def make_relic_clean() -> str:
    lines = ["# The same content with the relics removed.",
             "[sheet Model]",
             "A1 label Quarterly inputs"]
    lines += _relic_content()
    return "\n".join(lines) + "\n"


def _relic_content() -> list[str]:
    lines = []
    for i in range(1, 12):
        lines.append(f"{col(i)}2 label Q{i}")
        lines.append(f"{col(i)}3 num {i * 10}")
    lines.append("B5 formula =B3*C3")
    lines.append("C5 formula =C3+D3")
    lines.append("L18 num 42")
    return lines


def make_clean_small() -> str:
    return "\n".join([
        "[sheet Model]",
        "A1 label Revenue model",
        "A2 label Price",
        "B2 num 12.5",
        "A3 label Units",
        "B3 num 40",
        "A4 label Total",
        "B4 formula =B2*B3",
    ]) + "\n"


def make_corrupt() -> str:
    return "\n".join([
        "[sheet Model]",
        "A1 label fine so far",
        "B5 frobnicate 12",
    ]) + "\n"


def make_pmt_unfriendly() -> str:
    return "\n".join([
        "[sheet Model]",
        "A5 label Principal",
        "B5 num 100000",
        "A6 label Periods",
        "B6 num 20",
        "A7 label Payment",
        'B7 formula =PMT(0.07,B6,B5)',
    ]) + "\n"


def make_pmt_friendly() -> str:
    return "\n".join([
        "[sheet Model]",
        "A5 label Interest rate",
        "B5 num 0.07",
        "A6 label Periods",
        "B6 num 20",
        "A7 label Principal",
        "B7 num 100000",
        "A8 label Payment",
        "B8 formula =PMT(B5,B6,B7)",
    ]) + "\n"


FILES = {
    "assign_v1.wb": make_v1,
    "assign_v2.wb": make_v2,
    "assign_v4.wb": make_v4,
    "assign_final.wb": make_final,
    "relic_v1.wb": make_relic,
    "relic_clean.wb": make_relic_clean,
    "clean_small.wb": make_clean_small,
    "corrupt.wb": make_corrupt,
    "pmt_unfriendly.wb": make_pmt_unfriendly,
    "pmt_friendly.wb": make_pmt_friendly,
}


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    for name, maker in FILES.items():
        path = FIXTURES / name
        path.write_text(maker(), encoding="utf-8")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
