"""Generators and independent oracles shared across the test suite."""

from __future__ import annotations

import random
import re
import zipfile
from decimal import Decimal
from pathlib import Path

from sheetlint.formula import (
    BinaryOp,
    CellRef,
    FunctionCall,
    NumberLit,
    Paren,
    RangeRef,
    StringLit,
    UnaryOp,
    parse_formula,
)
from sheetlint.model import CellAddress, CellContent, Workbook, col_letters

# --- random AST generation -------------------------------------------------------

_FUNCS = ("SUM", "MIN", "MAX")


def _leaf(rng: random.Random) -> object:
    if rng.random() < 0.5:
        if rng.random() < 0.5:
            n = rng.randint(0, 99)
            return NumberLit(Decimal(n), str(n))
        text = f"{rng.randint(0, 99)}.{rng.randint(1, 99):02d}"
        return NumberLit(Decimal(text), text)
    return CellRef(rng.randint(1, 5), rng.randint(1, 5))


def gen_ast(rng: random.Random, depth: int = 3, text_ops: bool = False) -> object:
    """A random AST over cells A1:E5.

    The default subset is numeric-evaluable; ``text_ops`` mixes in string
    literals, concatenation and comparisons, for printer round-trip tests
    only.
    """
    if depth <= 0:
        return _leaf(rng)
    roll = rng.random()
    if text_ops and roll < 0.10:
        inner = rng.random()
        if inner < 0.4:
            return StringLit(rng.choice(('>=', 'a "quoted" bit', "plain", "")))
        if inner < 0.7:
            return BinaryOp("&", gen_ast(rng, depth - 1, text_ops),
                            gen_ast(rng, depth - 1, text_ops))
        return BinaryOp(rng.choice(("<", ">", "<=", ">=", "=", "<>")),
                        gen_ast(rng, depth - 1, text_ops),
                        gen_ast(rng, depth - 1, text_ops))
    if roll < 0.18:
        return _leaf(rng)
    if roll < 0.30:
        op = rng.choice(("-", "+"))
        return UnaryOp(op, gen_ast(rng, depth - 1))
    if roll < 0.34:
        return UnaryOp("%", gen_ast(rng, depth - 1))
    if roll < 0.42:
        return Paren(gen_ast(rng, depth - 1), explicit=True)
    if roll < 0.50:
        # keep exponents tiny integers so evaluation stays in-domain
        power = rng.randint(0, 3)
        exponent = NumberLit(Decimal(power), str(power))
        return BinaryOp("^", gen_ast(rng, depth - 1), exponent)
    if roll < 0.60:
        name = rng.choice(_FUNCS)
        if rng.random() < 0.5:
            r1, c1 = rng.randint(1, 4), rng.randint(1, 4)
            r2, c2 = rng.randint(r1, 5), rng.randint(c1, 5)
            return FunctionCall(name, (RangeRef(CellRef(r1, c1), CellRef(r2, c2)),))
        args = tuple(gen_ast(rng, depth - 1)
                     for _ in range(rng.randint(1, 3)))
        return FunctionCall(name, args)
    if roll < 0.66:
        return FunctionCall("IF", (
            BinaryOp(rng.choice(("<", ">", "<=", ">=", "=", "<>")),
                     gen_ast(rng, depth - 1), gen_ast(rng, depth - 1)),
            gen_ast(rng, depth - 1), gen_ast(rng, depth - 1)))
    op = rng.choice(("+", "-", "*", "*", "/"))
    return BinaryOp(op, gen_ast(rng, depth - 1), gen_ast(rng, depth - 1))


def gen_env(rng: random.Random, cells: list[CellAddress]) -> dict[CellAddress, float]:
    env = {}
    for addr in cells:
        while True:
            v = rng.uniform(-10, 10)
            if abs(v) >= 1e-3:
                env[addr] = v
                break
    return env


# --- random workbooks with ground-truth arcs ----------------------------------

def gen_workbook(rng: random.Random, max_rows: int = 10, max_cols: int = 10,
                 max_formulas: int = 30):
    """A small single-sheet workbook plus the exact arc set it was built from."""
    wb = Workbook()
    sheet = wb.add_sheet("S")
    rows = rng.randint(3, max_rows)
    cols = rng.randint(3, max_cols)
    positions = [(r, c) for r in range(1, rows + 1) for c in range(1, cols + 1)]
    rng.shuffle(positions)

    n_constants = rng.randint(3, max(3, len(positions) // 3))
    constants = positions[:n_constants]
    for row, col in constants:
        sheet.set_cell(row, col, CellContent.of_number(rng.randint(1, 9)))
    cursor = n_constants

    truth: set[tuple[CellAddress, CellAddress]] = set()
    n_formulas = rng.randint(1, max_formulas)
    for _ in range(n_formulas):
        if cursor >= len(positions):
            break
        row, col = positions[cursor]
        cursor += 1
        host = CellAddress("S", row, col)
        kind = rng.random()
        if kind < 0.15:
            # bare pointer (spurious shape); may even point at a blank cell
            target = (rng.choice(constants) if rng.random() < 0.8
                      else (rng.randint(1, rows), rng.randint(1, cols)))
            if target == (row, col):
                continue
            text = f"={col_letters(target[1])}{target[0]}"
            truth.add((CellAddress("S", *target), host))
        elif kind < 0.35:
            r1 = rng.randint(1, rows - 1)
            c1 = rng.randint(1, cols - 1)
            r2 = rng.randint(r1, min(rows, r1 + 3))
            c2 = rng.randint(c1, min(cols, c1 + 3))
            text = f"=SUM({col_letters(c1)}{r1}:{col_letters(c2)}{r2})"
            for r in range(r1, r2 + 1):
                for c in range(c1, c2 + 1):
                    truth.add((CellAddress("S", r, c), host))
        else:
            n_refs = rng.randint(1, 4)
            targets = []
            for _ in range(n_refs):
                if rng.random() < 0.85 and constants:
                    targets.append(rng.choice(constants))
                else:
                    targets.append((rng.randint(1, rows), rng.randint(1, cols)))
            targets = [t for t in targets if t != (row, col)]
            if not targets:
                continue
            text = "=" + "+".join(f"{col_letters(c)}{r}" for r, c in targets)
            for r, c in targets:
                truth.add((CellAddress("S", r, c), host))
        sheet.set_cell(row, col, CellContent.formula(text, parse_formula(text)))
    return wb, truth


def gen_topological_workbook(rng: random.Random, rows: int = 8, cols: int = 8):
    """Formulas reference only strictly-earlier cells in row-major order."""
    wb = Workbook()
    sheet = wb.add_sheet("S")
    placed: list[tuple[int, int]] = []
    for row in range(1, rows + 1):
        for col in range(1, cols + 1):
            roll = rng.random()
            if roll < 0.55:
                continue
            if roll < 0.8 or not placed:
                sheet.set_cell(row, col, CellContent.of_number(rng.randint(1, 9)))
            else:
                n_refs = rng.randint(1, min(3, len(placed)))
                targets = rng.sample(placed, n_refs)
                text = "=" + "*".join(f"{col_letters(c)}{r}" for r, c in targets)
                sheet.set_cell(row, col,
                               CellContent.formula(text, parse_formula(text)))
            placed.append((row, col))
    return wb


# --- independent classification oracle ------------------------------------------

_REF_RE = re.compile(r"([A-Z]{1,3})([0-9]+)(?::([A-Z]{1,3})([0-9]+))?")
_BARE_RE = re.compile(r"=[A-Z]{1,3}[0-9]+$")


def _scan_refs(text: str) -> list[tuple[int, int]]:
    out = []
    for m in _REF_RE.finditer(text):
        c1, r1 = m.group(1), int(m.group(2))
        if m.group(3) is None:
            out.append((r1, _col_num(c1)))
        else:
            c2, r2 = m.group(3), int(m.group(4))
            for r in range(min(r1, r2), max(r1, r2) + 1):
                for c in range(min(_col_num(c1), _col_num(c2)),
                               max(_col_num(c1), _col_num(c2)) + 1):
                    out.append((r, c))
    return out


def _col_num(letters: str) -> int:
    n = 0
    for ch in letters:
        n = n * 26 + ord(ch) - ord("A") + 1
    return n


def brute_force_classify(workbook: Workbook, coverage: float = 0.5):
    """Re-derive spurious/dangling/perverse flags by a linear text scan.

    Completely separate from the parser and graph: references are pulled out
    of the formula text with a regex, the bottom-line heuristic is recomputed
    with a plain breadth-first walk.
    """
    sheet = workbook.sheets[0]
    populated = {}
    formulas = {}
    for (row, col), cell in sheet.cells.items():
        if cell.content.is_empty:
            continue
        populated[(row, col)] = cell.content.kind.value
        if cell.content.kind.value == "formula":
            formulas[(row, col)] = cell.content.formula_text or ""

    precedents = {pos: _scan_refs(text) for pos, text in formulas.items()}
    dependents: dict[tuple[int, int], set[tuple[int, int]]] = {}
    for pos, refs in precedents.items():
        for ref in refs:
            dependents.setdefault(ref, set()).add(pos)

    numeric = set(formulas)
    for pos, kind in populated.items():
        if kind == "number" and dependents.get(pos):
            numeric.add(pos)

    def reachable_from(pos):
        seen = {pos}
        frontier = [pos]
        while frontier:
            current = frontier.pop()
            for p in precedents.get(current, []):
                if p not in seen:
                    seen.add(p)
                    frontier.append(p)
        return seen

    bottom = set()
    for pos in formulas:
        if dependents.get(pos):
            continue
        if numeric and len(reachable_from(pos) & numeric) / len(numeric) >= coverage:
            bottom.add(pos)

    flags = {}
    for pos, text in formulas.items():
        spurious = (_BARE_RE.match(text) is not None
                    and _scan_refs(text)[0] != pos)
        dangling = not dependents.get(pos) and pos not in bottom
        flags[pos] = {"spurious": spurious, "dangling": dangling}
    perverse = {ref for refs in precedents.values() for ref in refs
                if ref not in populated}
    return flags, perverse


# --- minimal xlsx writer ---------------------------------------------------------

_CT = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">
<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>
<Default Extension="xml" ContentType="application/xml"/>
<Override PartName="/xl/workbook.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/>
{overrides}
</Types>"""

_ROOT_RELS = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">
<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" Target="xl/workbook.xml"/>
</Relationships>"""

_STYLES = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<styleSheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main">
<fonts count="2"><font><sz val="11"/><name val="Calibri"/></font>
<font><sz val="14"/><b/><name val="Calibri"/></font></fonts>
<fills count="3"><fill><patternFill patternType="none"/></fill>
<fill><patternFill patternType="gray125"/></fill>
<fill><patternFill patternType="solid"><fgColor rgb="FFD9D9D9"/></patternFill></fill></fills>
<borders count="1"><border><left/><right/><top/><bottom/><diagonal/></border></borders>
<cellXfs count="4">
<xf numFmtId="0" fontId="0" fillId="0" borderId="0"/>
<xf numFmtId="0" fontId="0" fillId="2" borderId="0" applyFill="1"/>
<xf numFmtId="0" fontId="1" fillId="0" borderId="0" applyFont="1"/>
<xf numFmtId="0" fontId="0" fillId="0" borderId="0" applyProtection="1"><protection hidden="1" locked="1"/></xf>
</cellXfs>
</styleSheet>"""

# style ids the writer exposes
XLSX_STYLE_DEFAULT = 0
XLSX_STYLE_GREY = 1
XLSX_STYLE_BIGFONT = 2
XLSX_STYLE_HIDDEN = 3


def build_xlsx(path: Path, sheets: dict[str, dict[str, dict]],
               defined_names: dict[str, str] | None = None,
               dimensions: dict[str, str] | None = None,
               col_widths: dict[str, dict[int, float]] | None = None,
               hidden_sheets: tuple[str, ...] = ()) -> Path:
    """Write a minimal xlsx. Cell specs: {"n": "5"} number, {"f": "A1*2"}
    formula, {"s": "text"} shared string, {"b": "1"} bool, {"e": "#REF!"}
    error, plus optional {"style": id}. {"style": id} alone makes a
    format-only cell."""
    defined_names = defined_names or {}
    dimensions = dimensions or {}
    col_widths = col_widths or {}
    strings: list[str] = []

    def sindex(text: str) -> int:
        if text not in strings:
            strings.append(text)
        return strings.index(text)

    sheet_xml = {}
    for name, cells in sheets.items():
        rows: dict[int, list[str]] = {}
        for ref, spec in cells.items():
            row = int(re.sub(r"[A-Z$]", "", ref))
            style = spec.get("style", 0)
            attrs = f' s="{style}"' if style else ""
            if "fs" in spec:  # shared formula: (si, text or None, ref or None)
                si, ftext, ref_range = spec["fs"]
                fattrs = f' t="shared" si="{si}"'
                if ref_range:
                    fattrs += f' ref="{ref_range}"'
                body = f"<f{fattrs}>{ftext}</f>" if ftext else f"<f{fattrs}/>"
                cell = f'<c r="{ref}"{attrs}>{body}</c>'
            elif "f" in spec:
                body = f"<f>{spec['f']}</f>"
                cell = f'<c r="{ref}"{attrs}>{body}</c>'
            elif "n" in spec:
                cell = f'<c r="{ref}"{attrs}><v>{spec["n"]}</v></c>'
            elif "s" in spec:
                cell = f'<c r="{ref}" t="s"{attrs}><v>{sindex(spec["s"])}</v></c>'
            elif "b" in spec:
                cell = f'<c r="{ref}" t="b"{attrs}><v>{spec["b"]}</v></c>'
            elif "e" in spec:
                cell = f'<c r="{ref}" t="e"{attrs}><v>{spec["e"]}</v></c>'
            else:
                cell = f'<c r="{ref}"{attrs}/>'
            rows.setdefault(row, []).append(cell)
        body = "".join(f'<row r="{r}">{"".join(cells)}</row>'
                       for r, cells in sorted(rows.items()))
        dim = dimensions.get(name)
        dim_el = f'<dimension ref="{dim}"/>' if dim else ""
        cols_el = ""
        if name in col_widths:
            entries = "".join(
                f'<col min="{c}" max="{c}" width="{w}" customWidth="1"/>'
                for c, w in sorted(col_widths[name].items()))
            cols_el = f"<cols>{entries}</cols>"
        sheet_xml[name] = (
            '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
            '<worksheet xmlns="http://schemas.openxmlformats.org/'
            f'spreadsheetml/2006/main">{dim_el}{cols_el}'
            f"<sheetData>{body}</sheetData></worksheet>")

    names_el = ""
    if defined_names:
        entries = "".join(f'<definedName name="{n}">{ref}</definedName>'
                          for n, ref in defined_names.items())
        names_el = f"<definedNames>{entries}</definedNames>"
    sheet_entries = []
    rel_entries = []
    for i, name in enumerate(sheets, start=1):
        state = ' state="hidden"' if name in hidden_sheets else ""
        sheet_entries.append(
            f'<sheet name="{name}" sheetId="{i}"{state} r:id="rId{i}"/>')
        rel_entries.append(
            f'<Relationship Id="rId{i}" Type="http://schemas.openxmlformats.org/'
            f'officeDocument/2006/relationships/worksheet" '
            f'Target="worksheets/sheet{i}.xml"/>')
    workbook_xml = (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        '<workbook xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main" '
        'xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships">'
        f'<sheets>{"".join(sheet_entries)}</sheets>{names_el}</workbook>')
    workbook_rels = (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        '<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/'
        f'relationships">{"".join(rel_entries)}</Relationships>')

    overrides = "\n".join(
        f'<Override PartName="/xl/worksheets/sheet{i}.xml" ContentType='
        '"application/vnd.openxmlformats-officedocument.spreadsheetml.'
        'worksheet+xml"/>'
        for i in range(1, len(sheets) + 1))
    if strings:
        overrides += ('\n<Override PartName="/xl/sharedStrings.xml" ContentType='
                      '"application/vnd.openxmlformats-officedocument.'
                      'spreadsheetml.sharedStrings+xml"/>')

    with zipfile.ZipFile(path, "w") as zf:
        zf.writestr("[Content_Types].xml", _CT.format(overrides=overrides))
        zf.writestr("_rels/.rels", _ROOT_RELS)
        zf.writestr("xl/workbook.xml", workbook_xml)
        zf.writestr("xl/_rels/workbook.xml.rels", workbook_rels)
        zf.writestr("xl/styles.xml", _STYLES)
        if strings:
            entries = "".join(f"<si><t>{s}</t></si>" for s in strings)
            zf.writestr("xl/sharedStrings.xml",
                        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
                        '<sst xmlns="http://schemas.openxmlformats.org/'
                        f'spreadsheetml/2006/main">{entries}</sst>')
        for i, name in enumerate(sheets, start=1):
            zf.writestr(f"xl/worksheets/sheet{i}.xml", sheet_xml[name])
    return path


# --- DOT syntax oracle -----------------------------------------------------------

_EDGE_RE = re.compile(r'^\s*"[A-Za-z0-9_]+" -> "[A-Za-z0-9_]+"( \[[^\]]*\])?;$')
_NODE_RE = re.compile(r'^\s*"[A-Za-z0-9_]+" \[[^\]]*\];$')


def assert_valid_dot(text: str) -> None:
    lines = text.strip().splitlines()
    assert lines[0].startswith("digraph "), "missing digraph header"
    assert lines[0].endswith("{")
    assert lines[-1] == "}", "unbalanced braces"
    for line in lines[1:-1]:
        assert _EDGE_RE.match(line) or _NODE_RE.match(line), f"bad DOT line: {line!r}"
