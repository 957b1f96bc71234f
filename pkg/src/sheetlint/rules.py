"""The rule catalog (R01-R25), diagnostic records and the readability score."""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import ALL_RULE_IDS, AuditConfig, Severity
from .formula import (
    BinaryOp,
    FunctionCall,
    NumberLit,
    RangeRef,
    StringLit,
    extract_references,
    iter_nodes,
    strip_parens,
)
from .graph import (
    CellGraphClass,
    DependencyGraph,
    arc_chebyshev,
    classify_graph,
    find_cycles,
    is_backward,
)
from .layout import SheetLayout, Stacking
from .model import (
    CellAddress,
    CellKind,
    NumericCellClass,
    Workbook,
    classify_cells,
    col_letters,
    parse_a1,
)
from .simplify import NestCandidate, RewriteSuggestion


class EmptyWorkbookError(ValueError):
    """No numeric cells: the readability score is undefined."""


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    severity: Severity
    sheet: str | None
    cell: CellAddress | None
    message: str
    related: tuple[CellAddress, ...] = ()
    suggestion: RewriteSuggestion | None = None
    guideline: str | None = None

    def location(self) -> str:
        if self.cell is not None:
            return self.cell.qualified()
        if self.sheet:
            return self.sheet
        return "(workbook)"


@dataclass(frozen=True)
class SkippedRule:
    rule: str
    sheet: str | None
    reason: str


@dataclass
class SimplifierResults:
    suggestions: dict[CellAddress, RewriteSuggestion] = field(default_factory=dict)
    nest: list[NestCandidate] = field(default_factory=list)


@dataclass(frozen=True)
class RuleInfo:
    rule: str
    severity: Severity
    guideline: str
    needs_format_data: bool = False


CATALOG: dict[str, RuleInfo] = {r.rule: r for r in (
    RuleInfo("R01", Severity.ERROR,
             "Arrange cells so each formula depends only on cells above it, "
             "or on its own row to the left."),
    RuleInfo("R02", Severity.WARNING,
             "Keep precedence arcs short: put a cell near the cells it uses."),
    RuleInfo("R03", Severity.ERROR,
             "Keep a model on one sheet where it fits; cross-sheet references "
             "defeat visual auditing."),
    RuleInfo("R04", Severity.WARNING,
             "A cell that merely points at another cell is redundant; use the "
             "original directly."),
    RuleInfo("R05", Severity.WARNING,
             "Erase calculations nothing depends on, other than the bottom line."),
    RuleInfo("R06", Severity.ERROR,
             "Formulas should never depend on blank cells."),
    RuleInfo("R07", Severity.WARNING,
             "Give a numeric constant its own cell instead of burying it in a "
             "formula."),
    RuleInfo("R08", Severity.WARNING,
             "Delete leftover formatting and allocation beyond the real content."),
    RuleInfo("R09", Severity.ERROR,
             "Break circular references; no reading order can explain them."),
    RuleInfo("R10", Severity.WARNING,
             "Expose content: hidden cells are dependents the reader cannot see."),
    RuleInfo("R11", Severity.WARNING,
             "Format for description, not decoration: one font size, few colors.",
             needs_format_data=True),
    RuleInfo("R12", Severity.WARNING,
             "Give constants and formulas visibly different formats.",
             needs_format_data=True),
    RuleInfo("R13", Severity.WARNING,
             "Write labels in proper case; all-capitals text is harder to read."),
    RuleInfo("R14", Severity.WARNING,
             "Do not position a label with leading spaces; put it in the right "
             "cell."),
    RuleInfo("R15", Severity.WARNING,
             "Keep a label inside its own cell; overlap hides where data lives.",
             needs_format_data=True),
    RuleInfo("R16", Severity.WARNING,
             "Give columns about the same width, except a label column A.",
             needs_format_data=True),
    RuleInfo("R17", Severity.WARNING,
             "Stack blocks vertically or horizontally, not both."),
    RuleInfo("R18", Severity.WARNING,
             "Design formula runs to be copies of one another."),
    RuleInfo("R19", Severity.INFO,
             "A formula with a single dependent can be nested into it and erased."),
    RuleInfo("R20", Severity.INFO,
             "Use the fewest characters that write the formula correctly."),
    RuleInfo("R21", Severity.WARNING,
             "Use constant text for documentation, not formulas that build labels."),
    RuleInfo("R22", Severity.WARNING,
             "Use a minimum of blank space, just enough to divide blocks."),
    RuleInfo("R23", Severity.INFO,
             "Prefer formulas that reference only constants."),
    RuleInfo("R24", Severity.INFO,
             "Order references in a formula the way the sheet reads."),
    RuleInfo("R25", Severity.INFO,
             "Consider putting the whole model on one sheet."),
)}

assert tuple(CATALOG) == ALL_RULE_IDS


def run_rules(workbook: Workbook, graph: DependencyGraph,
              layouts: dict[str, SheetLayout], simp: SimplifierResults,
              config: AuditConfig) -> tuple[list[Diagnostic], list[SkippedRule]]:
    """Evaluate every enabled rule; diagnostics come back deterministically ordered.

    Rules never abort the run: a rule that cannot execute on a sheet (no
    format data, for instance) contributes a skipped-rule notice instead.
    """
    ctx = _Context(workbook, graph, layouts, simp, config)
    diagnostics: list[Diagnostic] = []
    skipped: list[SkippedRule] = []
    for rule_id, impl in _RULE_IMPLS.items():
        if rule_id not in config.enabled_rules:
            continue
        info = CATALOG[rule_id]
        if info.needs_format_data:
            runnable_sheets = []
            for sheet in workbook.sheets:
                if sheet.has_format_data():
                    runnable_sheets.append(sheet)
                else:
                    skipped.append(SkippedRule(rule_id, sheet.name,
                                               "no format data in this sheet"))
            if not runnable_sheets:
                continue
            diagnostics.extend(impl(ctx, runnable_sheets))
        else:
            diagnostics.extend(impl(ctx, workbook.sheets))
    diagnostics.sort(key=lambda d: (
        ctx.sheet_index(d.sheet), d.cell.row if d.cell else 0,
        d.cell.col if d.cell else 0, d.rule, d.message))
    return diagnostics, skipped


class _Context:
    def __init__(self, workbook: Workbook, graph: DependencyGraph,
                 layouts: dict[str, SheetLayout], simp: SimplifierResults,
                 config: AuditConfig) -> None:
        self.workbook = workbook
        self.graph = graph
        self.layouts = layouts
        self.simp = simp
        self.config = config
        self.classes: dict[CellAddress, CellGraphClass] = classify_graph(graph, config)
        self.cell_classes: dict[CellAddress, NumericCellClass] = (
            classify_cells(workbook, graph))
        self.cycles = find_cycles(graph)
        self.on_cycle = {addr for cycle in self.cycles for addr in cycle}
        self.flow_exempt = set()
        for entry in config.flow_exempt:
            addr = parse_a1(entry)
            if addr.sheet:
                self.flow_exempt.add(addr)
            else:
                for sheet in workbook.sheets:
                    self.flow_exempt.add(CellAddress(sheet.name, addr.row, addr.col))

    def sheet_index(self, name: str | None) -> int:
        if name is None:
            return -1
        return self.graph.sheet_index(name)

    def emit(self, rule: str, sheet: str | None, cell: CellAddress | None,
             message: str, related: tuple[CellAddress, ...] = (),
             suggestion: RewriteSuggestion | None = None) -> Diagnostic:
        info = CATALOG[rule]
        return Diagnostic(
            rule=rule,
            severity=self.config.severity_for(rule, info.severity),
            sheet=sheet,
            cell=cell,
            message=message,
            related=related,
            suggestion=suggestion,
            guideline=info.guideline,
        )

    def formula_cells_with_ast(self):
        for sheet in self.workbook.sheets:
            for addr, cell in sheet.populated():
                if (cell.content.kind is CellKind.FORMULA
                        and cell.content.ast is not None):
                    yield sheet, addr, cell.content.ast

    def grouped_precedents(self, dependent: CellAddress):
        """Precedents grouped by originating range so messages stay readable."""
        groups: dict[str | None, list[CellAddress]] = {}
        for p in self.graph.precedents_of(dependent):
            origin = self.graph.range_origin.get((p, dependent))
            groups.setdefault(origin, []).append(p)
        return groups


def _addr_list(cells, limit: int = 4) -> str:
    shown = [c.qualified() for c in cells[:limit]]
    extra = len(cells) - len(shown)
    return ", ".join(shown) + (f" and {extra} more" if extra > 0 else "")


# --- flow and graph rules ------------------------------------------------------

def _r01_backward(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for addr in ctx.graph.formula_cells():
        if addr in ctx.flow_exempt or addr in ctx.on_cycle:
            continue
        offenders: list[CellAddress] = []
        origins: set[str] = set()
        for origin, precedents in ctx.grouped_precedents(addr).items():
            bad = [p for p in precedents
                   if p != addr and is_backward(p, addr) and p not in ctx.on_cycle]
            if not bad:
                continue
            if origin is not None:
                origins.add(origin)
                offenders.append(min(bad, key=ctx.graph.addr_key))
            else:
                offenders.extend(bad)
        if not offenders:
            continue
        offenders = sorted(set(offenders), key=ctx.graph.addr_key)
        via = f" (via {', '.join(sorted(origins))})" if origins else ""
        out.append(ctx.emit(
            "R01", addr.sheet, addr,
            f"backward reference: depends on {_addr_list(offenders)}"
            f"{via}, later in reading order",
            related=tuple(offenders)))
    return out


def _r02_long_arc(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    limit = ctx.config.long_arc_distance
    for addr in ctx.graph.formula_cells():
        worst: tuple[int, CellAddress] | None = None
        for p in ctx.graph.precedents_of(addr):
            d = arc_chebyshev(p, addr)
            if d is None or d <= limit:
                continue
            if worst is None or d > worst[0]:
                worst = (d, p)
        if worst is None:
            continue
        distance, p = worst
        origin = ctx.graph.range_origin.get((p, addr))
        source = origin if origin else p.qualified()
        out.append(ctx.emit(
            "R02", addr.sheet, addr,
            f"long precedence arc: {source} is {distance} cells away "
            f"(limit {limit})",
            related=(p,)))
    return out


def _r03_cross_sheet(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for addr in ctx.graph.formula_cells():
        offenders = sorted(
            {p for p in ctx.graph.precedents_of(addr)
             if p.sheet.lower() != addr.sheet.lower()},
            key=ctx.graph.addr_key)
        if offenders:
            out.append(ctx.emit(
                "R03", addr.sheet, addr,
                f"cross-sheet reference: depends on {_addr_list(offenders)}",
                related=tuple(offenders)))
    return out


def _r04_spurious(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for addr, cls in ctx.classes.items():
        if not cls.spurious:
            continue
        target = ctx.graph.nodes[addr].bare_ref
        assert target is not None
        out.append(ctx.emit(
            "R04", addr.sheet, addr,
            f"spurious cell: bare reference to {target.qualified()}",
            related=(target,)))
    return out


_DANGLING_NOTES = {
    "unused-input": "unused input: no live formula ever uses this constant",
    "intermediate": "formula has no dependents",
    "interpreted-output": "interprets another cell's result as display text",
}


def _r05_dangling(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for addr, cls in ctx.classes.items():
        if not cls.dangling:
            continue
        note = _DANGLING_NOTES.get(cls.dangling_kind or "intermediate")
        out.append(ctx.emit(
            "R05", addr.sheet, addr,
            f"dangling cell ({cls.dangling_kind}): {note}"))
    return out


def _r06_perverse(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for addr in ctx.graph.formula_cells():
        blanks: list[CellAddress] = []
        for origin, precedents in ctx.grouped_precedents(addr).items():
            blank = [p for p in precedents
                     if p in ctx.graph.nodes and ctx.graph.nodes[p].blank]
            if not blank:
                continue
            if origin is not None and len(blank) < len(precedents):
                continue  # a partially blank range is conventional, not perverse
            blanks.extend(blank)
        if blanks:
            blanks = sorted(set(blanks), key=ctx.graph.addr_key)
            out.append(ctx.emit(
                "R06", addr.sheet, addr,
                f"perverse reference: depends on blank {_addr_list(blanks)}",
                related=tuple(blanks)))
        for problem in ctx.graph.unresolved.get(addr, ()):
            out.append(ctx.emit(
                "R06", addr.sheet, addr,
                f"unresolvable reference: {problem}"))
    return out


def _r07_constants(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    allow = ctx.config.constant_allowlist
    for sheet, addr, ast in ctx.formula_cells_with_ast():
        if not extract_references(ast):
            continue
        literals = [n for n in iter_nodes(ast)
                    if isinstance(n, NumberLit) and n.value not in allow]
        if not literals:
            continue
        shown = ", ".join(lit.text for lit in literals[:4])
        out.append(ctx.emit(
            "R07", addr.sheet, addr,
            f"constant {shown} embedded in formula; move it to its own cell"))
    return out


def _r08_relics(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for sheet in sheets:
        layout = ctx.layouts[sheet.name]
        scan = layout.relics
        if scan.relic_area == 0 and not scan.extent_gap:
            continue
        content = scan.content_extent.a1() if scan.content_extent else "(empty)"
        declared = scan.declared_extent.a1() if scan.declared_extent else "(none)"
        parts = [f"content ends at {content} but the allocated range extends "
                 f"to {declared}"]
        if scan.relic_cells:
            parts.append(f"{len(scan.relic_cells)} format-only cell(s) e.g. "
                         f"{_addr_list(scan.relic_cells, 3)}")
        if scan.relic_columns:
            cols = ", ".join(col_letters(c) for c in scan.relic_columns[:4])
            parts.append(f"empty formatted column(s) {cols}")
        if scan.relic_rows:
            rows = ", ".join(str(r) for r in scan.relic_rows[:4])
            parts.append(f"empty formatted row(s) {rows}")
        out.append(ctx.emit(
            "R08", sheet.name, None,
            "relic extent: " + "; ".join(parts),
            related=tuple(scan.relic_cells[:8])))
    return out


def _r09_cycles(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for cycle in ctx.cycles:
        path = " -> ".join(c.qualified() for c in cycle + [cycle[0]])
        out.append(ctx.emit(
            "R09", cycle[0].sheet, cycle[0],
            f"circular reference: {path}",
            related=tuple(cycle)))
    return out


# --- format rules ----------------------------------------------------------------

def _r10_hidden(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for sheet in ctx.workbook.sheets:
        populated = list(sheet.populated())
        if sheet.hidden and populated:
            out.append(ctx.emit(
                "R10", sheet.name, None,
                f"hidden sheet bearing {len(populated)} populated cell(s)"))
        for addr, cell in populated:
            if cell.fmt.hidden:
                locked = " and locked" if cell.fmt.locked else ""
                out.append(ctx.emit(
                    "R10", sheet.name, addr,
                    f"hidden{locked} cell bearing content"))
        hidden_cols = {col for col, width in sheet.column_widths.items()
                       if width == 0}
        hidden_rows = {row for row, height in sheet.row_heights.items()
                       if height == 0}
        for addr, _ in populated:
            if addr.col in hidden_cols:
                out.append(ctx.emit(
                    "R10", sheet.name, addr,
                    f"content in hidden column {col_letters(addr.col)}"))
            if addr.row in hidden_rows:
                out.append(ctx.emit(
                    "R10", sheet.name, addr,
                    f"content in hidden row {addr.row}"))
    return out


_DEFAULT_FONT_SIZE = 11.0


def _r11_decoration(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for sheet in sheets:
        sizes = set()
        colors = set()
        for _, cell in sheet.populated():
            sizes.add(cell.fmt.font_size or _DEFAULT_FONT_SIZE)
            if cell.fmt.font_color:
                colors.add(cell.fmt.font_color)
            if cell.fmt.background_color:
                colors.add(cell.fmt.background_color)
        if len(sizes) > ctx.config.max_font_sizes:
            listed = ", ".join(f"{s:g}" for s in sorted(sizes))
            out.append(ctx.emit(
                "R11", sheet.name, None,
                f"{len(sizes)} font sizes in use ({listed}); "
                f"limit is {ctx.config.max_font_sizes}"))
        if len(colors) > ctx.config.max_colors:
            out.append(ctx.emit(
                "R11", sheet.name, None,
                f"{len(colors)} colors in use; limit is {ctx.config.max_colors}"))
    return out


def _r12_indistinct(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for sheet in sheets:
        constants = []
        formulas = []
        for addr, cell in sheet.populated():
            cls = ctx.cell_classes.get(addr)
            if cls is NumericCellClass.NUMERIC_FORMULA:
                formulas.append(cell.fmt)
            elif cls is NumericCellClass.NUMERIC_CONSTANT:
                constants.append(cell.fmt)
        if not constants or not formulas:
            continue
        separated = False
        for attr in ("background_color", "bold", "border", "font_color", "italic"):
            const_values = {getattr(f, attr) for f in constants}
            formula_values = {getattr(f, attr) for f in formulas}
            if not (const_values & formula_values):
                separated = True
                break
        if not separated:
            out.append(ctx.emit(
                "R12", sheet.name, None,
                "constants and formulas share identical formatting; no "
                "attribute tells them apart"))
    return out


def _r13_all_caps(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    min_len = ctx.config.all_caps_min_len
    for sheet in ctx.workbook.sheets:
        for addr, cell in sheet.populated():
            if cell.content.kind is not CellKind.LABEL or cell.content.text is None:
                continue
            letters = [ch for ch in cell.content.text if ch.isalpha()]
            if len(letters) >= min_len and all(ch.isupper() for ch in letters):
                out.append(ctx.emit(
                    "R13", sheet.name, addr,
                    f"all-caps label {cell.content.text.strip()!r}"))
    return out


def _r14_leading_space(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for sheet in ctx.workbook.sheets:
        for addr, cell in sheet.populated():
            if cell.content.kind is not CellKind.LABEL or cell.content.text is None:
                continue
            text = cell.content.text
            if text and text[0] == " " and text.strip():
                pad = len(text) - len(text.lstrip(" "))
                out.append(ctx.emit(
                    "R14", sheet.name, addr,
                    f"label positioned with {pad} leading space(s); move it to "
                    f"the right cell instead"))
    return out


def _r15_overlap(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for sheet in sheets:
        for spill in ctx.layouts[sheet.name].overflows:
            out.append(ctx.emit(
                "R15", sheet.name, spill.cell,
                f"label of ~{spill.text_width} characters overflows column "
                f"width {spill.column_width:g} onto {spill.neighbour_state} "
                f"neighbour {spill.neighbour.a1()}",
                related=(spill.neighbour,)))
    return out


def _r16_widths(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for sheet in sheets:
        widths = {col: w for col, w in sheet.column_widths.items()
                  if col > 1 and w > 0}
        if len(widths) < 2:
            continue
        low, high = min(widths.values()), max(widths.values())
        if high - low > ctx.config.width_tolerance:
            out.append(ctx.emit(
                "R16", sheet.name, None,
                f"column widths vary from {low:g} to {high:g} outside column A "
                f"(tolerance {ctx.config.width_tolerance:g})"))
    return out


# --- layout rules ----------------------------------------------------------------

def _r17_bulletin(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for sheet in ctx.workbook.sheets:
        report = ctx.layouts[sheet.name].stacking
        if report.stacking is not Stacking.BULLETIN_BOARD:
            continue
        pair = report.offending_pairs[0] if report.offending_pairs else None
        detail = ""
        if pair:
            detail = (f": blocks {pair[0].box_a1()} and {pair[1].box_a1()} "
                      f"align neither by row nor by column")
        out.append(ctx.emit(
            "R17", sheet.name, None,
            f"bulletin-board layout{detail}"))
    return out


def _r18_copy_breaks(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for sheet in ctx.workbook.sheets:
        for run in ctx.layouts[sheet.name].copy_runs:
            if not run.breaks:
                continue
            first, last = run.cells[0], run.cells[-1]
            out.append(ctx.emit(
                "R18", sheet.name, run.breaks[0],
                f"formula breaks the copy pattern of {first.a1()}:{last.a1()} "
                f"({len(run.breaks)} of {len(run.cells)} differ)",
                related=tuple(run.breaks)))
    return out


def _r19_inline(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for cand in ctx.simp.nest:
        out.append(ctx.emit(
            "R19", cand.source.sheet, cand.source,
            f"single-dependent formula could be nested into "
            f"{cand.target.qualified()} and erased",
            related=(cand.target,)))
    return out


def _r20_simplifiable(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for addr in sorted(ctx.simp.suggestions, key=ctx.graph.addr_key):
        suggestion = ctx.simp.suggestions[addr]
        kinds = ", ".join(sorted(k.value for k in suggestion.kinds))
        out.append(ctx.emit(
            "R20", addr.sheet, addr,
            f"formula can be simplified to {suggestion.suggested} ({kinds})",
            suggestion=suggestion))
    return out


def _r21_label_formula(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for sheet, addr, ast in ctx.formula_cells_with_ast():
        if _produces_text(ast):
            out.append(ctx.emit(
                "R21", addr.sheet, addr,
                "formula produces text used as a label; prefer constant text"))
    return out


def _produces_text(ast) -> bool:
    node = strip_parens(ast)
    if isinstance(node, StringLit):
        return True
    if isinstance(node, BinaryOp):
        if node.op == "&":
            return True
        if node.op == "+":
            return _produces_text(node.left) or _produces_text(node.right)
        return False
    if isinstance(node, FunctionCall):
        if node.name in ("TEXT", "CONCATENATE", "CONCAT"):
            return True
        if node.name == "IF" and len(node.args) >= 2:
            return any(_produces_text(arg) for arg in node.args[1:3])
    return False


def _r22_blank_space(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for sheet in ctx.workbook.sheets:
        ratio = ctx.layouts[sheet.name].blank_ratio
        if ratio is not None and ratio > ctx.config.blank_ratio_warn:
            out.append(ctx.emit(
                "R22", sheet.name, None,
                f"{ratio:.0%} of the content area is blank "
                f"(threshold {ctx.config.blank_ratio_warn:.0%})"))
    return out


def _r23_formula_refs(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    formulas = {addr for addr, info in ctx.graph.nodes.items()
                if info.kind is CellKind.FORMULA}
    for sheet in ctx.workbook.sheets:
        total = 0
        into_formulas = 0
        for p, d in ctx.graph.arcs:
            if d.sheet.lower() != sheet.name.lower():
                continue
            total += 1
            if p in formulas:
                into_formulas += 1
        if total and into_formulas:
            out.append(ctx.emit(
                "R23", sheet.name, None,
                f"{into_formulas / total:.0%} of references target formula "
                f"cells rather than constants"))
    return out


def _r24_ref_order(ctx: _Context, sheets) -> list[Diagnostic]:
    out = []
    for sheet, addr, ast in ctx.formula_cells_with_ast():
        keys = []
        for ref, _ in extract_references(ast):
            start = ref.start if isinstance(ref, RangeRef) else ref
            target_sheet = start.sheet if start.sheet is not None else sheet.name
            keys.append((ctx.graph.sheet_index(target_sheet), start.row, start.col))
        if any(b < a for a, b in zip(keys, keys[1:])):
            listed = ", ".join(
                (r.start if isinstance(r, RangeRef) else r).resolve(sheet.name).a1()
                for r, _ in extract_references(ast)[:6])
            out.append(ctx.emit(
                "R24", addr.sheet, addr,
                f"references are not in reading order: {listed}"))
    return out


def _r25_sheet_count(ctx: _Context, sheets) -> list[Diagnostic]:
    populated = [s.name for s in ctx.workbook.sheets
                 if any(True for _ in s.populated())]
    if len(populated) > 1:
        return [ctx.emit(
            "R25", None, None,
            f"workbook has {len(populated)} populated sheets "
            f"({', '.join(populated)})")]
    return []


_RULE_IMPLS = {
    "R01": _r01_backward,
    "R02": _r02_long_arc,
    "R03": _r03_cross_sheet,
    "R04": _r04_spurious,
    "R05": _r05_dangling,
    "R06": _r06_perverse,
    "R07": _r07_constants,
    "R08": _r08_relics,
    "R09": _r09_cycles,
    "R10": _r10_hidden,
    "R11": _r11_decoration,
    "R12": _r12_indistinct,
    "R13": _r13_all_caps,
    "R14": _r14_leading_space,
    "R15": _r15_overlap,
    "R16": _r16_widths,
    "R17": _r17_bulletin,
    "R18": _r18_copy_breaks,
    "R19": _r19_inline,
    "R20": _r20_simplifiable,
    "R21": _r21_label_formula,
    "R22": _r22_blank_space,
    "R23": _r23_formula_refs,
    "R24": _r24_ref_order,
    "R25": _r25_sheet_count,
}

assert tuple(_RULE_IMPLS) == ALL_RULE_IDS


_SEVERITY_WEIGHTS = {Severity.ERROR: 1.0, Severity.WARNING: 0.5, Severity.INFO: 0.1}


def readability_score(diagnostics: list[Diagnostic], numeric_cells: int) -> float:
    """100 * (1 - min(1, weighted diagnostics per numeric cell))."""
    if numeric_cells < 1:
        raise EmptyWorkbookError("no numeric cells to score against")
    burden = sum(_SEVERITY_WEIGHTS[d.severity] for d in diagnostics) / numeric_cells
    return 100.0 * (1.0 - min(1.0, burden))
