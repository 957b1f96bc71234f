"""Formula rewrites with verified equivalence, and the nest-and-erase pipeline.

Rewrites applied to a fixpoint, in order: put division last in commutative
multiply chains, drop written parentheses, factor a common multiplicand out
of a sum, and collapse a grouped sum of contiguous cells into SUM(range).
Every emitted suggestion is checked by random evaluation before it leaves
this module; files are never modified.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum

from .formula import (
    BinaryOp,
    CellRef,
    FormulaAst,
    FunctionCall,
    NumberLit,
    Paren,
    RangeRef,
    UnaryOp,
    EvalDomainError,
    EvalUnsupported,
    ast_equal,
    evaluate,
    extract_references,
    map_refs,
    parse_formula,
    print_formula,
    referenced_cells,
    strip_parens,
)
from .graph import DependencyGraph
from .model import CellAddress, CellKind, Workbook


class RewriteKind(str, Enum):
    PAREN_REMOVAL = "ParenRemoval"
    COMMON_FACTOR = "CommonFactor"
    RANGE_COLLAPSE = "RangeCollapse"
    DIVISION_LAST = "DivisionLast"
    INLINE_NEST = "InlineNest"


@dataclass(frozen=True)
class RewriteSuggestion:
    cell: CellAddress
    original: str
    suggested: str
    kinds: frozenset[RewriteKind]
    verified: bool
    char_delta: int


# --- equivalence oracle -------------------------------------------------------

_VALUE_LOW, _VALUE_HIGH = -10.0, 10.0
_NEAR_ZERO = 1e-3
_REL_TOL = 1e-9


def _draw(rng: random.Random) -> float:
    # Near-zero values are re-drawn so denominators stay safe.
    while True:
        v = rng.uniform(_VALUE_LOW, _VALUE_HIGH)
        if abs(v) >= _NEAR_ZERO:
            return v


def verify_equivalence(original: FormulaAst, rewritten: FormulaAst,
                       trials: int = 100, sheet: str = "",
                       seed: int = 0x5EED) -> bool:
    """True when both formulas agree on ``trials`` random environments.

    Agreement is within 1e-9 relative tolerance. If either side falls outside
    the numeric-evaluation subset, structural identity is required instead.
    """
    if ast_equal(original, rewritten):
        return True
    if trials <= 0:
        return False
    cells = referenced_cells(original, sheet)
    for addr in referenced_cells(rewritten, sheet):
        if addr not in cells:
            cells.append(addr)
    rng = random.Random(seed)
    done = 0
    attempts = 0
    while done < trials:
        attempts += 1
        if attempts > trials * 100:
            return False
        env = {addr: _draw(rng) for addr in cells}
        try:
            a = evaluate(original, env, sheet)
            b = evaluate(rewritten, env, sheet)
        except EvalUnsupported:
            return ast_equal(original, rewritten)
        except EvalDomainError:
            continue
        if abs(a - b) > _REL_TOL * max(1.0, abs(a), abs(b)):
            return False
        done += 1
    return True


# --- individual rewrites -------------------------------------------------------

def _is_muldiv(node: FormulaAst) -> bool:
    return isinstance(node, BinaryOp) and node.op in ("*", "/")


def _flatten_muldiv(node: FormulaAst, inverted: bool,
                    out: list[tuple[FormulaAst, bool]]) -> None:
    if isinstance(node, Paren) and _is_muldiv(node.inner):
        _flatten_muldiv(node.inner, inverted, out)
    elif isinstance(node, BinaryOp) and node.op == "*":
        _flatten_muldiv(node.left, inverted, out)
        _flatten_muldiv(node.right, inverted, out)
    elif isinstance(node, BinaryOp) and node.op == "/":
        _flatten_muldiv(node.left, inverted, out)
        _flatten_muldiv(node.right, not inverted, out)
    else:
        out.append((node, inverted))


def _division_last(ast: FormulaAst) -> FormulaAst:
    """Reorder each commutative */ chain so every division comes at the end.

    A chain is only flattened (parens between its links dropped) when a
    reorder actually happens; C7/(A8*A7) keeps its written shape because the
    grouped factor sits in the denominator, where unwrapping would change
    nothing the writer said.
    """

    def walk(node: FormulaAst, chain_root: bool) -> FormulaAst:
        if isinstance(node, Paren):
            return Paren(walk(node.inner, True), node.explicit)
        if _is_muldiv(node):
            if chain_root:
                seq: list[tuple[FormulaAst, bool]] = []
                _flatten_muldiv(node, False, seq)
                fire = any(inv and not seq[j][1]
                           for i, (_, inv) in enumerate(seq)
                           for j in range(i + 1, len(seq)))
                if fire:
                    factors = [(walk(f, True), inv) for f, inv in seq]
                    numerators = [f for f, inv in factors if not inv]
                    denominators = [f for f, inv in factors if inv]
                    rebuilt = numerators[0]
                    for factor in numerators[1:]:
                        rebuilt = BinaryOp("*", rebuilt, factor)
                    for factor in denominators:
                        rebuilt = BinaryOp("/", rebuilt, factor)
                    return rebuilt
            # interior of a chain, or a chain left alone: keep its shape
            return BinaryOp(node.op, walk(node.left, False),
                            walk(node.right, False))
        return _rebuild(node, lambda child: walk(child, True))

    return walk(ast, True)


def _rebuild(node: FormulaAst, fn) -> FormulaAst:
    if isinstance(node, FunctionCall):
        return FunctionCall(node.name, tuple(fn(a) for a in node.args))
    if isinstance(node, BinaryOp):
        return BinaryOp(node.op, fn(node.left), fn(node.right))
    if isinstance(node, UnaryOp):
        return UnaryOp(node.op, fn(node.operand))
    if isinstance(node, Paren):
        return Paren(fn(node.inner), node.explicit)
    return node


def _is_plus_chain(node: FormulaAst) -> bool:
    return isinstance(node, BinaryOp) and node.op == "+"


def _flatten_plus(node: FormulaAst, out: list[FormulaAst]) -> None:
    if _is_plus_chain(node):
        _flatten_plus(node.left, out)
        _flatten_plus(node.right, out)
    else:
        out.append(node)


def _chain_of_plus(terms: list[FormulaAst]) -> FormulaAst:
    node = terms[0]
    for term in terms[1:]:
        node = BinaryOp("+", node, term)
    return node


def _mult_factors(node: FormulaAst) -> list[FormulaAst] | None:
    """Factor list of a pure multiplication chain; None if division involved."""
    if isinstance(node, BinaryOp) and node.op == "*":
        left = _mult_factors(node.left)
        right = _mult_factors(node.right)
        if left is None or right is None:
            return None
        return left + right
    if isinstance(node, BinaryOp) and node.op == "/":
        return None
    return [node]


def _common_factor(ast: FormulaAst) -> FormulaAst:
    """a*x + y*a + a*z  ->  a*(x + y + z), keeping the remainders in order."""

    def walk(node: FormulaAst) -> FormulaAst:
        if _is_plus_chain(node):
            terms: list[FormulaAst] = []
            _flatten_plus(node, terms)
            factors = [_mult_factors(t) for t in terms]
            if (len(terms) >= 2 and all(f is not None for f in factors)
                    and any(len(f) >= 2 for f in factors)):  # type: ignore[arg-type]
                for candidate in factors[0]:  # type: ignore[index]
                    stripped = strip_parens(candidate)
                    if not isinstance(stripped, (CellRef, NumberLit)):
                        continue
                    if all(any(ast_equal(f, candidate) for f in fs)  # type: ignore[union-attr]
                           for fs in factors[1:]):
                        remainders = []
                        for fs in factors:
                            rest = list(fs)  # type: ignore[arg-type]
                            for i, f in enumerate(rest):
                                if ast_equal(f, candidate):
                                    del rest[i]
                                    break
                            if not rest:
                                rest = [NumberLit(Decimal(1), "1")]
                            product = rest[0]
                            for f in rest[1:]:
                                product = BinaryOp("*", product, f)
                            remainders.append(product)
                        return BinaryOp("*", strip_parens(candidate),
                                        _chain_of_plus(remainders))
            return _rebuild(node, walk)
        return _rebuild(node, walk)

    return walk(ast)


def _contiguous_sum_range(terms: list[FormulaAst]) -> RangeRef | None:
    refs = []
    for term in terms:
        t = strip_parens(term)
        if not isinstance(t, CellRef) or t.row_abs or t.col_abs:
            return None
        refs.append(t)
    if len(refs) < 3:
        return None
    sheets = {r.sheet for r in refs}
    if len(sheets) != 1:
        return None
    cols = {r.col for r in refs}
    rows = {r.row for r in refs}
    if len(cols) == 1:
        ordered = sorted(rows)
        if len(ordered) != len(refs):
            return None
        if ordered != list(range(ordered[0], ordered[-1] + 1)):
            return None
        col = cols.pop()
        sheet = sheets.pop()
        return RangeRef(CellRef(ordered[0], col, sheet=sheet),
                        CellRef(ordered[-1], col))
    if len(rows) == 1:
        ordered = sorted(cols)
        if len(ordered) != len(refs):
            return None
        if ordered != list(range(ordered[0], ordered[-1] + 1)):
            return None
        row = rows.pop()
        sheet = sheets.pop()
        return RangeRef(CellRef(row, ordered[0], sheet=sheet),
                        CellRef(row, ordered[-1]))
    return None


_PLUS_PREC = 3
_GROUPING_OPS = {"*": 4, "/": 4, "^": 6, "&": 2, "-": 3}


def _range_collapse(ast: FormulaAst) -> FormulaAst:
    """(A4+A5+A6) and friends become SUM(A4:A6) when the sum sits grouped.

    Only sums that carry parentheses (written, or forced by precedence) are
    collapsed; a bare top-level sum would grow, not shrink.
    """

    def collapse(chain: FormulaAst) -> FormulaAst | None:
        terms: list[FormulaAst] = []
        _flatten_plus(chain, terms)
        rng = _contiguous_sum_range(terms)
        if rng is None:
            return None
        return FunctionCall("SUM", (rng,))

    def grouped_child(parent: FormulaAst, child: FormulaAst, right: bool) -> bool:
        if isinstance(parent, Paren):
            return True
        if isinstance(parent, UnaryOp):
            return True
        if isinstance(parent, BinaryOp):
            prec = _GROUPING_OPS.get(parent.op)
            if prec is None:
                return False
            if prec > _PLUS_PREC:
                return True
            # same precedence: only a right-hand sum needs its parens
            return right and parent.op == "-"
        return False

    def walk(node: FormulaAst) -> FormulaAst:
        if isinstance(node, Paren):
            if _is_plus_chain(node.inner):
                collapsed = collapse(node.inner)
                if collapsed is not None:
                    return collapsed  # the written parens go with the sum
            return Paren(walk(node.inner), node.explicit)
        if isinstance(node, (BinaryOp, UnaryOp)):
            def child_walk(child: FormulaAst, right: bool) -> FormulaAst:
                if _is_plus_chain(child) and grouped_child(node, child, right):
                    collapsed = collapse(child)
                    if collapsed is not None:
                        return collapsed
                return walk(child)

            if isinstance(node, BinaryOp):
                return BinaryOp(node.op, child_walk(node.left, False),
                                child_walk(node.right, True))
            return UnaryOp(node.op, child_walk(node.operand, True))
        return _rebuild(node, walk)

    return walk(ast)


_STAGES = (
    (RewriteKind.DIVISION_LAST, _division_last),
    (RewriteKind.PAREN_REMOVAL, strip_parens),
    (RewriteKind.COMMON_FACTOR, _common_factor),
    (RewriteKind.RANGE_COLLAPSE, _range_collapse),
)

_MAX_PASSES = 8


def simplify(ast: FormulaAst, host: CellAddress,
             graph: DependencyGraph | None = None,
             trials: int = 100) -> RewriteSuggestion | None:
    """Rewrite ``host``'s formula to a fixpoint; None when nothing fires.

    Returns only verified suggestions: the rewritten formula must agree with
    the original on random environments (or be structurally identical).
    """
    original_text = print_formula(ast)
    current = ast
    kinds: set[RewriteKind] = set()
    for _ in range(_MAX_PASSES):
        before = print_formula(current)
        for kind, stage in _STAGES:
            candidate = stage(current)
            if print_formula(candidate) != print_formula(current):
                kinds.add(kind)
                current = candidate
        if print_formula(current) == before:
            break
    if not kinds:
        return None
    suggested_text = print_formula(current)
    try:
        parse_formula(suggested_text)
    except Exception:
        return None
    if not verify_equivalence(ast, current, trials=trials, sheet=host.sheet):
        return None
    return RewriteSuggestion(
        cell=host,
        original=original_text,
        suggested=suggested_text,
        kinds=frozenset(kinds),
        verified=True,
        char_delta=len(suggested_text) - len(original_text),
    )


# --- nesting -------------------------------------------------------------------

@dataclass(frozen=True)
class NestCandidate:
    source: CellAddress
    target: CellAddress
    combined_text: str


def _substitute(target_ast: FormulaAst, target_sheet: str,
                source: CellAddress, replacement: FormulaAst) -> FormulaAst:
    """Replace direct references to ``source`` with its formula body.

    When the substitution crosses sheets, unqualified references inside the
    replacement gain the source sheet so they keep pointing at the same cells.
    """
    cross_sheet = source.sheet.lower() != target_sheet.lower()
    body = replacement
    if cross_sheet:
        def qualify(ref: CellRef | RangeRef) -> FormulaAst:
            if isinstance(ref, RangeRef):
                if ref.start.sheet is None:
                    return RangeRef(CellRef(ref.start.row, ref.start.col,
                                            sheet=source.sheet,
                                            row_abs=ref.start.row_abs,
                                            col_abs=ref.start.col_abs), ref.end)
                return ref
            if ref.sheet is None:
                return CellRef(ref.row, ref.col, sheet=source.sheet,
                               row_abs=ref.row_abs, col_abs=ref.col_abs)
            return ref

        body = map_refs(replacement, qualify)

    def swap(ref: CellRef | RangeRef) -> FormulaAst:
        if isinstance(ref, CellRef) and ref.resolve(target_sheet) == source:
            return body
        return ref

    return map_refs(target_ast, swap)


def _covered_by_range(ast: FormulaAst, sheet: str, target: CellAddress) -> bool:
    for ref, _ in extract_references(ast):
        if isinstance(ref, RangeRef):
            ref_sheet = ref.start.sheet if ref.start.sheet is not None else sheet
            if (ref_sheet.lower() == target.sheet.lower()
                    and ref.start.row <= target.row <= ref.end.row
                    and ref.start.col <= target.col <= ref.end.col):
                return True
    return False


def _ranges_stack(a: RangeRef, b: RangeRef, direction: str) -> bool:
    a_sheet = a.start.sheet or ""
    b_sheet = b.start.sheet or ""
    if a_sheet.lower() != b_sheet.lower():
        return False
    if direction == "v":
        return (a.start.col == b.start.col and a.end.col == b.end.col
                and b.start.row == a.end.row + 1)
    return (a.start.row == b.start.row and a.end.row == b.end.row
            and b.start.col == a.end.col + 1)


def _merge_pair(a: FunctionCall, b: FunctionCall) -> FunctionCall | None:
    if a.name != "SUMPRODUCT" or b.name != "SUMPRODUCT":
        return None
    if len(a.args) != len(b.args) or not a.args:
        return None
    a_ranges = [strip_parens(arg) for arg in a.args]
    b_ranges = [strip_parens(arg) for arg in b.args]
    if not all(isinstance(r, RangeRef) for r in a_ranges + b_ranges):
        return None
    for direction in ("v", "h"):
        if all(_ranges_stack(x, y, direction)
               for x, y in zip(a_ranges, b_ranges)):
            merged = tuple(
                RangeRef(x.start, CellRef(y.end.row, y.end.col))
                for x, y in zip(a_ranges, b_ranges))
            return FunctionCall("SUMPRODUCT", merged)
        if all(_ranges_stack(y, x, direction)
               for x, y in zip(a_ranges, b_ranges)):
            merged = tuple(
                RangeRef(y.start, CellRef(x.end.row, x.end.col))
                for x, y in zip(a_ranges, b_ranges))
            return FunctionCall("SUMPRODUCT", merged)
    return None


def merge_sumproducts(ast: FormulaAst) -> FormulaAst:
    """Fuse adjacent SUMPRODUCT terms of a sum over stacked equal-shape ranges."""

    def walk(node: FormulaAst) -> FormulaAst:
        if _is_plus_chain(node):
            terms: list[FormulaAst] = []
            _flatten_plus(node, terms)
            terms = [walk(t) for t in terms]
            changed = True
            while changed:
                changed = False
                for i in range(len(terms)):
                    a = strip_parens(terms[i])
                    if not isinstance(a, FunctionCall):
                        continue
                    for j in range(i + 1, len(terms)):
                        b = strip_parens(terms[j])
                        if not isinstance(b, FunctionCall):
                            continue
                        merged = _merge_pair(a, b)
                        if merged is not None:
                            terms[i] = merged
                            del terms[j]
                            changed = True
                            break
                    if changed:
                        break
            return _chain_of_plus(terms)
        return _rebuild(node, walk)

    return walk(ast)


def nest_candidates(graph: DependencyGraph, workbook: Workbook,
                    max_len: int = 120) -> list[NestCandidate]:
    """Formulas with exactly one dependent whose inlining stays readable.

    The combined formula substitutes the source's body for every direct
    reference to it in the dependent; candidates whose combined text exceeds
    ``max_len`` characters, or that are referenced through a range, are
    dropped.
    """
    asts: dict[CellAddress, FormulaAst] = {}
    for sheet in workbook.sheets:
        for addr, cell in sheet.populated():
            if cell.content.kind is CellKind.FORMULA and cell.content.ast is not None:
                asts[addr] = cell.content.ast

    out: list[NestCandidate] = []
    for source in graph.formula_cells():
        dependents = sorted(set(graph.dependents_of(source)), key=graph.addr_key)
        if len(dependents) != 1:
            continue
        target = dependents[0]
        if target == source or target not in asts or source not in asts:
            continue
        if _covered_by_range(asts[target], target.sheet, source):
            continue
        combined = _substitute(asts[target], target.sheet, source, asts[source])
        text = print_formula(combined)
        if len(text) > max_len:
            continue
        try:
            parse_formula(text)
        except Exception:
            continue
        out.append(NestCandidate(source, target, text))
    return out


@dataclass
class NestingPlan:
    removed: list[CellAddress]
    steps: list[tuple[CellAddress, CellAddress]]
    final_formulas: dict[CellAddress, str]


def plan_nesting(workbook: Workbook, graph: DependencyGraph,
                 max_len: int = 120) -> NestingPlan:
    """Iterate single-dependent inlining to a fixpoint.

    After each substitution the combined formula is tidied by fusing adjacent
    SUMPRODUCT terms, and the length gate applies to the tidied text, so long
    intermediate states that collapse back down are allowed through.
    """
    asts: dict[CellAddress, FormulaAst] = {}
    sheets = {s.name: s for s in workbook.sheets}
    for sheet in workbook.sheets:
        for addr, cell in sheet.populated():
            if cell.content.kind is CellKind.FORMULA and cell.content.ast is not None:
                asts[addr] = cell.content.ast

    def dependents_map() -> dict[CellAddress, set[CellAddress]]:
        deps: dict[CellAddress, set[CellAddress]] = {}
        for addr, ast in asts.items():
            for cell in referenced_cells(ast, addr.sheet):
                deps.setdefault(cell, set()).add(addr)
        return deps

    removed: list[CellAddress] = []
    steps: list[tuple[CellAddress, CellAddress]] = []
    while True:
        deps = dependents_map()
        applied = False
        for source in sorted(asts, key=graph.addr_key):
            dependents = deps.get(source, set()) - {source}
            if len(dependents) != 1 or source in dependents:
                continue
            target = next(iter(dependents))
            if target not in asts:
                continue
            if _covered_by_range(asts[target], target.sheet, source):
                continue
            combined = merge_sumproducts(
                _substitute(asts[target], target.sheet, source, asts[source]))
            text = print_formula(combined)
            if len(text) > max_len:
                continue
            try:
                parse_formula(text)
            except Exception:
                continue
            asts[target] = combined
            del asts[source]
            removed.append(source)
            steps.append((source, target))
            applied = True
            break
        if not applied:
            break
    return NestingPlan(
        removed=removed,
        steps=steps,
        final_formulas={addr: print_formula(ast) for addr, ast in asts.items()},
    )
