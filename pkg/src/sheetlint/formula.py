"""Formula lexer, parser, printer, reference extraction and numeric evaluation.

Operator tiers, tightest first: postfix % > ^ > unary +/- > * / > + - > &
> comparisons. All binary operators associate left.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from decimal import Decimal
from typing import Callable, Iterator

from .model import MAX_COL, MAX_ROW, CellAddress, col_letters, col_number, quote_sheet


class FormulaParseError(ValueError):
    """Syntax error with the offending byte offset and an expected-token hint."""

    def __init__(self, offset: int, expected: str, found: str = "") -> None:
        self.offset = offset
        self.expected = expected
        self.found = found
        detail = f", found {found!r}" if found else ""
        super().__init__(f"offset {offset}: expected {expected}{detail}")


class EvalUnsupported(Exception):
    """The expression uses something outside the numeric-evaluation subset."""


class EvalDomainError(Exception):
    """Division by zero or an out-of-domain arithmetic operation."""


# --- AST nodes ---------------------------------------------------------------

@dataclass(frozen=True)
class NumberLit:
    value: Decimal
    text: str  # the writer's literal, preserved for echoing in diagnostics


@dataclass(frozen=True)
class StringLit:
    value: str


@dataclass(frozen=True)
class CellRef:
    row: int
    col: int
    sheet: str | None = None
    row_abs: bool = False
    col_abs: bool = False

    def resolve(self, default_sheet: str) -> CellAddress:
        return CellAddress(self.sheet if self.sheet is not None else default_sheet,
                           self.row, self.col)


@dataclass(frozen=True)
class RangeRef:
    start: CellRef
    end: CellRef

    def cells(self, default_sheet: str) -> Iterator[CellAddress]:
        sheet = self.start.sheet if self.start.sheet is not None else default_sheet
        for row in range(self.start.row, self.end.row + 1):
            for col in range(self.start.col, self.end.col + 1):
                yield CellAddress(sheet, row, col)

    @property
    def size(self) -> int:
        return ((self.end.row - self.start.row + 1)
                * (self.end.col - self.start.col + 1))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.end.row - self.start.row + 1,
                self.end.col - self.start.col + 1)


@dataclass(frozen=True)
class NameRef:
    """A bare identifier: a defined name, resolved later against the workbook."""

    name: str


@dataclass(frozen=True)
class FunctionCall:
    name: str
    args: tuple  # of AST nodes


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class UnaryOp:
    op: str  # '-' or '+' prefix, '%' postfix
    operand: object


@dataclass(frozen=True)
class Paren:
    """Parentheses as written. The printer keeps them; the simplifier counts them."""

    inner: object
    explicit: bool = True


FormulaAst = object  # union of the node dataclasses above

COMPARISONS = ("=", "<>", "<=", ">=", "<", ">")


# --- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?)
  | (?P<string>"(?:[^"]|"")*")
  | (?P<qsheet>'(?:[^']|'')*')
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<op><=|>=|<>|[=<>+\-*/^&%(),!:$])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaParseError(pos, "a token", text[pos])
        kind = m.lastgroup or ""
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


_REF_SPLIT_RE = re.compile(r"([A-Za-z]{1,3})([0-9]+)?\Z")


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    # token plumbing
    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def eat(self, text: str) -> bool:
        if self.peek().kind == "op" and self.peek().text == text:
            self.advance()
            return True
        return False

    def expect(self, text: str, expected: str | None = None) -> None:
        if not self.eat(text):
            tok = self.peek()
            raise FormulaParseError(tok.pos, expected or repr(text), tok.text)

    # grammar, loosest binding first
    def parse(self) -> FormulaAst:
        node = self.comparison()
        tok = self.peek()
        if tok.kind != "eof":
            raise FormulaParseError(tok.pos, "end of formula", tok.text)
        return node

    def comparison(self) -> FormulaAst:
        node = self.concat()
        while self.peek().kind == "op" and self.peek().text in COMPARISONS:
            op = self.advance().text
            node = BinaryOp(op, node, self.concat())
        return node

    def concat(self) -> FormulaAst:
        node = self.addsub()
        while self.eat("&"):
            node = BinaryOp("&", node, self.addsub())
        return node

    def addsub(self) -> FormulaAst:
        node = self.muldiv()
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            op = self.advance().text
            node = BinaryOp(op, node, self.muldiv())
        return node

    def muldiv(self) -> FormulaAst:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in ("*", "/"):
            op = self.advance().text
            node = BinaryOp(op, node, self.unary())
        return node

    def unary(self) -> FormulaAst:
        if self.peek().kind == "op" and self.peek().text in ("-", "+"):
            op = self.advance().text
            return UnaryOp(op, self.unary())
        return self.power()

    def power(self) -> FormulaAst:
        node = self.postfix()
        while self.eat("^"):
            node = BinaryOp("^", node, self._power_operand())
        return node

    def _power_operand(self) -> FormulaAst:
        # Allow signs on the exponent without making ^ right-associative.
        if self.peek().kind == "op" and self.peek().text in ("-", "+"):
            op = self.advance().text
            return UnaryOp(op, self._power_operand())
        return self.postfix()

    def postfix(self) -> FormulaAst:
        node = self.primary()
        while self.eat("%"):
            node = UnaryOp("%", node)
        return node

    def primary(self) -> FormulaAst:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return NumberLit(Decimal(tok.text), tok.text)
        if tok.kind == "string":
            self.advance()
            return StringLit(tok.text[1:-1].replace('""', '"'))
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.comparison()
            self.expect(")", "')'")
            return Paren(inner, explicit=True)
        if tok.kind == "qsheet":
            self.advance()
            sheet = tok.text[1:-1].replace("''", "'")
            self.expect("!", "'!' after quoted sheet name")
            return self._reference(sheet)
        if tok.kind == "ident":
            return self._ident_start()
        if tok.kind == "op" and tok.text == "$":
            return self._reference(None)
        raise FormulaParseError(tok.pos, "a value, reference or '('", tok.text)

    def _ident_start(self) -> FormulaAst:
        tok = self.advance()
        nxt = self.peek()
        if nxt.kind == "op" and nxt.text == "!":
            self.advance()
            return self._reference(tok.text)
        if nxt.kind == "op" and nxt.text == "(":
            self.advance()
            args: list[FormulaAst] = []
            if not self.eat(")"):
                args.append(self.comparison())
                while self.eat(","):
                    args.append(self.comparison())
                self.expect(")", "')' or ','")
            return FunctionCall(tok.text.upper(), tuple(args))
        mark = self.i
        ref = self._ref_from_ident(tok, col_abs=False)
        if ref is None:
            self.i = mark  # undo any '$'/row tokens consumed while probing
            return NameRef(tok.text)
        return self._maybe_range(ref)

    def _reference(self, sheet: str | None) -> FormulaAst:
        ref = self._cell_ref(sheet)
        return self._maybe_range(ref)

    def _cell_ref(self, sheet: str | None) -> CellRef:
        col_abs = self.eat("$")
        tok = self.peek()
        if tok.kind != "ident":
            raise FormulaParseError(tok.pos, "column letters", tok.text)
        self.advance()
        ref = self._ref_from_ident(tok, col_abs=col_abs, sheet=sheet, required=True)
        assert ref is not None
        return ref

    def _ref_from_ident(self, tok: _Token, col_abs: bool,
                        sheet: str | None = None,
                        required: bool = False) -> CellRef | None:
        def fail(expected: str) -> CellRef | None:
            if required:
                nxt = self.peek()
                raise FormulaParseError(nxt.pos, expected, nxt.text)
            return None

        m = _REF_SPLIT_RE.match(tok.text)
        if m is None:
            return fail("a cell reference")
        letters, digits = m.group(1), m.group(2)
        if digits is not None:
            if col_abs is False and sheet is None and not self._plausible(letters, digits):
                return None
            row, row_abs = int(digits), False
        else:
            row_abs = self.eat("$")
            nxt = self.peek()
            if nxt.kind != "number" or not nxt.text.isdigit():
                if row_abs:
                    return fail("a row number")
                # bare letters with no row: a defined name, not a reference
                return fail("a row number") if required else None
            self.advance()
            row, digits = int(nxt.text), nxt.text
        col = col_number(letters)
        if not (1 <= row <= MAX_ROW and col <= MAX_COL):
            return fail("an in-bounds cell reference")
        return CellRef(row, col, sheet=sheet, row_abs=row_abs, col_abs=col_abs)

    @staticmethod
    def _plausible(letters: str, digits: str) -> bool:
        # "AAAA1" or row/col out of bounds reads as a defined name instead.
        return (len(letters) <= 3 and col_number(letters) <= MAX_COL
                and int(digits) <= MAX_ROW)

    def _maybe_range(self, start: CellRef) -> FormulaAst:
        if not (self.peek().kind == "op" and self.peek().text == ":"):
            return start
        self.advance()
        end = self._cell_ref(None)
        return normalize_range(start, end)


def normalize_range(a: CellRef, b: CellRef) -> RangeRef:
    """Order endpoints so start <= end on both axes, keeping $ flags with coords."""
    (r1, ra1), (r2, ra2) = sorted([(a.row, a.row_abs), (b.row, b.row_abs)])
    (c1, ca1), (c2, ca2) = sorted([(a.col, a.col_abs), (b.col, b.col_abs)])
    start = CellRef(r1, c1, sheet=a.sheet, row_abs=ra1, col_abs=ca1)
    end = CellRef(r2, c2, sheet=None, row_abs=ra2, col_abs=ca2)
    return RangeRef(start, end)


def parse_formula(text: str) -> FormulaAst:
    """Parse formula text (leading '=' optional) into an AST."""
    body = text[1:] if text.startswith("=") else text
    return _Parser(body).parse()


# --- printer -----------------------------------------------------------------

_ATOM_PREC = 8
_PREC = {"%": 7, "^": 6, "u": 5, "*": 4, "/": 4, "+": 3, "-": 3, "&": 2}
_PREC.update({op: 1 for op in COMPARISONS})


def _prec(node: FormulaAst) -> int:
    if isinstance(node, BinaryOp):
        return _PREC[node.op]
    if isinstance(node, UnaryOp):
        return _PREC["%"] if node.op == "%" else _PREC["u"]
    return _ATOM_PREC


def ref_a1_text(ref: CellRef) -> str:
    sheet = "" if ref.sheet is None else quote_sheet(ref.sheet) + "!"
    return (f"{sheet}{'$' if ref.col_abs else ''}{col_letters(ref.col)}"
            f"{'$' if ref.row_abs else ''}{ref.row}")


def print_formula(ast: FormulaAst, leading_eq: bool = True,
                  ref_printer: Callable[[CellRef], str] | None = None) -> str:
    """Print canonically: uppercase names, no spaces, only needed or explicit parens."""
    ref_text = ref_printer or ref_a1_text

    def emit(node: FormulaAst) -> str:
        if isinstance(node, NumberLit):
            return node.text
        if isinstance(node, StringLit):
            return '"' + node.value.replace('"', '""') + '"'
        if isinstance(node, CellRef):
            return ref_text(node)
        if isinstance(node, RangeRef):
            return f"{ref_text(node.start)}:{ref_text(node.end)}"
        if isinstance(node, NameRef):
            return node.name
        if isinstance(node, FunctionCall):
            return node.name.upper() + "(" + ",".join(emit(a) for a in node.args) + ")"
        if isinstance(node, Paren):
            return "(" + emit(node.inner) + ")"
        if isinstance(node, UnaryOp):
            if node.op == "%":
                body = emit(node.operand)
                if _prec(node.operand) < _PREC["%"]:
                    body = "(" + body + ")"
                return body + "%"
            body = emit(node.operand)
            if _prec(node.operand) < _PREC["u"]:
                body = "(" + body + ")"
            return node.op + body
        if isinstance(node, BinaryOp):
            my = _PREC[node.op]
            left = emit(node.left)
            if _prec(node.left) < my:
                left = "(" + left + ")"
            right = emit(node.right)
            rp = _prec(node.right)
            # Left association: an equal-precedence right child needs parens.
            # A signed exponent binds itself, so "A^-B" stays paren-free.
            need = rp <= my
            if (node.op == "^" and isinstance(node.right, UnaryOp)
                    and node.right.op in ("-", "+")):
                need = False
            if need:
                right = "(" + right + ")"
            return left + node.op + right
        raise TypeError(f"not an AST node: {node!r}")

    out = emit(ast)
    return "=" + out if leading_eq else out


def strip_parens(ast: FormulaAst) -> FormulaAst:
    """Remove every Paren node; used for structural comparisons."""
    if isinstance(ast, Paren):
        return strip_parens(ast.inner)
    if isinstance(ast, FunctionCall):
        return FunctionCall(ast.name, tuple(strip_parens(a) for a in ast.args))
    if isinstance(ast, BinaryOp):
        return BinaryOp(ast.op, strip_parens(ast.left), strip_parens(ast.right))
    if isinstance(ast, UnaryOp):
        return UnaryOp(ast.op, strip_parens(ast.operand))
    return ast


def ast_equal(a: FormulaAst, b: FormulaAst) -> bool:
    """Structural equality with parenthesization ignored."""
    return strip_parens(a) == strip_parens(b)


def iter_nodes(ast: FormulaAst) -> Iterator[FormulaAst]:
    """Depth-first, left-to-right source order."""
    yield ast
    if isinstance(ast, FunctionCall):
        for arg in ast.args:
            yield from iter_nodes(arg)
    elif isinstance(ast, BinaryOp):
        yield from iter_nodes(ast.left)
        yield from iter_nodes(ast.right)
    elif isinstance(ast, UnaryOp):
        yield from iter_nodes(ast.operand)
    elif isinstance(ast, Paren):
        yield from iter_nodes(ast.inner)


def extract_references(ast: FormulaAst) -> list[tuple[CellRef | RangeRef, int]]:
    """All cell and range references in source order, duplicates preserved."""
    refs = [n for n in iter_nodes(ast) if isinstance(n, (CellRef, RangeRef))]
    return list(zip(refs, range(len(refs))))


def map_refs(ast: FormulaAst,
             fn: Callable[[CellRef | RangeRef], FormulaAst]) -> FormulaAst:
    """Rebuild the tree with every reference node passed through ``fn``."""
    if isinstance(ast, (CellRef, RangeRef)):
        return fn(ast)
    if isinstance(ast, FunctionCall):
        return FunctionCall(ast.name, tuple(map_refs(a, fn) for a in ast.args))
    if isinstance(ast, BinaryOp):
        return BinaryOp(ast.op, map_refs(ast.left, fn), map_refs(ast.right, fn))
    if isinstance(ast, UnaryOp):
        return UnaryOp(ast.op, map_refs(ast.operand, fn))
    if isinstance(ast, Paren):
        return Paren(map_refs(ast.inner, fn), ast.explicit)
    return ast


def translate(ast: FormulaAst, drow: int, dcol: int) -> FormulaAst:
    """Shift relative references by an offset (shared-formula expansion)."""

    def shift(ref: CellRef | RangeRef) -> FormulaAst:
        if isinstance(ref, RangeRef):
            return RangeRef(shift(ref.start), shift(ref.end))  # type: ignore[arg-type]
        return replace(ref,
                       row=ref.row if ref.row_abs else ref.row + drow,
                       col=ref.col if ref.col_abs else ref.col + dcol)

    return map_refs(ast, shift)


# --- numeric evaluation ------------------------------------------------------

_EVAL_FUNCTIONS = ("SUM", "SUMPRODUCT", "IF", "MIN", "MAX", "ABS")


def _range_values(node: RangeRef, env: dict[CellAddress, float],
                  sheet: str) -> list[float]:
    return [_cell_value(addr, env) for addr in node.cells(sheet)]


def _cell_value(addr: CellAddress, env: dict[CellAddress, float]) -> float:
    try:
        return float(env[addr])
    except KeyError:
        raise EvalDomainError(f"no value for {addr.qualified()}")


def evaluate(ast: FormulaAst, env: dict[CellAddress, float],
             sheet: str = "") -> float:
    """Evaluate the arithmetic subset against cell values in ``env``.

    Raises EvalUnsupported on strings, concatenation, names or unknown
    functions, and EvalDomainError on division by zero and similar.
    """

    def ev(node: FormulaAst) -> float:
        if isinstance(node, NumberLit):
            return float(node.value)
        if isinstance(node, CellRef):
            return _cell_value(node.resolve(sheet), env)
        if isinstance(node, Paren):
            return ev(node.inner)
        if isinstance(node, UnaryOp):
            v = ev(node.operand)
            if node.op == "%":
                return v / 100.0
            return -v if node.op == "-" else v
        if isinstance(node, BinaryOp):
            op = node.op
            if op == "&":
                raise EvalUnsupported("text concatenation")
            a, b = ev(node.left), ev(node.right)
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                if b == 0:
                    raise EvalDomainError("division by zero")
                return a / b
            if op == "^":
                if a == 0 and b < 0:
                    raise EvalDomainError("zero to a negative power")
                if a < 0 and b != int(b):
                    raise EvalDomainError("negative base, fractional exponent")
                try:
                    result = math.pow(a, b)
                except (OverflowError, ValueError) as exc:
                    raise EvalDomainError(str(exc))
                if math.isinf(result) or math.isnan(result):
                    raise EvalDomainError("overflow")
                return result
            # comparisons
            return 1.0 if _compare(op, a, b) else 0.0
        if isinstance(node, FunctionCall):
            return ev_call(node)
        if isinstance(node, (StringLit, NameRef, RangeRef)):
            raise EvalUnsupported(type(node).__name__)
        raise EvalUnsupported(repr(node))

    def flat(args: tuple) -> list[float]:
        values: list[float] = []
        for arg in args:
            inner = strip_parens(arg)
            if isinstance(inner, RangeRef):
                values.extend(_range_values(inner, env, sheet))
            else:
                values.append(ev(arg))
        return values

    def ev_call(node: FunctionCall) -> float:
        name = node.name
        if name not in _EVAL_FUNCTIONS:
            raise EvalUnsupported(f"function {name}")
        if name == "SUM":
            return sum(flat(node.args))
        if name == "SUMPRODUCT":
            if not node.args:
                raise EvalDomainError("SUMPRODUCT needs arguments")
            grids = []
            for arg in node.args:
                inner = strip_parens(arg)
                if not isinstance(inner, RangeRef):
                    raise EvalUnsupported("SUMPRODUCT over non-range")
                grids.append((inner.shape, _range_values(inner, env, sheet)))
            shape = grids[0][0]
            if any(g[0] != shape for g in grids):
                raise EvalDomainError("SUMPRODUCT shapes differ")
            return sum(math.prod(vals) for vals in zip(*(g[1] for g in grids)))
        if name == "IF":
            if len(node.args) != 3:
                raise EvalUnsupported("IF arity")
            return ev(node.args[1]) if ev(node.args[0]) != 0 else ev(node.args[2])
        if name == "MIN":
            return min(flat(node.args))
        if name == "MAX":
            return max(flat(node.args))
        if name == "ABS":
            if len(node.args) != 1:
                raise EvalUnsupported("ABS arity")
            return abs(ev(node.args[0]))
        raise EvalUnsupported(name)

    return ev(ast)


def _compare(op: str, a: float, b: float) -> bool:
    if op == "=":
        return a == b
    if op == "<>":
        return a != b
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "<=":
        return a <= b
    return a >= b


def referenced_cells(ast: FormulaAst, sheet: str = "") -> list[CellAddress]:
    """Every individual cell the formula touches, ranges expanded, deduplicated."""
    seen: dict[CellAddress, None] = {}
    for ref, _ in extract_references(ast):
        if isinstance(ref, RangeRef):
            for addr in ref.cells(sheet):
                seen.setdefault(addr)
        else:
            seen.setdefault(ref.resolve(sheet))
    return list(seen)
