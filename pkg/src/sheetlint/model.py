"""Workbook data model: addresses, cell contents, formats, sheets, classification."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from decimal import Decimal
from enum import Enum
from typing import TYPE_CHECKING, Iterator

if TYPE_CHECKING:
    from .graph import DependencyGraph

MAX_ROW = 1_048_576
MAX_COL = 16_384  # column XFD

_BARE_SHEET_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_A1_RE = re.compile(
    r"(?:(?:'(?P<qsheet>(?:[^']|'')+)'|(?P<sheet>[A-Za-z_][A-Za-z0-9_.]*))!)?"
    r"(?P<cabs>\$?)(?P<col>[A-Za-z]{1,3})(?P<rabs>\$?)(?P<row>[0-9]+)\Z"
)


class AddressParseError(ValueError):
    """Raised when a string cannot be read as an A1 cell address."""


def col_number(letters: str) -> int:
    """Convert column letters to a 1-based column number (A=1, Z=26, AA=27)."""
    n = 0
    for ch in letters:
        if not ch.isalpha():
            raise AddressParseError(f"bad column letters: {letters!r}")
        n = n * 26 + (ord(ch.upper()) - ord("A") + 1)
    return n


def col_letters(n: int) -> str:
    """Convert a 1-based column number back to letters."""
    if n < 1:
        raise ValueError(f"column number must be >= 1, got {n}")
    out = []
    while n:
        n, rem = divmod(n - 1, 26)
        out.append(chr(ord("A") + rem))
    return "".join(reversed(out))


def quote_sheet(name: str) -> str:
    """Render a sheet name for use before '!', quoting when necessary."""
    if _BARE_SHEET_RE.match(name):
        return name
    return "'" + name.replace("'", "''") + "'"


@dataclass(frozen=True)
class CellAddress:
    """A 1-based (sheet, row, col) grid position."""

    sheet: str
    row: int
    col: int

    def a1(self) -> str:
        return f"{col_letters(self.col)}{self.row}"

    def qualified(self) -> str:
        if not self.sheet:
            return self.a1()
        return f"{quote_sheet(self.sheet)}!{self.a1()}"

    def __str__(self) -> str:
        return self.qualified()


def parse_a1(text: str, default_sheet: str = "") -> CellAddress:
    """Parse an A1-notation address like ``E4``, ``$B$2`` or ``Model!IT22``.

    Column letters are case-insensitive; ``$`` markers are accepted and
    discarded (absolute flags belong to formula references, not addresses).
    """
    m = _A1_RE.match(text.strip())
    if m is None:
        raise AddressParseError(f"not a cell address: {text!r}")
    sheet = m.group("qsheet")
    if sheet is not None:
        sheet = sheet.replace("''", "'")
    else:
        sheet = m.group("sheet") or default_sheet
    col = col_number(m.group("col"))
    row = int(m.group("row"))
    if not (1 <= row <= MAX_ROW):
        raise AddressParseError(f"row out of range in {text!r}")
    if col > MAX_COL:
        raise AddressParseError(f"column out of range in {text!r}")
    return CellAddress(sheet, row, col)


def print_a1(addr: CellAddress) -> str:
    """Inverse of :func:`parse_a1`: qualified when the address names a sheet."""
    return addr.qualified()


class CellKind(Enum):
    EMPTY = "empty"
    NUMBER = "number"
    LABEL = "label"
    FORMULA = "formula"
    BOOL = "bool"
    ERROR = "error"


@dataclass(frozen=True)
class CellContent:
    """One cell's payload. Exactly one field matching ``kind`` is populated."""

    kind: CellKind
    number: Decimal | None = None
    text: str | None = None
    formula_text: str | None = None
    ast: object | None = None
    error_code: str | None = None
    bool_value: bool | None = None

    @classmethod
    def empty(cls) -> "CellContent":
        return cls(CellKind.EMPTY)

    @classmethod
    def of_number(cls, value: Decimal | int | str) -> "CellContent":
        return cls(CellKind.NUMBER, number=Decimal(str(value)))

    @classmethod
    def label(cls, text: str) -> "CellContent":
        # Leading spaces are significant (the leading-space rule needs them).
        return cls(CellKind.LABEL, text=text)

    @classmethod
    def formula(cls, formula_text: str, ast: object) -> "CellContent":
        return cls(CellKind.FORMULA, formula_text=formula_text, ast=ast)

    @classmethod
    def boolean(cls, value: bool) -> "CellContent":
        return cls(CellKind.BOOL, bool_value=value)

    @classmethod
    def error(cls, code: str) -> "CellContent":
        return cls(CellKind.ERROR, error_code=code)

    @property
    def is_empty(self) -> bool:
        return self.kind is CellKind.EMPTY


@dataclass(frozen=True)
class CellFormat:
    """Display attributes of a cell. The all-default instance means unformatted."""

    font_size: float | None = None
    bold: bool = False
    italic: bool = False
    underline: bool = False
    font_color: str | None = None
    background_color: str | None = None
    number_format: str | None = None
    hidden: bool = False
    locked: bool = False
    border: bool = False

    def is_default(self) -> bool:
        return self == DEFAULT_FORMAT

    def merged(self, **kwargs) -> "CellFormat":
        return replace(self, **kwargs)


DEFAULT_FORMAT = CellFormat()


@dataclass
class Cell:
    content: CellContent
    fmt: CellFormat = DEFAULT_FORMAT


@dataclass
class Sheet:
    """A sparse grid of cells plus sheet-level geometry."""

    name: str
    cells: dict[tuple[int, int], Cell] = field(default_factory=dict)
    column_widths: dict[int, float] = field(default_factory=dict)
    row_heights: dict[int, float] = field(default_factory=dict)
    declared_extent: CellAddress | None = None
    hidden: bool = False

    def address(self, row: int, col: int) -> CellAddress:
        return CellAddress(self.name, row, col)

    def set_cell(self, row: int, col: int, content: CellContent,
                 fmt: CellFormat = DEFAULT_FORMAT) -> None:
        self.cells[(row, col)] = Cell(content, fmt)

    def merge_format(self, row: int, col: int, fmt: CellFormat) -> None:
        cell = self.cells.get((row, col))
        if cell is None:
            self.cells[(row, col)] = Cell(CellContent.empty(), fmt)
        else:
            cell.fmt = fmt

    def content_at(self, row: int, col: int) -> CellContent:
        cell = self.cells.get((row, col))
        return cell.content if cell else CellContent.empty()

    def fmt_at(self, row: int, col: int) -> CellFormat:
        cell = self.cells.get((row, col))
        return cell.fmt if cell else DEFAULT_FORMAT

    def populated(self) -> Iterator[tuple[CellAddress, Cell]]:
        """Cells bearing content, in row-major order."""
        for (row, col) in sorted(self.cells):
            cell = self.cells[(row, col)]
            if not cell.content.is_empty:
                yield self.address(row, col), cell

    def format_only(self) -> Iterator[tuple[CellAddress, Cell]]:
        """Empty cells kept alive by a non-default format (how relics exist)."""
        for (row, col) in sorted(self.cells):
            cell = self.cells[(row, col)]
            if cell.content.is_empty and not cell.fmt.is_default():
                yield self.address(row, col), cell

    def has_format_data(self) -> bool:
        if self.column_widths or self.row_heights:
            return True
        return any(not cell.fmt.is_default() for cell in self.cells.values())


@dataclass
class Workbook:
    sheets: list[Sheet] = field(default_factory=list)
    defined_names: dict[str, object] = field(default_factory=dict)
    protection: bool = False
    load_notices: list[str] = field(default_factory=list)

    def sheet(self, name: str) -> Sheet | None:
        low = name.lower()
        for sheet in self.sheets:
            if sheet.name.lower() == low:
                return sheet
        return None

    def sheet_index(self, name: str) -> int:
        low = name.lower()
        for i, sheet in enumerate(self.sheets):
            if sheet.name.lower() == low:
                return i
        return -1

    def add_sheet(self, name: str) -> Sheet:
        if not name:
            raise ValueError("sheet name must be non-empty")
        if self.sheet(name) is not None:
            raise ValueError(f"duplicate sheet name {name!r}")
        sheet = Sheet(name)
        self.sheets.append(sheet)
        return sheet


def content_extent(sheet: Sheet) -> CellAddress | None:
    """Bottom-right corner of the box bounding actual content; None when empty.

    Format-only cells are excluded: they allocate space without holding
    anything, which is exactly the gap the relic scan measures.
    """
    max_row = max_col = 0
    for (row, col), cell in sheet.cells.items():
        if cell.content.is_empty:
            continue
        max_row = max(max_row, row)
        max_col = max(max_col, col)
    if max_row == 0:
        return None
    return sheet.address(max_row, max_col)


def full_extent(sheet: Sheet) -> CellAddress | None:
    """Bottom-right corner over every stored cell, format-only ones included."""
    if not sheet.cells:
        return None
    max_row = max(row for row, _ in sheet.cells)
    max_col = max(col for _, col in sheet.cells)
    return sheet.address(max_row, max_col)


class NumericCellClass(Enum):
    NUMERIC_FORMULA = "numeric_formula"
    NUMERIC_CONSTANT = "numeric_constant"
    LABEL = "label"
    BLANK = "blank"
    FORMAT_ONLY_BLANK = "format_only_blank"


def classify_cells(workbook: Workbook,
                   graph: "DependencyGraph") -> dict[CellAddress, NumericCellClass]:
    """Classify every stored cell.

    A formula is always a numeric formula. A constant is numeric only when at
    least one formula depends on it; otherwise it is a label, numbers
    included. Text stays a label even when referenced (lookups over labels do
    not promote them).
    """
    out: dict[CellAddress, NumericCellClass] = {}
    for sheet in workbook.sheets:
        for (row, col), cell in sheet.cells.items():
            addr = sheet.address(row, col)
            kind = cell.content.kind
            if kind is CellKind.FORMULA:
                out[addr] = NumericCellClass.NUMERIC_FORMULA
            elif kind in (CellKind.NUMBER, CellKind.BOOL, CellKind.ERROR):
                if graph.dependents_of(addr):
                    out[addr] = NumericCellClass.NUMERIC_CONSTANT
                else:
                    out[addr] = NumericCellClass.LABEL
            elif kind is CellKind.LABEL:
                out[addr] = NumericCellClass.LABEL
            elif not cell.fmt.is_default():
                out[addr] = NumericCellClass.FORMAT_ONLY_BLANK
            else:
                out[addr] = NumericCellClass.BLANK
    return out


def numeric_cell_count(classes: dict[CellAddress, NumericCellClass]) -> int:
    return sum(
        1 for c in classes.values()
        if c in (NumericCellClass.NUMERIC_FORMULA, NumericCellClass.NUMERIC_CONSTANT)
    )
