"""Workbook loaders: the plain-text fixture grammar and a subset of xlsx."""

from __future__ import annotations

import re
import zipfile
from decimal import Decimal, InvalidOperation
from pathlib import Path
from posixpath import normpath
from xml.etree import ElementTree

from .formula import FormulaParseError, parse_formula, translate, print_formula
from .model import (
    CellAddress,
    CellContent,
    CellFormat,
    Sheet,
    Workbook,
    col_number,
    full_extent,
    parse_a1,
    AddressParseError,
)


class LoadError(ValueError):
    """A file-level problem, always carrying a location."""

    def __init__(self, path: str, line: int, col: int, message: str) -> None:
        self.path = path
        self.line = line
        self.col = col
        self.reason = message
        super().__init__(f"{path}:{line}:{col}: {message}")


# --- text fixture format --------------------------------------------------------
#
# One statement per line; lines whose first non-blank character is '#' are
# comments. Statements:
#   [sheet <name>]                   begin a sheet (name to end of line, trimmed)
#   [dimension <A1addr>]             declared extent of the current sheet
#   col <letters> width=<decimal>    column width
#   <A1addr> num <decimal>           numeric constant
#   <A1addr> label <rest-of-line>    text label, verbatim after one space
#   <A1addr> formula =<text>         formula, leading '=' required
#   <A1addr> fmt <key[=value]>,...   merge format attributes onto a cell

_STMT_RE = re.compile(r"^(\S+)\s+(num|label|formula|fmt)(?: (.*))?$")
_SHEET_RE = re.compile(r"^\[sheet (.+)\]\s*$")
_DIM_RE = re.compile(r"^\[dimension\s+(\S+)\]\s*$")
_COL_RE = re.compile(r"^col\s+([A-Za-z]{1,3})\s+width=([0-9.]+)\s*$")

_FMT_KEYS = ("bg", "color", "size", "bold", "italic", "underline",
             "hidden", "locked", "numfmt")

_TRUE_WORDS = ("1", "true", "yes", "on")


def _parse_fmt(spec: str, base: CellFormat, path: str, lineno: int) -> CellFormat:
    fmt = base
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        key, _, value = part.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key not in _FMT_KEYS:
            raise LoadError(path, lineno, 1, f"unknown format key {key!r}")
        if key == "bg":
            fmt = fmt.merged(background_color=value or None)
        elif key == "color":
            fmt = fmt.merged(font_color=value or None)
        elif key == "size":
            try:
                fmt = fmt.merged(font_size=float(value))
            except ValueError:
                raise LoadError(path, lineno, 1, f"bad font size {value!r}")
        elif key == "numfmt":
            fmt = fmt.merged(number_format=value or None)
        else:
            flag = True if not value else value.lower() in _TRUE_WORDS
            fmt = fmt.merged(**{{"bold": "bold", "italic": "italic",
                                 "underline": "underline", "hidden": "hidden",
                                 "locked": "locked"}[key]: flag})
    return fmt


def load_text_string(text: str, path: str = "<string>") -> Workbook:
    """Parse the fixture grammar from a string; see load_text."""
    workbook = Workbook()
    sheet: Sheet | None = None
    dimension: CellAddress | None = None
    dimensions: dict[str, CellAddress] = {}
    defined: set[tuple[str, int, int]] = set()

    def finish_sheet() -> None:
        nonlocal dimension
        if sheet is not None and dimension is not None:
            dimensions[sheet.name] = dimension
        dimension = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        m = _SHEET_RE.match(line)
        if m:
            finish_sheet()
            name = m.group(1).strip()
            if not name:
                raise LoadError(path, lineno, 1, "empty sheet name")
            if workbook.sheet(name) is not None:
                raise LoadError(path, lineno, 1, f"duplicate sheet {name!r}")
            sheet = workbook.add_sheet(name)
            continue
        if sheet is None:
            raise LoadError(path, lineno, 1,
                            "statement before any [sheet ...] directive")
        m = _DIM_RE.match(line)
        if m:
            try:
                addr = parse_a1(m.group(1), default_sheet=sheet.name)
            except AddressParseError as exc:
                raise LoadError(path, lineno, 1, str(exc))
            dimension = CellAddress(sheet.name, addr.row, addr.col)
            continue
        m = _COL_RE.match(line)
        if m:
            sheet.column_widths[col_number(m.group(1))] = float(m.group(2))
            continue
        m = _STMT_RE.match(line)
        if m is None:
            raise LoadError(path, lineno, 1, f"unrecognized statement {line!r}")
        addr_text, keyword, payload = m.group(1), m.group(2), m.group(3)
        try:
            addr = parse_a1(addr_text, default_sheet=sheet.name)
        except AddressParseError as exc:
            raise LoadError(path, lineno, 1, str(exc))
        if addr.sheet != sheet.name:
            raise LoadError(path, lineno, 1,
                            "cell statements may not carry a sheet prefix")
        key = (sheet.name, addr.row, addr.col)
        if keyword == "fmt":
            if payload is None:
                raise LoadError(path, lineno, 1, "fmt needs at least one key")
            fmt = _parse_fmt(payload, sheet.fmt_at(addr.row, addr.col),
                             path, lineno)
            sheet.merge_format(addr.row, addr.col, fmt)
            continue
        if key in defined:
            raise LoadError(path, lineno, 1,
                            f"duplicate definition of {addr_text}")
        defined.add(key)
        if keyword == "num":
            if payload is None:
                raise LoadError(path, lineno, 1, "num needs a value")
            try:
                content = CellContent.of_number(Decimal(payload.strip()))
            except InvalidOperation:
                raise LoadError(path, lineno, 1, f"bad number {payload.strip()!r}")
        elif keyword == "label":
            content = CellContent.label(payload if payload is not None else "")
        else:  # formula
            if payload is None or not payload.startswith("="):
                raise LoadError(path, lineno, 1, "formula must start with '='")
            try:
                ast = parse_formula(payload)
            except FormulaParseError as exc:
                raise LoadError(path, lineno, exc.offset + 1, str(exc))
            content = CellContent.formula(payload, ast)
        fmt = sheet.fmt_at(addr.row, addr.col)
        sheet.set_cell(addr.row, addr.col, content, fmt)
    finish_sheet()

    for sheet in workbook.sheets:
        declared = dimensions.get(sheet.name)
        extent = full_extent(sheet)
        if declared is None:
            sheet.declared_extent = extent
        elif extent is None:
            sheet.declared_extent = declared
        else:
            sheet.declared_extent = CellAddress(
                sheet.name, max(declared.row, extent.row),
                max(declared.col, extent.col))
    return workbook


def load_text(path: str | Path) -> Workbook:
    """Load a workbook written in the text fixture grammar."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise LoadError(str(path), 0, 0, f"cannot read file: {exc}")
    return load_text_string(text, str(path))


# --- xlsx subset ------------------------------------------------------------------

_NS_MAIN = "http://schemas.openxmlformats.org/spreadsheetml/2006/main"
_NS_REL = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
_NS_PKG_REL = "http://schemas.openxmlformats.org/package/2006/relationships"


def _tag(name: str) -> str:
    return f"{{{_NS_MAIN}}}{name}"


_BUILTIN_NUMFMTS = {
    0: "General", 1: "0", 2: "0.00", 3: "#,##0", 4: "#,##0.00",
    9: "0%", 10: "0.00%", 11: "0.00E+00", 14: "mm-dd-yy", 49: "@",
}


def _parse_part(archive: zipfile.ZipFile, name: str,
                path: str) -> ElementTree.Element:
    try:
        data = archive.read(name)
    except KeyError:
        raise LoadError(path, 0, 0, f"missing part {name}")
    try:
        return ElementTree.fromstring(data)
    except ElementTree.ParseError as exc:
        raise LoadError(path, 0, 0, f"malformed XML in {name}: {exc}")


def _shared_strings(archive: zipfile.ZipFile, path: str) -> list[str]:
    if "xl/sharedStrings.xml" not in archive.namelist():
        return []
    root = _parse_part(archive, "xl/sharedStrings.xml", path)
    strings = []
    for si in root.findall(_tag("si")):
        parts = [t.text or "" for t in si.iter(_tag("t"))]
        strings.append("".join(parts))
    return strings


def _styles(archive: zipfile.ZipFile, path: str) -> list[CellFormat]:
    if "xl/styles.xml" not in archive.namelist():
        return [CellFormat()]
    root = _parse_part(archive, "xl/styles.xml", path)

    numfmts = dict(_BUILTIN_NUMFMTS)
    numfmts_el = root.find(_tag("numFmts"))
    if numfmts_el is not None:
        for el in numfmts_el.findall(_tag("numFmt")):
            numfmts[int(el.get("numFmtId", "0"))] = el.get("formatCode", "")

    fonts = []
    fonts_el = root.find(_tag("fonts"))
    if fonts_el is not None:
        for font in fonts_el.findall(_tag("font")):
            sz = font.find(_tag("sz"))
            color = font.find(_tag("color"))
            fonts.append({
                "size": float(sz.get("val")) if sz is not None and sz.get("val") else None,
                "bold": font.find(_tag("b")) is not None,
                "italic": font.find(_tag("i")) is not None,
                "underline": font.find(_tag("u")) is not None,
                "color": color.get("rgb") if color is not None else None,
            })

    fills = []
    fills_el = root.find(_tag("fills"))
    if fills_el is not None:
        for fill in fills_el.findall(_tag("fill")):
            pattern = fill.find(_tag("patternFill"))
            bg = None
            if pattern is not None and pattern.get("patternType") not in (None, "none", "gray125"):
                fg = pattern.find(_tag("fgColor"))
                if fg is not None:
                    bg = fg.get("rgb") or fg.get("indexed")
            fills.append(bg)

    borders = []
    borders_el = root.find(_tag("borders"))
    if borders_el is not None:
        for border in borders_el.findall(_tag("border")):
            borders.append(any(side.get("style") for side in border))

    formats: list[CellFormat] = []
    xfs_el = root.find(_tag("cellXfs"))
    if xfs_el is None:
        return [CellFormat()]
    default_font = fonts[0] if fonts else None
    for i, xf in enumerate(xfs_el.findall(_tag("xf"))):
        font_id = int(xf.get("fontId", "0"))
        fill_id = int(xf.get("fillId", "0"))
        border_id = int(xf.get("borderId", "0"))
        numfmt_id = int(xf.get("numFmtId", "0"))
        font = fonts[font_id] if font_id < len(fonts) else None
        hidden = locked = False
        protection = xf.find(_tag("protection"))
        if protection is not None:
            hidden = protection.get("hidden") in ("1", "true")
            locked = protection.get("locked") in ("1", "true")
        size = None
        bold = italic = underline = False
        color = None
        if font is not None:
            bold, italic, underline = font["bold"], font["italic"], font["underline"]
            color = font["color"]
            if font["size"] is not None and (
                    default_font is None or i > 0 and font["size"] != default_font["size"]):
                size = font["size"]
        number_format = numfmts.get(numfmt_id)
        formats.append(CellFormat(
            font_size=size,
            bold=bold, italic=italic, underline=underline,
            font_color=color,
            background_color=fills[fill_id] if fill_id < len(fills) else None,
            number_format=None if numfmt_id == 0 else number_format,
            hidden=hidden, locked=locked,
            border=borders[border_id] if border_id < len(borders) else False,
        ))
    if formats:
        formats[0] = CellFormat()  # style 0 is the workbook default
    return formats


def _defined_names(root: ElementTree.Element, path: str) -> dict[str, object]:
    names: dict[str, object] = {}
    container = root.find(_tag("definedNames"))
    if container is None:
        return names
    for el in container.findall(_tag("definedName")):
        name = el.get("name")
        text = (el.text or "").strip()
        if not name or not text:
            continue
        try:
            if ":" in text.split("!")[-1]:
                left, right = text.rsplit(":", 1)
                start = parse_a1(left.replace("$", ""))
                end = parse_a1(right.replace("$", ""), default_sheet=start.sheet)
                names[name] = (start, end)
            else:
                names[name] = parse_a1(text.replace("$", ""))
        except AddressParseError:
            continue  # names bound to formulas or constants are out of scope
    return names


def load_xlsx(path: str | Path) -> Workbook:
    """Load the xlsx subset: cells, formulas, dimension, styles, names, widths.

    Cached formula strings are used verbatim; stored results are ignored.
    Shared formulas are expanded to per-cell text. Charts, pivots and other
    unsupported parts are ignored with a notice on the workbook.
    """
    spath = str(path)
    try:
        archive = zipfile.ZipFile(path)
    except (zipfile.BadZipFile, OSError) as exc:
        raise LoadError(spath, 0, 0, f"not a readable xlsx/zip file: {exc}")
    with archive:
        names = set(archive.namelist())
        wb_root = _parse_part(archive, "xl/workbook.xml", spath)
        rels_root = _parse_part(archive, "xl/_rels/workbook.xml.rels", spath)
        rels = {}
        for rel in rels_root.iter(f"{{{_NS_PKG_REL}}}Relationship"):
            target = rel.get("Target", "")
            if target.startswith("/"):
                target = target.lstrip("/")
            else:
                target = normpath("xl/" + target)
            rels[rel.get("Id")] = target
        strings = _shared_strings(archive, spath)
        formats = _styles(archive, spath)

        workbook = Workbook()
        workbook.defined_names = _defined_names(wb_root, spath)
        for notice_dir, label in (("xl/charts/", "charts"),
                                  ("xl/pivotTables/", "pivot tables"),
                                  ("xl/drawings/", "drawings")):
            if any(n.startswith(notice_dir) for n in names):
                workbook.load_notices.append(f"ignored unsupported {label}")

        sheets_el = wb_root.find(_tag("sheets"))
        if sheets_el is None:
            raise LoadError(spath, 0, 0, "workbook part lists no sheets")
        for sheet_el in sheets_el.findall(_tag("sheet")):
            name = sheet_el.get("name") or "Sheet"
            rid = sheet_el.get(f"{{{_NS_REL}}}id")
            part = rels.get(rid)
            if part is None or part not in names:
                raise LoadError(spath, 0, 0, f"missing worksheet part for {name!r}")
            sheet = workbook.add_sheet(name)
            sheet.hidden = sheet_el.get("state") in ("hidden", "veryHidden")
            _load_sheet_part(archive, part, sheet, strings, formats, spath)
            if b"<sheetProtection" in archive.read(part):
                workbook.protection = True
    return workbook


def _load_sheet_part(archive: zipfile.ZipFile, part: str, sheet: Sheet,
                     strings: list[str], formats: list[CellFormat],
                     path: str) -> None:
    root = _parse_part(archive, part, path)

    declared: CellAddress | None = None
    dim = root.find(_tag("dimension"))
    if dim is not None and dim.get("ref"):
        corner = dim.get("ref", "").split(":")[-1]
        try:
            addr = parse_a1(corner.replace("$", ""), default_sheet=sheet.name)
            declared = CellAddress(sheet.name, addr.row, addr.col)
        except AddressParseError:
            declared = None

    cols = root.find(_tag("cols"))
    if cols is not None:
        for col in cols.findall(_tag("col")):
            lo = int(col.get("min", "1"))
            hi = int(col.get("max", "1"))
            hidden = col.get("hidden") in ("1", "true")
            width = 0.0 if hidden else float(col.get("width", "8.43"))
            for c in range(lo, hi + 1):
                sheet.column_widths[c] = width

    shared: dict[str, tuple[object, int, int]] = {}
    data = root.find(_tag("sheetData"))
    if data is None:
        sheet.declared_extent = declared or full_extent(sheet)
        return
    for row_el in data.findall(_tag("row")):
        if row_el.get("hidden") in ("1", "true"):
            sheet.row_heights[int(row_el.get("r", "0") or 0)] = 0.0
        elif row_el.get("ht"):
            sheet.row_heights[int(row_el.get("r", "0") or 0)] = float(row_el.get("ht"))
        for c_el in row_el.findall(_tag("c")):
            ref = c_el.get("r")
            if not ref:
                continue
            try:
                addr = parse_a1(ref, default_sheet=sheet.name)
            except AddressParseError:
                raise LoadError(path, 0, 0, f"bad cell reference {ref!r} in {part}")
            style_id = int(c_el.get("s", "0"))
            fmt = formats[style_id] if style_id < len(formats) else CellFormat()
            ctype = c_el.get("t", "n")
            v_el = c_el.find(_tag("v"))
            f_el = c_el.find(_tag("f"))
            content = None
            if f_el is not None:
                ftext = f_el.text or ""
                if f_el.get("t") == "shared":
                    si = f_el.get("si", "")
                    if ftext:
                        try:
                            ast = parse_formula("=" + ftext)
                        except FormulaParseError as exc:
                            raise LoadError(path, 0, 0,
                                            f"cell {ref}: bad formula: {exc}")
                        shared[si] = (ast, addr.row, addr.col)
                    else:
                        master = shared.get(si)
                        if master is None:
                            raise LoadError(path, 0, 0,
                                            f"cell {ref}: shared formula "
                                            f"{si!r} has no master")
                        ast = translate(master[0], addr.row - master[1],
                                        addr.col - master[2])
                    content = CellContent.formula(print_formula(ast), ast)
                else:
                    try:
                        ast = parse_formula("=" + ftext)
                    except FormulaParseError as exc:
                        raise LoadError(path, 0, 0, f"cell {ref}: bad formula: {exc}")
                    content = CellContent.formula("=" + ftext, ast)
            elif ctype == "s" and v_el is not None and v_el.text is not None:
                index = int(v_el.text)
                if index >= len(strings):
                    raise LoadError(path, 0, 0, f"cell {ref}: shared string "
                                                f"{index} out of range")
                content = CellContent.label(strings[index])
            elif ctype == "inlineStr":
                is_el = c_el.find(_tag("is"))
                text = "".join(t.text or "" for t in is_el.iter(_tag("t"))) \
                    if is_el is not None else ""
                content = CellContent.label(text)
            elif ctype == "str" and v_el is not None:
                content = CellContent.label(v_el.text or "")
            elif ctype == "b" and v_el is not None:
                content = CellContent.boolean(v_el.text == "1")
            elif ctype == "e" and v_el is not None:
                content = CellContent.error(v_el.text or "#VALUE!")
            elif v_el is not None and v_el.text is not None:
                try:
                    content = CellContent.of_number(Decimal(v_el.text))
                except InvalidOperation:
                    raise LoadError(path, 0, 0, f"cell {ref}: bad number "
                                                f"{v_el.text!r}")
            if content is not None:
                sheet.set_cell(addr.row, addr.col, content, fmt)
            elif not fmt.is_default():
                sheet.merge_format(addr.row, addr.col, fmt)

    extent = full_extent(sheet)
    if declared is None:
        sheet.declared_extent = extent
    elif extent is None:
        sheet.declared_extent = declared
    else:
        sheet.declared_extent = CellAddress(
            sheet.name, max(declared.row, extent.row),
            max(declared.col, extent.col))


def load_workbook(path: str | Path, input_format: str = "auto") -> Workbook:
    """Dispatch on extension: .xlsx loads the zip subset, anything else the
    text grammar. ``input_format`` may force 'text' or 'xlsx'."""
    if input_format == "auto":
        input_format = "xlsx" if str(path).lower().endswith(".xlsx") else "text"
    if input_format == "xlsx":
        return load_xlsx(path)
    if input_format == "text":
        return load_text(path)
    raise LoadError(str(path), 0, 0, f"unknown input format {input_format!r}")
