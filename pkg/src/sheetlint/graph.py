"""Cell dependency graph: arcs of precedence, classification, cycles, DOT export."""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import AuditConfig
from .formula import (
    CellRef,
    NameRef,
    RangeRef,
    extract_references,
    iter_nodes,
    print_formula,
    strip_parens,
    BinaryOp,
    FunctionCall,
    StringLit,
)
from .model import CellAddress, CellKind, Workbook, parse_a1

MAX_RANGE_CELLS = 100_000  # refuse to expand anything larger


class NoSuchCell(KeyError):
    """The requested cell is not a node of the graph."""


@dataclass
class NodeInfo:
    kind: CellKind
    blank: bool = False
    bare_ref: CellAddress | None = None
    top_function: str | None = None
    interpreted_output_shape: bool = False


@dataclass
class CellGraphClass:
    spurious: bool = False
    dangling: bool = False
    dangling_kind: str | None = None
    perverse_target: bool = False
    on_cycle: bool = False
    bottom_line: bool = False

    @property
    def any_flag(self) -> bool:
        return (self.spurious or self.dangling or self.perverse_target
                or self.on_cycle or self.bottom_line)


class DependencyGraph:
    """Directed graph with arcs precedent -> dependent, ranges expanded."""

    def __init__(self, sheet_order: list[str],
                 defined_names: dict[str, object]) -> None:
        self.sheet_order = sheet_order
        self.defined_names = {k.upper(): v for k, v in defined_names.items()}
        self.nodes: dict[CellAddress, NodeInfo] = {}
        self.arcs: set[tuple[CellAddress, CellAddress]] = set()
        self._precedents: dict[CellAddress, list[CellAddress]] = {}
        self._dependents: dict[CellAddress, list[CellAddress]] = {}
        self.range_origin: dict[tuple[CellAddress, CellAddress], str | None] = {}
        self.unresolved: dict[CellAddress, list[str]] = {}

    def sheet_index(self, name: str) -> int:
        low = name.lower()
        for i, s in enumerate(self.sheet_order):
            if s.lower() == low:
                return i
        return len(self.sheet_order)

    def addr_key(self, addr: CellAddress) -> tuple[int, int, int]:
        return (self.sheet_index(addr.sheet), addr.row, addr.col)

    def add_node(self, addr: CellAddress, info: NodeInfo) -> None:
        self.nodes.setdefault(addr, info)

    def add_arc(self, precedent: CellAddress, dependent: CellAddress,
                origin: str | None = None) -> None:
        if (precedent, dependent) not in self.arcs:
            self.arcs.add((precedent, dependent))
            self._precedents.setdefault(dependent, []).append(precedent)
            self._dependents.setdefault(precedent, []).append(dependent)
        self.range_origin.setdefault((precedent, dependent), origin)

    def precedents_of(self, addr: CellAddress) -> list[CellAddress]:
        return self._precedents.get(addr, [])

    def dependents_of(self, addr: CellAddress) -> list[CellAddress]:
        return self._dependents.get(addr, [])

    def formula_cells(self) -> list[CellAddress]:
        return sorted((a for a, n in self.nodes.items()
                       if n.kind is CellKind.FORMULA), key=self.addr_key)

    def blank_nodes(self) -> list[CellAddress]:
        return sorted((a for a, n in self.nodes.items() if n.blank),
                      key=self.addr_key)

    def numeric_cells(self) -> list[CellAddress]:
        """Formulas plus constants that something depends on."""
        out = []
        for addr, info in self.nodes.items():
            if info.kind is CellKind.FORMULA:
                out.append(addr)
            elif (info.kind in (CellKind.NUMBER, CellKind.BOOL, CellKind.ERROR)
                  and self.dependents_of(addr)):
                out.append(addr)
        return sorted(out, key=self.addr_key)


def _texty(node: object) -> bool:
    node = strip_parens(node)
    if isinstance(node, StringLit):
        return True
    if isinstance(node, BinaryOp) and node.op in ("&", "+"):
        return _texty(node.left) or _texty(node.right)
    if isinstance(node, FunctionCall) and node.name in ("TEXT", "CONCATENATE", "CONCAT"):
        return True
    return False


def _interpreted_output_shape(ast: object) -> bool:
    """The punch-line-repeater: IF whose branches build display strings."""
    top = strip_parens(ast)
    if not (isinstance(top, FunctionCall) and top.name == "IF" and len(top.args) >= 2):
        return False
    branches = top.args[1:3]
    return any(_texty(b) for b in branches) and bool(extract_references(ast))


def build_graph(workbook: Workbook) -> DependencyGraph:
    """Construct the full arc set for a workbook whose formulas are parsed.

    References to cells that hold nothing become flagged blank nodes;
    references that cannot be resolved at all (missing sheets, unknown
    names, oversized ranges) are recorded per formula, never raised.
    """
    graph = DependencyGraph([s.name for s in workbook.sheets],
                            dict(workbook.defined_names))
    for sheet in workbook.sheets:
        for addr, cell in sheet.populated():
            info = NodeInfo(kind=cell.content.kind)
            if cell.content.kind is CellKind.FORMULA and cell.content.ast is not None:
                top = strip_parens(cell.content.ast)
                if isinstance(top, FunctionCall):
                    info.top_function = top.name
                info.interpreted_output_shape = _interpreted_output_shape(cell.content.ast)
            graph.add_node(addr, info)

    sheet_names = {s.name.lower(): s for s in workbook.sheets}

    def target_exists(target: CellAddress) -> bool:
        sheet = sheet_names.get(target.sheet.lower())
        if sheet is None:
            return False
        return not sheet.content_at(target.row, target.col).is_empty

    def link(target: CellAddress, dependent: CellAddress, origin: str | None) -> None:
        if target not in graph.nodes:
            graph.add_node(target, NodeInfo(kind=CellKind.EMPTY, blank=True))
        graph.add_arc(target, dependent, origin)

    for sheet in workbook.sheets:
        for addr, cell in sheet.populated():
            if cell.content.kind is not CellKind.FORMULA or cell.content.ast is None:
                continue
            ast = cell.content.ast
            problems: list[str] = []
            for ref, _ in extract_references(ast):
                if isinstance(ref, RangeRef):
                    ref_sheet = ref.start.sheet if ref.start.sheet is not None else sheet.name
                    if ref_sheet.lower() not in sheet_names:
                        problems.append(f"unknown sheet {ref_sheet!r}")
                        continue
                    if ref.size > MAX_RANGE_CELLS:
                        problems.append(f"range too large to expand "
                                        f"({ref.size} cells)")
                        continue
                    origin = print_formula(ref, leading_eq=False)
                    for target in ref.cells(sheet.name):
                        link(target, addr, origin)
                else:
                    target = ref.resolve(sheet.name)
                    if target.sheet.lower() not in sheet_names:
                        problems.append(f"unknown sheet {target.sheet!r}")
                        continue
                    link(target, addr, None)
            for node in iter_nodes(ast):
                if isinstance(node, NameRef):
                    resolved = graph.defined_names.get(node.name.upper())
                    if resolved is None:
                        problems.append(f"unknown name {node.name!r}")
                    elif isinstance(resolved, CellAddress):
                        link(resolved, addr, node.name)
                    elif isinstance(resolved, tuple):
                        start, end = resolved
                        for row in range(start.row, end.row + 1):
                            for col in range(start.col, end.col + 1):
                                link(CellAddress(start.sheet, row, col), addr, node.name)
            if problems:
                graph.unresolved[addr] = problems

            bare = strip_parens(ast)
            if isinstance(bare, CellRef):
                target = bare.resolve(sheet.name)
                if target != addr and target.sheet.lower() in sheet_names:
                    graph.nodes[addr].bare_ref = target
    return graph


def find_cycles(graph: DependencyGraph) -> list[list[CellAddress]]:
    """Strongly connected components with >= 2 nodes, plus self-loops.

    Iterative Tarjan; each cycle is rotated to start at its smallest cell and
    the list is ordered by that cell.
    """
    index: dict[CellAddress, int] = {}
    lowlink: dict[CellAddress, int] = {}
    on_stack: set[CellAddress] = set()
    stack: list[CellAddress] = []
    counter = [0]
    sccs: list[list[CellAddress]] = []

    ordered = sorted(graph.nodes, key=graph.addr_key)

    def successors(v: CellAddress) -> list[CellAddress]:
        return graph.dependents_of(v)

    for root in ordered:
        if root in index:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = lowlink[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = lowlink[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                if len(comp) > 1 or (v, v) in graph.arcs:
                    comp.sort(key=graph.addr_key)
                    sccs.append(comp)
    sccs.sort(key=lambda c: graph.addr_key(c[0]))
    return sccs


def resolve_bottom_line(graph: DependencyGraph,
                        config: AuditConfig) -> set[CellAddress]:
    """Resolve the configured bottom line, or fall back to conventions.

    Order: explicit addresses and defined names from the config; then
    solver-objective names (WBMAX/WBMIN); then any sink formula whose
    precedence tree covers at least half of the numeric cells.
    """
    resolved: set[CellAddress] = set()
    for entry in config.bottom_line:
        name = entry.strip()
        if not name:
            continue
        target = graph.defined_names.get(name.upper())
        if isinstance(target, CellAddress):
            resolved.add(target)
            continue
        if isinstance(target, tuple):
            resolved.add(target[0])
            continue
        addr = parse_a1(name)
        if addr.sheet:
            resolved.add(addr)
        else:
            for sheet in graph.sheet_order:
                candidate = CellAddress(sheet, addr.row, addr.col)
                if candidate in graph.nodes:
                    resolved.add(candidate)
    if resolved:
        return resolved

    for objective_name in ("WBMAX", "WBMIN"):
        target = graph.defined_names.get(objective_name)
        if isinstance(target, CellAddress):
            resolved.add(target)
        elif isinstance(target, tuple):
            resolved.add(target[0])
    if resolved:
        return resolved

    numeric = set(graph.numeric_cells())
    if not numeric:
        return resolved
    for addr in graph.formula_cells():
        if graph.dependents_of(addr):
            continue
        info = graph.nodes[addr]
        if info.top_function and info.top_function.upper() in config.solver_functions:
            continue
        seen = {addr}
        frontier = [addr]
        while frontier:
            current = frontier.pop()
            for p in graph.precedents_of(current):
                if p not in seen:
                    seen.add(p)
                    frontier.append(p)
        coverage = len(seen & numeric) / len(numeric)
        if coverage >= config.bottom_line_coverage:
            resolved.add(addr)
    return resolved


def classify_graph(graph: DependencyGraph,
                   config: AuditConfig) -> dict[CellAddress, CellGraphClass]:
    """Set the per-node flags: spurious, dangling, perverse target, cycle, bottom line.

    Solver-constraint calls (default: WB) are never dangling; the solver
    reads them even though no cell does. Constants whose every downstream
    formula is itself dangling are flagged as unused input.
    """
    classes = {addr: CellGraphClass() for addr in graph.nodes}

    on_cycle: set[CellAddress] = set()
    for cycle in find_cycles(graph):
        on_cycle.update(cycle)
    for addr in on_cycle:
        classes[addr].on_cycle = True

    bottom = resolve_bottom_line(graph, config)
    for addr in bottom:
        if addr in classes:
            classes[addr].bottom_line = True

    solver = {name.upper() for name in config.solver_functions}
    for addr, info in graph.nodes.items():
        if info.blank and graph.dependents_of(addr):
            classes[addr].perverse_target = True
        if info.kind is not CellKind.FORMULA:
            continue
        # self-references never set bare_ref, so 1-cycles stay unflagged here
        if info.bare_ref is not None:
            classes[addr].spurious = True
        if graph.dependents_of(addr):
            continue
        if addr in bottom:
            continue
        if info.top_function and info.top_function.upper() in solver:
            continue
        classes[addr].dangling = True
        classes[addr].dangling_kind = ("interpreted-output"
                                       if info.interpreted_output_shape
                                       else "intermediate")

    # Transitively unused constants: every forward path dies in dangling cells.
    alive = {addr for addr, info in graph.nodes.items()
             if info.kind is CellKind.FORMULA and not classes[addr].dangling}
    for addr, info in graph.nodes.items():
        if info.kind not in (CellKind.NUMBER, CellKind.BOOL, CellKind.ERROR):
            continue
        deps = graph.dependents_of(addr)
        if not deps:
            continue  # no dependents at all: a label, not a numeric cell
        seen = set(deps)
        frontier = list(deps)
        reaches_alive = False
        while frontier and not reaches_alive:
            current = frontier.pop()
            if current in alive:
                reaches_alive = True
                break
            for d in graph.dependents_of(current):
                if d not in seen:
                    seen.add(d)
                    frontier.append(d)
        if not reaches_alive:
            classes[addr].dangling = True
            classes[addr].dangling_kind = "unused-input"
    return classes


@dataclass
class PrecedenceNode:
    cell: CellAddress
    arc_length: int | None = None  # Chebyshev from the dependent; None cross-sheet
    cycle: bool = False
    children: list["PrecedenceNode"] = field(default_factory=list)

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


def arc_chebyshev(a: CellAddress, b: CellAddress) -> int | None:
    if a.sheet.lower() != b.sheet.lower():
        return None
    return max(abs(a.row - b.row), abs(a.col - b.col))


def precedence_tree(graph: DependencyGraph, root: CellAddress,
                    depth: int | None = None) -> PrecedenceNode:
    """Transitive precedents of ``root`` as a tree; cycles cut with a marker."""
    if root not in graph.nodes:
        raise NoSuchCell(root.qualified())

    def build(addr: CellAddress, path: set[CellAddress],
              remaining: int | None) -> PrecedenceNode:
        node = PrecedenceNode(addr)
        if remaining is not None and remaining <= 0:
            return node
        for p in sorted(graph.precedents_of(addr), key=graph.addr_key):
            if p in path:
                node.children.append(
                    PrecedenceNode(p, arc_length=arc_chebyshev(p, addr), cycle=True))
                continue
            child = build(p, path | {p},
                          None if remaining is None else remaining - 1)
            child.arc_length = arc_chebyshev(p, addr)
            node.children.append(child)
        return node

    return build(root, {root}, depth)


def _dot_id(addr: CellAddress) -> str:
    raw = f"{addr.sheet}_{addr.a1()}" if addr.sheet else addr.a1()
    return "".join(ch if ch.isalnum() or ch == "_" else "_" for ch in raw)


def is_backward(precedent: CellAddress, dependent: CellAddress) -> bool:
    """True when the precedent does not come earlier in row-major reading order."""
    if precedent.sheet.lower() != dependent.sheet.lower():
        return False  # cross-sheet arcs are a different defect, not a flow one
    if precedent.row != dependent.row:
        return precedent.row > dependent.row
    return precedent.col >= dependent.col


def export_dot(graph: DependencyGraph,
               classes: dict[CellAddress, CellGraphClass] | None = None) -> str:
    """Render the precedence graph in DOT.

    Only cells on at least one arc plus flagged cells appear. Spurious cells
    are orange, dangling red, blank targets grey dashed; backward arcs are
    dashed.
    """
    classes = classes or {}
    participating = {a for arc in graph.arcs for a in arc}
    for addr, cls in classes.items():
        if cls.any_flag:
            participating.add(addr)
    lines = ["digraph sheetlint {"]
    for addr in sorted(participating, key=graph.addr_key):
        attrs = [f'label="{addr.sheet}!{addr.a1()}"' if addr.sheet
                 else f'label="{addr.a1()}"']
        cls = classes.get(addr)
        if cls is not None:
            if cls.spurious:
                attrs.append('color="orange"')
            if cls.dangling:
                attrs.append('color="red"')
            if cls.perverse_target or (addr in graph.nodes and graph.nodes[addr].blank):
                attrs.append('style="dashed"')
                attrs.append('color="grey"')
            if cls.bottom_line:
                attrs.append('shape="doubleoctagon"')
        lines.append(f'  "{_dot_id(addr)}" [{", ".join(attrs)}];')
    for precedent, dependent in sorted(graph.arcs,
                                       key=lambda pd: (graph.addr_key(pd[0]),
                                                       graph.addr_key(pd[1]))):
        attrs = ""
        if is_backward(precedent, dependent):
            attrs = ' [style="dashed"]'
        lines.append(f'  "{_dot_id(precedent)}" -> "{_dot_id(dependent)}"{attrs};')
    lines.append("}")
    return "\n".join(lines) + "\n"
