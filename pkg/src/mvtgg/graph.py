"""Typed graphs with bookkeeping.

Elements (nodes and edges) share one id space. Ids below ``ENGINE_ID_BASE``
belong to callers (history files, rule patterns); ids the engine allocates
itself start at ``ENGINE_ID_BASE`` so they never collide with ids a caller
may introduce later.

Bookkeeping is kept beside the regular elements: an optional bookkeeping
node and at most one bookkeeping edge per marked element.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass

from .errors import ConfigurationError, ContractViolation, InputError

ENGINE_ID_BASE = 1 << 32

NODE = "node"
EDGE = "edge"

SOURCE = "S"
CORR = "C"
TARGET = "T"


@dataclass(frozen=True)
class EdgeType:
    name: str
    source: str
    target: str
    # target names an edge type instead of a node type
    targets_edge: bool = False
    domain: str | None = None


class TypeGraph:
    """Node and edge types, optionally tagged with a triple domain (S/C/T)."""

    def __init__(
        self,
        node_types: Mapping[str, str | None] | Iterable[str],
        edge_types: Iterable[EdgeType] = (),
    ):
        if isinstance(node_types, Mapping):
            self.node_types: dict[str, str | None] = dict(node_types)
        else:
            self.node_types = {}
            for name in node_types:
                if name in self.node_types:
                    raise ConfigurationError(f"duplicate node type {name!r}")
                self.node_types[name] = None
        self.edge_types: dict[str, EdgeType] = {}
        for et in edge_types:
            if et.name in self.edge_types:
                raise ConfigurationError(f"duplicate edge type {et.name!r}")
            self.edge_types[et.name] = et
        for et in self.edge_types.values():
            if et.source not in self.node_types:
                raise ConfigurationError(f"edge type {et.name!r}: unknown source type {et.source!r}")
            known = self.edge_types if et.targets_edge else self.node_types
            if et.target not in known:
                raise ConfigurationError(f"edge type {et.name!r}: unknown target type {et.target!r}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TypeGraph):
            return NotImplemented
        return self is other or (
            self.node_types == other.node_types and self.edge_types == other.edge_types
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"TypeGraph({len(self.node_types)} node types, {len(self.edge_types)} edge types)"

    def domain_of(self, type_name: str) -> str | None:
        if type_name in self.node_types:
            return self.node_types[type_name]
        return self.edge_types[type_name].domain

    def kind_of(self, type_name: str) -> str:
        if type_name in self.node_types:
            return NODE
        if type_name in self.edge_types:
            return EDGE
        raise KeyError(type_name)

    def restricted(self, domains: Iterable[str]) -> TypeGraph:
        keep = set(domains)
        return TypeGraph(
            {n: d for n, d in self.node_types.items() if d in keep},
            [et for et in self.edge_types.values() if et.domain in keep],
        )

    def includes(self, other: TypeGraph) -> bool:
        """True if every type of ``other`` is declared here with the same endpoints."""
        if any(n not in self.node_types for n in other.node_types):
            return False
        for name, et in other.edge_types.items():
            mine = self.edge_types.get(name)
            if mine is None or (mine.source, mine.target, mine.targets_edge) != (
                et.source, et.target, et.targets_edge
            ):
                return False
        return True


@dataclass(frozen=True)
class Element:
    id: int
    kind: str
    type: str
    src: int | None = None
    tgt: int | None = None


class Graph:
    """A typed graph with an optional bookkeeping node and bookkeeping edges.

    Indexes by type and by incidence are maintained on every update, so the
    matcher can extend partial matches along edges without scanning.
    """

    def __init__(self, type_graph: TypeGraph):
        self.type_graph = type_graph
        self._elements: dict[int, Element] = {}
        self._by_type: dict[str, set[int]] = {}
        self._out: dict[int, set[int]] = {}
        self._in: dict[int, set[int]] = {}
        self.bookkeeping_node: int | None = None
        self._marks: dict[int, int] = {}
        self._next_id = ENGINE_ID_BASE

    # -- element access -------------------------------------------------

    def __contains__(self, element_id: object) -> bool:
        return element_id in self._elements

    def __len__(self) -> int:
        return len(self._elements)

    def __iter__(self) -> Iterator[int]:
        return iter(self._elements)

    def __repr__(self) -> str:
        return f"Graph({len(self.nodes())} nodes, {len(self.edges())} edges, {len(self._marks)} marked)"

    def element(self, element_id: int) -> Element:
        try:
            return self._elements[element_id]
        except KeyError:
            raise InputError(f"unknown element {element_id}") from None

    def elements(self) -> list[Element]:
        return list(self._elements.values())

    def nodes(self) -> list[int]:
        return [i for i, e in self._elements.items() if e.kind == NODE]

    def edges(self) -> list[int]:
        return [i for i, e in self._elements.items() if e.kind == EDGE]

    def of_type(self, type_name: str) -> set[int]:
        return self._by_type.get(type_name, set())

    def out_edges(self, element_id: int) -> set[int]:
        return self._out[element_id]

    def in_edges(self, element_id: int) -> set[int]:
        return self._in[element_id]

    def domain_of(self, element_id: int) -> str | None:
        return self.type_graph.domain_of(self._elements[element_id].type)

    def ids_in_domain(self, domain: str) -> set[int]:
        tg = self.type_graph
        return {i for i, e in self._elements.items() if tg.domain_of(e.type) == domain}

    # -- mutation -------------------------------------------------------

    def fresh_id(self) -> int:
        i = self._next_id
        self._next_id += 1
        return i

    def _claim(self, element_id: int | None) -> int:
        if element_id is None:
            return self.fresh_id()
        if element_id in self._elements or element_id == self.bookkeeping_node or element_id < 0:
            raise InputError(f"element id {element_id} already in use")
        if element_id >= self._next_id:
            self._next_id = element_id + 1
        return element_id

    def add_node(self, type_name: str, element_id: int | None = None) -> int:
        if type_name not in self.type_graph.node_types:
            raise InputError(f"unknown node type {type_name!r}")
        i = self._claim(element_id)
        self._insert(Element(i, NODE, type_name))
        return i

    def add_edge(self, type_name: str, src: int, tgt: int, element_id: int | None = None) -> int:
        et = self.type_graph.edge_types.get(type_name)
        if et is None:
            raise InputError(f"unknown edge type {type_name!r}")
        s = self._elements.get(src)
        t = self._elements.get(tgt)
        if s is None or t is None:
            raise InputError(f"edge of type {type_name!r} has a dangling endpoint ({src} -> {tgt})")
        if s.kind != NODE or s.type != et.source:
            raise InputError(f"edge type {type_name!r} must start at {et.source!r}, got {s.type!r}")
        want = EDGE if et.targets_edge else NODE
        if t.kind != want or t.type != et.target:
            raise InputError(f"edge type {type_name!r} must end at {et.target!r}, got {t.type!r}")
        i = self._claim(element_id)
        self._insert(Element(i, EDGE, type_name, src, tgt))
        return i

    def add(self, element: Element) -> int:
        if element.kind == NODE:
            return self.add_node(element.type, element.id)
        return self.add_edge(element.type, element.src, element.tgt, element.id)  # type: ignore[arg-type]

    def _insert(self, e: Element) -> None:
        self._elements[e.id] = e
        self._by_type.setdefault(e.type, set()).add(e.id)
        self._out[e.id] = set()
        self._in[e.id] = set()
        if e.kind == EDGE:
            self._out[e.src].add(e.id)  # type: ignore[index]
            self._in[e.tgt].add(e.id)  # type: ignore[index]

    def remove(self, element_id: int) -> None:
        e = self.element(element_id)
        if self._out[element_id] or self._in[element_id]:
            raise InputError(f"element {element_id} still has incident edges")
        del self._elements[element_id]
        self._by_type[e.type].discard(element_id)
        del self._out[element_id]
        del self._in[element_id]
        if e.kind == EDGE:
            self._out[e.src].discard(element_id)  # type: ignore[index]
            self._in[e.tgt].discard(element_id)  # type: ignore[index]
        self._marks.pop(element_id, None)

    def remove_many(self, ids: Iterable[int]) -> None:
        """Remove a set of elements; edges (and edges on edges) go before their endpoints."""
        for e in reversed(creation_order(self._elements[i] for i in set(ids))):
            self.remove(e.id)

    # -- bookkeeping ----------------------------------------------------

    def ensure_bookkeeping_node(self) -> int:
        if self.bookkeeping_node is None:
            self.bookkeeping_node = self.fresh_id()
        return self.bookkeeping_node

    def mark(self, element_id: int, edge_id: int | None = None) -> None:
        if element_id not in self._elements:
            raise InputError(f"cannot mark unknown element {element_id}")
        if element_id in self._marks:
            return
        self.ensure_bookkeeping_node()
        self._marks[element_id] = self.fresh_id() if edge_id is None else self._claim_mark(edge_id)

    def _claim_mark(self, edge_id: int) -> int:
        if edge_id in self._elements or edge_id in self._marks.values() or edge_id == self.bookkeeping_node:
            raise InputError(f"bookkeeping edge id {edge_id} already in use")
        if edge_id >= self._next_id:
            self._next_id = edge_id + 1
        return edge_id

    def unmark(self, element_id: int) -> None:
        self._marks.pop(element_id, None)

    def is_marked(self, element_id: int) -> bool:
        return element_id in self._marks

    def marked(self) -> set[int]:
        return set(self._marks)

    def bookkeeping_edges(self) -> dict[int, int]:
        """Map marked element -> bookkeeping edge id."""
        return dict(self._marks)

    # -- copies ---------------------------------------------------------

    def copy(self) -> Graph:
        g = Graph(self.type_graph)
        g._elements = dict(self._elements)
        g._by_type = {t: set(s) for t, s in self._by_type.items()}
        g._out = {i: set(s) for i, s in self._out.items()}
        g._in = {i: set(s) for i, s in self._in.items()}
        g.bookkeeping_node = self.bookkeeping_node
        g._marks = dict(self._marks)
        g._next_id = self._next_id
        return g

    def retyped(self, type_graph: TypeGraph) -> Graph:
        """Same elements over a larger type graph (e.g. source graph -> triple graph)."""
        if not type_graph.includes(self.type_graph):
            raise ConfigurationError("target type graph does not include the graph's types")
        g = self.copy()
        g.type_graph = type_graph
        return g

    def structure(self) -> tuple[frozenset[Element], frozenset[int]]:
        """Id-exact content, handy for equality checks in tests."""
        return frozenset(self._elements.values()), frozenset(self._marks)


def creation_order(elements: Iterable[Element]) -> list[Element]:
    """Nodes first, then edges once their endpoints are placed."""
    elems = list(elements)
    ids = {e.id for e in elems}
    placed: set[int] = set()
    out: list[Element] = []
    for e in sorted((e for e in elems if e.kind == NODE), key=lambda e: e.id):
        out.append(e)
        placed.add(e.id)
    rest = sorted((e for e in elems if e.kind == EDGE), key=lambda e: e.id)
    while rest:
        later = []
        for e in rest:
            deps = {e.src, e.tgt} & ids
            if deps <= placed:
                out.append(e)
                placed.add(e.id)
            else:
                later.append(e)
        if len(later) == len(rest):
            raise ContractViolation("cyclic edge-on-edge references")
        rest = later
    return out
