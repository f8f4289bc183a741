"""Multi-version models.

Every original node and edge of the source and target domain becomes a node
of the adapted type graph; an original edge keeps its endpoints through two
reference edges ``<type>.src`` and ``<type>.tgt``. Correspondence nodes stay
nodes and correspondence links stay edges (re-pointed at the mv-node that
stands for the linked element).

Presence (p) and untranslated (u) version sets are stored per mv-node as
int bitmasks and are authoritative; cv/dv/ucv/udv edges to version nodes are
derived from them on demand (``full_graph``, snapshots).
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

from .errors import ConfigurationError, InputError
from .graph import EDGE, NODE, SOURCE, TARGET, EdgeType, Element, Graph, TypeGraph, creation_order
from .history import History
from .tgg import TripleTypeGraph
from .versions import VersionDag, VersionSet, materialize

VERSION = "version"
SUC = "suc"


def ref_src(edge_type: str) -> str:
    return f"{edge_type}.src"


def ref_tgt(edge_type: str) -> str:
    return f"{edge_type}.tgt"


class AdaptedTypeGraph(TypeGraph):
    """Adapted type graph plus the bookkeeping needed to translate back and forth."""

    def __init__(self, ttg: TripleTypeGraph):
        self.ttg = ttg
        merged = ttg.merged
        nodes: dict[str, str | None] = {}
        edges: list[EdgeType] = []
        # mv node type name -> original edge type, for edge-derived node types
        self.edge_derived: dict[str, EdgeType] = {}
        taken: set[str] = set()

        def claim(name: str) -> str:
            if name in taken:
                raise ConfigurationError(f"adapted type name {name!r} collides with another type")
            taken.add(name)
            return name

        for n, dom in merged.node_types.items():
            nodes[claim(n)] = dom
        for et in merged.edge_types.values():
            if et.domain in (SOURCE, TARGET):
                nodes[claim(et.name)] = et.domain
                self.edge_derived[et.name] = et
        for et in merged.edge_types.values():
            if et.domain in (SOURCE, TARGET):
                edges.append(EdgeType(claim(ref_src(et.name)), et.name, et.source, False, et.domain))
                edges.append(EdgeType(claim(ref_tgt(et.name)), et.name, et.target, False, et.domain))
            else:
                edges.append(EdgeType(claim(et.name), et.source, et.target, False, et.domain))
        self.element_types = dict(nodes)
        nodes[claim(VERSION)] = None
        edges.append(EdgeType(claim(SUC), VERSION, VERSION))
        for n, dom in self.element_types.items():
            for prefix in ("cv", "dv") + (("ucv", "udv") if dom == SOURCE else ()):
                edges.append(EdgeType(claim(f"{prefix}_{n}"), n, VERSION))
        super().__init__(nodes, edges)
        self.original = merged

    def presence_types(self, node_type: str) -> list[str]:
        dom = self.element_types[node_type]
        return [f"{p}_{node_type}" for p in ("cv", "dv") + (("ucv", "udv") if dom == SOURCE else ())]


def adapt_type_graph(ttg: TripleTypeGraph) -> AdaptedTypeGraph:
    return AdaptedTypeGraph(ttg)


def translate_graph(g: Graph, atg: AdaptedTypeGraph) -> Graph:
    """Encode a graph over the merged triple type graph as an mv graph without version machinery.

    Original elements keep their ids; reference edges get fresh ids.
    Bookkeeping is ignored.
    """
    out = Graph(atg)
    out._next_id = max(out._next_id, g._next_id)
    for e in creation_order(g.elements()):
        if e.kind == NODE:
            out.add_node(e.type, e.id)
        elif e.type in atg.edge_derived:
            out.add_node(e.type, e.id)
            out.add_edge(ref_src(e.type), e.id, e.src)  # type: ignore[arg-type]
            out.add_edge(ref_tgt(e.type), e.id, e.tgt)  # type: ignore[arg-type]
        else:
            out.add_edge(e.type, e.src, e.tgt, e.id)  # type: ignore[arg-type]
    return out


@dataclass
class CorrEntry:
    """How a correspondence node came to be: one multi-version rule application."""

    corr: int
    rule: str
    required: frozenset[int]
    targets: frozenset[int]
    covered: frozenset[int]
    applied: int
    match: dict[int, int] = field(default_factory=dict)
    created: tuple[int, ...] = ()


class MultiVersionModel:
    def __init__(self, atg: AdaptedTypeGraph, dag: VersionDag):
        self.atg = atg
        self.dag = dag
        self.graph = Graph(atg)
        self.p: dict[int, int] = {}
        self.u: dict[int, int] = {}
        # edge-derived mv-node -> (src mv-node, tgt mv-node)
        self.ends: dict[int, tuple[int, int]] = {}
        self.index: dict[int, CorrEntry] = {}
        self.covered_by: dict[int, set[int]] = {}

    @property
    def ttg(self) -> TripleTypeGraph:
        return self.atg.ttg

    def copy(self) -> MultiVersionModel:
        m = MultiVersionModel(self.atg, self.dag.copy())
        m.graph = self.graph.copy()
        m.p = dict(self.p)
        m.u = dict(self.u)
        m.ends = dict(self.ends)
        m.index = dict(self.index)
        m.covered_by = {k: set(v) for k, v in self.covered_by.items()}
        return m

    # -- element helpers ------------------------------------------------

    def mv_nodes(self) -> list[int]:
        tg = self.atg
        return [i for i, e in self.graph._elements.items() if e.kind == NODE and e.type in tg.element_types]

    def domain(self, i: int) -> str | None:
        return self.graph.domain_of(i)

    def origin(self, i: int) -> Element:
        """The original element an mv-node stands for (ids coincide)."""
        e = self.graph.element(i)
        if e.kind != NODE or e.type not in self.atg.element_types:
            raise InputError(f"{i} is not an mv-node")
        if e.type in self.atg.edge_derived:
            s, t = self.ends[i]
            return Element(i, EDGE, e.type, s, t)
        return Element(i, NODE, e.type)

    def add_element(self, e: Element, p: int, u: int = 0) -> None:
        """Add the mv encoding of original element ``e`` (same id)."""
        self.graph.add_node(e.type, e.id)
        if e.kind == EDGE:
            if e.type not in self.atg.edge_derived:
                raise InputError(f"edge type {e.type!r} has no mv encoding")
            self.graph.add_edge(ref_src(e.type), e.id, e.src)  # type: ignore[arg-type]
            self.graph.add_edge(ref_tgt(e.type), e.id, e.tgt)  # type: ignore[arg-type]
            self.ends[e.id] = (e.src, e.tgt)  # type: ignore[assignment]
        self.p[e.id] = p
        self.u[e.id] = u

    def register(self, entry: CorrEntry) -> None:
        self.index[entry.corr] = entry
        for x in entry.covered:
            self.covered_by.setdefault(x, set()).add(entry.corr)

    def present(self, i: int, t: int) -> bool:
        return bool(self.p.get(i, 0) >> t & 1)

    # -- version sets ---------------------------------------------------

    def presence_set(self, i: int) -> VersionSet:
        if i not in self.p:
            raise InputError(f"unknown mv-node {i}")
        return VersionSet(self.p[i])

    def untranslated_set(self, i: int) -> VersionSet:
        if i not in self.p:
            raise InputError(f"unknown mv-node {i}")
        return VersionSet(self.u.get(i, 0))

    def source_nodes(self) -> list[int]:
        return [i for i in self.p if self.domain(i) == SOURCE]

    def content(self, t: int) -> set[int]:
        return {i for i in self.source_nodes() if self.p[i] >> t & 1}

    def complete_versions(self) -> VersionSet:
        pending = 0
        for i in self.source_nodes():
            pending |= self.u[i]
        return self.dag.all() - VersionSet(pending)

    # -- projections ----------------------------------------------------

    def _check_version(self, t: int) -> None:
        if t not in self.dag:
            raise InputError(f"unknown version {t}")

    def proj(self, t: int, *, domains: Iterable[str] | None = None) -> Graph:
        """Version ``t`` re-expanded over the merged triple type graph."""
        self._check_version(t)
        keep = set(domains) if domains is not None else None
        g = Graph(self.atg.original)
        present = [i for i in self.p if self.p[i] >> t & 1 and (keep is None or self.domain(i) in keep)]
        for e in creation_order(self.origin(i) for i in present):
            g.add(e)
        for i, e in self.graph._elements.items():
            if e.kind == EDGE and e.type in self.atg.original.edge_types and e.src in g and e.tgt in g:
                g.add_edge(e.type, e.src, e.tgt, i)  # type: ignore[arg-type]
        return g

    def proj_bk(self, t: int, *, domains: Iterable[str] | None = None) -> Graph:
        g = self.proj(t, domains=domains)
        g.ensure_bookkeeping_node()
        for i in sorted(self.u):
            if self.u[i] >> t & 1 and i in g:
                g.mark(i)
        return g

    def projection_bookkeeping_set(self, t: int) -> set[int]:
        """Elements of version ``t`` whose mv-node does not have t in u."""
        g = self.proj(t)
        return {i for i in g if not (self.u.get(i, 0) >> t & 1)}

    # -- materialization ------------------------------------------------

    def materialize_version_set(self, i: int, flavor: str = "cv/dv") -> dict[str, list[int]]:
        if flavor == "cv/dv":
            bits, names = self.p[i], ("cv", "dv")
        elif flavor == "ucv/udv":
            if self.domain(i) != SOURCE:
                raise InputError("ucv/udv edges exist only for source-domain mv-nodes")
            bits, names = self.u[i], ("ucv", "udv")
        else:
            raise InputError(f"unknown flavor {flavor!r}")
        c, d = materialize(self.dag, VersionSet(bits))
        return {names[0]: c, names[1]: d}

    def full_graph(self) -> Graph:
        """The mv graph with version nodes, suc edges and materialized presence edges."""
        g = self.graph.copy()
        vnode = {t: g.add_node(VERSION) for t in self.dag.versions}
        for a, b in self.dag.edges:
            g.add_edge(SUC, vnode[a], vnode[b])
        for i in sorted(self.p):
            typ = self.graph.element(i).type
            flavors = ["cv/dv"] + (["ucv/udv"] if self.domain(i) == SOURCE else [])
            for fl in flavors:
                for prefix, ts in self.materialize_version_set(i, fl).items():
                    for t in ts:
                        g.add_edge(f"{prefix}_{typ}", i, vnode[t])
        return g

    # -- consistency ----------------------------------------------------

    def check(self) -> list[str]:
        """Structural invariants; returns a list of violations (empty = consistent)."""
        problems = []
        allbits = self.dag.all().bits
        for i in self.mv_nodes():
            if i not in self.p:
                problems.append(f"mv-node {i} has no presence set")
                continue
            p, u = self.p[i], self.u.get(i, 0)
            if p & ~allbits:
                problems.append(f"mv-node {i}: presence names unknown versions")
            if u & ~p:
                problems.append(f"mv-node {i}: untranslated set not within presence set")
            if u and self.domain(i) != SOURCE:
                problems.append(f"mv-node {i}: untranslated set on a non-source node")
            if i in self.ends:
                s, t = self.ends[i]
                if p & ~(self.p.get(s, 0) & self.p.get(t, 0)):
                    problems.append(f"edge mv-node {i} present where an endpoint is absent")
        for c, entry in self.index.items():
            pc = self.p.get(c, 0)
            for x in entry.covered | entry.targets:
                if pc & ~self.p.get(x, 0):
                    problems.append(f"correspondence node {c} present where {x} is absent")
            for r in entry.required:
                if pc & ~self.p.get(r, 0):
                    problems.append(f"correspondence node {c} present where required {r} is absent")
        return problems


def comb(history: History, ttg: TripleTypeGraph, atg: AdaptedTypeGraph | None = None) -> MultiVersionModel:
    """Encode a whole history as one multi-version model; u-sets start empty."""
    atg = atg or adapt_type_graph(ttg)
    if not ttg.merged.includes(history.type_graph):
        raise ConfigurationError("history is not typed over the grammar's source type graph")
    mvm = MultiVersionModel(atg, history.dag.copy())
    presence: dict[int, int] = {}
    for t in history.versions:
        bit = 1 << t
        for i in history.contents(t):
            presence[i] = presence.get(i, 0) | bit
    for e in creation_order(history.specs[i].element() for i in presence):
        if ttg.merged.domain_of(e.type) != SOURCE:
            raise InputError(f"history element {e.id} is not of a source type")
        mvm.add_element(e, presence[e.id])
    return mvm
