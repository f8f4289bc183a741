"""Version histories of a source model and the modifications that extend them.

A history stores, per version, the set of element ids it contains; element
specs (kind, type, endpoints) are global per id, so an id denotes the same
element in every version that contains it.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .errors import InputError
from .graph import EDGE, ENGINE_ID_BASE, NODE, Element, Graph, TypeGraph, creation_order
from .versions import VersionDag


@dataclass(frozen=True)
class ElementSpec:
    id: int
    kind: str
    type: str
    src: int | None = None
    tgt: int | None = None

    def element(self) -> Element:
        return Element(self.id, self.kind, self.type, self.src, self.tgt)

    @classmethod
    def node(cls, id: int, type: str) -> ElementSpec:
        return cls(id, NODE, type)

    @classmethod
    def edge(cls, id: int, type: str, src: int, tgt: int) -> ElementSpec:
        return cls(id, EDGE, type, src, tgt)


@dataclass
class VersionRecord:
    """Delta form of one version: content = base content (union for merges) - removed + added."""

    id: int
    bases: list[int]
    added: list[ElementSpec] = field(default_factory=list)
    removed: list[int] = field(default_factory=list)


# -- modifications --------------------------------------------------------


@dataclass(frozen=True)
class VersionCreate:
    base: int
    version: int


@dataclass(frozen=True)
class ElementCreate:
    spec: ElementSpec
    version: int


@dataclass(frozen=True)
class ElementDelete:
    element: int
    version: int


@dataclass(frozen=True)
class Merge:
    base_i: int
    base_j: int
    version: int
    kept: frozenset[int]


Modification = VersionCreate | ElementCreate | ElementDelete | Merge


def check_spec(spec: ElementSpec, tg: TypeGraph) -> None:
    if not isinstance(spec.id, int) or not 0 < spec.id < ENGINE_ID_BASE:
        raise InputError(f"element id {spec.id!r} must be in 1..{ENGINE_ID_BASE - 1}")
    if spec.kind == NODE:
        if spec.type not in tg.node_types or spec.src is not None or spec.tgt is not None:
            raise InputError(f"element {spec.id}: bad node spec of type {spec.type!r}")
    elif spec.kind == EDGE:
        et = tg.edge_types.get(spec.type)
        if et is None or et.targets_edge or spec.src is None or spec.tgt is None:
            raise InputError(f"element {spec.id}: bad edge spec of type {spec.type!r}")
    else:
        raise InputError(f"element {spec.id}: unknown kind {spec.kind!r}")


class History:
    """Correct version history: single root, acyclic, every version a well-formed graph."""

    def __init__(self, type_graph: TypeGraph):
        self.type_graph = type_graph
        self.dag = VersionDag()
        self.specs: dict[int, ElementSpec] = {}
        self._contents: dict[int, frozenset[int]] = {}

    # -- construction ---------------------------------------------------

    @classmethod
    def from_records(cls, type_graph: TypeGraph, records: Iterable[VersionRecord]) -> History:
        recs = {}
        for r in records:
            if r.id in recs:
                raise InputError(f"duplicate version id {r.id}")
            recs[r.id] = r
        dag = VersionDag(recs, [(b, r.id) for r in recs.values() for b in r.bases])
        h = cls(type_graph)
        for t in dag.topological():
            r = recs[t]
            if len(r.bases) > 2:
                raise InputError(f"version {t} has more than two bases")
            if not r.bases:
                h._add_version(t, [], frozenset())
                base: frozenset[int] = frozenset()
            else:
                base = frozenset().union(*(h._contents[b] for b in r.bases))
                h._add_version(t, r.bases, base)
            content = set(base)
            for i in r.removed:
                if i not in base:
                    raise InputError(f"version {t} removes element {i}, absent from its base")
                content.discard(i)
            for spec in r.added:
                h._register(spec)
                if spec.id in base:
                    if len(r.bases) == 2:
                        continue  # already in the union; harmless
                    raise InputError(f"version {t} adds element {spec.id}, already in its base")
                if len(r.bases) == 2:
                    raise InputError(f"merge version {t} adds element {spec.id} outside the union of its bases")
                content.add(spec.id)
            h._set_content(t, frozenset(content))
        return h

    def _add_version(self, t: int, bases: Sequence[int], content: frozenset[int]) -> None:
        self.dag.add(t, bases)
        self._contents[t] = content

    def _register(self, spec: ElementSpec) -> None:
        check_spec(spec, self.type_graph)
        known = self.specs.get(spec.id)
        if known is None:
            self.specs[spec.id] = spec
        elif known != spec:
            raise InputError(f"element {spec.id} redeclared with a different spec")

    def _set_content(self, t: int, content: frozenset[int]) -> None:
        for i in content:
            s = self.specs[i]
            if s.kind == EDGE and not (s.src in content and s.tgt in content):
                raise InputError(f"version {t}: edge {i} has an endpoint outside the version")
            if s.kind == EDGE:
                et = self.type_graph.edge_types[s.type]
                if self.specs[s.src].type != et.source or self.specs[s.tgt].type != et.target:  # type: ignore[index]
                    raise InputError(f"edge {i} of type {s.type!r} connects wrongly typed endpoints")
        self._contents[t] = content

    def copy(self) -> History:
        h = History(self.type_graph)
        h.dag = self.dag.copy()
        h.specs = dict(self.specs)
        h._contents = dict(self._contents)
        return h

    # -- queries --------------------------------------------------------

    @property
    def versions(self) -> list[int]:
        return self.dag.versions

    def contents(self, t: int) -> frozenset[int]:
        try:
            return self._contents[t]
        except KeyError:
            raise InputError(f"unknown version {t}") from None

    def is_merge(self, t: int) -> bool:
        return len(self.dag.preds[t]) == 2

    def replay(self, t: int, type_graph: TypeGraph | None = None) -> Graph:
        g = Graph(type_graph or self.type_graph)
        for e in creation_order(self.specs[i].element() for i in self.contents(t)):
            g.add(e)
        return g

    def records(self) -> list[VersionRecord]:
        out = []
        for t in self.dag.topological():
            bases = list(self.dag.preds[t])
            base = frozenset().union(*(self._contents[b] for b in bases)) if bases else frozenset()
            content = self._contents[t]
            out.append(VersionRecord(
                t, bases,
                [self.specs[i] for i in sorted(content - base)],
                sorted(base - content),
            ))
        return out

    def restrict(self, versions: Iterable[int]) -> History:
        """Sub-history on a predecessor-closed set of versions."""
        keep = set(versions)
        for t in keep:
            if any(b not in keep for b in self.dag.preds.get(t, [None])):  # type: ignore[list-item]
                raise InputError(f"version set is not closed under predecessors at {t}")
        recs = [r for r in self.records() if r.id in keep]
        return History.from_records(self.type_graph, recs)

    def sharing(self) -> float:
        """Fraction of per-version element occurrences that are repeats of an earlier version's."""
        total = sum(len(c) for c in self._contents.values())
        if not total:
            return 1.0
        distinct = len(set().union(*self._contents.values()))
        return 1 - distinct / total

    # -- modifications --------------------------------------------------

    def _leaf(self, t: int) -> None:
        if t not in self.dag:
            raise InputError(f"unknown version {t}")
        if not self.dag.is_leaf(t):
            raise InputError(f"version {t} already has successors; only leaf versions may be edited")

    def apply(self, mod: Modification) -> None:
        """Apply one modification, validating it first; leaves the history unchanged on error."""
        if isinstance(mod, VersionCreate):
            if mod.base not in self.dag:
                raise InputError(f"unknown base version {mod.base}")
            if mod.version in self.dag:
                raise InputError(f"version {mod.version} already exists")
            self._add_version(mod.version, [mod.base], self._contents[mod.base])
        elif isinstance(mod, ElementCreate):
            t, spec = mod.version, mod.spec
            self._leaf(t)
            check_spec(spec, self.type_graph)
            known = self.specs.get(spec.id)
            if known is not None and known != spec:
                raise InputError(f"element {spec.id} redeclared with a different spec")
            content = self._contents[t]
            if spec.id in content:
                raise InputError(f"element {spec.id} already present in version {t}")
            if self.is_merge(t) and not any(spec.id in self._contents[b] for b in self.dag.preds[t]):
                raise InputError(f"merge version {t} cannot gain element {spec.id} outside its bases")
            if spec.kind == EDGE and not (spec.src in content and spec.tgt in content):
                raise InputError(f"edge {spec.id} has an endpoint absent from version {t}")
            old_specs = dict(self.specs)
            self.specs[spec.id] = spec
            try:
                self._set_content(t, content | {spec.id})
            except InputError:
                self.specs = old_specs
                raise
        elif isinstance(mod, ElementDelete):
            t, x = mod.version, mod.element
            self._leaf(t)
            content = self._contents[t]
            if x not in content:
                raise InputError(f"element {x} is not present in version {t}")
            self._set_content(t, content - {x})
        elif isinstance(mod, Merge):
            i, j, w = mod.base_i, mod.base_j, mod.version
            if i not in self.dag or j not in self.dag:
                raise InputError(f"unknown merge base among {i}, {j}")
            if i == j:
                raise InputError("merge bases must differ")
            if w in self.dag:
                raise InputError(f"version {w} already exists")
            union = self._contents[i] | self._contents[j]
            kept = frozenset(mod.kept)
            if not kept <= union:
                raise InputError(f"merge keeps elements outside both bases: {sorted(kept - union)[:5]}")
            old = self._contents.get(w)
            self._contents[w] = kept
            try:
                self._set_content(w, kept)
            except InputError:
                if old is None:
                    del self._contents[w]
                raise
            self.dag.add(w, [i, j])
        else:
            raise InputError(f"unknown modification {mod!r}")

    def apply_mods(self, mods: Iterable[Modification]) -> History:
        """Copy of the history with ``mods`` applied; errors carry the modification index."""
        h = self.copy()
        for k, m in enumerate(mods):
            try:
                h.apply(m)
            except InputError as exc:
                raise InputError(exc.detail, index=k) from None
        return h


def history_to_mods(history: History, base_versions: Iterable[int]) -> list[Modification]:
    """Modifications that grow the restriction to ``base_versions`` into the full history."""
    done = set(base_versions)
    mods: list[Modification] = []
    for t in history.dag.topological():
        if t in done:
            continue
        preds = history.dag.preds[t]
        content = history.contents(t)
        if len(preds) == 2:
            mods.append(Merge(preds[0], preds[1], t, content))
            continue
        base = history.contents(preds[0])
        mods.append(VersionCreate(preds[0], t))
        gone = [history.specs[i] for i in base - content]
        new = [history.specs[i] for i in content - base]
        for s in sorted(gone, key=lambda s: (s.kind != EDGE, s.id)):
            mods.append(ElementDelete(s.id, t))
        for e in creation_order(s.element() for s in new):
            mods.append(ElementCreate(history.specs[e.id], t))
    return mods


def single_version(type_graph: TypeGraph, specs: Iterable[ElementSpec], version: int = 1) -> History:
    return History.from_records(type_graph, [VersionRecord(version, [], list(specs), [])])


def specs_of(g: Graph) -> list[ElementSpec]:
    return [ElementSpec(e.id, e.kind, e.type, e.src, e.tgt) for e in creation_order(g.elements())]


def content_map(history: History) -> Mapping[int, frozenset[int]]:
    return {t: history.contents(t) for t in history.versions}
