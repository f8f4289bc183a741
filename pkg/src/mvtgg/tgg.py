"""Triple graph grammars and single-version forward transformation."""

from __future__ import annotations

import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace

from .errors import ConfigurationError, InputError
from .graph import CORR, EDGE, NODE, SOURCE, TARGET, EdgeType, Element, Graph, TypeGraph, creation_order
from .match import Morphism, find_matches
from .rewrite import Rule, apply_rule

Triplet = Graph


@dataclass(frozen=True)
class LinkType:
    name: str
    corr_type: str
    linked_type: str
    linked_kind: str = NODE


class TripleTypeGraph:
    def __init__(self, source: TypeGraph, corr: TypeGraph, target: TypeGraph,
                 links: Iterable[LinkType]):
        self.source = source
        self.corr = corr
        self.target = target
        self.links = {lt.name: lt for lt in links}
        names: dict[str, str] = {}
        for label, tg in (("source", source), ("corr", corr), ("target", target)):
            for n in list(tg.node_types) + list(tg.edge_types):
                if n in names:
                    raise ConfigurationError(f"type {n!r} declared in both {names[n]} and {label}")
                names[n] = label
        for lt in self.links.values():
            if lt.name in names:
                raise ConfigurationError(f"link type {lt.name!r} clashes with a {names[lt.name]} type")
            if lt.corr_type not in corr.node_types:
                raise ConfigurationError(f"link type {lt.name!r} must start at a correspondence node type")
            pool = (
                {**source.node_types, **target.node_types} if lt.linked_kind == NODE
                else {**source.edge_types, **target.edge_types}
            )
            if lt.linked_type not in pool:
                raise ConfigurationError(f"link type {lt.name!r} targets unknown {lt.linked_kind} type {lt.linked_type!r}")
        nodes: dict[str, str | None] = {}
        edges: list[EdgeType] = []
        for dom, tg in ((SOURCE, source), (CORR, corr), (TARGET, target)):
            nodes.update({n: dom for n in tg.node_types})
            edges.extend(replace(et, domain=dom) for et in tg.edge_types.values())
        edges.extend(
            EdgeType(lt.name, lt.corr_type, lt.linked_type, lt.linked_kind == EDGE, CORR)
            for lt in self.links.values()
        )
        self.merged = TypeGraph(nodes, edges)


@dataclass
class TggRule:
    """A TGG production; the rhs contains the lhs under the same element ids."""

    name: str
    lhs: Graph
    rhs: Graph
    labels: dict[int, str] = field(default_factory=dict)

    def domain(self, element_id: int) -> str | None:
        return self.rhs.domain_of(element_id)

    def created(self) -> set[int]:
        return set(self.rhs) - set(self.lhs)

    def label(self, element_id: int) -> str:
        return self.labels.get(element_id, str(element_id))


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    code: str
    message: str


@dataclass
class ForwardRule:
    name: str
    rule: Rule
    translation: frozenset[int]
    origin: TggRule
    source_context: frozenset[int]
    corr_context: frozenset[int]
    created_corr: int

    @property
    def lhs(self) -> Graph:
        return self.rule.lhs

    @property
    def rhs(self) -> Graph:
        return self.rule.rhs


def _link_counts(g: Graph) -> dict[int, int]:
    counts = {i: 0 for i in g if g.domain_of(i) in (SOURCE, TARGET)}
    for e in g.elements():
        if e.kind == EDGE and g.domain_of(e.id) == CORR and e.tgt in counts:
            counts[e.tgt] += 1  # type: ignore[index]
    return counts


def validate_tgg(rules: Sequence[TggRule], ttg: TripleTypeGraph) -> list[Diagnostic]:
    """Structural checks; an empty list means the grammar is forward-executable."""
    diags: list[Diagnostic] = []
    names: set[str] = set()
    for rule in rules:
        def flag(code: str, message: str) -> None:
            diags.append(Diagnostic(rule.name, code, message))

        if rule.name in names:
            flag("duplicate-name", "rule name used twice")
        names.add(rule.name)
        if rule.rhs.type_graph != ttg.merged or rule.lhs.type_graph != ttg.merged:
            flag("type-graph", "rule is not typed over the merged triple type graph")
            continue
        if any(rule.rhs.element(i) != rule.lhs.element(i) for i in rule.lhs if i in rule.rhs) or not (
            set(rule.lhs) <= set(rule.rhs)
        ):
            flag("not-a-production", "left-hand side is not contained in the right-hand side")
            continue
        created = rule.created()
        corr_nodes = [i for i in created if rule.domain(i) == CORR and rule.rhs.element(i).kind == NODE]
        if len(corr_nodes) != 1:
            flag("corr-node-count", f"creates {len(corr_nodes)} correspondence nodes, expected 1")
        for side, g in (("lhs", rule.lhs), ("rhs", rule.rhs)):
            for i, n in sorted(_link_counts(g).items()):
                if n != 1:
                    flag("link-count", f"{side} element {rule.label(i)} linked to {n} correspondence nodes")
        if not any(rule.domain(i) == SOURCE for i in created):
            flag("empty-translation-set", "creates no source elements; its forward rule could never terminate")
    return diags


def derive_forward_rule(rule: TggRule) -> ForwardRule:
    rhs = rule.rhs
    lhs_ids = set(rule.lhs)
    translation = frozenset(i for i in rhs if i not in lhs_ids and rhs.domain_of(i) == SOURCE)
    if not translation:
        raise ConfigurationError(f"rule {rule.name}: empty translation set")
    lf = Graph(rhs.type_graph)
    for e in creation_order(rhs.element(i) for i in lhs_ids | translation):
        lf.add(e)
    corr = [i for i in rhs if i not in lhs_ids and rhs.domain_of(i) == CORR and rhs.element(i).kind == NODE]
    return ForwardRule(
        name=rule.name,
        rule=Rule.production(rule.name, lf, rhs, translation),
        translation=translation,
        origin=rule,
        source_context=frozenset(i for i in lhs_ids if rhs.domain_of(i) == SOURCE),
        corr_context=frozenset(i for i in lhs_ids if rhs.domain_of(i) == CORR and rhs.element(i).kind == NODE),
        created_corr=corr[0],
    )


def derive_forward_rules(rules: Sequence[TggRule], ttg: TripleTypeGraph | None = None) -> list[ForwardRule]:
    if ttg is not None:
        diags = validate_tgg(rules, ttg)
        if diags:
            raise ConfigurationError("; ".join(f"{d.rule}: {d.code} ({d.message})" for d in diags))
    return [derive_forward_rule(r) for r in rules]


@dataclass
class Tgg:
    """A grammar together with its triple type graph."""

    name: str
    types: TripleTypeGraph
    rules: list[TggRule]

    def diagnostics(self) -> list[Diagnostic]:
        return validate_tgg(self.rules, self.types)

    def forward_rules(self) -> list[ForwardRule]:
        return derive_forward_rules(self.rules, self.types)


# -- single-version execution ---------------------------------------------


@dataclass
class ApplicationTrace:
    rule: str
    match: dict[int, int]
    created_corr: int
    required_corrs: frozenset[int]
    translated: frozenset[int]
    created: tuple[int, ...]


@dataclass
class TransResult:
    triplet: Triplet
    traces: list[ApplicationTrace]
    complete: bool
    applications: int = 0


class _Marks:
    """Constraint: translation set must be marked, source context must not."""

    def __init__(self, fr: ForwardRule, g: Graph):
        self.lt = fr.translation
        self.ctx = fr.source_context
        self.marks = g._marks

    def start(self) -> bool:
        return True

    def extend(self, state: bool, pid: int, hid: int) -> bool | None:
        if pid in self.lt:
            return True if hid in self.marks else None
        if pid in self.ctx and hid in self.marks:
            return None
        return True


def forward_applicable(fr: ForwardRule, g: Graph, m: Morphism) -> bool:
    marks = g._marks
    return all(m[x] in marks for x in fr.translation) and not any(m[x] in marks for x in fr.source_context)


def init_f(source: Graph, ttg: TripleTypeGraph) -> Graph:
    """Source graph retyped over the triple type graph with every element marked."""
    g = source.retyped(ttg.merged) if source.type_graph is not ttg.merged else source.copy()
    g.ensure_bookkeeping_node()
    for i in sorted(g):
        g.mark(i)
    return g


def run_forward(g: Graph, rules: Sequence[ForwardRule], *, seed: int | None = None) -> list[ApplicationTrace]:
    """Apply forward rules in place until none matches; returns the new traces.

    Rules are visited round-robin; all matches of a rule found in one visit
    are applied in order, each re-checked against the current bookkeeping.
    A seed permutes the rule order per round and the match order.
    """
    rng = random.Random(seed) if seed is not None else None
    order = list(rules)
    traces: list[ApplicationTrace] = []
    while True:
        progress = False
        if rng is not None:
            rng.shuffle(order)
        for fr in order:
            matches = find_matches(
                fr.lhs, g, constraint=_Marks(fr, g),
                seed=rng.randrange(1 << 30) if rng is not None else None,
            )
            for m in matches:
                if not forward_applicable(fr, g, m):
                    continue
                _, comatch = apply_rule(fr.rule, g, m, in_place=True)
                traces.append(ApplicationTrace(
                    rule=fr.name,
                    match=m,
                    created_corr=comatch[fr.created_corr],
                    required_corrs=frozenset(m[x] for x in fr.corr_context),
                    translated=frozenset(m[x] for x in fr.translation),
                    created=tuple(comatch[e.id] for e in fr.rule.created),
                ))
                progress = True
        if not progress:
            return traces


def is_complete(g: Graph) -> bool:
    return not g._marks


def trans_f(source: Graph, rules: Sequence[ForwardRule], ttg: TripleTypeGraph, *,
            seed: int | None = None) -> TransResult:
    g = init_f(source, ttg)
    traces = run_forward(g, rules, seed=seed)
    return TransResult(g, traces, is_complete(g), len(traces))


@dataclass
class Delta:
    added: list[Element] = field(default_factory=list)
    removed: list[int] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.added or self.removed)


def _revocation_closure(traces: Sequence[ApplicationTrace], removed: set[int]) -> list[int]:
    """Indices of traces invalidated by ``removed``, dependents included."""
    dependents: dict[int, list[int]] = {}
    for k, t in enumerate(traces):
        for c in t.required_corrs:
            dependents.setdefault(c, []).append(k)
    hit = [k for k, t in enumerate(traces) if removed.intersection(t.match.values())]
    seen = set(hit)
    stack = list(hit)
    while stack:
        k = stack.pop()
        for d in dependents.get(traces[k].created_corr, ()):
            if d not in seen:
                seen.add(d)
                stack.append(d)
    return sorted(seen)


def sync_f_single(triplet: Triplet, traces: Sequence[ApplicationTrace], delta: Delta,
                  rules: Sequence[ForwardRule], *, seed: int | None = None,
                  in_place: bool = False) -> TransResult:
    """Propagate a source delta: undo invalidated applications, mark, re-translate."""
    g = triplet if in_place else triplet.copy()
    removed = set(delta.removed)
    for i in removed:
        if i not in g or g.domain_of(i) != SOURCE:
            raise InputError(f"delta removes unknown source element {i}")
    for e in delta.added:
        if e.id in g:
            raise InputError(f"delta adds element {e.id}, which already exists")
        if g.type_graph.domain_of(e.type) != SOURCE:
            raise InputError(f"delta adds non-source element {e.id}")

    revoked_idx = _revocation_closure(traces, removed)
    revoked = [traces[k] for k in revoked_idx]
    created = {c for t in revoked for c in t.created}
    for i in removed:
        incident = (g.out_edges(i) | g.in_edges(i)) - created - removed
        if incident:
            raise InputError(f"removing {i} would leave dangling edges {sorted(incident)}")
    # dependents first: their link edges may point at elements of their requirements
    for t in reversed(revoked):
        g.remove_many(t.created)
    for t in revoked:
        for x in t.translated:
            if x not in removed:
                g.mark(x)
    g.remove_many(removed)
    for e in creation_order(delta.added):
        g.add(e)
        g.mark(e.id)
    keep = set(range(len(traces))) - set(revoked_idx)
    kept = [traces[k] for k in sorted(keep)]
    new = run_forward(g, rules, seed=seed)
    return TransResult(g, kept + new, is_complete(g), len(new))


def copy_triplet(triplet: Triplet, traces: Sequence[ApplicationTrace]
                 ) -> tuple[Triplet, list[ApplicationTrace], dict[int, int]]:
    """Deep copy with fresh ids; returns the copy, remapped traces and old -> new ids."""
    g = Graph(triplet.type_graph)
    g._next_id = max(triplet._next_id, g._next_id)
    ids: dict[int, int] = {}
    for e in creation_order(triplet.elements()):
        if e.kind == NODE:
            ids[e.id] = g.add_node(e.type)
        else:
            ids[e.id] = g.add_edge(e.type, ids[e.src], ids[e.tgt])  # type: ignore[index]
    if triplet.bookkeeping_node is not None:
        g.ensure_bookkeeping_node()
    for x in sorted(triplet.marked()):
        g.mark(ids[x])

    def remap(t: ApplicationTrace) -> ApplicationTrace:
        return ApplicationTrace(
            rule=t.rule,
            match={k: ids[v] for k, v in t.match.items()},
            created_corr=ids[t.created_corr],
            required_corrs=frozenset(ids[c] for c in t.required_corrs),
            translated=frozenset(ids[c] for c in t.translated),
            created=tuple(ids[c] for c in t.created),
        )

    return g, [remap(t) for t in traces], ids


def source_projection(triplet: Triplet) -> Graph:
    """The source domain of a triplet, with its marks."""
    tg = triplet.type_graph
    g = Graph(tg)
    for e in creation_order(triplet.elements()):
        if tg.domain_of(e.type) == SOURCE:
            g.add(e)
    for x in triplet.marked():
        if x in g:
            g.mark(x)
    return g
