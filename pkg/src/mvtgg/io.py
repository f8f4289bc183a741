"""Canonical JSON formats.

Every document carries ``schema`` and ``schema_version``. Dumps are canonical
(sorted keys, two-space indent, trailing newline, lists in id order), so
parse-then-dump reproduces a dump byte for byte.
"""

from __future__ import annotations

import json
from collections.abc import Callable, Mapping
from pathlib import Path
from typing import Any

from .errors import InputError, MvtggError
from .graph import EDGE, NODE, EdgeType, Element, Graph, TypeGraph, creation_order
from .history import (
    ElementCreate,
    ElementDelete,
    ElementSpec,
    History,
    Merge,
    Modification,
    VersionCreate,
    VersionRecord,
)
from .mvm import CorrEntry, MultiVersionModel, adapt_type_graph
from .tgg import ApplicationTrace, LinkType, Tgg, TggRule, TripleTypeGraph
from .versions import VersionDag, VersionSet, dematerialize, materialize

SCHEMA_VERSION = 1


def dumps(doc: Mapping[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def loads(text: str) -> dict[str, Any]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise InputError("document must be a JSON object")
    return doc


def read(path: str | Path) -> dict[str, Any]:
    try:
        return loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def write(path: str | Path, doc: Mapping[str, Any]) -> None:
    Path(path).write_text(dumps(doc))


def header(schema: str) -> dict[str, Any]:
    return {"schema": f"mvtgg/{schema}", "schema_version": SCHEMA_VERSION}


def expect_schema(doc: Mapping[str, Any], schema: str) -> None:
    if doc.get("schema") != f"mvtgg/{schema}":
        raise InputError(f"expected a mvtgg/{schema} document, got {doc.get('schema')!r}")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {doc.get('schema_version')!r}")


def guarded(what: str, fn: Callable[[], Any]) -> Any:
    """Turn structural surprises in a document into input errors."""
    try:
        return fn()
    except MvtggError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{what}: {exc}") from None
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"malformed {what}: {exc!r}") from None


# -- type graphs and graphs ----------------------------------------------


def type_graph_to_doc(tg: TypeGraph) -> dict[str, Any]:
    return {
        "node_types": dict(sorted(tg.node_types.items())),
        "edge_types": [
            {"name": et.name, "source": et.source, "target": et.target,
             "targets_edge": et.targets_edge, "domain": et.domain}
            for et in sorted(tg.edge_types.values(), key=lambda e: e.name)
        ],
    }


def type_graph_from_doc(doc: Mapping[str, Any]) -> TypeGraph:
    return guarded("type graph", lambda: TypeGraph(
        dict(doc["node_types"]),
        [EdgeType(e["name"], e["source"], e["target"], bool(e.get("targets_edge", False)), e.get("domain"))
         for e in doc["edge_types"]],
    ))


def element_to_doc(e: Element | ElementSpec) -> dict[str, Any]:
    d: dict[str, Any] = {"id": e.id, "kind": e.kind, "type": e.type}
    if e.kind == EDGE:
        d["src"] = e.src
        d["tgt"] = e.tgt
    return d


def spec_from_doc(d: Mapping[str, Any]) -> ElementSpec:
    def build() -> ElementSpec:
        kind = d["kind"]
        if kind not in (NODE, EDGE):
            raise InputError(f"unknown element kind {kind!r}")
        if not isinstance(d["id"], int):
            raise InputError(f"element id {d['id']!r} is not an integer")
        return ElementSpec(d["id"], kind, d["type"], d.get("src"), d.get("tgt"))
    return guarded("element", build)


def graph_to_doc(g: Graph, *, with_types: bool = True) -> dict[str, Any]:
    doc = header("graph")
    doc["elements"] = [element_to_doc(g.element(i)) for i in sorted(g)]
    doc["bookkeeping"] = {
        "node": g.bookkeeping_node,
        "edges": [[b, x] for x, b in sorted(g.bookkeeping_edges().items(), key=lambda kv: kv[1])],
    }
    doc["next_id"] = g._next_id
    if with_types:
        doc["type_graph"] = type_graph_to_doc(g.type_graph)
    return doc


def graph_from_doc(doc: Mapping[str, Any], type_graph: TypeGraph | None = None) -> Graph:
    expect_schema(doc, "graph")

    def build() -> Graph:
        tg = type_graph or type_graph_from_doc(doc["type_graph"])
        g = Graph(tg)
        for e in creation_order(spec_from_doc(d).element() for d in doc["elements"]):
            g.add(e)
        bk = doc.get("bookkeeping") or {}
        if bk.get("node") is not None:
            node = bk["node"]
            if node in g:
                raise InputError(f"bookkeeping node id {node} collides with an element")
            g.bookkeeping_node = node
            g._next_id = max(g._next_id, node + 1)
        for b, x in bk.get("edges", []):
            if g.bookkeeping_node is None:
                raise InputError("bookkeeping edges without a bookkeeping node")
            if x in g._marks:
                raise InputError(f"element {x} has two bookkeeping edges")
            g.mark(x, b)
        g._next_id = max(g._next_id, doc.get("next_id", 0))
        return g
    return guarded("graph", build)


# -- grammars -------------------------------------------------------------


def tgg_to_doc(tgg: Tgg) -> dict[str, Any]:
    ttg = tgg.types
    doc = header("tgg")
    doc["name"] = tgg.name
    doc["source"] = type_graph_to_doc(ttg.source)
    doc["corr"] = type_graph_to_doc(ttg.corr)
    doc["target"] = type_graph_to_doc(ttg.target)
    doc["links"] = [
        {"name": lt.name, "corr": lt.corr_type, "linked": lt.linked_type, "kind": lt.linked_kind}
        for lt in sorted(ttg.links.values(), key=lambda lt: lt.name)
    ]
    rules = []
    for r in tgg.rules:
        elems = []
        for i in sorted(r.rhs):
            d = element_to_doc(r.rhs.element(i))
            d["label"] = r.label(i)
            d["domain"] = r.domain(i)
            d["created"] = i not in r.lhs
            elems.append(d)
        rules.append({"name": r.name, "elements": elems})
    doc["rules"] = rules
    return doc


def tgg_from_doc(doc: Mapping[str, Any]) -> Tgg:
    expect_schema(doc, "tgg")

    def build() -> Tgg:
        ttg = TripleTypeGraph(
            type_graph_from_doc(doc["source"]),
            type_graph_from_doc(doc["corr"]),
            type_graph_from_doc(doc["target"]),
            [LinkType(d["name"], d["corr"], d["linked"], d.get("kind", NODE)) for d in doc["links"]],
        )
        tg = ttg.merged
        rules = []
        for rd in doc["rules"]:
            lhs, rhs = Graph(tg), Graph(tg)
            labels = {}
            elems = [(spec_from_doc(d), bool(d.get("created", False)), d) for d in rd["elements"]]
            created = {s.id for s, c, _ in elems if c}
            for e in creation_order(s.element() for s, _, _ in elems):
                rhs.add(e)
                if e.id not in created:
                    lhs.add(e)
            for s, _, d in elems:
                labels[s.id] = d.get("label", str(s.id))
                dom = d.get("domain")
                if dom is not None and dom != tg.domain_of(s.type):
                    raise InputError(f"rule {rd['name']}: element {labels[s.id]} tagged {dom}, typed {tg.domain_of(s.type)}")
            rules.append(TggRule(rd["name"], lhs, rhs, labels))
        return Tgg(doc.get("name", "tgg"), ttg, rules)
    return guarded("grammar", build)


# -- histories and modifications ------------------------------------------


def history_to_doc(h: History) -> dict[str, Any]:
    doc = header("history")
    doc["versions"] = [
        {"id": r.id, "bases": r.bases, "added": [element_to_doc(s) for s in r.added], "removed": r.removed}
        for r in sorted(h.records(), key=lambda r: r.id)
    ]
    return doc


def history_from_doc(doc: Mapping[str, Any], type_graph: TypeGraph) -> History:
    expect_schema(doc, "history")
    return guarded("history", lambda: History.from_records(type_graph, [
        VersionRecord(
            v["id"], list(v.get("bases", [])),
            [spec_from_doc(d) for d in v.get("added", [])],
            list(v.get("removed", [])),
        )
        for v in doc["versions"]
    ]))


def mod_to_doc(m: Modification) -> dict[str, Any]:
    if isinstance(m, VersionCreate):
        return {"op": "version-create", "base": m.base, "version": m.version}
    if isinstance(m, ElementCreate):
        return {"op": "element-create", "version": m.version, "element": element_to_doc(m.spec)}
    if isinstance(m, ElementDelete):
        return {"op": "element-delete", "version": m.version, "element": m.element}
    return {"op": "merge", "bases": [m.base_i, m.base_j], "version": m.version, "kept": sorted(m.kept)}


def mod_from_doc(d: Mapping[str, Any]) -> Modification:
    op = d.get("op")
    if op == "version-create":
        return VersionCreate(d["base"], d["version"])
    if op == "element-create":
        return ElementCreate(spec_from_doc(d["element"]), d["version"])
    if op == "element-delete":
        return ElementDelete(d["element"], d["version"])
    if op == "merge":
        i, j = d["bases"]
        return Merge(i, j, d["version"], frozenset(d["kept"]))
    raise InputError(f"unknown modification op {op!r}")


def mods_to_doc(mods: list[Modification]) -> dict[str, Any]:
    doc = header("mods")
    doc["mods"] = [mod_to_doc(m) for m in mods]
    return doc


def mods_from_doc(doc: Mapping[str, Any]) -> list[Modification]:
    expect_schema(doc, "mods")
    out = []
    for k, d in enumerate(doc.get("mods", [])):
        try:
            out.append(guarded("modification", lambda: mod_from_doc(d)))
        except InputError as exc:
            raise InputError(exc.detail, index=k) from None
    return out


# -- states ---------------------------------------------------------------


def dag_to_doc(dag: VersionDag) -> dict[str, Any]:
    return {"versions": dag.versions, "suc": [list(e) for e in dag.edges]}


def dag_from_doc(d: Mapping[str, Any]) -> VersionDag:
    return guarded("version DAG", lambda: VersionDag(d["versions"], [tuple(e) for e in d["suc"]]))


def presence_to_doc(mvm: MultiVersionModel) -> dict[str, dict[str, list[int]]]:
    """cv/dv (and ucv/udv for source mv-nodes) per mv-node, as version lists."""
    presence = {}
    for i in sorted(mvm.p):
        d = mvm.materialize_version_set(i)
        if i in mvm.u and mvm.domain(i) == "S":
            d.update(mvm.materialize_version_set(i, "ucv/udv"))
        presence[str(i)] = d
    return presence


def mvm_to_doc(mvm: MultiVersionModel, tgg: Tgg) -> dict[str, Any]:
    """MVM snapshot: mv graph, DAG, cv/dv/ucv/udv edges (as version lists) and the dependency index.

    Original elements and their mv-nodes share ids, so the origin map is the identity.
    """
    doc = header("state")
    doc["strategy"] = "mvm"
    doc["tgg"] = tgg_to_doc(tgg)
    doc["dag"] = dag_to_doc(mvm.dag)
    doc["graph"] = graph_to_doc(mvm.graph, with_types=False)
    doc["presence"] = presence_to_doc(mvm)
    doc["index"] = [
        {
            "corr": e.corr, "rule": e.rule, "required": sorted(e.required), "targets": sorted(e.targets),
            "covered": sorted(e.covered), "applied": VersionSet(e.applied).to_list(),
            "match": sorted([k, v] for k, v in e.match.items()), "created": list(e.created),
        }
        for e in sorted(mvm.index.values(), key=lambda e: e.corr)
    ]
    return doc


def mvm_from_doc(doc: Mapping[str, Any], tgg: Tgg | None = None) -> tuple[MultiVersionModel, Tgg]:
    expect_schema(doc, "state")
    if doc.get("strategy") != "mvm":
        raise InputError(f"expected an mvm state, got strategy {doc.get('strategy')!r}")

    def build() -> tuple[MultiVersionModel, Tgg]:
        g_tgg = tgg or tgg_from_doc(doc["tgg"])
        atg = adapt_type_graph(g_tgg.types)
        dag = dag_from_doc(doc["dag"])
        mvm = MultiVersionModel(atg, dag)
        mvm.graph = graph_from_doc(doc["graph"], atg)
        for i, d in doc["presence"].items():
            i = int(i)
            if i not in mvm.graph:
                raise InputError(f"presence for unknown mv-node {i}")
            mvm.p[i] = dematerialize(dag, d.get("cv", []), d.get("dv", [])).bits
            mvm.u[i] = dematerialize(dag, d.get("ucv", []), d.get("udv", [])).bits
            # reject encodings that are not the canonical entry/exit form
            if [list(x) for x in materialize(dag, VersionSet(mvm.p[i]))] != [d.get("cv", []), d.get("dv", [])]:
                raise InputError(f"mv-node {i}: presence edges are not in canonical form")
        for i in mvm.graph:
            e = mvm.graph.element(i)
            if e.type in atg.edge_derived:
                ends = {mvm.graph.element(r).type: mvm.graph.element(r).tgt for r in mvm.graph.out_edges(i)}
                mvm.ends[i] = (ends[f"{e.type}.src"], ends[f"{e.type}.tgt"])
        for d in doc["index"]:
            mvm.register(CorrEntry(
                corr=d["corr"], rule=d["rule"], required=frozenset(d["required"]),
                targets=frozenset(d["targets"]), covered=frozenset(d["covered"]),
                applied=VersionSet(d["applied"]).bits, match={k: v for k, v in d["match"]},
                created=tuple(d["created"]),
            ))
        problems = mvm.check()
        if problems:
            raise InputError("inconsistent multi-version state: " + "; ".join(problems[:5]))
        return mvm, g_tgg
    return guarded("multi-version state", build)


def trace_to_doc(t: ApplicationTrace) -> dict[str, Any]:
    return {
        "rule": t.rule, "match": sorted([k, v] for k, v in t.match.items()),
        "created_corr": t.created_corr, "required": sorted(t.required_corrs),
        "translated": sorted(t.translated), "created": list(t.created),
    }


def trace_from_doc(d: Mapping[str, Any]) -> ApplicationTrace:
    return ApplicationTrace(
        d["rule"], {k: v for k, v in d["match"]}, d["created_corr"],
        frozenset(d["required"]), frozenset(d["translated"]), tuple(d["created"]),
    )
