"""Per-version triplets: the single-version baselines.

SVM B transforms every version separately. SVM I starts from the transformed
root and follows modifications: a new version copies its base triplet (fresh
ids), element edits and merges become source deltas handled by the
single-version synchronization.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from .errors import InputError
from .graph import Element, Graph
from .history import ElementCreate, ElementDelete, History, Merge, Modification, VersionCreate
from .io import (
    expect_schema,
    graph_from_doc,
    graph_to_doc,
    guarded,
    header,
    history_from_doc,
    history_to_doc,
    tgg_from_doc,
    tgg_to_doc,
    trace_from_doc,
    trace_to_doc,
)
from .tgg import ApplicationTrace, Delta, ForwardRule, Tgg, copy_triplet, init_f, is_complete, run_forward, sync_f_single


@dataclass
class SvmVersion:
    triplet: Graph
    traces: list[ApplicationTrace]
    # history element id -> id in this triplet
    ids: dict[int, int] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return is_complete(self.triplet)


@dataclass
class SvmState:
    history: History
    versions: dict[int, SvmVersion]
    applications: int = 0
    copied: int = 0


def svm_version(history: History, t: int, tgg: Tgg, rules: Sequence[ForwardRule], *,
                seed: int | None = None) -> SvmVersion:
    g = init_f(history.replay(t, tgg.types.merged), tgg.types)
    traces = run_forward(g, rules, seed=seed)
    return SvmVersion(g, traces, {i: i for i in history.contents(t)})


def svm_batch(history: History, tgg: Tgg, rules: Sequence[ForwardRule] | None = None, *,
              seed: int | None = None) -> SvmState:
    rules = rules if rules is not None else tgg.forward_rules()
    state = SvmState(history.copy(), {})
    for t in history.versions:
        v = svm_version(history, t, tgg, rules, seed=seed)
        state.versions[t] = v
        state.applications += len(v.traces)
    return state


def _copy(v: SvmVersion) -> tuple[SvmVersion, int]:
    g, traces, ids = copy_triplet(v.triplet, v.traces)
    return SvmVersion(g, traces, {h: ids[l] for h, l in v.ids.items()}), len(v.triplet) + len(v.triplet.marked())


def _added(history: History, v: SvmVersion, new_ids: Sequence[int]) -> list[Element]:
    out = []
    for i in new_ids:
        s = history.specs[i]
        local = i
        if local in v.triplet:
            local = v.triplet.fresh_id()
        v.ids[i] = local
        out.append(Element(local, s.kind, s.type))
    resolved = []
    for e, i in zip(out, new_ids):
        s = history.specs[i]
        if s.kind == "edge":
            e = Element(e.id, e.kind, e.type, v.ids[s.src], v.ids[s.tgt])  # type: ignore[index]
        resolved.append(e)
    return resolved


def svm_apply(state: SvmState, mod: Modification, rules: Sequence[ForwardRule], *,
              seed: int | None = None) -> int:
    """Apply one modification in place; returns the number of rule applications."""
    h = state.history
    before = {t: h.contents(t) for t in h.versions}
    h.apply(mod)  # validates
    if isinstance(mod, VersionCreate):
        v, cost = _copy(state.versions[mod.base])
        state.versions[mod.version] = v
        state.copied += cost
        return 0
    if isinstance(mod, Merge):
        v, cost = _copy(state.versions[mod.base_i])
        state.copied += cost
        t = mod.version
        old = before[mod.base_i]
        target = h.contents(t)
        removed = sorted(old - target)
        delta = Delta(removed=[v.ids[i] for i in removed])
        for i in removed:
            del v.ids[i]
        delta.added = _added(h, v, sorted(target - old, key=lambda i: (h.specs[i].kind != "node", i)))
        state.versions[t] = v
    else:
        t = mod.version
        v = state.versions[t]
        if isinstance(mod, ElementCreate):
            delta = Delta(added=_added(h, v, [mod.spec.id]))
        else:
            assert isinstance(mod, ElementDelete)
            delta = Delta(removed=[v.ids.pop(mod.element)])
    res = sync_f_single(v.triplet, v.traces, delta, rules, seed=seed, in_place=True)
    v.traces = res.traces
    state.applications += res.applications
    return res.applications


def svm_incremental(state: SvmState, mods: Sequence[Modification], rules: Sequence[ForwardRule], *,
                    seed: int | None = None) -> int:
    total = 0
    for k, m in enumerate(mods):
        try:
            total += svm_apply(state, m, rules, seed=seed)
        except InputError as exc:
            raise InputError(exc.detail, index=k) from None
    return total


# -- serialization --------------------------------------------------------


def svm_to_doc(state: SvmState, tgg: Tgg) -> dict[str, Any]:
    doc = header("state")
    doc["strategy"] = "svm"
    doc["tgg"] = tgg_to_doc(tgg)
    doc["history"] = history_to_doc(state.history)
    doc["versions"] = [
        {
            "version": t,
            "triplet": graph_to_doc(v.triplet, with_types=False),
            "traces": [trace_to_doc(tr) for tr in v.traces],
            "ids": sorted([h, l] for h, l in v.ids.items()),
        }
        for t, v in sorted(state.versions.items())
    ]
    return doc


def svm_from_doc(doc: dict[str, Any], tgg: Tgg | None = None) -> tuple[SvmState, Tgg]:
    expect_schema(doc, "state")
    if doc.get("strategy") != "svm":
        raise InputError(f"expected an svm state, got strategy {doc.get('strategy')!r}")

    def build() -> tuple[SvmState, Tgg]:
        g_tgg = tgg or tgg_from_doc(doc["tgg"])
        history = history_from_doc(doc["history"], g_tgg.types.source)
        versions = {}
        for d in doc["versions"]:
            versions[d["version"]] = SvmVersion(
                graph_from_doc(d["triplet"], g_tgg.types.merged),
                [trace_from_doc(x) for x in d["traces"]],
                {h: l for h, l in d["ids"]},
            )
        if sorted(versions) != history.versions:
            raise InputError("svm state does not cover exactly the history's versions")
        return SvmState(history, versions), g_tgg
    return guarded("svm state", build)
