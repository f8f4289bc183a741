"""Seeded random histories and modification sequences over the AST source language.

Generation is structure-aware so that most versions are fully translatable:
fields are only added between existing, distinct classes, and every field
comes with its type access and three edges. A small share of operations
injects untranslatable structure (an isolated type access, or a field typed
by its own class). Branches occasionally re-add a class id that another
branch created, which produces redundant correspondence nodes at merges.
"""

from __future__ import annotations

import random
from collections.abc import Mapping
from dataclasses import dataclass, field

from .graph import TypeGraph
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

DEFAULT_WEIGHTS = {"class": 3.0, "field": 4.0, "delete_field": 1.5, "delete_class": 0.5, "retype": 1.0}


@dataclass
class HistoryGenSpec:
    seed: int = 0
    versions: int = 6
    branch_p: float = 0.2
    merge_p: float = 0.2
    ops: int = 2
    weights: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    root_classes: int = 3
    max_elements: int = 60  # per version; an over-cap merge becomes a plain branch
    max_total: int | None = None  # distinct elements over the whole history
    untranslatable_p: float = 0.05
    duplicate_p: float = 0.15

    def __post_init__(self) -> None:
        if self.versions < 1:
            raise ValueError("versions must be at least 1")
        for k, w in self.weights.items():
            if k not in DEFAULT_WEIGHTS or w < 0:
                raise ValueError(f"bad weight {k}={w}")
        if not any(self.weights.values()) and self.ops:
            raise ValueError("all operation weights are zero")
        if self.max_total is not None and self.max_total < self.root_classes:
            raise ValueError("max_total is smaller than the root version")


class _Model:
    """Mutable view of one version's content used while generating."""

    def __init__(self, specs: dict[int, ElementSpec], content: set[int]):
        self.specs = specs
        self.content = content

    def of_type(self, t: str) -> list[int]:
        return sorted(i for i in self.content if self.specs[i].type == t)

    def incident(self, x: int) -> list[int]:
        return sorted(i for i in self.content if self.specs[i].kind == "edge" and x in (self.specs[i].src, self.specs[i].tgt))

    def field_parts(self, f: int) -> list[int]:
        """The field, its type accesses and all edges touching either (deletion order: edges first)."""
        parts = {f}
        for e in self.incident(f):
            parts.add(e)
            s = self.specs[e]
            if s.type == "access":
                parts.add(s.tgt)  # type: ignore[arg-type]
        for ta in [i for i in parts if self.specs[i].type == "TypeAccess"]:
            parts.update(self.incident(ta))
        return sorted(parts, key=lambda i: (self.specs[i].kind != "edge", i))


class _Gen:
    def __init__(self, rng: random.Random, spec: HistoryGenSpec, specs: dict[int, ElementSpec]):
        self.rng = rng
        self.spec = spec
        self.specs = specs
        self.next_id = max(specs, default=0) + 1

    def new(self, kind: str, type_: str, src: int | None = None, tgt: int | None = None) -> ElementSpec:
        s = ElementSpec(self.next_id, kind, type_, src, tgt)
        self.specs[s.id] = s
        self.next_id += 1
        return s

    def pick_op(self) -> str:
        w = self.spec.weights
        names = sorted(w)
        return self.rng.choices(names, [w[n] for n in names])[0]

    def operation(self, m: _Model) -> tuple[list[ElementSpec], list[int]]:
        """One edit on ``m``: (specs to add in order, ids to delete in order)."""
        rng = self.rng
        if rng.random() < self.spec.untranslatable_p:
            classes = m.of_type("ClassDecl")
            if classes and rng.random() < 0.5:
                c = rng.choice(classes)
                f = self.new("node", "FieldDecl")
                t = self.new("node", "TypeAccess")
                return [f, t, self.new("edge", "declaration", c, f.id), self.new("edge", "access", f.id, t.id),
                        self.new("edge", "type", t.id, c)], []
            return [self.new("node", "TypeAccess")], []
        op = self.pick_op()
        classes = m.of_type("ClassDecl")
        if op == "class" or (op == "field" and len(classes) < 2):
            if rng.random() < self.spec.duplicate_p:
                spare = sorted(i for i, s in self.specs.items() if s.type == "ClassDecl" and i not in m.content)
                if spare:
                    return [self.specs[rng.choice(spare)]], []
            return [self.new("node", "ClassDecl")], []
        if op == "field":
            c1, c2 = rng.sample(classes, 2)
            f = self.new("node", "FieldDecl")
            t = self.new("node", "TypeAccess")
            return [f, t, self.new("edge", "declaration", c1, f.id), self.new("edge", "access", f.id, t.id),
                    self.new("edge", "type", t.id, c2)], []
        fields = m.of_type("FieldDecl")
        if op == "delete_field" and fields:
            return [], m.field_parts(rng.choice(fields))
        if op == "delete_class" and len(classes) > 1:
            c = rng.choice(classes)
            gone: list[int] = []
            for f in fields:
                parts = m.field_parts(f)
                if any(c in (self.specs[i].src, self.specs[i].tgt) for i in parts):
                    gone += [i for i in parts if i not in gone]
            # stray type accesses or edges still pointing at c
            for e in m.incident(c):
                if e not in gone:
                    gone.append(e)
            edges = [i for i in gone if self.specs[i].kind == "edge"]
            nodes = [i for i in gone if self.specs[i].kind == "node"]
            return [], edges + nodes + [c]
        if op == "retype":
            typed = [i for i in m.content if self.specs[i].type == "type"]
            if typed and len(classes) > 1:
                e = self.specs[rng.choice(sorted(typed))]
                others = [c for c in classes if c != e.tgt]
                return [self.new("edge", "type", e.src, rng.choice(others))], [e.id]
        return [self.new("node", "ClassDecl")], []


_UNIQUE = {
    # edge type -> endpoints that may carry at most one edge of that type
    "declaration": ("tgt",),
    "access": ("src", "tgt"),
    "type": ("src",),
}


def resolve_merge(specs: Mapping[int, ElementSpec], union: set[int]) -> set[int]:
    """Drop edges that would give a field two declarations or accesses, or a type access two types."""
    kept = set(union)
    seen: set[tuple[str, str, int]] = set()
    for i in sorted(union):
        s = specs[i]
        ends = _UNIQUE.get(s.type, ()) if s.kind == "edge" else ()
        keys = [(s.type, end, getattr(s, end)) for end in ends]
        if any(k in seen for k in keys):
            kept.discard(i)
        else:
            seen.update(keys)
    return kept


def generate_history(spec: HistoryGenSpec, type_graph: TypeGraph) -> History:
    rng = random.Random(spec.seed)
    specs: dict[int, ElementSpec] = {}
    gen = _Gen(rng, spec, specs)
    contents: dict[int, set[int]] = {}
    preds: dict[int, list[int]] = {}
    root = [gen.new("node", "ClassDecl") for _ in range(spec.root_classes)]
    contents[1] = {s.id for s in root}
    preds[1] = []
    for _ in range(spec.ops):
        _apply(gen, contents[1], spec)
    for t in range(2, spec.versions + 1):
        leaves = sorted(v for v in contents if not any(v in p for p in preds.values()))
        if len(leaves) >= 2 and rng.random() < spec.merge_p:
            i, j = rng.sample(leaves, 2)
            merged = resolve_merge(specs, contents[i] | contents[j])
            if len(merged) <= spec.max_elements:
                contents[t] = merged
                preds[t] = [i, j]
                continue
        base = rng.randrange(1, t) if rng.random() < spec.branch_p else t - 1
        contents[t] = set(contents[base])
        preds[t] = [base]
        for _ in range(spec.ops):
            _apply(gen, contents[t], spec)
    records = []
    for t in sorted(contents):
        base = set().union(*(contents[b] for b in preds[t])) if preds[t] else set()
        records.append(VersionRecord(
            t, preds[t], [specs[i] for i in sorted(contents[t] - base)], sorted(base - contents[t]),
        ))
    return History.from_records(type_graph, records)


def _apply(gen: _Gen, content: set[int], spec: HistoryGenSpec) -> None:
    m = _Model(gen.specs, content)
    mark = gen.next_id
    adds, dels = gen.operation(m)
    after = (content - set(dels)) | {s.id for s in adds}
    ok = not (adds and len(content) + len(adds) > spec.max_elements)
    ok = ok and (spec.max_total is None or len(gen.specs) <= spec.max_total)
    ok = ok and all(gen.specs[i].kind == "node" or {gen.specs[i].src, gen.specs[i].tgt} <= after for i in after)
    if not ok:
        # forget the specs this edit invented so they never reach the history
        for i in range(mark, gen.next_id):
            gen.specs.pop(i, None)
        gen.next_id = mark
        return
    content.clear()
    content.update(after)


def generate_mods(history: History, seed: int, count: int, *, untranslatable_p: float = 0.05,
                  duplicate_p: float = 0.15, max_elements: int = 60) -> list[Modification]:
    """A valid random modification sequence of at most ``count`` entries extending ``history``."""
    rng = random.Random(seed)
    shadow = history.copy()
    gen = _Gen(rng, HistoryGenSpec(untranslatable_p=untranslatable_p, duplicate_p=duplicate_p),
               dict(shadow.specs))
    gen.next_id = max(shadow.specs, default=0) + 1
    mods: list[Modification] = []
    next_version = max(shadow.versions) + 1

    def push(m: Modification) -> bool:
        if len(mods) >= count:
            return False
        shadow.apply(m)
        mods.append(m)
        return True

    while len(mods) < count:
        leaves = [t for t in shadow.versions if shadow.dag.is_leaf(t)]
        r = rng.random()
        if r < 0.2:
            push(VersionCreate(rng.choice(shadow.versions), next_version))
            next_version += 1
        elif r < 0.3 and len(leaves) >= 2:
            i, j = rng.sample(leaves, 2)
            kept = resolve_merge(shadow.specs, set(shadow.contents(i) | shadow.contents(j)))
            if rng.random() < 0.3:
                m = _Model(shadow.specs, kept)
                fields = m.of_type("FieldDecl")
                if fields:
                    kept -= set(m.field_parts(rng.choice(fields)))
            push(Merge(i, j, next_version, frozenset(kept)))
            next_version += 1
        else:
            t = rng.choice([v for v in leaves if not shadow.is_merge(v)] or [None])  # type: ignore[list-item]
            if t is None:
                push(VersionCreate(rng.choice(shadow.versions), next_version))
                next_version += 1
                continue
            m = _Model(shadow.specs, set(shadow.contents(t)))
            adds, dels = gen.operation(m)
            if adds and len(m.content) + len(adds) > max_elements:
                continue
            for i in dels:
                if not push(ElementDelete(i, t)):
                    break
            for s in adds:
                if not push(ElementCreate(s, t)):
                    break
            # the same class created independently on another branch; a later
            # merge of the two then carries two correspondence nodes for it
            if len(adds) == 1 and adds[0].type == "ClassDecl" and rng.random() < duplicate_p:
                others = [v for v in leaves if v != t and not shadow.is_merge(v)
                          and adds[0].id not in shadow.contents(v)]
                if others:
                    push(ElementCreate(adds[0], rng.choice(others)))
    return mods
