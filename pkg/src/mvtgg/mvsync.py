"""Incremental synchronization of a transformed multi-version triplet.

Every handler edits p/u version sets only; nothing structural is deleted, so
the other versions keep their history. After the edit, versions whose
consistency may have been disturbed are repaired:

* a correspondence node present at the version is retired there (the
  version leaves its p-set and the p-sets of the targets it created) when
  one of its covered source nodes is absent or untranslated at the version,
  or when a correspondence node it required is absent;
* for merges, a source node covered by several present correspondence nodes
  keeps the one present at the first base and retires the others;
* both rules are iterated to a fixpoint, then every covered node of a
  retired correspondence node that is still present and no longer covered
  by a surviving one gets the version back in its u-set;
* finally the multi-version forward fixpoint runs.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .errors import InputError
from .graph import EDGE, SOURCE
from .history import ElementCreate, ElementDelete, ElementSpec, Merge, Modification, VersionCreate, check_spec
from .mvm import MultiVersionModel
from .mvtransform import MvRule, run_mv_forward


@dataclass
class SyncReport:
    applications: int = 0
    retired: int = 0
    redundant: int = 0
    remarked: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def add(self, other: SyncReport) -> None:
        self.applications += other.applications
        self.retired += other.retired
        self.redundant += other.redundant
        self.remarked += other.remarked
        self.diagnostics.extend(other.diagnostics)


def _require_version(mvm: MultiVersionModel, t: int) -> None:
    if t not in mvm.dag:
        raise InputError(f"unknown version {t}")


def _require_leaf(mvm: MultiVersionModel, t: int) -> None:
    _require_version(mvm, t)
    if not mvm.dag.is_leaf(t):
        raise InputError(f"version {t} already has successors; only leaf versions may be edited")


def _inherit(mvm: MultiVersionModel, bases: Iterable[int], new: int) -> None:
    mask = 0
    for b in bases:
        mask |= 1 << b
    bit = 1 << new
    for store in (mvm.p, mvm.u):
        for i, bits in store.items():
            if bits & mask:
                store[i] = bits | bit


def repair(mvm: MultiVersionModel, w: int, *, merge_base: int | None = None) -> SyncReport:
    rep = SyncReport()
    bit = 1 << w
    p, u = mvm.p, mvm.u
    retired: list[int] = []

    def retire(c: int) -> None:
        p[c] &= ~bit
        for x in mvm.index[c].targets:
            p[x] &= ~bit
        retired.append(c)

    while True:
        changed = False
        for c in sorted(mvm.index):
            if not p[c] & bit:
                continue
            e = mvm.index[c]
            if any(not p[x] & bit or u[x] & bit for x in e.covered) or any(not p[r] & bit for r in e.required):
                retire(c)
                changed = True
        if merge_base is not None:
            for x in sorted(mvm.covered_by):
                live = sorted(c for c in mvm.covered_by[x] if p[c] & bit)
                if len(live) < 2:
                    continue
                keep = min(live, key=lambda c: (not p[c] >> merge_base & 1, c))
                if len(live) > 2:
                    rep.diagnostics.append(
                        f"version {w}: source element {x} had {len(live)} correspondence nodes; kept {keep}"
                    )
                for c in live:
                    if c != keep:
                        retire(c)
                        rep.redundant += 1
                changed = True
        if not changed:
            break
    for c in retired:
        for x in mvm.index[c].covered:
            if p[x] & bit and not u[x] & bit and not any(p[d] & bit for d in mvm.covered_by[x]):
                u[x] |= bit
                rep.remarked += 1
    rep.retired = len(retired)
    return rep


def _finish(mvm: MultiVersionModel, rules: Sequence[MvRule], rep: SyncReport, seed: int | None) -> SyncReport:
    rep.applications += len(run_mv_forward(mvm, rules, seed=seed))
    return rep


def apply_version_create(mvm: MultiVersionModel, base: int, new: int) -> SyncReport:
    """New version behaving like ``base``; no rule application is needed."""
    _require_version(mvm, base)
    if new in mvm.dag:
        raise InputError(f"version {new} already exists")
    mvm.dag.add(new, [base])
    _inherit(mvm, [base], new)
    return SyncReport()


def sync_element_create(mvm: MultiVersionModel, spec: ElementSpec, t: int, rules: Sequence[MvRule],
                        *, seed: int | None = None) -> SyncReport:
    _require_leaf(mvm, t)
    check_spec(spec, mvm.ttg.source)
    bit = 1 << t
    if spec.id in mvm.p:
        if mvm.domain(spec.id) != SOURCE or mvm.origin(spec.id) != spec.element():
            raise InputError(f"element {spec.id} redeclared with a different spec")
        if mvm.p[spec.id] & bit:
            raise InputError(f"element {spec.id} already present in version {t}")
    preds = mvm.dag.preds[t]
    if len(preds) == 2 and not any(mvm.present(spec.id, b) for b in preds):
        raise InputError(f"merge version {t} cannot gain element {spec.id} outside its bases")
    if spec.kind == EDGE and not (mvm.present(spec.src, t) and mvm.present(spec.tgt, t)):  # type: ignore[arg-type]
        raise InputError(f"edge {spec.id} has an endpoint absent from version {t}")
    if spec.kind == EDGE:
        et = mvm.ttg.source.edge_types[spec.type]
        if (mvm.graph.element(spec.src).type, mvm.graph.element(spec.tgt).type) != (et.source, et.target):  # type: ignore[arg-type]
            raise InputError(f"edge {spec.id} of type {spec.type!r} connects wrongly typed endpoints")
    if spec.id in mvm.p:
        mvm.p[spec.id] |= bit
        mvm.u[spec.id] |= bit
    else:
        mvm.add_element(spec.element(), bit, bit)
    return _finish(mvm, rules, SyncReport(), seed)


def _incident_present(mvm: MultiVersionModel, x: int, t: int) -> list[int]:
    g = mvm.graph
    out = []
    for r in g.in_edges(x):
        e = g.element(r)
        if e.type.endswith((".src", ".tgt")) and mvm.present(e.src, t):  # type: ignore[arg-type]
            out.append(e.src)
    return sorted(set(out))  # type: ignore[arg-type]


def sync_element_delete(mvm: MultiVersionModel, x: int, t: int, rules: Sequence[MvRule],
                        *, seed: int | None = None) -> SyncReport:
    _require_leaf(mvm, t)
    if x not in mvm.p or mvm.domain(x) != SOURCE or not mvm.present(x, t):
        raise InputError(f"element {x} is not present in version {t}")
    dangling = _incident_present(mvm, x, t)
    if dangling:
        raise InputError(f"deleting {x} in version {t} would leave edges {dangling} dangling")
    bit = 1 << t
    mvm.p[x] &= ~bit
    # an untranslated element takes nothing with it; otherwise the repair
    # retires its correspondence node and everything depending on it
    mvm.u[x] &= ~bit
    return _finish(mvm, rules, repair(mvm, t), seed)


def sync_merge(mvm: MultiVersionModel, i: int, j: int, w: int, kept: Iterable[int],
               rules: Sequence[MvRule], *, seed: int | None = None) -> SyncReport:
    _require_version(mvm, i)
    _require_version(mvm, j)
    if i == j:
        raise InputError("merge bases must differ")
    if w in mvm.dag:
        raise InputError(f"version {w} already exists")
    kept = set(kept)
    union = mvm.content(i) | mvm.content(j)
    if not kept <= union:
        raise InputError(f"merge keeps elements outside both bases: {sorted(kept - union)[:5]}")
    for x in kept:
        if x in mvm.ends and not set(mvm.ends[x]) <= kept:
            raise InputError(f"merge keeps edge {x} without its endpoints")
    mvm.dag.add(w, [i, j])
    _inherit(mvm, [i, j], w)
    bit = 1 << w
    for x in union - kept:
        mvm.p[x] &= ~bit
        mvm.u[x] &= ~bit
    return _finish(mvm, rules, repair(mvm, w, merge_base=i), seed)


def apply_modification(mvm: MultiVersionModel, mod: Modification, rules: Sequence[MvRule],
                       *, seed: int | None = None) -> SyncReport:
    if isinstance(mod, VersionCreate):
        return apply_version_create(mvm, mod.base, mod.version)
    if isinstance(mod, ElementCreate):
        return sync_element_create(mvm, mod.spec, mod.version, rules, seed=seed)
    if isinstance(mod, ElementDelete):
        return sync_element_delete(mvm, mod.element, mod.version, rules, seed=seed)
    if isinstance(mod, Merge):
        return sync_merge(mvm, mod.base_i, mod.base_j, mod.version, mod.kept, rules, seed=seed)
    raise InputError(f"unknown modification {mod!r}")


def sync_f_mv(mvm: MultiVersionModel, mods: Sequence[Modification], rules: Sequence[MvRule], *,
              seed: int | None = None, in_place: bool = False) -> tuple[MultiVersionModel, SyncReport]:
    """Fold the handlers over ``mods``; the first invalid one aborts with its index."""
    m = mvm if in_place else mvm.copy()
    total = SyncReport()
    for k, mod in enumerate(mods):
        try:
            total.add(apply_modification(m, mod, rules, seed=seed))
        except InputError as exc:
            raise InputError(exc.detail, index=k) from None
    return m, total


def redundancy(mvm: MultiVersionModel, t: int) -> int:
    """Source elements linked to more than one correspondence node present at ``t``."""
    g = mvm.graph
    counts: dict[int, int] = {}
    for c in mvm.index:
        if not mvm.present(c, t):
            continue
        for e in g.out_edges(c):
            x = g.element(e).tgt
            if mvm.domain(x) == SOURCE:  # type: ignore[arg-type]
                counts[x] = counts.get(x, 0) + 1  # type: ignore[index]
    return sum(1 for n in counts.values() if n > 1)

