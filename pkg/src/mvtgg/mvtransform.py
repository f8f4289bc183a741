"""Multi-version forward rules and the joint forward transformation."""

from __future__ import annotations

import random
from collections.abc import Sequence
from dataclasses import dataclass

from .errors import NotApplicableError
from .graph import CORR, EDGE, NODE, SOURCE, TARGET, Graph, creation_order
from .match import Morphism, find_matches
from .mvm import AdaptedTypeGraph, CorrEntry, MultiVersionModel, translate_graph
from .rewrite import Rule, apply_rule
from .tgg import ForwardRule
from .versions import VersionSet


@dataclass
class MvRule:
    name: str
    rule: Rule
    forward: ForwardRule
    # lhs pattern mv-nodes (rule element ids) by role
    nodes: frozenset[int]
    translation: frozenset[int]
    context: frozenset[int]
    corr_context: frozenset[int]
    created_corr: int
    created_nodes: tuple[int, ...]

    @property
    def lhs(self) -> Graph:
        return self.rule.lhs

    @property
    def rhs(self) -> Graph:
        return self.rule.rhs


def adapt_rule(fr: ForwardRule, atg: AdaptedTypeGraph) -> MvRule:
    """Translate a forward rule into the adapted type graph; bookkeeping is dropped."""
    rhs = translate_graph(fr.rhs, atg)
    keep = set(fr.lhs)
    for i in list(keep):
        if fr.lhs.element(i).type in atg.edge_derived:
            keep.update(rhs.out_edges(i))
    lhs = Graph(atg)
    lhs._next_id = rhs._next_id
    for e in creation_order(rhs.element(i) for i in keep):
        lhs.add(e)
    nodes = frozenset(i for i in lhs if lhs.element(i).kind == NODE)
    created_nodes = tuple(
        i for i in sorted(rhs) if i not in keep and rhs.element(i).kind == NODE
    )
    return MvRule(
        name=fr.name,
        rule=Rule.production(fr.name, lhs, rhs),
        forward=fr,
        nodes=nodes,
        translation=fr.translation,
        context=nodes - fr.translation,
        corr_context=fr.corr_context,
        created_corr=fr.created_corr,
        created_nodes=created_nodes,
    )


def adapt_rules(rules: Sequence[ForwardRule], atg: AdaptedTypeGraph) -> list[MvRule]:
    return [adapt_rule(fr, atg) for fr in rules]


def compute_p(rule: MvRule, match: Morphism, mvm: MultiVersionModel) -> VersionSet:
    """P = (cap p over lhs nodes & cap u over the translation image) - cup u over the context."""
    return VersionSet(p_bits(rule, match, mvm))


def p_bits(rule: MvRule, match: Morphism, mvm: MultiVersionModel) -> int:
    p, u = mvm.p, mvm.u
    bits = mvm.dag.all().bits
    for x in rule.nodes:
        bits &= p[match[x]]
    for x in rule.translation:
        bits &= u[match[x]]
    for x in rule.context:
        bits &= ~u.get(match[x], 0)
    return bits


class PFold:
    """Folds P while a match grows so that matches with P = {} are pruned early."""

    def __init__(self, rule: MvRule, mvm: MultiVersionModel):
        self.all = mvm.dag.all().bits
        self.p = mvm.p
        self.u = mvm.u
        self.nodes = rule.nodes
        self.translation = rule.translation

    def start(self) -> int:
        return self.all

    def extend(self, bits: int, pid: int, hid: int) -> int | None:
        if pid not in self.nodes:
            return bits
        bits &= self.p[hid]
        if pid in self.translation:
            bits &= self.u[hid]
        else:
            bits &= ~self.u.get(hid, 0)
        return bits or None


def init_mv_marking(mvm: MultiVersionModel) -> MultiVersionModel:
    """u := p on source mv-nodes, u := {} elsewhere (in place; returned for chaining)."""
    for i in mvm.p:
        mvm.u[i] = mvm.p[i] if mvm.domain(i) == SOURCE else 0
    return mvm


@dataclass
class MvApplication:
    rule: str
    corr: int
    applied: VersionSet


def apply_mv_rule(mvm: MultiVersionModel, rule: MvRule, match: Morphism,
                  applied: VersionSet | int | None = None) -> MvApplication:
    """Apply in place; created nodes get p := P, translated nodes get u := u - P."""
    bits = p_bits(rule, match, mvm)
    if applied is not None:
        want = applied.bits if isinstance(applied, VersionSet) else applied
        if want & ~bits:
            raise NotApplicableError(f"rule {rule.name}: requested versions outside P")
        bits = want
    if not bits:
        raise NotApplicableError(f"rule {rule.name}: P is empty at this match")
    g, comatch = apply_rule(rule.rule, mvm.graph, match, in_place=True)
    created_nodes = [comatch[i] for i in rule.created_nodes]
    for i in created_nodes:
        mvm.p[i] = bits
        mvm.u[i] = 0
    for rid in rule.created_nodes:
        if rule.rhs.element(rid).type in mvm.atg.edge_derived:
            h = comatch[rid]
            ends = [g.element(e) for e in g.out_edges(h)]
            src = next(e.tgt for e in ends if e.type.endswith(".src"))
            tgt = next(e.tgt for e in ends if e.type.endswith(".tgt"))
            mvm.ends[h] = (src, tgt)  # type: ignore[assignment]
    covered = frozenset(match[x] for x in rule.translation)
    for h in covered:
        mvm.u[h] &= ~bits
    corr = comatch[rule.created_corr]
    mvm.register(CorrEntry(
        corr=corr,
        rule=rule.name,
        required=frozenset(match[x] for x in rule.corr_context),
        targets=frozenset(i for i in created_nodes if mvm.domain(i) == TARGET),
        covered=covered,
        applied=bits,
        match=dict(match),
        created=tuple(comatch[e.id] for e in rule.rule.created),
    ))
    return MvApplication(rule.name, corr, VersionSet(bits))


@dataclass
class MvTransResult:
    mvm: MultiVersionModel
    applications: list[MvApplication]
    complete_versions: VersionSet


def run_mv_forward(mvm: MultiVersionModel, rules: Sequence[MvRule], *,
                   seed: int | None = None, limit: int | None = None) -> list[MvApplication]:
    """Apply mv rules in place until no match with P != {} remains.

    ``limit`` stops early after that many applications (used to sample
    intermediate states).
    """
    rng = random.Random(seed) if seed is not None else None
    order = list(rules)
    apps: list[MvApplication] = []
    while True:
        progress = False
        if rng is not None:
            rng.shuffle(order)
        for rule in order:
            matches = find_matches(
                rule.lhs, mvm.graph, constraint=PFold(rule, mvm),
                seed=rng.randrange(1 << 30) if rng is not None else None,
            )
            for m in matches:
                if limit is not None and len(apps) >= limit:
                    return apps
                # earlier applications in this batch may have consumed the versions
                if p_bits(rule, m, mvm):
                    apps.append(apply_mv_rule(mvm, rule, m))
                    progress = True
        if not progress:
            return apps


def trans_f_mv(mvm: MultiVersionModel, rules: Sequence[MvRule], *, seed: int | None = None,
               in_place: bool = False) -> MvTransResult:
    m = mvm if in_place else mvm.copy()
    apps = run_mv_forward(m, rules, seed=seed)
    return MvTransResult(m, apps, m.complete_versions())


def corr_nodes(mvm: MultiVersionModel) -> list[int]:
    return [i for i in mvm.p if mvm.domain(i) == CORR]


def link_targets(mvm: MultiVersionModel, corr: int) -> list[int]:
    g = mvm.graph
    return sorted(g.element(e).tgt for e in g.out_edges(corr) if g.element(e).kind == EDGE)  # type: ignore[misc]
