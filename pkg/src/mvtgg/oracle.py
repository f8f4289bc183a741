"""Executable equivalence checks between the multi-version engine and per-version runs."""

from __future__ import annotations

import random
import time
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any

from .graph import SOURCE, Graph
from .history import History, Modification
from .iso import isomorphic_with_bookkeeping
from .match import find_matches
from .mvm import MultiVersionModel, comb
from .mvsync import redundancy, sync_f_mv
from .mvtransform import MvRule, PFold, adapt_rules, init_mv_marking, p_bits, run_mv_forward
from .rewrite import bookkeeping_set
from .tgg import ForwardRule, Tgg, forward_applicable, init_f, trans_f

ISOMORPHIC = "isomorphic"
SKIPPED = "skipped-incomplete"
MISMATCH = "mismatch"


@dataclass
class VersionVerdict:
    version: int
    status: str
    complete_mv: bool
    complete_sv: bool
    certificate: str | None = None

    @property
    def ok(self) -> bool:
        return self.status != MISMATCH

    def to_doc(self) -> dict[str, Any]:
        return {
            "version": self.version, "status": self.status, "complete_mv": self.complete_mv,
            "complete_sv": self.complete_sv, "certificate": self.certificate,
        }


@dataclass
class OracleReport:
    kind: str
    verdicts: list[VersionVerdict] = field(default_factory=list)
    stats: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts)

    def count(self, status: str) -> int:
        return sum(1 for v in self.verdicts if v.status == status)

    def to_doc(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "ok": self.ok,
            "verdicts": [v.to_doc() for v in self.verdicts],
            "stats": self.stats,
        }


def _source_marks(g: Graph) -> set[int]:
    return {i for i in g.marked() if g.domain_of(i) == SOURCE}


def compare_version(mvm: MultiVersionModel, t: int, reference: Graph, reference_complete: bool) -> VersionVerdict:
    """Compare the bookkeeping-sensitive projection at ``t`` with a single-version result.

    Complete on both sides: isomorphism including bookkeeping. Incomplete on
    both sides: the sets of still-marked source elements must agree (ids are
    history ids on both sides). Differing completeness is a mismatch.
    """
    mv = mvm.proj_bk(t)
    mv_complete = not mv.marked()
    if mv_complete != reference_complete:
        return VersionVerdict(t, MISMATCH, mv_complete, reference_complete,
                              f"completeness differs: multi-version {mv_complete}, single-version {reference_complete}")
    if mv_complete:
        verdict = isomorphic_with_bookkeeping(mv, reference)
        if verdict:
            return VersionVerdict(t, ISOMORPHIC, True, True)
        return VersionVerdict(t, MISMATCH, True, True, verdict.reason)
    a, b = _source_marks(mv), _source_marks(reference)
    if a != b:
        return VersionVerdict(t, MISMATCH, False, False,
                              f"untranslated elements differ: only multi-version {sorted(a - b)}, "
                              f"only single-version {sorted(b - a)}")
    return VersionVerdict(t, SKIPPED, False, False)


def batch_mvm(history: History, tgg: Tgg, rules: Sequence[ForwardRule] | None = None,
              mv_rules: Sequence[MvRule] | None = None, *, seed: int | None = None
              ) -> tuple[MultiVersionModel, int]:
    rules = rules if rules is not None else tgg.forward_rules()
    mvm = comb(history, tgg.types)
    mv_rules = mv_rules if mv_rules is not None else adapt_rules(rules, mvm.atg)
    init_mv_marking(mvm)
    apps = run_mv_forward(mvm, mv_rules, seed=seed)
    return mvm, len(apps)


def _per_version(report: OracleReport, mvm: MultiVersionModel, history: History, tgg: Tgg,
                 rules: Sequence[ForwardRule]) -> None:
    sv_apps = 0
    for t in history.versions:
        res = trans_f(history.replay(t, tgg.types.merged), rules, tgg.types)
        sv_apps += res.applications
        report.verdicts.append(compare_version(mvm, t, res.triplet, res.complete))
    report.stats["sv_applications"] = sv_apps


def oracle_batch(tgg: Tgg, history: History, *, seed: int | None = None) -> OracleReport:
    start = time.perf_counter()
    rules = tgg.forward_rules()
    mvm, apps = batch_mvm(history, tgg, rules, seed=seed)
    report = OracleReport("batch", stats={"mv_applications": apps})
    _per_version(report, mvm, history, tgg, rules)
    report.stats["seconds"] = round(time.perf_counter() - start, 4)
    return report


def oracle_sync(tgg: Tgg, history: History, mods: Sequence[Modification], *,
                seed: int | None = None) -> OracleReport:
    start = time.perf_counter()
    rules = tgg.forward_rules()
    extended = history.apply_mods(mods)  # validates, errors name the index
    mvm, apps = batch_mvm(history, tgg, rules, seed=seed)
    mv_rules = adapt_rules(rules, mvm.atg)
    mvm, sync = sync_f_mv(mvm, mods, mv_rules, seed=seed)
    report = OracleReport("sync", stats={
        "mv_applications": apps, "sync_applications": sync.applications,
        "retired": sync.retired, "redundant_resolved": sync.redundant, "diagnostics": sync.diagnostics,
        "redundancy_after": sum(redundancy(mvm, t) for t in extended.versions),
    })
    _per_version(report, mvm, extended, tgg, rules)
    report.stats["seconds"] = round(time.perf_counter() - start, 4)
    return report


@dataclass
class ProbeVerdict:
    deterministic: bool
    seeds: list[int]
    complete: list[bool]
    reason: str | None = None


def determinism_probe(tgg: Tgg, source: Graph, seeds: Iterable[int]) -> ProbeVerdict:
    """Run the forward transformation under several match orders and compare the results."""
    rules = tgg.forward_rules()
    seeds = list(seeds)
    results = [trans_f(source, rules, tgg.types, seed=s) for s in seeds]
    flags = [r.complete for r in results]
    for s, r in zip(seeds[1:], results[1:]):
        if r.complete != results[0].complete:
            return ProbeVerdict(False, seeds, flags, f"seed {s}: completeness differs from seed {seeds[0]}")
        v = isomorphic_with_bookkeeping(results[0].triplet, r.triplet)
        if not v:
            return ProbeVerdict(False, seeds, flags, f"seed {s} vs seed {seeds[0]}: {v.reason}")
    return ProbeVerdict(True, seeds, flags)


# -- structural checks used by the acceptance suite ---------------------------


def same_with_bookkeeping(g: Graph, h: Graph) -> bool:
    """Exact equality of elements and marked sets (bookkeeping edge ids may differ)."""
    return (
        g.structure() == h.structure()
        and (g.bookkeeping_node is None) == (h.bookkeeping_node is None)
    )


def init_marking_check(history: History, tgg: Tgg) -> list[int]:
    """Versions where the projection after init marking is not exactly init_F of the replay."""
    mvm = init_mv_marking(comb(history, tgg.types))
    bad = []
    for t in history.versions:
        bk = mvm.proj_bk(t)
        ref = init_f(history.replay(t, tgg.types.merged), tgg.types)
        if not same_with_bookkeeping(bk, ref) or mvm.projection_bookkeeping_set(t) != bookkeeping_set(ref):
            bad.append(t)
    return bad


def applicability_check(mvm: MultiVersionModel, mv_rules: Sequence[MvRule], t: int) -> list[str]:
    """Per rule: projected mv-matches with t in P versus forward matches in the projection at t."""
    problems = []
    host = mvm.proj_bk(t)
    bit = 1 << t
    for rule in mv_rules:
        fr = rule.forward
        keys = sorted(fr.lhs)
        mv = set()
        for m in find_matches(rule.lhs, mvm.graph, constraint=PFold(rule, mvm)):
            if p_bits(rule, m, mvm) & bit:
                mv.add(tuple(m[k] for k in keys))
        sv = {
            tuple(m[k] for k in keys)
            for m in find_matches(fr.lhs, host, lambda m: forward_applicable(fr, host, m))
        }
        if mv != sv:
            problems.append(f"version {t}, rule {rule.name}: {len(mv)} mv matches vs {len(sv)} forward matches")
    return problems


def sample_fixpoint_states(history: History, tgg: Tgg, samples: int, seed: int) -> list[str]:
    """Stop the mv fixpoint at random points and compare applicability in every version."""
    rng = random.Random(seed)
    rules = tgg.forward_rules()
    problems = []
    for _ in range(samples):
        mvm = init_mv_marking(comb(history, tgg.types))
        mv_rules = adapt_rules(rules, mvm.atg)
        run_mv_forward(mvm, mv_rules, seed=rng.randrange(1 << 30), limit=rng.randrange(0, 12))
        t = rng.choice(history.versions)
        problems += applicability_check(mvm, mv_rules, t)
    return problems
