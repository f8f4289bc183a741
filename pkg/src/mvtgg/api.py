"""Document-level operations shared by the command line and the HTTP service.

Every function takes and returns plain JSON-compatible dicts in the formats
of :mod:`mvtgg.io`; errors surface as :class:`InputError` (bad documents,
invalid modifications), :class:`ConfigurationError` (unusable grammars) or
:class:`BenchmarkIntegrityError`.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from typing import Any

from . import io, resources
from .bench import STRATEGIES, bench_run, fault_injector
from .errors import ConfigurationError, InputError
from .generate import HistoryGenSpec, generate_history
from .history import History
from .iso import isomorphic_with_bookkeeping
from .mvm import MultiVersionModel
from .mvsync import sync_f_mv
from .mvtransform import adapt_rules
from .oracle import ISOMORPHIC, MISMATCH, SKIPPED, batch_mvm, oracle_batch, oracle_sync
from .svm import SvmState, svm_batch, svm_from_doc, svm_incremental, svm_to_doc
from .tgg import Tgg

Doc = dict[str, Any]


def load_tgg(doc: Mapping[str, Any]) -> Tgg:
    """Parse a grammar and refuse it if any rule is not forward-executable."""
    tgg = io.tgg_from_doc(doc)
    diags = tgg.diagnostics()
    if diags:
        raise ConfigurationError("; ".join(f"{d.rule}: {d.code}: {d.message}" for d in diags))
    return tgg


def load_history(doc: Mapping[str, Any], tgg: Tgg) -> History:
    return io.history_from_doc(doc, tgg.types.source)


def _state_kind(doc: Mapping[str, Any]) -> str:
    io.expect_schema(doc, "state")
    kind = doc.get("strategy")
    if kind not in ("svm", "mvm"):
        raise InputError(f"unknown state strategy {kind!r}")
    return kind


def load_state(doc: Mapping[str, Any], tgg: Tgg | None = None) -> tuple[MultiVersionModel | SvmState, Tgg]:
    if _state_kind(doc) == "mvm":
        return io.mvm_from_doc(doc, tgg)
    return svm_from_doc(dict(doc), tgg)


def _summary(state: MultiVersionModel | SvmState, applications: int) -> Doc:
    if isinstance(state, MultiVersionModel):
        versions = state.dag.versions
        complete = state.complete_versions().to_list()
    else:
        versions = state.history.versions
        complete = [t for t, v in sorted(state.versions.items()) if v.complete]
    return {"applications": applications, "versions": list(versions), "complete_versions": complete}


def transform(tgg_doc: Mapping[str, Any], history_doc: Mapping[str, Any], strategy: str = "mvm",
              seed: int | None = None) -> tuple[Doc, Doc]:
    """Batch transformation; returns (state document, summary)."""
    tgg = load_tgg(tgg_doc)
    history = load_history(history_doc, tgg)
    if strategy == "mvm":
        mvm, apps = batch_mvm(history, tgg, seed=seed)
        return io.mvm_to_doc(mvm, tgg), _summary(mvm, apps)
    if strategy == "svm":
        state = svm_batch(history, tgg, seed=seed)
        return svm_to_doc(state, tgg), _summary(state, state.applications)
    raise InputError(f"unknown strategy {strategy!r} (expected svm or mvm)")


def sync(state_doc: Mapping[str, Any], mods_doc: Mapping[str, Any], *, tgg_doc: Mapping[str, Any] | None = None,
         strategy: str | None = None, seed: int | None = None) -> tuple[Doc, Doc]:
    """Fold a modification sequence into a state; the strategy must match the state's kind."""
    kind = _state_kind(state_doc)
    if strategy is not None and strategy != kind:
        raise InputError(f"--strategy {strategy} cannot continue a {kind} state")
    tgg = load_tgg(tgg_doc) if tgg_doc is not None else None
    state, tgg = load_state(state_doc, tgg)
    mods = io.mods_from_doc(mods_doc)
    rules = tgg.forward_rules()
    if isinstance(state, MultiVersionModel):
        mvm, report = sync_f_mv(state, mods, adapt_rules(rules, state.atg), seed=seed, in_place=True)
        summary = _summary(mvm, report.applications)
        summary.update(retired=report.retired, redundant_resolved=report.redundant, remarked=report.remarked)
        return io.mvm_to_doc(mvm, tgg), summary
    apps = svm_incremental(state, mods, rules, seed=seed)
    summary = _summary(state, apps)
    summary["copied_elements"] = state.copied
    return svm_to_doc(state, tgg), summary


def project(state_doc: Mapping[str, Any], version: int) -> Doc:
    """One version's triplet, bookkeeping included."""
    state, _ = load_state(state_doc)
    if isinstance(state, MultiVersionModel):
        if version not in state.dag.versions:
            raise InputError(f"unknown version {version}")
        return io.graph_to_doc(state.proj_bk(version))
    if version not in state.versions:
        raise InputError(f"unknown version {version}")
    return io.graph_to_doc(state.versions[version].triplet)


def _projections(state: MultiVersionModel | SvmState) -> dict[int, Any]:
    if isinstance(state, MultiVersionModel):
        return {t: state.proj_bk(t) for t in state.dag.versions}
    return {t: v.triplet for t, v in state.versions.items()}


def compare_states(a_doc: Mapping[str, Any], b_doc: Mapping[str, Any]) -> Doc:
    """Per-version isomorphism (with bookkeeping) between two states of the same history."""
    a, tgg = load_state(a_doc)
    b, _ = load_state(b_doc, tgg)
    pa, pb = _projections(a), _projections(b)
    if sorted(pa) != sorted(pb):
        raise InputError(f"states cover different versions: {sorted(pa)} vs {sorted(pb)}")
    verdicts = []
    for t in sorted(pa):
        v = isomorphic_with_bookkeeping(pa[t], pb[t])
        verdicts.append({
            "version": t,
            "status": ISOMORPHIC if v else MISMATCH,
            "certificate": v.reason,
        })
    ok = all(v["status"] == ISOMORPHIC for v in verdicts)
    return {**io.header("report"), "kind": "compare", "ok": ok, "verdicts": verdicts}


def verify(tgg_doc: Mapping[str, Any], history_doc: Mapping[str, Any],
           mods_doc: Mapping[str, Any] | None = None, seed: int | None = None) -> Doc:
    """Run the batch oracle, or the sync oracle when modifications are given."""
    tgg = load_tgg(tgg_doc)
    history = load_history(history_doc, tgg)
    if mods_doc is None:
        report = oracle_batch(tgg, history, seed=seed)
    else:
        report = oracle_sync(tgg, history, io.mods_from_doc(mods_doc), seed=seed)
    doc = {**io.header("report"), **report.to_doc()}
    doc["counts"] = {s: report.count(s) for s in (ISOMORPHIC, SKIPPED, MISMATCH)}
    return doc


def bench(tgg_doc: Mapping[str, Any], history_doc: Mapping[str, Any], *,
          mods_doc: Mapping[str, Any] | None = None, strategies: Sequence[str] = STRATEGIES,
          repeat: int = 1, seed: int | None = None, inject_fault: str | None = None) -> Doc:
    tgg = load_tgg(tgg_doc)
    history = load_history(history_doc, tgg)
    mods = io.mods_from_doc(mods_doc) if mods_doc is not None else None
    perturb = fault_injector(inject_fault) if inject_fault else None
    return bench_run(tgg, history, mods, list(strategies), repeat, seed=seed, perturb=perturb)


def generate(tgg_doc: Mapping[str, Any] | None = None, **params: Any) -> Doc:
    """A random history over the AST source language (``params`` as in HistoryGenSpec).

    The grammar defaults to the bundled AST to class diagram grammar.
    """
    tgg = load_tgg(tgg_doc if tgg_doc is not None else resources.load("ast2cd"))
    try:
        spec = HistoryGenSpec(**params)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None
    needed = {"ClassDecl", "FieldDecl", "TypeAccess"}
    if not needed <= set(tgg.types.source.node_types):
        raise ConfigurationError("the generator needs the AST source language (ClassDecl, FieldDecl, TypeAccess)")
    return io.history_to_doc(generate_history(spec, tgg.types.source))


def compact(state_doc: Mapping[str, Any]) -> tuple[Doc, Doc]:
    """Drop mv-nodes present in no version, with their incident elements and index entries."""
    state, tgg = load_state(state_doc)
    if not isinstance(state, MultiVersionModel):
        raise InputError("compact applies to multi-version states only")
    dead = {i for i, bits in state.p.items() if not bits}
    g = state.graph
    gone = set(dead)
    for i in dead:
        gone.update(g.out_edges(i))
        gone.update(g.in_edges(i))
    g.remove_many(gone)
    for i in dead:
        state.p.pop(i, None)
        state.u.pop(i, None)
        state.ends.pop(i, None)
        state.covered_by.pop(i, None)
        state.index.pop(i, None)
    for covers in state.covered_by.values():
        covers.difference_update(dead)
    problems = state.check()
    if problems:
        raise InputError("compaction produced an inconsistent state: " + "; ".join(problems[:5]))
    return io.mvm_to_doc(state, tgg), {"removed_nodes": len(dead), "removed_elements": len(gone)}
