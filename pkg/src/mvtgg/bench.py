"""Four-strategy benchmark: single- vs multi-version, batch vs incremental.

Phase split (an approximation of the usual init / index / execute legend):

* init: forward rule derivation (and adaptation) plus initial marking;
* index: building the host graphs the matcher runs on (replay, comb);
* execute: the fixpoint loops, and for incremental strategies the
  synchronization of every modification (triplet copies included).

Before a report is produced, the per-version results of all strategies are
compared pairwise by isomorphism with bookkeeping; any disagreement aborts.
"""

from __future__ import annotations

import json
import statistics
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

from .errors import BenchmarkIntegrityError, InputError
from .graph import SOURCE, Graph
from .history import History, Modification, history_to_mods
from .io import dag_to_doc, graph_to_doc, presence_to_doc
from .iso import isomorphic_with_bookkeeping
from .mvm import MultiVersionModel, comb
from .mvsync import sync_f_mv
from .mvtransform import adapt_rules, init_mv_marking, run_mv_forward
from .svm import SvmState, SvmVersion, svm_apply
from .tgg import Tgg, derive_forward_rules, init_f, run_forward

STRATEGIES = ("svm-b", "mvm-b", "svm-i", "mvm-i")
PHASE_NOTE = (
    "phase attribution is approximate: init = rule derivation + marking, "
    "index = host graph construction, execute = fixpoint and synchronization"
)


@dataclass
class StrategyRun:
    strategy: str
    phases: dict[str, float]
    applications: int
    elements: int
    bytes: int
    series: list[int] = field(default_factory=list)
    outputs: dict[int, Graph] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)


class _Clock:
    def __init__(self) -> None:
        self.phases = {"init": 0.0, "index": 0.0, "execute": 0.0}

    def __call__(self, phase: str, fn: Callable[[], Any]) -> Any:
        start = time.perf_counter()
        try:
            return fn()
        finally:
            self.phases[phase] += time.perf_counter() - start


def _size(doc: dict[str, Any]) -> int:
    return len(json.dumps(doc, sort_keys=True, separators=(",", ":")))


def svm_model_size(versions: dict[int, SvmVersion]) -> tuple[int, int]:
    """(elements incl. bookkeeping, serialized bytes) summed over per-version triplets."""
    elems = sum(len(v.triplet) + len(v.triplet.marked()) + 1 for v in versions.values())
    size = sum(_size(graph_to_doc(v.triplet, with_types=False)) for v in versions.values())
    return elems, size


def mvm_model_size(mvm: MultiVersionModel) -> tuple[int, int]:
    """(elements of the fully materialized mv graph, serialized bytes of graph + DAG + presence)."""
    full = mvm.full_graph()
    doc = {"graph": graph_to_doc(mvm.graph, with_types=False), "dag": dag_to_doc(mvm.dag),
           "presence": presence_to_doc(mvm)}
    return len(full), _size(doc)


def _svm_b(tgg: Tgg, history: History, seed: int | None) -> StrategyRun:
    clock = _Clock()
    rules = clock("init", lambda: derive_forward_rules(tgg.rules, tgg.types))
    versions: dict[int, SvmVersion] = {}
    series = []
    for t in history.versions:
        src = clock("index", lambda: history.replay(t, tgg.types.merged))
        g = clock("init", lambda: init_f(src, tgg.types))
        traces = clock("execute", lambda: run_forward(g, rules, seed=seed))
        versions[t] = SvmVersion(g, traces, {i: i for i in history.contents(t)})
        series.append(len(traces))
    elems, size = svm_model_size(versions)
    return StrategyRun("svm-b", clock.phases, sum(series), elems, size, series,
                       {t: v.triplet for t, v in versions.items()})


def _mvm_b(tgg: Tgg, history: History, seed: int | None) -> StrategyRun:
    clock = _Clock()
    rules = clock("init", lambda: derive_forward_rules(tgg.rules, tgg.types))
    mvm = clock("index", lambda: comb(history, tgg.types))
    mv_rules = clock("init", lambda: adapt_rules(rules, mvm.atg))
    clock("init", lambda: init_mv_marking(mvm))
    apps = clock("execute", lambda: run_mv_forward(mvm, mv_rules, seed=seed))
    elems, size = mvm_model_size(mvm)
    return StrategyRun("mvm-b", clock.phases, len(apps), elems, size, [len(apps)],
                       {t: mvm.proj_bk(t) for t in history.versions})


def _svm_i(tgg: Tgg, base: History, mods: Sequence[Modification], seed: int | None) -> StrategyRun:
    clock = _Clock()
    rules = clock("init", lambda: derive_forward_rules(tgg.rules, tgg.types))
    state = SvmState(base.copy(), {})
    apps = 0
    for t in base.versions:
        src = clock("index", lambda: base.replay(t, tgg.types.merged))
        g = clock("init", lambda: init_f(src, tgg.types))
        traces = clock("execute", lambda: run_forward(g, rules, seed=seed))
        state.versions[t] = SvmVersion(g, traces, {i: i for i in base.contents(t)})
        apps += len(traces)
    series = []
    for k, m in enumerate(mods):
        try:
            n = clock("execute", lambda: svm_apply(state, m, rules, seed=seed))
        except InputError as exc:
            raise InputError(exc.detail, index=k) from None
        series.append(n)
    elems, size = svm_model_size(state.versions)
    return StrategyRun("svm-i", clock.phases, apps + sum(series), elems, size, series,
                       {t: v.triplet for t, v in state.versions.items()}, {"copied_elements": state.copied})


def _mvm_i(tgg: Tgg, base: History, mods: Sequence[Modification], seed: int | None) -> StrategyRun:
    clock = _Clock()
    rules = clock("init", lambda: derive_forward_rules(tgg.rules, tgg.types))
    mvm = clock("index", lambda: comb(base, tgg.types))
    mv_rules = clock("init", lambda: adapt_rules(rules, mvm.atg))
    clock("init", lambda: init_mv_marking(mvm))
    apps = len(clock("execute", lambda: run_mv_forward(mvm, mv_rules, seed=seed)))
    series = []
    for k, m in enumerate(mods):
        try:
            _, rep = clock("execute", lambda: sync_f_mv(mvm, [m], mv_rules, seed=seed, in_place=True))
        except InputError as exc:
            raise InputError(exc.detail, index=k) from None
        series.append(rep.applications)
    elems, size = mvm_model_size(mvm)
    return StrategyRun("mvm-i", clock.phases, apps + sum(series), elems, size, series,
                       {t: mvm.proj_bk(t) for t in mvm.dag.versions})


def flip_mark(outputs: dict[int, Graph]) -> None:
    """Fault injection: toggle the bookkeeping of one source element in the last version."""
    t = max(outputs)
    g = outputs[t].copy()
    x = min(g.ids_in_domain(SOURCE), default=None)
    if x is None:
        g.add_node(sorted(g.type_graph.node_types)[0])
    elif g.is_marked(x):
        g.unmark(x)
    else:
        g.mark(x)
    outputs[t] = g


def cross_check(runs: Sequence[StrategyRun]) -> dict[str, Any]:
    if len(runs) < 2:
        return {"performed": False, "comparisons": 0}
    ref = runs[0]
    n = 0
    for run in runs[1:]:
        if sorted(run.outputs) != sorted(ref.outputs):
            raise BenchmarkIntegrityError(f"{run.strategy} and {ref.strategy} produced different version sets")
        for t in sorted(ref.outputs):
            v = isomorphic_with_bookkeeping(ref.outputs[t], run.outputs[t])
            n += 1
            if not v:
                raise BenchmarkIntegrityError(
                    f"version {t}: {run.strategy} disagrees with {ref.strategy} ({v.reason})"
                )
    return {"performed": True, "comparisons": n, "passed": True}


def bench_run(tgg: Tgg, history: History, mods: Sequence[Modification] | None = None,
              strategies: Sequence[str] = STRATEGIES, repeat: int = 1, *, seed: int | None = None,
              perturb: Callable[[StrategyRun], None] | None = None) -> dict[str, Any]:
    """Run the strategies end to end, cross-check their results, and build the report.

    Without ``mods`` the incremental strategies start from the root version
    and replay the rest of the history as modifications; batch strategies
    always transform the final history.
    """
    if not strategies:
        raise InputError("no strategies selected")
    unknown = [s for s in strategies if s not in STRATEGIES]
    if unknown:
        raise InputError(f"unknown strategies {unknown}")
    if repeat < 1:
        raise InputError("repeat must be at least 1")
    tgg.forward_rules()  # configuration errors surface before timing
    if mods is None:
        root = history.dag.root
        base = history.restrict([root]) if root is not None else history
        mods = history_to_mods(history, [root]) if root is not None else []
        final = history
    else:
        base = history
        final = history.apply_mods(mods)

    runs: list[StrategyRun] = []
    for name in strategies:
        reps = []
        for _ in range(repeat):
            if name == "svm-b":
                reps.append(_svm_b(tgg, final, seed))
            elif name == "mvm-b":
                reps.append(_mvm_b(tgg, final, seed))
            elif name == "svm-i":
                reps.append(_svm_i(tgg, base, mods, seed))
            else:
                reps.append(_mvm_i(tgg, base, mods, seed))
        run = reps[-1]
        run.phases = {p: statistics.median(r.phases[p] for r in reps) for p in run.phases}
        runs.append(run)
    if perturb is not None:
        for run in runs:
            perturb(run)
    check = cross_check(runs)
    return {
        "schema": "mvtgg/report",
        "schema_version": 1,
        "kind": "bench",
        "versions": len(final.versions),
        "modifications": len(mods),
        "sharing": round(final.sharing(), 4),
        "repeat": repeat,
        "phase_note": PHASE_NOTE,
        "cross_check": check,
        "strategies": [
            {
                "strategy": r.strategy,
                "phases_seconds": {**{p: round(s, 6) for p, s in r.phases.items()},
                                   "total": round(sum(r.phases.values()), 6)},
                "applications": r.applications,
                "elements": r.elements,
                "bytes": r.bytes,
                "series": r.series,
                **r.extra,
            }
            for r in runs
        ],
    }


def fault_injector(strategy: str) -> Callable[[StrategyRun], None]:
    if strategy not in STRATEGIES:
        raise InputError(f"unknown strategy {strategy!r} for fault injection")

    def perturb(run: StrategyRun) -> None:
        if run.strategy == strategy:
            flip_mark(run.outputs)
    return perturb
