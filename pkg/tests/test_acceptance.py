"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""

from __future__ import annotations

import itertools
import random
import shutil
import subprocess
import sys
import time

import pytest

from mvtgg import io, resources
from mvtgg.bench import bench_run
from mvtgg.fixtures import ACC, DECL, TA, TYP, B, F, example_graph, example_history
from mvtgg.generate import HistoryGenSpec, generate_history, generate_mods
from mvtgg.graph import CORR
from mvtgg.history import ElementCreate, ElementDelete, ElementSpec, Merge, VersionCreate
from mvtgg.iso import isomorphic_with_bookkeeping
from mvtgg.mvsync import sync_f_mv
from mvtgg.mvtransform import adapt_rules
from mvtgg.oracle import batch_mvm, determinism_probe, init_marking_check, oracle_batch, oracle_sync
from mvtgg.tgg import trans_f
from mvtgg.versions import VersionDag, VersionSet, dematerialize, materialize


@pytest.fixture
def verdict(capsys):
    def emit(name: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {name}: {detail}")
        assert ok, detail
    return emit


def small_histories(tgg, n, seed0=0, versions=8):
    out = []
    for seed in range(seed0, seed0 + n):
        rng = random.Random(seed)
        spec = HistoryGenSpec(seed=seed, versions=rng.randint(1, versions), ops=rng.randint(1, 3),
                              branch_p=0.3, merge_p=0.3, max_total=60)
        out.append(generate_history(spec, tgg.types.source))
    return out


def test_c1_init_marking_exact(tgg, verdict):
    start = time.perf_counter()
    histories = small_histories(tgg, 50)
    assert all(len(h.specs) <= 60 and len(h.versions) <= 8 for h in histories)
    sizes = [len(h.specs) for h in histories]
    bad = [(k, init_marking_check(h, tgg)) for k, h in enumerate(histories)]
    bad = [b for b in bad if b[1]]
    elapsed = time.perf_counter() - start
    verdict("C1 init marking", not bad and elapsed < 10,
            f"{50 - len(bad)}/50 histories exact ({min(sizes)}-{max(sizes)} elements), {elapsed:.2f}s (bar 10s)")


def test_c2_batch_equivalence(tgg, diamond, verdict):
    start = time.perf_counter()
    histories = small_histories(tgg, 100, seed0=1000) + [example_history(tgg.types.source), diamond]
    total = passed = 0
    for h in histories:
        r = oracle_batch(tgg, h)
        total += len(r.verdicts)
        passed += sum(v.ok for v in r.verdicts)
    elapsed = time.perf_counter() - start
    verdict("C2 batch equivalence", passed == total and elapsed < 60,
            f"{passed}/{total} versions over {len(histories)} histories, {elapsed:.2f}s (bar 60s)")


def _fresh_equal(mvm, history, tgg, rules):
    """Every version of ``mvm`` isomorphic (bookkeeping included) to a fresh transform."""
    bad = []
    for t in history.versions:
        ref = trans_f(history.replay(t, tgg.types.merged), rules, tgg.types)
        if not isomorphic_with_bookkeeping(mvm.proj_bk(t), ref.triplet):
            bad.append(t)
    return bad


def test_c3_per_kind_sync(tgg, rules, diamond, verdict):
    results = {}

    mvm, _ = batch_mvm(diamond, tgg, rules)
    mv_rules = adapt_rules(rules, mvm.atg)
    out, rep = sync_f_mv(mvm, [VersionCreate(4, 5)], mv_rules)
    h = diamond.apply_mods([VersionCreate(4, 5)])
    results["version-create"] = not _fresh_equal(out, h, tgg, rules) and rep.applications == 0

    mods = [VersionCreate(4, 5), ElementCreate(ElementSpec.node(9, "ClassDecl"), 5),
            ElementCreate(ElementSpec.node(10, "FieldDecl"), 5),
            ElementCreate(ElementSpec.edge(11, "declaration", 9, 10), 5)]
    out, rep = sync_f_mv(mvm, mods, mv_rules)
    results["element-create"] = not _fresh_equal(out, diamond.apply_mods(mods), tgg, rules) and rep.applications == 1

    # removing the type edge first revokes the field correspondence that depends on it
    mods = [VersionCreate(4, 5)] + [ElementDelete(i, 5) for i in (TYP, B, ACC, TA, DECL, F)]
    out, rep = sync_f_mv(mvm, mods, mv_rules)
    h = diamond.apply_mods(mods)
    results["element-delete"] = (not _fresh_equal(out, h, tgg, rules) and rep.retired >= 2
                                 and not out.proj_bk(5).marked())

    base = diamond.restrict([1, 2, 3])
    mvm, _ = batch_mvm(base, tgg, rules)
    d = ElementSpec.node(9, "ClassDecl")
    mods = [ElementCreate(d, 2), ElementCreate(d, 3),
            Merge(2, 3, 4, frozenset(base.contents(2) | base.contents(3) | {9}))]
    out, rep = sync_f_mv(mvm, mods, adapt_rules(rules, mvm.atg))
    h = base.apply_mods(mods)
    g = out.proj_bk(4)
    translated = [x for x in h.contents(4) if not g.is_marked(x)]
    corr_nodes = [c for c in out.proj(4).ids_in_domain(CORR) if c in out.index]
    per_element = {x: sum(1 for c in corr_nodes if x in out.index[c].covered) for x in translated}
    one_each = bool(per_element) and set(per_element.values()) == {1}
    results["merge"] = not _fresh_equal(out, h, tgg, rules) and rep.redundant == 1 and one_each

    detail = ", ".join(f"{k} {'ok' if v else 'FAILED'}" for k, v in results.items())
    verdict("C3 per-kind sync", all(results.values()),
            f"{detail}; merge corrs per translated element {sorted(set(per_element.values()))}")


def test_c4_sequence_sync(tgg, verdict):
    start = time.perf_counter()
    total = passed = applied = 0
    for k, h in enumerate(small_histories(tgg, 100, seed0=5000, versions=6)):
        mods = generate_mods(h, 7000 + k, 12)
        assert len(mods) <= 12
        applied += len(mods)
        r = oracle_sync(tgg, h, mods)
        total += len(r.verdicts)
        passed += sum(v.ok for v in r.verdicts)
    elapsed = time.perf_counter() - start
    verdict("C4 sequence sync", passed == total and elapsed < 120,
            f"{passed}/{total} versions, {applied} modifications over 100 sequences, {elapsed:.2f}s (bar 120s)")


def test_c5_determinism(tgg, ambiguous, diamond, verdict):
    seeds = range(5)
    sources = [("example", example_graph(tgg.types.source))]
    sources += [(f"diamond v{t}", diamond.replay(t, tgg.types.merged)) for t in diamond.versions]
    for k, h in enumerate(small_histories(tgg, 5, seed0=900)):
        sources += [(f"generated {k} v{t}", h.replay(t, tgg.types.merged)) for t in h.versions]
    unstable = [name for name, g in sources if not determinism_probe(tgg, g, seeds).deterministic]
    flagged = determinism_probe(ambiguous, example_graph(ambiguous.types.source), seeds)
    verdict("C5 determinism", not unstable and not flagged.deterministic,
            f"{len(sources) - len(unstable)}/{len(sources)} sources stable under 5 seeds; "
            f"ambiguous grammar flagged: {not flagged.deterministic} ({flagged.reason})")


def _dags_upto(n):
    """Every DAG on versions 1..n whose numbering is topological (covers all shapes)."""
    choices = [[list(c) for r in range(1, t) for c in itertools.combinations(range(1, t), r)]
               for t in range(2, n + 1)]
    for preds in itertools.product(*choices):
        yield VersionDag(range(1, n + 1), [(b, t) for t, ps in zip(range(2, n + 1), preds) for b in ps])


def test_c6_materialization(verdict):
    checked = failed = 0
    for n in range(1, 6):
        for dag in _dags_upto(n):
            for bits in range(1 << n):
                s = VersionSet([t for t in range(1, n + 1) if bits >> (t - 1) & 1])
                checked += 1
                failed += dematerialize(dag, *materialize(dag, s)) != s
    exhaustive = checked
    rng = random.Random(20)
    for _ in range(1000):
        n = rng.randint(1, 12)
        dag = VersionDag([1])
        for t in range(2, n + 1):
            dag.add(t, rng.sample(range(1, t), min(t - 1, rng.choice([1, 1, 2, 3]))))
        s = VersionSet([t for t in dag.versions if rng.random() < 0.5])
        checked += 1
        failed += dematerialize(dag, *materialize(dag, s)) != s
    verdict("C6 materialization", failed == 0,
            f"{checked - failed}/{checked} exact ({exhaustive} exhaustive pairs, 1000 random)")


def test_c7_sharing_effect(tgg, verdict):
    spec = HistoryGenSpec(seed=3, versions=50, ops=2, branch_p=0.1, merge_p=0.1)
    h = generate_history(spec, tgg.types.source)
    report = bench_run(tgg, h, strategies=["svm-b", "mvm-b"])
    by = {s["strategy"]: s for s in report["strategies"]}
    sv, mv = by["svm-b"], by["mvm-b"]
    ok = (len(h.versions) == 50 and report["sharing"] >= 0.9
          and mv["applications"] < sv["applications"] and mv["bytes"] < sv["bytes"])
    verdict("C7 sharing effect", ok,
            f"sharing {report['sharing']:.3f}; applications mvm-b {mv['applications']} < svm-b {sv['applications']}; "
            f"bytes mvm {mv['bytes']} < triplets {sv['bytes']}")


def test_c8_benchmark_integrity(tmp_path, verdict):
    tgg_doc, hist = tmp_path / "tgg.json", tmp_path / "history.json"
    io.write(tgg_doc, resources.load("ast2cd"))
    io.write(hist, resources.load("diamond"))
    exe = shutil.which("mvtgg")
    cmd = [exe] if exe else [sys.executable, "-m", "mvtgg.cli"]
    base = cmd + ["bench", "--tgg", str(tgg_doc), "--history", str(hist)]
    clean = subprocess.run(base, capture_output=True, text=True)
    codes = {}
    for victim in ("svm-b", "mvm-b", "svm-i", "mvm-i"):
        codes[victim] = subprocess.run(base + ["--inject-fault", victim], capture_output=True, text=True).returncode
    ok = clean.returncode == 0 and all(c != 0 for c in codes.values())
    verdict("C8 benchmark integrity", ok, f"clean exit {clean.returncode}; faulted exits {codes}")
