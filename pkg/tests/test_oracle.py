from __future__ import annotations

from mvtgg.fixtures import example_history
from mvtgg.generate import HistoryGenSpec, generate_history, generate_mods
from mvtgg.graph import Graph
from mvtgg.history import ElementCreate, ElementSpec, VersionCreate, history_to_mods
from mvtgg.oracle import (
    ISOMORPHIC,
    SKIPPED,
    determinism_probe,
    init_marking_check,
    oracle_batch,
    oracle_sync,
    sample_fixpoint_states,
)


def test_batch_diamond(tgg, diamond):
    r = oracle_batch(tgg, diamond)
    assert r.ok and r.count(ISOMORPHIC) == 4
    assert r.stats["mv_applications"] == 4 and r.stats["sv_applications"] == 12


def test_batch_single_version(tgg):
    r = oracle_batch(tgg, example_history(tgg.types.source))
    assert [v.status for v in r.verdicts] == [ISOMORPHIC]


def test_batch_incomplete_version(tgg, diamond):
    h = diamond.apply_mods([VersionCreate(4, 5), ElementCreate(ElementSpec.node(9, "TypeAccess"), 5)])
    r = oracle_batch(tgg, h)
    assert r.ok
    assert {v.version: v.status for v in r.verdicts}[5] == SKIPPED


def test_sync_from_root(tgg, diamond):
    r = oracle_sync(tgg, diamond.restrict([1]), history_to_mods(diamond, [1]))
    assert r.ok and r.count(ISOMORPHIC) == 4


def test_sync_version_create_only(tgg, diamond):
    r = oracle_sync(tgg, diamond, [VersionCreate(4, 5)])
    assert r.ok and r.stats["sync_applications"] == 0 and r.count(ISOMORPHIC) == 5


def test_report_doc(tgg, diamond):
    doc = oracle_batch(tgg, diamond).to_doc()
    assert doc["ok"] and doc["kind"] == "batch" and len(doc["verdicts"]) == 4


def test_determinism_probe(tgg, ambiguous, fig1):
    assert determinism_probe(tgg, fig1, range(5)).deterministic
    assert determinism_probe(tgg, Graph(tgg.types.source), range(5)).deterministic
    from mvtgg.fixtures import example_graph
    probe = determinism_probe(ambiguous, example_graph(ambiguous.types.source), range(5))
    assert not probe.deterministic and probe.reason


def test_structural_checks(tgg):
    h = generate_history(HistoryGenSpec(seed=11, versions=6), tgg.types.source)
    assert init_marking_check(h, tgg) == []
    assert sample_fixpoint_states(h, tgg, 10, seed=3) == []


def test_random_sync_sample(tgg):
    for seed in range(10):
        h = generate_history(HistoryGenSpec(seed=seed, versions=4), tgg.types.source)
        r = oracle_sync(tgg, h, generate_mods(h, seed, 8))
        assert r.ok, [v for v in r.verdicts if not v.ok]


def test_sync_with_redundant_merges(tgg):
    resolved = 0
    for seed in range(60):
        spec = HistoryGenSpec(seed=8000 + seed, versions=3, branch_p=0.5, max_total=60)
        h = generate_history(spec, tgg.types.source)
        r = oracle_sync(tgg, h, generate_mods(h, seed, 30, duplicate_p=0.9))
        assert r.ok, (seed, [v for v in r.verdicts if not v.ok])
        assert r.stats["redundancy_after"] == 0
        resolved += r.stats["redundant_resolved"]
    assert resolved > 0
