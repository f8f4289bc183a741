from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvtgg import io, resources
from mvtgg.errors import InputError
from mvtgg.fixtures import ast2cd_ambiguous
from mvtgg.generate import HistoryGenSpec, generate_history, generate_mods
from mvtgg.oracle import batch_mvm
from mvtgg.svm import svm_batch, svm_from_doc, svm_to_doc
from mvtgg.tgg import trans_f


def canonical(doc):
    return io.dumps(io.loads(io.dumps(doc)))


def test_graph_round_trip(fig1, tgg, rules):
    g = trans_f(fig1, rules, tgg.types).triplet
    g.mark(1)
    doc = io.graph_to_doc(g)
    back = io.graph_from_doc(doc)
    assert back.structure() == g.structure() and back.bookkeeping_edges() == g.bookkeeping_edges()
    assert io.dumps(io.graph_to_doc(back)) == io.dumps(doc)


def test_tgg_round_trip(tgg):
    for grammar in (tgg, ast2cd_ambiguous()):
        doc = io.tgg_to_doc(grammar)
        assert io.dumps(io.tgg_to_doc(io.tgg_from_doc(doc))) == io.dumps(doc)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_history_mods_and_state_round_trip(seed):
    from mvtgg.fixtures import ast2cd
    tgg = ast2cd()
    h = generate_history(HistoryGenSpec(seed=seed, versions=5), tgg.types.source)
    doc = io.history_to_doc(h)
    assert io.dumps(io.history_to_doc(io.history_from_doc(doc, tgg.types.source))) == io.dumps(doc)
    mods = generate_mods(h, seed, 6)
    mdoc = io.mods_to_doc(mods)
    assert io.mods_from_doc(mdoc) == mods
    mvm, _ = batch_mvm(h, tgg)
    sdoc = io.mvm_to_doc(mvm, tgg)
    back, _ = io.mvm_from_doc(sdoc)
    assert io.dumps(io.mvm_to_doc(back, tgg)) == io.dumps(sdoc)
    assert canonical(sdoc) == io.dumps(sdoc)


def test_svm_state_round_trip(tgg, diamond):
    state = svm_batch(diamond, tgg)
    doc = svm_to_doc(state, tgg)
    back, _ = svm_from_doc(doc)
    assert io.dumps(svm_to_doc(back, tgg)) == io.dumps(doc)


def test_bundled_documents_match_fixtures():
    for name in resources.BUNDLED:
        assert resources.load(name) == resources.build(name), name


@pytest.mark.parametrize("text", ["", "[]", "{", "{\"schema\": \"mvtgg/graph\"}"])
def test_malformed_documents(text):
    with pytest.raises(InputError):
        io.graph_from_doc(io.loads(text))


def test_wrong_schema(tgg, diamond):
    doc = io.history_to_doc(diamond)
    with pytest.raises(InputError, match="mvtgg/graph"):
        io.graph_from_doc(doc)
    doc["schema_version"] = 99
    with pytest.raises(InputError, match="schema_version"):
        io.history_from_doc(doc, tgg.types.source)


def test_state_rejects_non_canonical_presence(tgg, diamond):
    mvm, _ = batch_mvm(diamond, tgg)
    doc = io.mvm_to_doc(mvm, tgg)
    doc["presence"]["1"]["cv"] = [1, 2]
    with pytest.raises(InputError, match="canonical"):
        io.mvm_from_doc(doc)


def test_state_rejects_inconsistent_presence(tgg, diamond):
    mvm, _ = batch_mvm(diamond, tgg)
    doc = io.mvm_to_doc(mvm, tgg)
    # an edge mv-node present where its endpoint is absent
    doc["presence"]["5"] = {"cv": [1], "dv": [], "ucv": [], "udv": []}
    with pytest.raises(InputError):
        io.mvm_from_doc(doc)


def test_read_missing_file(tmp_path):
    with pytest.raises(InputError, match="cannot read"):
        io.read(tmp_path / "nope.json")
