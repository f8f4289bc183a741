from __future__ import annotations

import json
import subprocess
import sys
from collections import Counter

import pytest

from mvtgg import io
from mvtgg.cli import main
from mvtgg.history import ElementDelete, VersionCreate

TGG = "bundled:ast2cd"
DIAMOND = "bundled:diamond"


def test_verify_bundled_diamond(tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", "--tgg", TGG, "--history", DIAMOND, "--report", str(out)]) == 0
    assert io.read(out)["counts"]["isomorphic"] == 4


def test_transform_both_then_compare(tmp_path):
    s, m = tmp_path / "s.json", tmp_path / "m.json"
    assert main(["transform", "--tgg", TGG, "--history", DIAMOND, "--strategy", "svm", "--out", str(s)]) == 0
    assert main(["transform", "--tgg", TGG, "--history", DIAMOND, "--strategy", "mvm", "--out", str(m)]) == 0
    rep = tmp_path / "cmp.json"
    assert main(["verify", "--compare", str(s), str(m), "--report", str(rep)]) == 0
    assert [v["status"] for v in io.read(rep)["verdicts"]] == ["isomorphic"] * 4


def test_project_version_two(tmp_path):
    m, g = tmp_path / "m.json", tmp_path / "g.json"
    main(["transform", "--tgg", TGG, "--history", DIAMOND, "--out", str(m)])
    assert main(["project", "--state", str(m), "--version", "2", "--out", str(g)]) == 0
    doc = io.graph_from_doc(io.read(g))
    target = Counter(doc.element(i).type for i in doc.ids_in_domain("T") if doc.element(i).kind == "node")
    assert target == Counter({"Class": 2, "Association": 1})


@pytest.mark.parametrize("strategy", ["mvm", "svm"])
def test_sync_then_compact(tmp_path, strategy):
    state, mods, out = tmp_path / "st.json", tmp_path / "mods.json", tmp_path / "out.json"
    main(["transform", "--tgg", TGG, "--history", DIAMOND, "--strategy", strategy, "--out", str(state)])
    io.write(mods, io.mods_to_doc([VersionCreate(4, 5), ElementDelete(7, 5), ElementDelete(2, 5)]))
    args = ["sync", "--state", str(state), "--mods", str(mods), "--out", str(out)]
    assert main(args + ["--strategy", strategy]) == 0
    assert 5 in io.read(out).get("dag", {"versions": [5]})["versions"]
    if strategy == "mvm":
        assert main(["compact", "--state", str(out), "--out", str(tmp_path / "c.json")]) == 0
    else:
        assert main(["compact", "--state", str(out)]) == 2


def test_sync_strategy_mismatch(tmp_path):
    state, mods = tmp_path / "st.json", tmp_path / "mods.json"
    main(["transform", "--tgg", TGG, "--history", DIAMOND, "--out", str(state)])
    io.write(mods, io.mods_to_doc([VersionCreate(4, 5)]))
    assert main(["sync", "--state", str(state), "--mods", str(mods), "--strategy", "svm"]) == 2


def test_invalid_modification_names_index(tmp_path, capsys):
    state, mods = tmp_path / "st.json", tmp_path / "mods.json"
    main(["transform", "--tgg", TGG, "--history", DIAMOND, "--out", str(state)])
    io.write(mods, io.mods_to_doc([VersionCreate(4, 5), ElementDelete(3, 5)]))
    assert main(["sync", "--state", str(state), "--mods", str(mods)]) == 2
    assert "modification 1" in capsys.readouterr().err


def test_bench_and_fault(tmp_path):
    rep = tmp_path / "bench.json"
    assert main(["bench", "--tgg", TGG, "--history", DIAMOND, "--strategies", "svm-b,mvm-b",
                 "--repeat", "2", "--report", str(rep)]) == 0
    assert [s["strategy"] for s in io.read(rep)["strategies"]] == ["svm-b", "mvm-b"]
    assert main(["bench", "--tgg", TGG, "--history", DIAMOND, "--inject-fault", "mvm-i"]) == 1


def test_generate_and_env_seed(tmp_path, monkeypatch):
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    main(["generate", "--seed", "5", "--versions", "4", "--out", str(a)])
    monkeypatch.setenv("MVTGG_SEED", "5")
    main(["generate", "--seed", "99", "--versions", "4", "--out", str(b)])
    assert a.read_text() == b.read_text()
    monkeypatch.setenv("MVTGG_SEED", "x")
    assert main(["generate", "--versions", "4", "--out", str(c)]) == 2


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bench", "--tgg", TGG, "--history", DIAMOND, "--bogus"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--tgg", TGG])
    assert exc.value.code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", "--tgg", TGG, "--history", str(bad)]) == 2
    assert main(["verify", "--tgg", "bundled:nothing", "--history", DIAMOND]) == 2


def test_ambiguous_grammar_is_usable(tmp_path):
    assert main(["verify", "--tgg", "bundled:ast2cd_ambiguous", "--history", "bundled:example"]) in (0, 1)


def test_entry_point_subprocess(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "mvtgg.cli", "verify", "--tgg", TGG, "--history", DIAMOND],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["ok"]
