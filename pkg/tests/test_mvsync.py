from __future__ import annotations

import pytest

from mvtgg.errors import InputError
from mvtgg.fixtures import ACC, DECL, TA, TYP, A, B, F
from mvtgg.graph import CORR, TARGET
from mvtgg.history import ElementCreate, ElementDelete, ElementSpec, Merge, VersionCreate
from mvtgg.iso import isomorphic_with_bookkeeping
from mvtgg.mvsync import redundancy, sync_f_mv
from mvtgg.mvtransform import adapt_rules
from mvtgg.oracle import ISOMORPHIC, SKIPPED, batch_mvm, compare_version
from mvtgg.tgg import trans_f

D = 9


@pytest.fixture
def base(tgg, rules, diamond):
    mvm, _ = batch_mvm(diamond, tgg, rules)
    return mvm, adapt_rules(rules, mvm.atg), diamond


def run(base, mods):
    mvm, mv_rules, history = base
    out, rep = sync_f_mv(mvm, mods, mv_rules)
    return out, rep, history.apply_mods(mods)


def check_all(mvm, history, tgg, rules, allowed=(ISOMORPHIC,)):
    verdicts = {}
    for t in history.versions:
        ref = trans_f(history.replay(t, tgg.types.merged), rules, tgg.types)
        v = compare_version(mvm, t, ref.triplet, ref.complete)
        assert v.status in allowed, (t, v)
        verdicts[t] = v.status
    return verdicts


def corr_count(mvm, t, rule=None):
    g = mvm.proj(t)
    return sum(1 for i in g.ids_in_domain(CORR) if g.element(i).kind == "node"
               and (rule is None or g.element(i).type == rule))


def test_version_create(base, tgg, rules):
    mvm, rep, h = run(base, [VersionCreate(4, 5)])
    assert rep.applications == 0
    assert mvm.presence_set(A) == {1, 2, 3, 4, 5}
    assert all(not mvm.u[i] for i in mvm.u)
    check_all(mvm, h, tgg, rules)


def test_version_create_duplicate(base):
    with pytest.raises(InputError, match="modification 0"):
        run(base, [VersionCreate(4, 3)])


def test_element_create_before_merge(tgg, rules, diamond):
    h = diamond.restrict([1, 2, 3])
    mvm, _ = batch_mvm(h, tgg, rules)
    before = {t: mvm.proj_bk(t) for t in (1, 2)}
    out, rep = sync_f_mv(mvm, [ElementCreate(ElementSpec.node(D, "ClassDecl"), 3)], adapt_rules(rules, mvm.atg))
    assert rep.applications == 1
    corr = max(out.index)
    assert out.presence_set(corr) == {3}
    g = out.proj(3)
    assert sum(1 for i in g.ids_in_domain(TARGET) if g.element(i).type == "Class") == 4  # A, B, C, D
    for t in (1, 2):
        assert isomorphic_with_bookkeeping(before[t], out.proj_bk(t))
    check_all(out, h.apply_mods([ElementCreate(ElementSpec.node(D, "ClassDecl"), 3)]), tgg, rules)


def test_element_create_untranslatable(base, tgg, rules):
    mvm, rep, h = run(base, [VersionCreate(4, 5), ElementCreate(ElementSpec.node(D, "TypeAccess"), 5)])
    assert rep.applications == 0
    assert mvm.untranslated_set(D) == {5}
    assert 5 not in mvm.complete_versions()
    check_all(mvm, h, tgg, rules, allowed=(ISOMORPHIC, SKIPPED))


def test_element_create_missing_endpoint(base):
    with pytest.raises(InputError, match="modification 1"):
        run(base, [VersionCreate(1, 5), ElementCreate(ElementSpec.edge(D, "declaration", A, F), 5)])


def test_edit_on_non_leaf(base):
    with pytest.raises(InputError, match="successors"):
        run(base, [ElementCreate(ElementSpec.node(D, "ClassDecl"), 2)])


def test_delete_field(base, tgg, rules):
    mods = [VersionCreate(4, 5)] + [ElementDelete(i, 5) for i in (DECL, ACC, TYP, F)]
    mvm, rep, h = run(base, mods)
    field_corr = next(c for c, e in mvm.index.items() if e.rule == "Field")
    assert mvm.presence_set(field_corr) == {2, 4}
    assoc = next(i for i in mvm.index[field_corr].targets if mvm.graph.element(i).type == "Association")
    assert mvm.presence_set(assoc) == {2, 4}
    assert mvm.presence_set(A) == {1, 2, 3, 4, 5}
    assert mvm.untranslated_set(TA) == {5}
    assert rep.retired == 1
    verdicts = check_all(mvm, h, tgg, rules, allowed=(ISOMORPHIC, SKIPPED))
    assert verdicts == {1: ISOMORPHIC, 2: ISOMORPHIC, 3: ISOMORPHIC, 4: ISOMORPHIC, 5: SKIPPED}


def test_delete_untranslated(base, tgg, rules):
    mods = [VersionCreate(4, 5)] + [ElementDelete(i, 5) for i in (DECL, ACC, TYP, F)]
    mvm, _, h = run(base, mods)
    out, rep = sync_f_mv(mvm, [ElementDelete(TA, 5)], adapt_rules(rules, mvm.atg))
    assert rep.retired == 0 and rep.applications == 0
    assert out.presence_set(TA) == {2, 4} and out.untranslated_set(TA) == set()
    check_all(out, h.apply_mods([ElementDelete(TA, 5)]), tgg, rules)


def test_delete_class_revokes_dependents(base, tgg, rules):
    mods = [VersionCreate(4, 5), ElementDelete(TYP, 5), ElementDelete(B, 5)]
    mvm, rep, h = run(base, mods)
    assert rep.retired == 2
    assert corr_count(mvm, 5) == 2  # classes A and C
    assert mvm.untranslated_set(F) == {5} and mvm.untranslated_set(DECL) == {5}
    verdicts = check_all(mvm, h, tgg, rules, allowed=(ISOMORPHIC, SKIPPED))
    assert verdicts[5] == SKIPPED


def test_delete_dangling_rejected(base):
    with pytest.raises(InputError, match="dangling"):
        run(base, [VersionCreate(4, 5), ElementDelete(F, 5)])


def test_delete_absent(base):
    with pytest.raises(InputError):
        run(base, [VersionCreate(1, 5), ElementDelete(F, 5)])


def test_merge_all_kept(tgg, rules, diamond):
    h = diamond.restrict([1, 2, 3])
    mvm, _ = batch_mvm(h, tgg, rules)
    mods = [Merge(2, 3, 4, frozenset(h.contents(2) | h.contents(3)))]
    out, rep = sync_f_mv(mvm, mods, adapt_rules(rules, mvm.atg))
    assert rep.applications == 0 and rep.retired == 0 and rep.redundant == 0
    check_all(out, h.apply_mods(mods), tgg, rules)


def test_merge_with_redundant_corr(tgg, rules, diamond):
    h = diamond.restrict([1, 2, 3])
    mvm, _ = batch_mvm(h, tgg, rules)
    d = ElementSpec.node(D, "ClassDecl")
    mods = [ElementCreate(d, 2), ElementCreate(d, 3)]
    mods.append(Merge(2, 3, 4, frozenset(h.contents(2) | h.contents(3) | {D})))
    out, rep = sync_f_mv(mvm, mods, adapt_rules(rules, mvm.atg))
    d_corrs = [c for c, e in out.index.items() if D in e.covered]
    assert len(d_corrs) == 2
    assert sorted(out.presence_set(c).to_list() for c in d_corrs) == [[2, 4], [3]]
    assert rep.redundant == 1 and redundancy(out, 4) == 0
    final = h.apply_mods(mods)
    check_all(out, final, tgg, rules)
    g = out.proj(4)
    for x in final.contents(4):
        linked = [e for e in g.in_edges(x) if g.domain_of(g.element(e).src) == CORR]
        assert len(linked) == 1, x


def test_merge_dropping_field(tgg, rules, diamond):
    h = diamond.restrict([1, 2, 3])
    mvm, _ = batch_mvm(h, tgg, rules)
    kept = frozenset((h.contents(2) | h.contents(3)) - {F, TA, DECL, ACC, TYP})
    mods = [Merge(2, 3, 4, kept)]
    out, rep = sync_f_mv(mvm, mods, adapt_rules(rules, mvm.atg))
    g = out.proj(4)
    assert not [i for i in g if g.element(i).type == "Association"]
    check_all(out, h.apply_mods(mods), tgg, rules)


def test_merge_kept_outside_union(tgg, rules, diamond):
    h = diamond.restrict([1, 2, 3])
    mvm, _ = batch_mvm(h, tgg, rules)
    with pytest.raises(InputError):
        sync_f_mv(mvm, [Merge(2, 3, 4, frozenset({A, B, 99}))], adapt_rules(rules, mvm.atg))


def test_empty_sequence(base):
    mvm, rep, _ = run(base, [])
    assert rep.applications == 0 and mvm.p == base[0].p and mvm.u == base[0].u


def test_create_then_delete_is_noop(base, tgg, rules):
    mvm0, mv_rules, _ = base
    mods = [VersionCreate(4, 5)]
    ref, _ = sync_f_mv(mvm0, mods, mv_rules)
    out, _ = sync_f_mv(mvm0, mods + [ElementCreate(ElementSpec.node(D, "ClassDecl"), 5), ElementDelete(D, 5)], mv_rules)
    assert isomorphic_with_bookkeeping(ref.proj_bk(5), out.proj_bk(5))


def test_diamond_built_incrementally(tgg, rules, diamond):
    from mvtgg.history import history_to_mods
    root = diamond.restrict([1])
    mvm, _ = batch_mvm(root, tgg, rules)
    mods = history_to_mods(diamond, [1])
    out, _ = sync_f_mv(mvm, mods, adapt_rules(rules, mvm.atg))
    check_all(out, diamond, tgg, rules)
    assert out.check() == []


def test_not_in_place(base):
    mvm, mv_rules, _ = base
    before = dict(mvm.p)
    sync_f_mv(mvm, [VersionCreate(4, 5)], mv_rules)
    assert mvm.p == before and 5 not in mvm.dag
