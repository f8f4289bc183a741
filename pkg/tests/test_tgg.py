from __future__ import annotations

from collections import Counter

import pytest

from mvtgg.errors import ConfigurationError, InputError
from mvtgg.fixtures import ACC, DECL, TA, TYP, B, C, F, RuleBuilder, ast2cd_types, class_rule
from mvtgg.graph import CORR, SOURCE, TARGET, Element, Graph
from mvtgg.iso import isomorphic_with_bookkeeping
from mvtgg.match import find_matches
from mvtgg.rewrite import apply_rule
from mvtgg.tgg import (
    Delta,
    Tgg,
    copy_triplet,
    derive_forward_rules,
    forward_applicable,
    init_f,
    run_forward,
    source_projection,
    sync_f_single,
    trans_f,
    validate_tgg,
)


def types_in(g: Graph, domain: str) -> Counter:
    return Counter(g.element(i).type for i in g.ids_in_domain(domain) if g.element(i).kind == "node")


def by_name(rules):
    return {r.name: r for r in rules}


# -- validation and derivation ----------------------------------------------


def test_example_grammar_is_valid(tgg):
    assert validate_tgg(tgg.rules, tgg.types) == []


def test_two_corr_nodes_flagged():
    ttg = ast2cd_types()
    bad = (
        RuleBuilder(ttg, "Twice").node("c", "ClassDecl", True).node("k", "Class", True)
        .node("x", "CorrClass", True).node("y", "CorrClass", True)
        .edge("xc", "cc_decl", "x", "c", True).edge("yk", "cc_class", "y", "k", True).build()
    )
    codes = {d.code for d in validate_tgg([bad], ttg)}
    assert "corr-node-count" in codes


def test_source_empty_axiom_flagged():
    ttg = ast2cd_types()
    axiom = (
        RuleBuilder(ttg, "Axiom").node("cc", "CorrClass", True).node("k", "Class", True)
        .edge("ck", "cc_class", "cc", "k", True).build()
    )
    codes = {d.code for d in validate_tgg([axiom], ttg)}
    assert "empty-translation-set" in codes
    with pytest.raises(ConfigurationError):
        derive_forward_rules([axiom], ttg)


def test_duplicate_rule_names_flagged():
    ttg = ast2cd_types()
    codes = {d.code for d in validate_tgg([class_rule(ttg), class_rule(ttg)], ttg)}
    assert "duplicate-name" in codes


def test_field_forward_rule_translation_set(rules):
    field = by_name(rules)["Field"]
    labels = {field.rule.lhs.element(i).type for i in field.translation}
    assert len(field.translation) == 5
    assert labels == {"FieldDecl", "TypeAccess", "declaration", "access", "type"}
    assert field.rule.deleted_bookkeeping == field.translation


def test_class_forward_rule(rules):
    cls = by_name(rules)["Class"]
    assert [cls.lhs.element(i).type for i in cls.translation] == ["ClassDecl"]
    created = Counter(e.type for e in cls.rule.created)
    assert created == Counter({"CorrClass": 1, "Class": 1, "cc_decl": 1, "cc_class": 1})


def test_forward_rules_never_create_source(rules):
    for fr in rules:
        assert all(fr.rhs.domain_of(e.id) != SOURCE for e in fr.rule.created)


# -- batch transformation -------------------------------------------------


def test_trans_f_example(fig1, tgg, rules):
    res = trans_f(fig1, rules, tgg.types)
    assert res.complete and res.applications == 3
    assert Counter(t.rule for t in res.traces) == Counter({"Class": 2, "Field": 1})
    assert types_in(res.triplet, TARGET) == Counter({"Class": 2, "Association": 1})
    assert sum(types_in(res.triplet, CORR).values()) == 3


def test_every_source_element_linked_once(fig1, tgg, rules):
    g = trans_f(fig1, rules, tgg.types).triplet
    links = Counter()
    for c in g.ids_in_domain(CORR):
        if g.element(c).kind == "node":
            for e in g.out_edges(c):
                if g.domain_of(g.element(e).tgt) == SOURCE:
                    links[g.element(e).tgt] += 1
    assert links == Counter({i: 1 for i in fig1})


def test_field_application_counts(fig1, tgg, rules):
    g = init_f(fig1, tgg.types)
    named = by_name(rules)
    run_forward(g, [named["Class"]])
    field = named["Field"]
    (m,) = find_matches(field.lhs, g, lambda m: forward_applicable(field, g, m))
    before = len(g.marked())
    h, _ = apply_rule(field.rule, g, m)
    assert before - len(h.marked()) == 5
    new = Counter(h.element(i).type for i in h if i not in g)
    assert new == Counter({
        "CorrField": 1, "Association": 1, "from": 1, "to": 1, "cf_field": 1, "cf_access": 1,
        "cf_declaration": 1, "cf_accessEdge": 1, "cf_type": 1, "cf_assoc": 1, "cf_from": 1, "cf_to": 1,
    })


def test_empty_source(tgg, rules):
    res = trans_f(Graph(tgg.types.source), rules, tgg.types)
    assert res.complete and res.applications == 0


def test_isolated_type_access_stays_marked(tgg, rules):
    g = Graph(tgg.types.source)
    g.add_node("TypeAccess", 1)
    res = trans_f(g, rules, tgg.types)
    assert not res.complete and res.applications == 0 and res.triplet.marked() == {1}


def test_trace_requirements(fig1, tgg, rules):
    res = trans_f(fig1, rules, tgg.types)
    field = next(t for t in res.traces if t.rule == "Field")
    class_corrs = {t.created_corr for t in res.traces if t.rule == "Class"}
    assert field.required_corrs == class_corrs
    assert field.translated == frozenset({F, TA, DECL, ACC, TYP})


# -- single-version synchronization ----------------------------------------


def test_sync_delete_field(fig1, tgg, rules):
    res = trans_f(fig1, rules, tgg.types)
    out = sync_f_single(res.triplet, res.traces, Delta(removed=[DECL, ACC, TYP, F]), rules)
    assert F in res.triplet  # not in place
    fresh = trans_f(source_projection(out.triplet), rules, tgg.types)
    assert isomorphic_with_bookkeeping(out.triplet, fresh.triplet)
    assert types_in(out.triplet, TARGET) == Counter({"Class": 2})
    assert out.triplet.marked() == {TA}


def test_sync_empty_delta(fig1, tgg, rules):
    res = trans_f(fig1, rules, tgg.types)
    out = sync_f_single(res.triplet, res.traces, Delta(), rules)
    assert out.applications == 0 and out.triplet.structure() == res.triplet.structure()


def test_sync_add_class(fig1, tgg, rules):
    res = trans_f(fig1, rules, tgg.types)
    out = sync_f_single(res.triplet, res.traces, Delta(added=[Element(C, "node", "ClassDecl")]), rules)
    assert out.applications == 1 and out.complete
    assert out.traces[-1].rule == "Class"


def test_sync_delete_class_revokes_dependents(fig1, tgg, rules):
    res = trans_f(fig1, rules, tgg.types)
    out = sync_f_single(res.triplet, res.traces, Delta(removed=[TYP, B]), rules)
    assert not out.complete
    assert out.triplet.marked() == {F, TA, DECL, ACC}
    assert types_in(out.triplet, TARGET) == Counter({"Class": 1})


def test_sync_unknown_element(fig1, tgg, rules):
    res = trans_f(fig1, rules, tgg.types)
    with pytest.raises(InputError):
        sync_f_single(res.triplet, res.traces, Delta(removed=[999]), rules)


# -- copies ----------------------------------------------------------------


def test_copy_triplet_isolated(fig1, tgg, rules):
    res = trans_f(fig1, rules, tgg.types)
    g, traces, ids = copy_triplet(res.triplet, res.traces)
    assert isomorphic_with_bookkeeping(g, res.triplet)
    assert set(ids) == set(res.triplet) and not set(ids.values()) & set(res.triplet)
    assert {t.created_corr for t in traces} == {ids[t.created_corr] for t in res.traces}
    before = res.triplet.structure()
    sync_f_single(g, traces, Delta(removed=[ids[i] for i in (DECL, ACC, TYP, F)]), rules, in_place=True)
    assert F in res.triplet and res.triplet.structure() == before
    assert ids[F] not in g


def test_tgg_rejects_invalid_grammar():
    ttg = ast2cd_types()
    axiom = (
        RuleBuilder(ttg, "Axiom").node("cc", "CorrClass", True).node("k", "Class", True)
        .edge("ck", "cc_class", "cc", "k", True).build()
    )
    with pytest.raises(ConfigurationError):
        Tgg("bad", ttg, [axiom]).forward_rules()
