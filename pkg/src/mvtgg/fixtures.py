"""Bundled example grammars and models.

The AST to class-diagram grammar translates class declarations into classes
and a field declaration (with its type access) into an association between
the declaring class and the referenced class. The ambiguous variant adds a
second way to translate a class declaration and therefore is not
deterministic.
"""

from __future__ import annotations

from .graph import EDGE, NODE, EdgeType, Graph, TypeGraph
from .history import ElementSpec, History, VersionRecord
from .tgg import LinkType, Tgg, TggRule, TripleTypeGraph


class RuleBuilder:
    """Small helper for writing TGG rules with named elements."""

    def __init__(self, ttg: TripleTypeGraph, name: str):
        self.ttg = ttg
        self.name = name
        self.ids: dict[str, int] = {}
        self.specs: list[tuple[int, str, str, int | None, int | None, bool]] = []

    def node(self, label: str, type_name: str, created: bool = False) -> RuleBuilder:
        i = len(self.ids) + 1
        self.ids[label] = i
        self.specs.append((i, NODE, type_name, None, None, created))
        return self

    def edge(self, label: str, type_name: str, src: str, tgt: str, created: bool = False) -> RuleBuilder:
        i = len(self.ids) + 1
        self.ids[label] = i
        self.specs.append((i, EDGE, type_name, self.ids[src], self.ids[tgt], created))
        return self

    def build(self) -> TggRule:
        tg = self.ttg.merged
        lhs, rhs = Graph(tg), Graph(tg)
        for i, kind, typ, s, t, created in self.specs:
            targets = [rhs] if created else [lhs, rhs]
            for g in targets:
                if kind == NODE:
                    g.add_node(typ, i)
                else:
                    g.add_edge(typ, s, t, i)  # type: ignore[arg-type]
        return TggRule(self.name, lhs, rhs, {i: label for label, i in self.ids.items()})


def ast2cd_types(with_interfaces: bool = False) -> TripleTypeGraph:
    source = TypeGraph(
        ["ClassDecl", "FieldDecl", "TypeAccess"],
        [
            EdgeType("declaration", "ClassDecl", "FieldDecl"),
            EdgeType("access", "FieldDecl", "TypeAccess"),
            EdgeType("type", "TypeAccess", "ClassDecl"),
        ],
    )
    corr_types = ["CorrClass", "CorrField"] + (["CorrInterface"] if with_interfaces else [])
    target_types = ["Class", "Association"] + (["Interface"] if with_interfaces else [])
    target = TypeGraph(
        target_types,
        [EdgeType("from", "Association", "Class"), EdgeType("to", "Association", "Class")],
    )
    links = [
        LinkType("cc_decl", "CorrClass", "ClassDecl"),
        LinkType("cc_class", "CorrClass", "Class"),
        LinkType("cf_field", "CorrField", "FieldDecl"),
        LinkType("cf_access", "CorrField", "TypeAccess"),
        LinkType("cf_declaration", "CorrField", "declaration", EDGE),
        LinkType("cf_accessEdge", "CorrField", "access", EDGE),
        LinkType("cf_type", "CorrField", "type", EDGE),
        LinkType("cf_assoc", "CorrField", "Association"),
        LinkType("cf_from", "CorrField", "from", EDGE),
        LinkType("cf_to", "CorrField", "to", EDGE),
    ]
    if with_interfaces:
        links += [
            LinkType("ci_decl", "CorrInterface", "ClassDecl"),
            LinkType("ci_interface", "CorrInterface", "Interface"),
        ]
    return TripleTypeGraph(source, TypeGraph(corr_types), target, links)


def class_rule(ttg: TripleTypeGraph) -> TggRule:
    return (
        RuleBuilder(ttg, "Class")
        .node("c", "ClassDecl", True)
        .node("cc", "CorrClass", True)
        .node("k", "Class", True)
        .edge("cc_c", "cc_decl", "cc", "c", True)
        .edge("cc_k", "cc_class", "cc", "k", True)
        .build()
    )


def field_rule(ttg: TripleTypeGraph) -> TggRule:
    b = RuleBuilder(ttg, "Field")
    for n in ("1", "2"):
        b.node(f"c{n}", "ClassDecl").node(f"cc{n}", "CorrClass").node(f"k{n}", "Class")
        b.edge(f"cc{n}_c", "cc_decl", f"cc{n}", f"c{n}").edge(f"cc{n}_k", "cc_class", f"cc{n}", f"k{n}")
    (
        b.node("f1", "FieldDecl", True)
        .node("t1", "TypeAccess", True)
        .edge("decl", "declaration", "c1", "f1", True)
        .edge("acc", "access", "f1", "t1", True)
        .edge("typ", "type", "t1", "c2", True)
        .node("cf", "CorrField", True)
        .node("a", "Association", True)
        .edge("from", "from", "a", "k1", True)
        .edge("to", "to", "a", "k2", True)
    )
    for label, typ, tgt in (
        ("cf_f", "cf_field", "f1"), ("cf_t", "cf_access", "t1"), ("cf_d", "cf_declaration", "decl"),
        ("cf_ac", "cf_accessEdge", "acc"), ("cf_ty", "cf_type", "typ"), ("cf_a", "cf_assoc", "a"),
        ("cf_fr", "cf_from", "from"), ("cf_to", "cf_to", "to"),
    ):
        b.edge(label, typ, "cf", tgt, True)
    return b.build()


def interface_rule(ttg: TripleTypeGraph) -> TggRule:
    return (
        RuleBuilder(ttg, "Interface")
        .node("c", "ClassDecl", True)
        .node("ci", "CorrInterface", True)
        .node("i", "Interface", True)
        .edge("ci_c", "ci_decl", "ci", "c", True)
        .edge("ci_i", "ci_interface", "ci", "i", True)
        .build()
    )


def ast2cd() -> Tgg:
    ttg = ast2cd_types()
    return Tgg("ast2cd", ttg, [class_rule(ttg), field_rule(ttg)])


def ast2cd_ambiguous() -> Tgg:
    ttg = ast2cd_types(with_interfaces=True)
    return Tgg("ast2cd-ambiguous", ttg, [class_rule(ttg), interface_rule(ttg), field_rule(ttg)])


# ids used by the example model and the diamond history
A, B, F, TA, DECL, ACC, TYP, C = 1, 2, 3, 4, 5, 6, 7, 8


def example_specs() -> list[ElementSpec]:
    """Two class declarations; A declares field f whose type access refers to B."""
    return [
        ElementSpec.node(A, "ClassDecl"),
        ElementSpec.node(B, "ClassDecl"),
        ElementSpec.node(F, "FieldDecl"),
        ElementSpec.node(TA, "TypeAccess"),
        ElementSpec.edge(DECL, "declaration", A, F),
        ElementSpec.edge(ACC, "access", F, TA),
        ElementSpec.edge(TYP, "type", TA, B),
    ]


def example_graph(type_graph: TypeGraph | None = None) -> Graph:
    g = Graph(type_graph or ast2cd_types().source)
    for s in example_specs():
        g.add(s.element())
    return g


def example_history(type_graph: TypeGraph | None = None) -> History:
    tg = type_graph or ast2cd_types().source
    return History.from_records(tg, [VersionRecord(1, [], example_specs(), [])])


def diamond_history(type_graph: TypeGraph | None = None) -> History:
    """v1: A, B; v2: + field f; v3: + class C; v4 merges v2 and v3 keeping everything."""
    tg = type_graph or ast2cd_types().source
    specs = example_specs()
    return History.from_records(tg, [
        VersionRecord(1, [], specs[:2], []),
        VersionRecord(2, [1], specs[2:], []),
        VersionRecord(3, [1], [ElementSpec.node(C, "ClassDecl")], []),
        VersionRecord(4, [2, 3], [], []),
    ])


def field_production(ttg: TripleTypeGraph | None = None) -> TggRule:
    """Source-only production: add a field (with type access) between two classes."""
    source = (ttg or ast2cd_types()).source
    tg = source
    lhs, rhs = Graph(tg), Graph(tg)
    for g in (lhs, rhs):
        g.add_node("ClassDecl", 1)
        g.add_node("ClassDecl", 2)
    rhs.add_node("FieldDecl", 3)
    rhs.add_node("TypeAccess", 4)
    rhs.add_edge("declaration", 1, 3, 5)
    rhs.add_edge("access", 3, 4, 6)
    rhs.add_edge("type", 4, 2, 7)
    return TggRule("AddField", lhs, rhs, {1: "c1", 2: "c2", 3: "f", 4: "t", 5: "decl", 6: "acc", 7: "typ"})
