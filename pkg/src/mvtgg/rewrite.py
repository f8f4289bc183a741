"""Productions over graphs with bookkeeping.

All rules the engine handles are productions with respect to regular
elements: the only thing an application may delete is a bookkeeping edge.
That keeps the dangling condition trivially satisfied.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .errors import ContractViolation, NotApplicableError
from .graph import EDGE, NODE, Graph, creation_order
from .match import Morphism


@dataclass
class Rule:
    name: str
    lhs: Graph
    glueing: Graph
    rhs: Graph
    l: dict[int, int]  # glueing -> lhs
    r: dict[int, int]  # glueing -> rhs
    deleted_bookkeeping: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        for name, morph, dom, cod in (("l", self.l, self.glueing, self.lhs), ("r", self.r, self.glueing, self.rhs)):
            if set(morph) != set(dom) or len(set(morph.values())) != len(morph):
                raise ContractViolation(f"rule {self.name}: {name} is not a total injective map")
            for k, v in morph.items():
                if v not in cod:
                    raise ContractViolation(f"rule {self.name}: {name} maps {k} outside its codomain")
                a, b = dom.element(k), cod.element(v)
                if (a.kind, a.type) != (b.kind, b.type):
                    raise ContractViolation(f"rule {self.name}: {name} does not preserve types")
                if a.kind == EDGE and (morph[a.src], morph[a.tgt]) != (b.src, b.tgt):  # type: ignore[index]
                    raise ContractViolation(f"rule {self.name}: {name} does not preserve incidence")
        if set(self.l.values()) != set(self.lhs):
            raise ContractViolation(f"rule {self.name} deletes regular elements")
        if not self.deleted_bookkeeping <= set(self.lhs):
            raise ContractViolation(f"rule {self.name}: bookkeeping targets outside the left-hand side")
        self._rhs_of_lhs = {self.l[k]: self.r[k] for k in self.glueing}
        preserved = set(self.r.values())
        self.created = [e for e in creation_order(self.rhs.elements()) if e.id not in preserved]

    @classmethod
    def production(cls, name: str, lhs: Graph, rhs: Graph,
                   deleted_bookkeeping: Iterable[int] = ()) -> Rule:
        """Production whose rhs contains the lhs under the same element ids."""
        ident = {i: i for i in lhs}
        return cls(name, lhs, lhs, rhs, ident, dict(ident), frozenset(deleted_bookkeeping))

    def rhs_image(self, lhs_id: int) -> int:
        return self._rhs_of_lhs[lhs_id]


def check_match(rule: Rule, host: Graph, match: Mapping[int, int]) -> None:
    if set(match) != set(rule.lhs) or len(set(match.values())) != len(match):
        raise ContractViolation(f"rule {rule.name}: match is not an injective map of the left-hand side")
    for x in rule.deleted_bookkeeping:
        if not host.is_marked(match[x]):
            raise NotApplicableError(f"rule {rule.name}: element {match[x]} carries no bookkeeping edge")


def apply_rule(rule: Rule, host: Graph, match: Mapping[int, int], *,
               in_place: bool = False) -> tuple[Graph, Morphism]:
    """Apply ``rule`` at ``match``; return the result graph and the comatch rhs -> result."""
    check_match(rule, host, match)
    g = host if in_place else host.copy()
    for x in rule.deleted_bookkeeping:
        g.unmark(match[x])
    comatch: Morphism = {rule.rhs_image(x): match[x] for x in rule.lhs}
    for e in rule.created:
        if e.kind == NODE:
            comatch[e.id] = g.add_node(e.type)
        else:
            comatch[e.id] = g.add_edge(e.type, comatch[e.src], comatch[e.tgt])  # type: ignore[index]
    return g, comatch


def bookkeeping_set(g: Graph, domain: str | None = None) -> set[int]:
    """Translated elements: those without an adjacent bookkeeping edge.

    ``domain`` restricts the result to one triple domain (e.g. ``"S"``).
    """
    ids: Iterable[int] = g if domain is None else g.ids_in_domain(domain)
    return {i for i in ids if not g.is_marked(i)}
