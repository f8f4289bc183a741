"""Isomorphism up to bookkeeping.

Both graphs are coloured jointly by iterated refinement over the incidence
structure (nodes and edges are both vertices of the refinement), starting
from (kind, type, marked). Differing colour histograms refute isomorphism
immediately; otherwise the colours are used as labels for an exact
backtracking search, so a found map is a witness, not a heuristic.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .graph import EDGE, Graph
from .match import iter_matches


@dataclass
class IsoVerdict:
    isomorphic: bool
    witness: dict[int, int] | None = None
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.isomorphic


def _initial(g: Graph) -> dict[int, tuple]:
    marks = g._marks
    return {i: (e.kind, e.type, i in marks) for i, e in g._elements.items()}


def _refine_round(g: Graph, colors: dict[int, int], palette: dict[tuple, int]) -> dict[int, int]:
    elems = g._elements
    new: dict[int, int] = {}
    for i, e in elems.items():
        sig = [colors[i]]
        if e.kind == EDGE:
            sig.append(("s", colors[e.src]))  # type: ignore[index]
            sig.append(("t", colors[e.tgt]))  # type: ignore[index]
        sig.append(tuple(sorted(colors[x] for x in g._out[i])))
        sig.append(tuple(sorted(colors[x] for x in g._in[i])))
        key = tuple(sig)
        c = palette.get(key)
        if c is None:
            c = palette[key] = len(palette)
        new[i] = c
    return new


def _describe(initial: tuple) -> str:
    kind, type_name, marked = initial
    return f"{kind} {type_name} ({'marked' if marked else 'unmarked'})"


def isomorphic_with_bookkeeping(g: Graph, h: Graph) -> IsoVerdict:
    """Decide whether a type-preserving bijection exists that also preserves marks."""
    if h.type_graph is not g.type_graph and h.type_graph != g.type_graph:
        return IsoVerdict(False, reason="different type graphs")
    ig, ih = _initial(g), _initial(h)
    cg, ch = Counter(ig.values()), Counter(ih.values())
    if cg != ch:
        for key in sorted(set(cg) | set(ch), key=repr):
            if cg[key] != ch[key]:
                return IsoVerdict(False, reason=f"{_describe(key)}: {cg[key]} vs {ch[key]}")

    palette: dict[tuple, int] = {}
    colors_g = {i: palette.setdefault(k, len(palette)) for i, k in ig.items()}
    colors_h = {i: palette.setdefault(k, len(palette)) for i, k in ih.items()}
    classes = len(set(colors_g.values()))
    while True:
        rpal: dict[tuple, int] = {}
        colors_g = _refine_round(g, colors_g, rpal)
        colors_h = _refine_round(h, colors_h, rpal)
        hg, hh = Counter(colors_g.values()), Counter(colors_h.values())
        if hg != hh:
            for key, sig in sorted(((v, k) for k, v in rpal.items())):
                if hg[key] != hh[key]:
                    sample = next((i for i, c in colors_g.items() if c == key), None)
                    if sample is None:
                        sample_elem = next(h._elements[i] for i, c in colors_h.items() if c == key)
                    else:
                        sample_elem = g._elements[sample]
                    return IsoVerdict(
                        False,
                        reason=(
                            f"neighbourhood of {sample_elem.kind} {sample_elem.type} "
                            f"(id {sample_elem.id}) differs: {hg[key]} vs {hh[key]} elements"
                        ),
                    )
        n = len(hg)
        if n == classes:
            break
        classes = n

    # the matcher refuses bookkeeping in patterns; colours already carry the marks
    pattern = _strip_bookkeeping(g)
    for witness in iter_matches(pattern, h, pattern_labels=colors_g, host_labels=colors_h):
        return IsoVerdict(True, witness=witness)
    return IsoVerdict(False, reason="no bijection respects incidence")


def _strip_bookkeeping(g: Graph) -> Graph:
    if g.bookkeeping_node is None and not g._marks:
        return g
    c = g.copy()
    c.bookkeeping_node = None
    c._marks = {}
    return c


def check_witness(g: Graph, h: Graph, witness: dict[int, int]) -> bool:
    """Independent verification of an isomorphism witness (bijective, typed, marks kept)."""
    if set(witness) != set(g._elements) or set(witness.values()) != set(h._elements):
        return False
    for i, e in g._elements.items():
        f = h._elements[witness[i]]
        if (e.kind, e.type) != (f.kind, f.type):
            return False
        if g.is_marked(i) != h.is_marked(witness[i]):
            return False
        if e.kind == EDGE and (witness[e.src] != f.src or witness[e.tgt] != f.tgt):  # type: ignore[index]
            return False
    return True
