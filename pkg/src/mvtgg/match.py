"""Backtracking monomorphism search.

Pattern elements are visited in a static order chosen so that every element
after the first of its connected component is reachable from an already
mapped element; candidates are then read off incidence indexes instead of
type lists. Candidate lists are sorted by host id, which makes enumeration
deterministic; an optional seed shuffles them for match-order probing.
"""

from __future__ import annotations

import random
from collections.abc import Callable, Hashable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Any, Protocol

from .errors import ConfigurationError, ContractViolation
from .graph import EDGE, Element, Graph

Morphism = dict[int, int]


class Constraint(Protocol):
    """Fold evaluated while a match is being extended; returning None prunes."""

    def start(self) -> Any: ...

    def extend(self, state: Any, pattern_id: int, host_id: int) -> Any | None: ...


@dataclass
class _Step:
    pid: int
    kind: str
    label: Hashable
    # ("src_of"|"tgt_of", pattern edge) / ("out"|"in", pattern element) / ("label", None)
    anchor: tuple[str, int | None]
    # (pattern element already mapped, role) pairs that must agree with the host
    checks: list[tuple[int, str]] = field(default_factory=list)


def _plan(pattern: Mapping[int, Element], plabel: Mapping[int, Hashable],
          count: Callable[[Hashable], int]) -> list[_Step]:
    out: dict[int, list[int]] = {i: [] for i in pattern}
    inc: dict[int, list[int]] = {i: [] for i in pattern}
    for e in pattern.values():
        if e.kind == EDGE:
            out[e.src].append(e.id)  # type: ignore[index]
            inc[e.tgt].append(e.id)  # type: ignore[index]

    def anchor_of(x: int) -> tuple[int, tuple[str, int | None]]:
        for edge in out[x]:
            if edge in assigned:
                return 0, ("src_of", edge)
        for edge in inc[x]:
            if edge in assigned:
                return 0, ("tgt_of", edge)
        e = pattern[x]
        if e.kind == EDGE:
            if e.src in assigned:
                return 1, ("out", e.src)
            if e.tgt in assigned:
                return 1, ("in", e.tgt)
        return 3, ("label", None)

    counts = {x: count(plabel[x]) for x in pattern}
    seeds = sorted(pattern, key=lambda x: (counts[x], x))
    assigned: set[int] = set()
    frontier: set[int] = set()
    steps: list[_Step] = []
    seed_pos = 0
    while len(assigned) < len(pattern):
        if frontier:
            x = min(frontier, key=lambda y: (anchor_of(y)[0], counts[y], y))
            frontier.discard(x)
        else:
            while seeds[seed_pos] in assigned:
                seed_pos += 1
            x = seeds[seed_pos]
        e = pattern[x]
        step = _Step(x, e.kind, plabel[x], anchor_of(x)[1])
        if e.kind == EDGE:
            if e.src in assigned:
                step.checks.append((e.src, "self_src"))  # type: ignore[arg-type]
            if e.tgt in assigned:
                step.checks.append((e.tgt, "self_tgt"))  # type: ignore[arg-type]
        for edge in out[x]:
            if edge in assigned:
                step.checks.append((edge, "edge_src"))
        for edge in inc[x]:
            if edge in assigned:
                step.checks.append((edge, "edge_tgt"))
        steps.append(step)
        assigned.add(x)
        neighbours = out[x] + inc[x]
        if e.kind == EDGE:
            neighbours = neighbours + [e.src, e.tgt]  # type: ignore[list-item]
        frontier.update(y for y in neighbours if y not in assigned)
    return steps


def _search(
    steps: list[_Step],
    host: Graph,
    hlabel: Callable[[int], Hashable],
    by_label: Callable[[Hashable], Any],
    constraint: Constraint | None,
    rng: random.Random | None,
) -> Iterator[Morphism]:
    helems = host._elements
    n = len(steps)
    if n == 0:
        yield {}
        return

    mapping: dict[int, int] = {}
    used: set[int] = set()

    def candidates(step: _Step) -> list[int]:
        mode, ref = step.anchor
        if mode == "src_of":
            cands = [helems[mapping[ref]].src]  # type: ignore[index]
        elif mode == "tgt_of":
            cands = [helems[mapping[ref]].tgt]  # type: ignore[index]
        elif mode == "out":
            cands = sorted(host._out[mapping[ref]])  # type: ignore[index]
        elif mode == "in":
            cands = sorted(host._in[mapping[ref]])  # type: ignore[index]
        else:
            cands = sorted(by_label(step.label))
        if rng is not None and len(cands) > 1:
            rng.shuffle(cands)
        return cands

    def fits(step: _Step, h: int) -> bool:
        he = helems[h]
        if he.kind != step.kind or hlabel(h) != step.label:
            return False
        for other, role in step.checks:
            m = mapping[other]
            if role == "self_src":
                if he.src != m:
                    return False
            elif role == "self_tgt":
                if he.tgt != m:
                    return False
            elif role == "edge_src":
                if helems[m].src != h:
                    return False
            elif helems[m].tgt != h:
                return False
        return True

    states: list[Any] = [constraint.start() if constraint else None] + [None] * n
    iters: list[Iterator[int]] = [iter(())] * n
    iters[0] = iter(candidates(steps[0]))
    level = 0
    while level >= 0:
        step = steps[level]
        found = False
        for h in iters[level]:
            if h in used or not fits(step, h):
                continue
            if constraint is not None:
                st = constraint.extend(states[level], step.pid, h)
                if st is None:
                    continue
                states[level + 1] = st
            mapping[step.pid] = h
            used.add(h)
            found = True
            break
        if not found:
            level -= 1
            if level >= 0:
                used.discard(mapping.pop(steps[level].pid))
            continue
        if level == n - 1:
            yield dict(mapping)
            used.discard(mapping.pop(step.pid))
            continue
        level += 1
        iters[level] = iter(candidates(steps[level]))


def iter_matches(
    pattern: Graph,
    host: Graph,
    *,
    constraint: Constraint | None = None,
    seed: int | None = None,
    pattern_labels: Mapping[int, Hashable] | None = None,
    host_labels: Mapping[int, Hashable] | None = None,
) -> Iterator[Morphism]:
    """Lazily enumerate injective, label- and incidence-preserving maps.

    Labels default to element types. Custom labels (used by the isomorphism
    check) must be given for both sides.
    """
    if pattern.type_graph is not host.type_graph and pattern.type_graph != host.type_graph:
        raise ConfigurationError("pattern and host are typed over different type graphs")
    if pattern.bookkeeping_node is not None or pattern.marked():
        raise ContractViolation("patterns must not contain bookkeeping elements")
    pelems = pattern._elements
    if pattern_labels is None or host_labels is None:
        plabel: Mapping[int, Hashable] = {i: e.type for i, e in pelems.items()}
        helems = host._elements
        hlabel: Callable[[int], Hashable] = lambda h: helems[h].type  # noqa: E731
        by_label: Callable[[Hashable], Any] = host.of_type  # type: ignore[assignment]
    else:
        plabel = pattern_labels
        index: dict[Hashable, list[int]] = {}
        for h, lab in host_labels.items():
            index.setdefault(lab, []).append(h)
        hlabel = host_labels.__getitem__
        by_label = lambda lab: index.get(lab, ())  # noqa: E731
    steps = _plan(pelems, plabel, lambda lab: len(by_label(lab)))
    rng = random.Random(seed) if seed is not None else None
    return _search(steps, host, hlabel, by_label, constraint, rng)


def find_matches(
    pattern: Graph,
    host: Graph,
    predicate: Callable[[Morphism], bool] | None = None,
    *,
    constraint: Constraint | None = None,
    seed: int | None = None,
) -> list[Morphism]:
    """All matches of ``pattern`` in ``host`` accepted by ``predicate``.

    Without a seed the result is sorted lexicographically on the host ids
    assigned to the pattern elements (taken in ascending pattern-id order).
    With a seed the order is a reproducible shuffle.
    """
    found = [
        m for m in iter_matches(pattern, host, constraint=constraint, seed=seed)
        if predicate is None or predicate(m)
    ]
    if seed is None:
        keys = sorted(pattern._elements)
        found.sort(key=lambda m: tuple(m[k] for k in keys))
    return found


def is_monomorphism(m: Mapping[int, int], pattern: Graph, host: Graph) -> bool:
    """Direct check of the morphism conditions, used by tests and assertions."""
    if set(m) != set(pattern._elements) or len(set(m.values())) != len(m):
        return False
    for i, e in pattern._elements.items():
        h = host._elements.get(m[i])
        if h is None or h.kind != e.kind or h.type != e.type:
            return False
        if e.kind == EDGE and (h.src != m[e.src] or h.tgt != m[e.tgt]):  # type: ignore[index]
            return False
    return True
