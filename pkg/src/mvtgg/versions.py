"""Version DAGs, version sets and the cv/dv edge encoding of presence."""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from graphlib import CycleError, TopologicalSorter

from .errors import InputError

MAX_VERSIONS = 1 << 20


class VersionSet:
    """Immutable set of version ids backed by an int bitmask (bit t = version t)."""

    __slots__ = ("bits",)

    def __init__(self, members: Iterable[int] | int = 0):
        if isinstance(members, int):
            bits = members
        else:
            bits = 0
            for t in members:
                if not 0 < t <= MAX_VERSIONS:
                    raise InputError(f"version id {t} out of range")
                bits |= 1 << t
        object.__setattr__(self, "bits", bits)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("VersionSet is immutable")

    def __contains__(self, t: object) -> bool:
        return isinstance(t, int) and t > 0 and bool(self.bits >> t & 1)

    def __iter__(self) -> Iterator[int]:
        bits, t = self.bits, 0
        while bits:
            low = bits & -bits
            t = low.bit_length() - 1
            yield t
            bits ^= low

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def __bool__(self) -> bool:
        return self.bits != 0

    def __eq__(self, other: object) -> bool:
        if isinstance(other, VersionSet):
            return self.bits == other.bits
        if isinstance(other, (set, frozenset)):
            return set(self) == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.bits)

    def __and__(self, other: VersionSet) -> VersionSet:
        return VersionSet(self.bits & other.bits)

    def __or__(self, other: VersionSet) -> VersionSet:
        return VersionSet(self.bits | other.bits)

    def __sub__(self, other: VersionSet) -> VersionSet:
        return VersionSet(self.bits & ~other.bits)

    def __le__(self, other: VersionSet) -> bool:
        return self.bits & ~other.bits == 0

    def __repr__(self) -> str:
        return "{" + ",".join(map(str, self)) + "}"

    def to_list(self) -> list[int]:
        return list(self)


class VersionDag:
    """Versions 1..n linked by suc edges; acyclic with a unique root."""

    def __init__(self, versions: Iterable[int] = (), suc: Iterable[tuple[int, int]] = ()):
        self.preds: dict[int, list[int]] = {}
        self.succs: dict[int, list[int]] = {}
        for t in versions:
            self._add_version(t)
        for a, b in suc:
            self._add_suc(a, b)
        self.validate()

    def _add_version(self, t: int) -> None:
        if not isinstance(t, int) or isinstance(t, bool) or not 0 < t <= MAX_VERSIONS:
            raise InputError(f"invalid version id {t!r}")
        if t in self.preds:
            raise InputError(f"duplicate version id {t}")
        self.preds[t] = []
        self.succs[t] = []

    def _add_suc(self, a: int, b: int) -> None:
        if a not in self.preds or b not in self.preds:
            raise InputError(f"suc edge {a} -> {b} names an unknown version")
        if a in self.preds[b]:
            raise InputError(f"duplicate suc edge {a} -> {b}")
        self.preds[b].append(a)
        self.succs[a].append(b)

    def validate(self) -> None:
        if not self.preds:
            return
        roots = [t for t, p in self.preds.items() if not p]
        if len(roots) != 1:
            raise InputError(f"version DAG must have exactly one root, found {sorted(roots)}")
        self.topological()

    def add(self, t: int, bases: Iterable[int]) -> None:
        """Append a version with the given predecessors (it becomes a leaf)."""
        bases = list(bases)
        if self.preds and not bases:
            raise InputError(f"version {t} needs a base version")
        if len(set(bases)) != len(bases):
            raise InputError(f"version {t} lists a base twice")
        for b in bases:
            if b not in self.preds:
                raise InputError(f"unknown base version {b}")
        self._add_version(t)
        for b in bases:
            self._add_suc(b, t)

    def copy(self) -> VersionDag:
        d = VersionDag()
        d.preds = {t: list(p) for t, p in self.preds.items()}
        d.succs = {t: list(s) for t, s in self.succs.items()}
        return d

    @property
    def versions(self) -> list[int]:
        return sorted(self.preds)

    @property
    def root(self) -> int | None:
        return next((t for t, p in self.preds.items() if not p), None)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted((a, b) for b, ps in self.preds.items() for a in ps)

    def all(self) -> VersionSet:
        return VersionSet(self.preds)

    def is_leaf(self, t: int) -> bool:
        return not self.succs[t]

    def __contains__(self, t: object) -> bool:
        return t in self.preds

    def __len__(self) -> int:
        return len(self.preds)

    def topological(self) -> list[int]:
        ts = TopologicalSorter({t: sorted(p) for t, p in self.preds.items()})
        try:
            ts.prepare()
        except CycleError as exc:
            raise InputError(f"version DAG has a cycle through {exc.args[1]}") from None
        order: list[int] = []
        while ts.is_active():
            ready = sorted(ts.get_ready())
            order.extend(ready)
            ts.done(*ready)
        return order


def materialize(dag: VersionDag, s: VersionSet) -> tuple[list[int], list[int]]:
    """Entry/exit encoding of ``s``: (creation versions, deletion versions)."""
    cv, dv = [], []
    for t in dag.versions:
        preds = dag.preds[t]
        if t in s:
            if not preds or not all(p in s for p in preds):
                cv.append(t)
        elif any(p in s for p in preds):
            dv.append(t)
    return cv, dv


def dematerialize(dag: VersionDag, cv: Iterable[int], dv: Iterable[int]) -> VersionSet:
    """Present at t iff some path from a creation version reaches t without passing a deletion version."""
    cvs, dvs = set(cv), set(dv)
    unknown = (cvs | dvs) - set(dag.versions)
    if unknown:
        raise InputError(f"presence edges name unknown versions {sorted(unknown)}")
    present: set[int] = set()
    for t in dag.topological():
        if t in dvs:
            continue
        if t in cvs or any(p in present for p in dag.preds[t]):
            present.add(t)
    return VersionSet(present)
