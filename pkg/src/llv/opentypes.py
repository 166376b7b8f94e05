"""Types with row metavariables, used internally by the search.

An open comp is a multiset of arrows plus a multiset of *rows*: integer
metavariables each standing for an unknown computational type (so a row can
contribute any number of arrows).  Rows may occur anywhere, including inside
arrow codomains.  A substitution maps rows to open comps and is applied
lazily by ``resolve``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .typesys import Arrow, Comp, ParT, enumerate_comps

Subst = Mapping[int, "OComp"]


@dataclass(frozen=True, eq=False)
class OArrow:
    dom: "OComp"
    cod: "OPar"
    key: tuple = field(init=False, repr=False)
    ground: bool = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "key", (self.dom.key, self.cod.key))
        object.__setattr__(self, "ground", self.dom.ground and self.cod.ground)

    def __eq__(self, other):
        return isinstance(other, OArrow) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"({self.dom!r} -o {self.cod!r})"


@dataclass(frozen=True, eq=False)
class OComp:
    arrows: tuple[OArrow, ...] = ()
    rows: tuple[int, ...] = ()
    key: tuple = field(init=False, repr=False)
    ground: bool = field(init=False, repr=False)

    def __post_init__(self):
        arrows = tuple(sorted(self.arrows, key=lambda a: a.key))
        rows = tuple(sorted(self.rows))
        object.__setattr__(self, "arrows", arrows)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "key", (tuple(a.key for a in arrows), rows))
        object.__setattr__(self, "ground", not rows and all(a.ground for a in arrows))

    def __eq__(self, other):
        return isinstance(other, OComp) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        parts = [repr(a) for a in self.arrows] + [f"?{r}" for r in self.rows]
        return " * ".join(parts) or "1"

    @property
    def is_unit(self) -> bool:
        return not self.arrows and not self.rows

    @property
    def is_bare(self) -> bool:
        """A single row and nothing else."""
        return not self.arrows and len(self.rows) == 1


@dataclass(frozen=True, eq=False)
class OPar:
    comps: tuple[OComp, ...]
    key: tuple = field(init=False, repr=False)
    ground: bool = field(init=False, repr=False)

    def __post_init__(self):
        if not self.comps:
            raise ValueError("the empty par is not a type")
        comps = tuple(sorted(self.comps, key=lambda c: c.key))
        object.__setattr__(self, "comps", comps)
        object.__setattr__(self, "key", tuple(c.key for c in comps))
        object.__setattr__(self, "ground", all(c.ground for c in comps))

    def __eq__(self, other):
        return isinstance(other, OPar) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return " % ".join(map(repr, self.comps))


UNIT = OComp()
_lift_cache: dict[Comp, OComp] = {}


def row(r: int) -> OComp:
    return OComp((), (r,))


def lift(c: Comp) -> OComp:
    found = _lift_cache.get(c)
    if found is None:
        found = OComp(tuple(OArrow(lift(a.dom), lift_par(a.cod)) for a in c.arrows))
        _lift_cache[c] = found
    return found


def lift_par(p: ParT) -> OPar:
    return OPar(tuple(lift(c) for c in p.comps))


def lower(o: OComp) -> Comp:
    """The ground comp; any row still present is read as ``1``."""
    return Comp(tuple(Arrow(lower(a.dom), lower_par(a.cod)) for a in o.arrows))


def lower_par(p: OPar) -> ParT:
    return ParT(tuple(lower(c) for c in p.comps))


def otensor(a: OComp, b: OComp) -> OComp:
    if a.is_unit:
        return b
    if b.is_unit:
        return a
    return OComp(a.arrows + b.arrows, a.rows + b.rows)


def rows_of(o: OComp | OPar) -> set[int]:
    if o.ground:
        return set()
    if isinstance(o, OPar):
        return set().union(*(rows_of(c) for c in o.comps))
    out = set(o.rows)
    for a in o.arrows:
        if not a.ground:
            out |= rows_of(a.dom) | rows_of(a.cod)
    return out


def resolve(o: OComp, theta: Subst) -> OComp:
    if o.ground or not theta:
        return o
    arrows = [OArrow(resolve(a.dom, theta), resolve_par(a.cod, theta)) for a in o.arrows]
    rows: list[int] = []
    for r in o.rows:
        if r in theta:
            sub = resolve(theta[r], theta)
            arrows.extend(sub.arrows)
            rows.extend(sub.rows)
        else:
            rows.append(r)
    return OComp(tuple(arrows), tuple(rows))


def resolve_par(p: OPar, theta: Subst) -> OPar:
    if p.ground or not theta:
        return p
    return OPar(tuple(resolve(c, theta) for c in p.comps))


def rename(o: OComp, mapping: Mapping[int, int]) -> OComp:
    if o.ground:
        return o
    return OComp(
        tuple(OArrow(rename(a.dom, mapping), rename_par(a.cod, mapping)) for a in o.arrows),
        tuple(mapping.get(r, r) for r in o.rows),
    )


def rename_par(p: OPar, mapping: Mapping[int, int]) -> OPar:
    if p.ground:
        return p
    return OPar(tuple(rename(c, mapping) for c in p.comps))


def _remove_one(items: tuple, i: int) -> tuple:
    return items[:i] + items[i + 1 :]


def match(a: OComp, target: OComp, theta: dict, bound: int) -> Iterator[dict]:
    """Substitutions extending ``theta`` that make ``a`` equal to ground ``target``."""
    a = resolve(a, theta)
    if a.ground:
        if a == target:
            yield theta
        return
    if not a.arrows:
        yield from _distribute(a.rows, target, theta)
        return
    first, rest = a.arrows[0], OComp(a.arrows[1:], a.rows)
    seen = set()
    for i, d in enumerate(target.arrows):
        if d.key in seen or len(d.cod.comps) != len(first.cod.comps):
            continue
        if first.cod.ground and first.cod != d.cod:
            continue
        seen.add(d.key)
        remaining = OComp(_remove_one(target.arrows, i))
        for th in match(first.dom, d.dom, theta, bound):
            for th2 in match_par(first.cod, d.cod, th, bound):
                yield from match(rest, remaining, th2, bound)


def match_par(a: OPar, target: OPar, theta: dict, bound: int) -> Iterator[dict]:
    a = resolve_par(a, theta)
    if a.ground:
        if a == target:
            yield theta
        return
    yield from _match_comps(a.comps, target.comps, theta, bound)


def _match_comps(comps: tuple, targets: tuple, theta: dict, bound: int) -> Iterator[dict]:
    if not comps:
        if not targets:
            yield theta
        return
    first, rest = comps[0], comps[1:]
    seen = set()
    for i, t in enumerate(targets):
        if t.key in seen:
            continue
        seen.add(t.key)
        for th in match(first, t, theta, bound):
            yield from _match_comps(rest, _remove_one(targets, i), th, bound)


def _distribute(rows: tuple[int, ...], target: OComp, theta: dict) -> Iterator[dict]:
    if not rows:
        if target.is_unit:
            yield theta
        return
    if len(rows) == 1:
        yield {**theta, rows[0]: target}
        return
    counts = Counter(rows)
    distinct = sorted(counts)
    # split of the target's arrows among the distinct rows, a row occurring
    # m times receiving the same share m times over
    for parts in _splits(list(target.arrows), [counts[r] for r in distinct]):
        th = dict(theta)
        for r, p in zip(distinct, parts):
            th[r] = OComp(tuple(p))
        yield th


def _splits(items: list[OArrow], mults: list[int]) -> Iterator[list[list[OArrow]]]:
    """Assign each item to a slot so that slot ``i`` holds ``mults[i]`` equal copies."""
    if not mults:
        if not items:
            yield []
        return
    m = mults[0]
    counts = Counter(items)
    keys = list(counts)

    def choose(idx, acc):
        if idx == len(keys):
            rest = Counter(items)
            for a, c in acc:
                rest[a] -= c * m
            pool = list(rest.elements())
            share = [a for a, c in acc for _ in range(c)]
            for tail in _splits(pool, mults[1:]):
                yield [share] + tail
            return
        a = keys[idx]
        for c in range(counts[a] // m + 1):
            yield from choose(idx + 1, acc + [(a, c)])

    yield from choose(0, [])


def groundings(rows, theta: dict, bound: int) -> Iterator[dict]:
    """Every way of binding ``rows`` to ground comps of size at most ``bound``."""
    pending = [r for r in dict.fromkeys(rows) if r not in theta]
    if not pending:
        yield theta
        return
    comps = [lift(c) for c in enumerate_comps(bound)]

    def go(i, th):
        if i == len(pending):
            yield th
            return
        for c in comps:
            yield from go(i + 1, {**th, pending[i]: c})

    yield from go(0, theta)


def unify(a: OComp, b: OComp, theta: dict, bound: int) -> Iterator[dict]:
    """Unifiers of two open comps extending ``theta``.

    Bare rows are bound directly and ground sides are matched.  Otherwise the
    rows of ``b`` are grounded with comps of size at most ``bound`` first.
    """
    a, b = resolve(a, theta), resolve(b, theta)
    if a.key == b.key:
        yield theta
        return
    for x, y in ((a, b), (b, a)):
        if x.is_bare:
            r = x.rows[0]
            if r not in rows_of(y):
                yield {**theta, r: y}
            return
    if b.ground:
        yield from match(a, b, theta, bound)
    elif a.ground:
        yield from match(b, a, theta, bound)
    else:
        for th in groundings(sorted(rows_of(b)), theta, bound):
            yield from match(a, resolve(b, th), th, bound)
