"""Two-sorted types as canonical multisets.

``Comp`` is a computational type: a tensor (multiset) of arrows, the empty
one being ``1``.  ``ParT`` is a parallel type: a non-empty par (multiset) of
computational types.  Elements are kept sorted by a structural key, so ``==``
is equality up to associativity, commutativity and the unit of the tensor.

Concrete syntax: ``1``, ``*`` (tensor), ``%`` (par), ``-o`` (arrow).  Arrows
are right-associative and take an atom on their left, so an arrow domain that
is not ``1`` needs parentheses.  ``*`` binds tighter than ``%``.
"""

from __future__ import annotations

import itertools
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping


class TypeSyntaxError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Arrow:
    dom: "Comp"
    cod: "ParT"
    key: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "key", (self.dom.key, self.cod.key))

    def __eq__(self, other):
        return isinstance(other, Arrow) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __str__(self):
        return _print_arrow(self)

    __repr__ = __str__


@dataclass(frozen=True, eq=False)
class Comp:
    arrows: tuple[Arrow, ...] = ()
    key: tuple = field(init=False, repr=False)

    def __post_init__(self):
        arrows = tuple(sorted(self.arrows, key=lambda a: a.key))
        object.__setattr__(self, "arrows", arrows)
        object.__setattr__(self, "key", tuple(a.key for a in arrows))

    def __eq__(self, other):
        return isinstance(other, Comp) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __str__(self):
        return _print_comp(self)

    def __repr__(self):
        return f"Comp({self})"

    @property
    def is_unit(self) -> bool:
        return not self.arrows


@dataclass(frozen=True, eq=False)
class ParT:
    comps: tuple[Comp, ...]
    key: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if not self.comps:
            raise TypeSyntaxError("the empty par is not a type")
        comps = tuple(sorted(self.comps, key=lambda c: c.key))
        object.__setattr__(self, "comps", comps)
        object.__setattr__(self, "key", tuple(c.key for c in comps))

    def __eq__(self, other):
        return isinstance(other, ParT) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __str__(self):
        return print_type(self)

    def __repr__(self):
        return f"ParT({self})"

    @property
    def single(self) -> Comp | None:
        """The computational type if this par has arity one."""
        return self.comps[0] if len(self.comps) == 1 else None


ONE = Comp()


def arrow(dom: Comp, cod: "ParT | Comp") -> Arrow:
    return Arrow(dom, as_par(cod))


def comp(*arrows: Arrow) -> Comp:
    return Comp(tuple(arrows))


def par(*parts: "ParT | Comp") -> ParT:
    comps: list[Comp] = []
    for p in parts:
        comps.extend(as_par(p).comps)
    return ParT(tuple(comps))


def as_par(t: "ParT | Comp") -> ParT:
    return t if isinstance(t, ParT) else ParT((t,))


def par_unit(k: int) -> ParT:
    """``1 % ... % 1`` with ``k`` components."""
    return ParT((ONE,) * k)


def tensor(a: Comp, b: Comp) -> Comp:
    return Comp(a.arrows + b.arrows)


def tensor_all(cs: Iterable[Comp]) -> Comp:
    arrows: list[Arrow] = []
    for c in cs:
        arrows.extend(c.arrows)
    return Comp(tuple(arrows))


def type_eq(a, b) -> bool:
    if isinstance(a, Comp) and isinstance(b, ParT) or isinstance(a, ParT) and isinstance(b, Comp):
        return as_par(a) == as_par(b)
    return a == b


def comp_difference(a: Comp, b: Comp) -> Comp | None:
    """``a`` with the arrows of ``b`` removed, or ``None`` if ``b`` is not contained."""
    ca = Counter(a.arrows)
    ca.subtract(b.arrows)
    if any(v < 0 for v in ca.values()):
        return None
    return Comp(tuple(ca.elements()))


# -- sizes ------------------------------------------------------------------
# Size counts binary connectives: one per arrow, plus (n-1) per n-ary tensor
# or par.  So 1 has size 0, 1 % 1 and 1 -o 1 have size 1.


def arrow_size(a: Arrow) -> int:
    return 1 + comp_size(a.dom) + type_size(a.cod)


def comp_size(c: Comp) -> int:
    if not c.arrows:
        return 0
    return sum(arrow_size(a) for a in c.arrows) + len(c.arrows) - 1


def type_size(t: "ParT | Comp") -> int:
    if isinstance(t, Comp):
        return comp_size(t)
    return sum(comp_size(c) for c in t.comps) + len(t.comps) - 1


# -- contexts ---------------------------------------------------------------


@dataclass(frozen=True)
class Context:
    """Finite map from variables to non-unit computational types."""

    entries: tuple[tuple[str, Comp], ...] = ()

    @staticmethod
    def of(mapping: Mapping[str, Comp] | Iterable[tuple[str, Comp]] = ()) -> "Context":
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        merged: dict[str, Comp] = {}
        for name, c in items:
            merged[name] = tensor(merged.get(name, ONE), c)
        return Context(tuple(sorted((n, c) for n, c in merged.items() if not c.is_unit)))

    def __getitem__(self, name: str) -> Comp:
        for n, c in self.entries:
            if n == name:
                return c
        return ONE

    def __bool__(self):
        return bool(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def names(self) -> list[str]:
        return [n for n, _ in self.entries]

    def without(self, name: str) -> "Context":
        return Context(tuple(e for e in self.entries if e[0] != name))

    def extend(self, name: str, c: Comp) -> "Context":
        return tensor_ctx(self, Context.of({name: c}))

    def rename(self, old: str, new: str) -> "Context":
        if old == new or self[old].is_unit:
            return self
        return self.without(old).extend(new, self[old])

    def __str__(self):
        return ", ".join(f"{n}:{print_comp(c)}" for n, c in self.entries)


EMPTY = Context()


def tensor_ctx(a: Context, b: Context) -> Context:
    if not b:
        return a
    if not a:
        return b
    return Context.of(list(a.entries) + list(b.entries))


def tensor_ctxs(cs: Iterable[Context]) -> Context:
    out = EMPTY
    for c in cs:
        out = tensor_ctx(out, c)
    return out


def ctx_difference(a: Context, b: Context) -> Context | None:
    """``a`` minus ``b`` pointwise, or ``None`` if ``b`` is not contained in ``a``."""
    out = dict(a.entries)
    for name, c in b.entries:
        rest = comp_difference(out.get(name, ONE), c)
        if rest is None:
            return None
        out[name] = rest
    return Context.of(out)


# -- splitting --------------------------------------------------------------


def _compositions(m: int, n: int) -> Iterator[tuple[int, ...]]:
    """Ways to write ``m`` as an ordered sum of ``n`` non-negative integers."""
    if n == 1:
        yield (m,)
        return
    for first in range(m, -1, -1):
        for rest in _compositions(m - first, n - 1):
            yield (first,) + rest


def split_comp(t: Comp, n: int) -> list[tuple[Comp, ...]]:
    """All ordered ``n``-way multiset partitions of the arrows of ``t``."""
    if n < 1:
        raise ValueError("n must be positive")
    counts = Counter(t.arrows)
    distinct = sorted(counts, key=lambda a: a.key)
    result = []
    for choice in itertools.product(*(list(_compositions(counts[a], n)) for a in distinct)):
        parts = [[] for _ in range(n)]
        for a, comp_ in zip(distinct, choice):
            for i, c in enumerate(comp_):
                parts[i].extend([a] * c)
        result.append(tuple(Comp(tuple(p)) for p in parts))
    return result


def split_ctx(g: Context, n: int) -> list[tuple[Context, ...]]:
    per_var = [[(name, parts) for parts in split_comp(c, n)] for name, c in g.entries]
    result = []
    for choice in itertools.product(*per_var):
        result.append(tuple(Context.of({name: parts[i] for name, parts in choice}) for i in range(n)))
    return result


def sub_multisets(items: tuple) -> list[tuple[tuple, tuple]]:
    """Ordered pairs (chosen, rest) over distinct sub-multisets of ``items``."""
    counts = Counter(items)
    distinct = list(dict.fromkeys(items))
    out = []
    for choice in itertools.product(*(range(counts[x] + 1) for x in distinct)):
        chosen, rest = [], []
        for x, c in zip(distinct, choice):
            chosen.extend([x] * c)
            rest.extend([x] * (counts[x] - c))
        out.append((tuple(chosen), tuple(rest)))
    return out


def multiset_partitions(items: tuple) -> list[list[tuple]]:
    """Distinct partitions of a multiset into non-empty blocks (blocks unordered)."""
    items = tuple(items)
    if not items:
        return [[]]
    seen = set()
    out = []
    first, rest = items[0], items[1:]
    for chosen, remaining in sub_multisets(rest):
        block = (first,) + chosen
        for sub in multiset_partitions(remaining):
            key = tuple(sorted((tuple(sorted(b, key=_k)) for b in [block] + sub), key=lambda b: [_k(x) for x in b]))
            if key not in seen:
                seen.add(key)
                out.append([tuple(b) for b in key])
    return out


def _k(x):
    return getattr(x, "key", x)


# -- enumeration ------------------------------------------------------------


def _multisets(pool_by_size: Mapping[int, list], total: int, count_overhead: bool) -> list[tuple]:
    """Non-empty multisets over ``pool_by_size`` whose size is ``total``.

    The size of a multiset is the sum of element sizes plus ``len - 1``
    (one connective between consecutive elements).
    """
    pool = [(s, x) for s in sorted(pool_by_size) for x in pool_by_size[s]]
    out = []

    def go(start: int, remaining: int, acc: list):
        if acc and remaining == 0:
            out.append(tuple(acc))
        for i in range(start, len(pool)):
            s, x = pool[i]
            cost = s + (1 if acc else 0)
            if cost <= remaining:
                acc.append(x)
                go(i, remaining - cost, acc)
                acc.pop()

    go(0, total, [])
    return out


@lru_cache(maxsize=None)
def arrows_of_size(s: int) -> tuple[Arrow, ...]:
    out = []
    for ds in range(s):
        for dom in comps_of_size(ds):
            for cod in pars_of_size(s - 1 - ds):
                out.append(Arrow(dom, cod))
    return tuple(sorted(out, key=lambda a: a.key))


@lru_cache(maxsize=None)
def comps_of_size(s: int) -> tuple[Comp, ...]:
    if s == 0:
        return (ONE,)
    pool = {k: list(arrows_of_size(k)) for k in range(1, s + 1)}
    return tuple(sorted({Comp(m) for m in _multisets(pool, s, True)}, key=lambda c: c.key))


@lru_cache(maxsize=None)
def pars_of_size(s: int) -> tuple[ParT, ...]:
    pool = {k: list(comps_of_size(k)) for k in range(0, s + 1)}
    return tuple(sorted({ParT(m) for m in _multisets(pool, s, True)}, key=lambda p: p.key))


def enumerate_comps(max_size: int) -> Iterator[Comp]:
    for s in range(max_size + 1):
        yield from comps_of_size(s)


def enumerate_types(max_size: int) -> Iterator[ParT]:
    """Every parallel type of size at most ``max_size``, by size then key."""
    for s in range(max_size + 1):
        yield from pars_of_size(s)


def pars_with_arity(max_size: int, n: int) -> list[ParT]:
    return [p for p in enumerate_types(max_size) if len(p.comps) == n]


# -- relational encoding ----------------------------------------------------


@dataclass(frozen=True)
class Bag:
    """A finite multiset in the relational model, kept sorted."""

    items: tuple

    @staticmethod
    def of(items: Iterable) -> "Bag":
        return Bag(tuple(sorted(items, key=repr)))

    def __add__(self, other: "Bag") -> "Bag":
        return Bag.of(self.items + other.items)

    def __repr__(self):
        return "[" + ", ".join(map(repr, self.items)) + "]"


def encode_comp(t: Comp) -> Bag:
    return Bag.of((encode_comp(a.dom), encode_type(a.cod)) for a in t.arrows)


def encode_type(t: "ParT | Comp") -> Bag:
    t = as_par(t)
    return Bag.of(encode_comp(c) for c in t.comps)


# -- printing ---------------------------------------------------------------


def _print_arrow(a: Arrow) -> str:
    dom = "1" if a.dom.is_unit else f"({_print_comp(a.dom)})"
    c = a.cod.single
    if c is not None and len(c.arrows) <= 1:
        cod = _print_comp(c)
    else:
        cod = f"({print_type(a.cod)})"
    return f"{dom} -o {cod}"


def _print_comp(c: Comp) -> str:
    if c.is_unit:
        return "1"
    return " * ".join(_print_arrow(a) for a in c.arrows)


print_comp = _print_comp


def print_type(t: "ParT | Comp") -> str:
    if isinstance(t, Comp):
        return _print_comp(t)
    return " % ".join(_print_comp(c) for c in t.comps)


# -- parsing ----------------------------------------------------------------

_TTOKEN = re.compile(r"\s*(-o|⊸|[1()*%⊗⅋])")


def _ttokens(text: str) -> list[str]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TTOKEN.match(text, pos)
        if m is None:
            raise TypeSyntaxError(f"unexpected input at position {pos}: {text[pos:]!r}")
        tok = {"⊸": "-o", "⊗": "*", "⅋": "%"}.get(m.group(1), m.group(1))
        out.append(tok)
        pos = m.end()
    return out


def parse_type(text: str) -> ParT:
    toks = _ttokens(text)
    i = 0

    def peek():
        return toks[i] if i < len(toks) else None

    def take(expected=None):
        nonlocal i
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise TypeSyntaxError(f"expected {expected or 'a type'!r}, found {tok or 'end of input'!r}")
        i += 1
        return tok

    def p_par() -> ParT:
        parts = [p_comp()]
        while peek() == "%":
            take()
            parts.append(p_comp())
        return ParT(tuple(parts))

    def p_comp() -> Comp:
        c = p_unit()
        while peek() == "*":
            take()
            c = tensor(c, p_unit())
        return c

    def p_unit() -> Comp:
        a = p_atom()
        if peek() == "-o":
            take()
            dom = _need_comp(a, "arrow domain")
            cod = p_unit_par()
            return comp(Arrow(dom, cod))
        return _need_comp(a, "tensor factor")

    def p_unit_par() -> ParT:
        a = p_atom()
        if peek() == "-o":
            take()
            return as_par(comp(Arrow(_need_comp(a, "arrow domain"), p_unit_par())))
        return a

    def p_atom() -> ParT:
        tok = take()
        if tok == "1":
            return as_par(ONE)
        if tok == "(":
            t = p_par()
            take(")")
            return t
        raise TypeSyntaxError(f"unexpected {tok!r}")

    if not toks:
        raise TypeSyntaxError("empty type")
    t = p_par()
    if i != len(toks):
        raise TypeSyntaxError(f"trailing input {toks[i]!r}")
    return t


def _need_comp(t: ParT, where: str) -> Comp:
    c = t.single
    if c is None:
        raise TypeSyntaxError(f"a par type cannot be used as {where}")
    return c


def parse_comp(text: str) -> Comp:
    return _need_comp(parse_type(text), "computational type")
