"""Bounded derivation search and the constructive reduction/expansion of derivations.

Search is goal-directed: given a subject and a goal type it computes every
derivable (context, measure) pair, recording how each was obtained so that
derivations can be extracted later.  The rules are syntax directed except
for argument types, which start out as row metavariables (see ``opentypes``):

* when the function is an abstraction they are read off the body's
  derivations;
* otherwise the argument is judged against a fresh row, settled by
  unification with the function's type;
* a closed abstraction typed against a row that nothing has fixed yet is
  kept as an obligation until an enclosing binder fixes it.

Rows that stay unconstrained are finally grounded with comps of size at
most ``SearchBounds.max_type_size``.  Goals themselves are never
size-limited, so intermediate judgments may grow past the bound.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .derivation import (
    Derivation,
    DerivationError,
    app,
    ax,
    check,
    join_value_derivations,
    lam,
    par_i,
    plus_l,
    plus_r,
    retarget,
    split_value_derivation,
    substitute_derivation,
    unit_parallel,
    unit_value,
)
from .reduction import StepLabel, apply_step, parallel_values, step
from .syntax import App, Lam, Par, Sum, Term, Var, all_names, free_vars, fresh_name, height, is_value, print_term, rename_free
from .opentypes import (
    UNIT,
    OArrow,
    OComp,
    OPar,
    groundings,
    lift,
    lift_par,
    lower,
    match,
    otensor,
    rename,
    rename_par,
    resolve,
    resolve_par,
    row,
    rows_of,
    unify,
)
from .typesys import (
    EMPTY,
    Comp,
    Context,
    ParT,
    enumerate_types,
    multiset_partitions,
    par_unit,
    sub_multisets,
    tensor,
)


@dataclass(frozen=True)
class SearchBounds:
    max_type_size: int = 3
    max_depth: int = 64
    max_k: int = 3
    max_results: int = 50

    def __post_init__(self):
        if self.max_type_size < 0 or min(self.max_depth, self.max_k, self.max_results) < 1:
            raise ValueError("search bounds must be positive (type size may be 0)")


# -- search forest ----------------------------------------------------------
#
# Every subterm is judged against an open goal: a par type whose components
# may mention rows (see ``opentypes``).  A judgment yields partial results
# (``Part``: a context, a measure, derivation templates and obligations)
# together with the substitution they need on the goal's rows.  Memoized
# results are stored for a canonical renaming of the goal; rows other than
# the goal's are renamed apart whenever a result is reused.
#
# Templates are derivation skeletons:
#   ("ax", x, t) ("lam", x, body, premises, holes) ("app", blocks, premises)
#   ("plusL", p, other) ("plusR", other, p) ("par", p, q)
# An obligation (hole, v, t) asks for a derivation of the closed abstraction
# v with type t; once found its premises are merged into the lam node
# carrying ``hole``.  Obligations wait while t is a bare row.

OCtx = tuple


def _octx(pairs) -> OCtx:
    merged: dict[str, OComp] = {}
    for name, t in pairs:
        merged[name] = otensor(merged.get(name, UNIT), t)
    return tuple(sorted((n, t) for n, t in merged.items() if not t.is_unit))


def _oget(ctx: OCtx, name: str) -> OComp:
    for n, t in ctx:
        if n == name:
            return t
    return UNIT


def _owithout(ctx: OCtx, name: str) -> OCtx:
    return tuple(e for e in ctx if e[0] != name)


def _otensor_ctx(ctxs) -> OCtx:
    ctxs = [c for c in ctxs if c]
    if len(ctxs) <= 1:
        return ctxs[0] if ctxs else ()
    return _octx(e for c in ctxs for e in c)


def _map_ctx(ctx: OCtx, fn) -> OCtx:
    return _octx((n, fn(t)) for n, t in ctx)


def _map_tpl(tpl, fn, holes=None):
    match tpl[0]:
        case "ax":
            return ("ax", tpl[1], fn(tpl[2]))
        case "lam":
            hs = tpl[4] if holes is None else tuple(holes.get(h, h) for h in tpl[4])
            return ("lam", tpl[1], tpl[2], tuple(_map_tpl(p, fn, holes) for p in tpl[3]), hs)
        case "app":
            return ("app", tuple(fn(b) for b in tpl[1]), tuple(_map_tpl(p, fn, holes) for p in tpl[2]))
        case "plusL":
            return ("plusL", _map_tpl(tpl[1], fn, holes), tpl[2])
        case "plusR":
            return ("plusR", tpl[1], _map_tpl(tpl[2], fn, holes))
        case "par":
            return ("par", _map_tpl(tpl[1], fn, holes), _map_tpl(tpl[2], fn, holes))
    raise ValueError(tpl[0])


def _tpl_rows(tpl) -> set[int]:
    acc: set[int] = set()

    def visit(t):
        acc.update(rows_of(t))
        return t

    _map_tpl(tpl, visit)
    return acc


def _fill(tpl, hole: int, lam_tpl):
    """Merge the abstraction template ``lam_tpl`` into the lam node owning ``hole``."""
    match tpl[0]:
        case "ax":
            return tpl
        case "lam":
            ps = tuple(_fill(p, hole, lam_tpl) for p in tpl[3])
            if hole in tpl[4]:
                hs = tuple(h for h in tpl[4] if h != hole) + lam_tpl[4]
                return ("lam", tpl[1], tpl[2], ps + lam_tpl[3], hs)
            return ("lam", tpl[1], tpl[2], ps, tpl[4])
        case "app":
            return ("app", tpl[1], tuple(_fill(p, hole, lam_tpl) for p in tpl[2]))
        case "plusL":
            return ("plusL", _fill(tpl[1], hole, lam_tpl), tpl[2])
        case "plusR":
            return ("plusR", tpl[1], _fill(tpl[2], hole, lam_tpl))
        case "par":
            return ("par", _fill(tpl[1], hole, lam_tpl), _fill(tpl[2], hole, lam_tpl))
    raise ValueError(tpl[0])


def _build(tpl) -> Derivation:
    match tpl[0]:
        case "ax":
            return ax(tpl[1], lower(tpl[2]))
        case "lam":
            return lam(tpl[1], tpl[2], [_build(p) for p in tpl[3]])
        case "app":
            ps = [_build(p) for p in tpl[2]]
            return app(ps[0], ps[1:], [lower(b) for b in tpl[1]])
        case "plusL":
            return plus_l(_build(tpl[1]), tpl[2])
        case "plusR":
            return plus_r(tpl[1], _build(tpl[2]))
        case "par":
            return par_i(_build(tpl[1]), _build(tpl[2]))
    raise ValueError(tpl[0])


@dataclass(frozen=True)
class Part:
    ctx: OCtx
    m: int
    tpls: tuple
    obls: tuple = ()  # (hole, abstraction, type)

    def subst(self, theta) -> "Part":
        if not theta:
            return self
        fn = lambda t: resolve(t, theta)  # noqa: E731
        return Part(
            _map_ctx(self.ctx, fn),
            self.m,
            tuple(_map_tpl(p, fn) for p in self.tpls),
            tuple((h, v, fn(t)) for h, v, t in self.obls),
        )

    def rows(self) -> set[int]:
        out: set[int] = set()
        for _, t in self.ctx:
            out |= rows_of(t)
        for _, _, t in self.obls:
            out |= rows_of(t)
        return out

    def without(self, x: str) -> "Part":
        return Part(_owithout(self.ctx, x), self.m, self.tpls, self.obls)

    def plus(self, extra: int) -> "Part":
        return Part(self.ctx, self.m + extra, self.tpls, self.obls)


class _Zero(dict):
    def get(self, key, default=None):
        return 0


def _shape(t: OComp) -> tuple:
    return rename(t, _Zero()).key


def _number(t: OComp | OPar, mapping: dict) -> None:
    """Extend ``mapping`` with canonical ids for the rows of ``t`` in a fixed order."""
    if t.ground:
        return
    if isinstance(t, OPar):
        for c in sorted(t.comps, key=_shape):
            _number(c, mapping)
        return
    for a in sorted(t.arrows, key=lambda a: (_shape(a.dom), rename_par(a.cod, _Zero()).key)):
        _number(a.dom, mapping)
        _number(a.cod, mapping)
    for r in t.rows:
        if r not in mapping:
            mapping[r] = -(len(mapping) + 1)


def _compose(*thetas) -> dict:
    out: dict = {}
    for th in thetas:
        out.update(th)
    return out


class _Acc:
    """Groups results by (context, measure, obligations, goal instance), keeping a few templates each.

    Goal rows are the canonical ids -1 .. -k and are kept; other rows are
    renumbered from -(k+1).
    """

    def __init__(self, cap: int, ngoal: int):
        self.cap = cap
        self.ngoal = ngoal
        self.groups: dict[tuple, list] = {}

    def add(self, p: Part, inst: dict[int, OComp]) -> None:
        rmap = {-(i + 1): -(i + 1) for i in range(self.ngoal)}
        for g in sorted(inst, reverse=True):
            _number(inst[g], rmap)
        for _, t in p.ctx:
            _number(t, rmap)
        for _, _, t in sorted(p.obls, key=lambda o: (_shape(o[2]), repr(o[1]))):
            _number(t, rmap)
        visible = set(rmap)
        obls = sorted(((rename(t, rmap), v, h) for h, v, t in p.obls), key=lambda o: (o[0].key, repr(o[1])))
        hmap = {h: -(i + 1) for i, (_, _, h) in enumerate(obls)}
        ctx = _map_ctx(p.ctx, lambda t: rename(t, rmap))
        inst_c = tuple(sorted((g, rename(t, rmap)) for g, t in inst.items()))
        okey = tuple((t, v) for t, v, _ in obls)
        key = (ctx, p.m, okey, inst_c)
        g = self.groups.get(key)
        if g is None:
            stored = Part(ctx, p.m, (), tuple((hmap[h], v, t) for t, v, h in obls))
            g = self.groups[key] = [stored, dict(inst_c), []]
        tpls = g[2]
        for tpl in p.tpls:
            if len(tpls) >= self.cap:
                break
            inner = _tpl_rows(tpl) - visible
            if inner:
                # rows nothing else mentions are unconstrained; read them as 1
                tpl = _map_tpl(tpl, lambda t: resolve(t, {r: UNIT for r in inner}))
            tpls.append(_map_tpl(tpl, lambda t: rename(t, rmap), hmap))

    def results(self) -> list[tuple[Part, dict]]:
        return [(Part(p.ctx, p.m, tuple(tpls), p.obls), inst) for p, inst, tpls in self.groups.values()]


class Searcher:
    """Memoized search within fixed bounds; reuse one instance across goals."""

    def __init__(self, bounds: SearchBounds = SearchBounds()):
        self.bounds = bounds
        self.memo: dict[tuple, list[tuple[Part, dict]]] = {}
        self._solutions: dict[tuple, dict[int, list]] = {}
        self._counter = 0

    def _fresh_id(self) -> int:
        self._counter += 1
        return self._counter

    def _combine(self, parts: Sequence[Part], make) -> Part:
        combos = itertools.islice(itertools.product(*(p.tpls for p in parts)), self.bounds.max_results)
        return Part(
            _otensor_ctx(p.ctx for p in parts),
            sum(p.m for p in parts),
            tuple(make(c) for c in combos),
            tuple(o for p in parts for o in p.obls),
        )

    # -- judgment sets ------------------------------------------------------

    def judge(self, t: Term, goal: OPar) -> list[tuple[Part, dict]]:
        """Results for ``t`` against ``goal``, each with the substitution it needs on the goal's rows."""
        to_canon: dict[int, int] = {}
        _number(goal, to_canon)
        canon = rename_par(goal, to_canon) if to_canon else goal
        key = (t, canon.key)
        found = self.memo.get(key)
        if found is None:
            acc = _Acc(self.bounds.max_results, len(to_canon))
            if height(t) <= self.bounds.max_depth:
                goal_rows = set(to_canon.values())
                for p, th in self._judge(t, canon):
                    inst = {g: resolve(row(g), th) for g in goal_rows if g in th}
                    acc.add(p.subst(th), inst)
            found = self.memo[key] = acc.results()
        back = {c: r for r, c in to_canon.items()}
        return [self._reuse(p, inst, back) for p, inst in found]

    def _reuse(self, p: Part, inst: dict, back: dict[int, int]) -> tuple[Part, dict]:
        rows = p.rows() | set().union(*(rows_of(t) for t in inst.values())) if inst else p.rows()
        for tpl in p.tpls:
            rows |= _tpl_rows(tpl)
        rmap = dict(back)
        for r in sorted(rows):
            if r not in rmap:
                rmap[r] = self._fresh_id()
        hmap = {h: self._fresh_id() for h, _, _ in p.obls}
        fn = lambda t: rename(t, rmap)  # noqa: E731
        q = Part(
            _map_ctx(p.ctx, fn),
            p.m,
            tuple(_map_tpl(t, fn, hmap) for t in p.tpls),
            tuple((hmap[h], v, fn(t)) for h, v, t in p.obls),
        )
        return q, {back[g]: fn(t) for g, t in inst.items()}

    def _judge(self, t: Term, goal: OPar) -> Iterator[tuple[Part, dict]]:
        match t:
            case Var(x):
                if len(goal.comps) == 1:
                    c = goal.comps[0]
                    yield Part(_octx([(x, c)]), 0, (("ax", x, c),)), {}
            case Lam():
                if len(goal.comps) == 1:
                    yield from self._solve_lam(t, goal.comps[0])
            case Sum(left, right):
                for p, th in self.judge(left, goal):
                    yield Part(p.ctx, p.m + 1, tuple(("plusL", q, right) for q in p.tpls), p.obls), th
                for p, th in self.judge(right, goal):
                    yield Part(p.ctx, p.m + 1, tuple(("plusR", left, q) for q in p.tpls), p.obls), th
            case Par(left, right):
                for chosen, rest in sub_multisets(goal.comps):
                    if not chosen or not rest:
                        continue
                    for pl, th1 in self.judge(left, OPar(chosen)):
                        rest_goal = OPar(tuple(resolve(c, th1) for c in rest))
                        for pr, th2 in self.judge(right, rest_goal):
                            th = _compose(th1, th2)
                            yield self._combine([pl.subst(th), pr], lambda ps: ("par", *ps)), th
            case App(Lam(x, body), arg):
                yield from self._judge_redex(x, body, arg, goal)
            case App(fun, arg):
                yield from self._judge_app(fun, arg, goal)

    def _thread(self, jobs) -> Iterator[tuple[list[Part], dict]]:
        """Judge (term, goal) pairs in turn, threading the substitution through the goals."""

        def go(i, th, acc):
            if i == len(jobs):
                yield [p.subst(th) for p in acc], th
                return
            t, goal = jobs[i]
            for p, th2 in self.judge(t, resolve_par(goal, th)):
                yield from go(i + 1, _compose(th, th2), acc + [p])

        yield from go(0, {}, [])

    def _judge_redex(self, x: str, body: Term, arg: Term, goal: OPar) -> Iterator[tuple[Part, dict]]:
        for groups in multiset_partitions(goal.comps):
            weight = 2 * len(groups) - 1
            for parts, th in self._thread([(body, OPar(g)) for g in groups]):
                cods = [resolve_par(OPar(g), th) for g in groups]
                taus = [_oget(p.ctx, x) for p in parts]
                fun = self._combine([p.without(x) for p in parts], lambda ps: ("lam", x, body, ps, ()))
                for pa, th2 in self.judge(arg, OPar(tuple(taus))):
                    th3 = _compose(th, th2)
                    block = resolve(OComp(tuple(OArrow(tau, cod) for tau, cod in zip(taus, cods))), th3)
                    whole = self._combine([fun.subst(th2), pa], lambda ps: ("app", (block,), ps))
                    for q, th4 in self._settle(whole.plus(weight)):
                        yield q, _compose(th3, th4)

    def _judge_app(self, fun: Term, arg: Term, goal: OPar) -> Iterator[tuple[Part, dict]]:
        """Applications whose function is not an abstraction: argument types start as fresh rows."""
        single = isinstance(fun, Var)
        for groups in multiset_partitions(goal.comps):
            if is_value(arg) and len(groups) > 1 and single:
                continue
            for blocking in multiset_partitions(tuple(range(len(groups)))):
                if len(blocking) > (1 if single else self.bounds.max_k):
                    continue
                sigmas = [[row(self._fresh_id()) for _ in block] for block in blocking]
                comps = tuple(
                    OComp(tuple(OArrow(s, OPar(groups[i])) for s, i in zip(ss, block))) for ss, block in zip(sigmas, blocking)
                )
                if is_value(arg) and any(len(b) > 1 for b in blocking):
                    continue
                weight = sum(2 * len(b) for b in blocking) - 1
                jobs = [(fun, OPar(comps))] + [(arg, OPar(tuple(ss))) for ss in sigmas]
                for parts, th in self._thread(jobs):
                    blocks = tuple(resolve(c, th) for c in comps)
                    whole = self._combine(parts, lambda ps: ("app", blocks, ps))
                    for q, th2 in self._settle(whole.plus(weight)):
                        yield q, _compose(th, th2)

    def _solve_lam(self, v: Lam, tau: OComp) -> list[tuple[Part, dict]]:
        """Type the abstraction ``v`` with the open comp ``tau``.

        Arrows are processed one at a time, unifying their domains with the
        binder's type in the body.  Rows left bare at the end become new
        obligations when ``v`` is closed, and are grounded otherwise.
        """
        z, body = v.var, v.body
        bound = self.bounds.max_type_size
        closed = not free_vars(v)
        out: list[tuple[Part, dict]] = []

        def expand(pending, rows, th):
            pending, new_rows = list(pending), []
            for r in rows:
                if r in th:
                    sub = resolve(th[r], th)
                    pending.extend(sub.arrows)
                    new_rows.extend(sub.rows)
                else:
                    new_rows.append(r)
            return pending, new_rows

        def finish(rows, th, prems):
            holes = tuple(self._fresh_id() for _ in rows)
            obls = tuple((h, v, row(r)) for h, r in zip(holes, rows))
            prems = [p.subst(th) for p in prems]
            if prems:
                p = self._combine(prems, lambda ps: ("lam", z, body, ps, holes))
            else:
                p = Part((), 0, (("lam", z, body, (), holes),))
            out.append((Part(p.ctx, p.m, p.tpls, p.obls + obls), th))

        def go(pending, rows, th, prems):
            if len(prems) > self.bounds.max_depth:
                return
            if pending:
                a, rest = pending[0], pending[1:]
                for p, th1 in self.judge(body, resolve_par(a.cod, th)):
                    th2 = _compose(th, th1)
                    for th3 in unify(resolve(a.dom, th2), resolve(_oget(p.ctx, z), th2), th2, bound):
                        p2, r2 = expand(rest, rows, th3)
                        go(p2, r2, th3, prems + [p.without(z)])
            elif rows and not closed:
                for th2 in groundings(rows[:1], th, bound):
                    p2, r2 = expand([], rows, th2)
                    go(p2, r2, th2, prems)
            else:
                finish(rows, th, prems)

        go(list(tau.arrows), list(tau.rows), {}, [])
        return out

    def _settle(self, p: Part) -> Iterator[tuple[Part, dict]]:
        """Discharge every obligation whose type is no longer a bare row."""
        for i, (h, v, t) in enumerate(p.obls):
            if t.is_bare:
                continue
            rest = Part(p.ctx, p.m, p.tpls, p.obls[:i] + p.obls[i + 1 :])
            for sol, th in self._solve_lam(v, t):
                merged = self._combine([rest.subst(th), sol], lambda ps: _fill(ps[0], h, ps[1]))
                for q, th2 in self._settle(merged):
                    yield q, _compose(th, th2)
            return
        yield p, {}

    def _force(self, p: Part) -> Iterator[Part]:
        """Settle all obligations, grounding rows that nothing else constrains."""
        for q, _ in self._settle(p):
            if not q.obls:
                yield q
                continue
            r = q.obls[0][2].rows[0]
            for th in groundings([r], {}, self.bounds.max_type_size):
                yield from self._force(q.subst(th))

    # -- answers ------------------------------------------------------------

    def solutions(self, ctx: Context, t: Term, goal: ParT) -> dict[int, list]:
        """Templates of derivations of ``ctx |- t : goal`` grouped by measure."""
        key = (ctx, t, goal)
        cached = self._solutions.get(key)
        if cached is not None:
            return cached
        out: dict[int, list] = defaultdict(list)
        given = _octx((n, lift(c)) for n, c in ctx)
        bound = self.bounds.max_type_size
        for p, _ in self.judge(t, lift_par(goal)):
            names = {n for n, _ in p.ctx} | {n for n, _ in given}
            thetas = [{}]
            for n in sorted(names):
                thetas = [th2 for th in thetas for th2 in match(_oget(p.ctx, n), _oget(given, n), th, bound)]
            for th in thetas:
                for q in self._force(p.subst(th)):
                    out[q.m].extend(q.tpls)
        result = {m: out[m] for m in sorted(out)}
        self._solutions[key] = result
        return result

    def results(self, ctx: Context, t: Term, goal: ParT) -> list[int]:
        """Sorted measures of derivations of ``ctx |- t : goal`` within bounds."""
        return list(self.solutions(ctx, t, goal))

    def derivations(self, ctx: Context, t: Term, goal: ParT, m: int) -> Iterator[Derivation]:
        for tpl in self.solutions(ctx, t, goal).get(m, ()):
            yield _build(tpl)

    def search(self, ctx: Context, t: Term, goal: ParT, limit: int | None = None) -> list[Derivation]:
        limit = self.bounds.max_results if limit is None else limit
        out: list[Derivation] = []
        for tpls in self.solutions(ctx, t, goal).values():
            for tpl in tpls:
                out.append(_build(tpl))
                if len(out) >= limit:
                    return out
        return out


# -- public search API ------------------------------------------------------


def search(ctx: Context, t: Term, goal: ParT, bounds: SearchBounds = SearchBounds(), searcher: Searcher | None = None) -> list[Derivation]:
    s = searcher or Searcher(bounds)
    return s.search(ctx, t, goal)


def _require_closed(t: Term) -> None:
    if free_vars(t):
        raise ValueError(f"expected a closed term: {print_term(t)}")


def typable(t: Term, bounds: SearchBounds = SearchBounds(), searcher: Searcher | None = None) -> Derivation | None:
    """A derivation of ``|- t : a`` with minimal measure, types tried by size."""
    _require_closed(t)
    s = searcher or Searcher(bounds)
    best = None
    for goal in enumerate_types(s.bounds.max_type_size):
        ms = s.results(EMPTY, t, goal)
        if ms and (best is None or ms[0] < best[1]):
            best = (goal, ms[0])
    if best is None:
        return None
    goal, m = best
    return next(s.derivations(EMPTY, t, goal, m))


def unit_measures(t: Term, k: int, bounds: SearchBounds = SearchBounds(), searcher: Searcher | None = None) -> set[int]:
    """Measures of all bounded derivations of ``|- t : 1 % ... % 1`` (k times)."""
    _require_closed(t)
    if k < 1:
        raise ValueError("k must be positive")
    s = searcher or Searcher(bounds)
    return set(s.results(EMPTY, t, par_unit(k)))


def unit_typings(t: Term, k: int, bounds: SearchBounds = SearchBounds(), searcher: Searcher | None = None) -> list[tuple[Derivation, int]]:
    """Bounded derivations of ``|- t : 1 % ... % 1``, at least one per measure."""
    _require_closed(t)
    if k < 1:
        raise ValueError("k must be positive")
    s = searcher or Searcher(bounds)
    out = []
    for m, tpls in s.solutions(EMPTY, t, par_unit(k)).items():
        for i, tpl in enumerate(tpls):
            if i and len(out) >= s.bounds.max_results:
                break
            out.append((_build(tpl), m))
    return out


# -- subject reduction ------------------------------------------------------


@dataclass
class Trace:
    start: Term
    steps: list[tuple[StepLabel, Term]] = field(default_factory=list)

    @property
    def end(self) -> Term:
        return self.steps[-1][1] if self.steps else self.start

    def __len__(self) -> int:
        return len(self.steps)

    def replay(self) -> None:
        """Raise ``ValueError`` unless every step is a valid reduction step."""
        cur = self.start
        for lab, nxt in self.steps:
            got = apply_step(cur, lab)
            if got != nxt:
                from .syntax import alpha_eq

                if not alpha_eq(got, nxt):
                    raise ValueError(f"step {lab} from {print_term(cur)} gives {print_term(got)}, not {print_term(nxt)}")
            cur = nxt

    def to_json(self) -> dict:
        return {
            "start": print_term(self.start),
            "steps": [{"rule": lab.rule, "path": list(lab.path), "result": print_term(n)} for lab, n in self.steps],
        }

    @staticmethod
    def from_json(data: dict, corpus=None) -> "Trace":
        from .syntax import parse_term

        t = Trace(parse_term(data["start"], corpus))
        for s in data["steps"]:
            t.steps.append((StepLabel(s["rule"], tuple(s["path"])), parse_term(s["result"], corpus)))
        return t


def _at(d: Derivation, path: Sequence[int]) -> Derivation:
    for i in path:
        if d.rule == "par":
            d = d.premises[i]
        elif d.rule == "app":
            if i == 1 and len(d.premises) != 2:
                raise DerivationError("argument position typed more than once")
            d = d.premises[i]
        else:
            raise DerivationError(f"cannot descend into a {d.rule} node")
    return d


def guided_step(d: Derivation) -> tuple[StepLabel, Term, Derivation]:
    """Fire the step selected by ``d`` and return the reduced derivation (measure - 1)."""
    m = d.term
    _require_closed(m)
    steps = step(m)
    if not steps:
        raise ValueError(f"{print_term(m)} is a normal form")
    for lab, n in steps:
        if lab.rule in ("PlusL", "PlusR") and _at(d, lab.path).rule != ("plusL" if lab.rule == "PlusL" else "plusR"):
            continue
        reduced = _reduce_at(d, lab.path, lab.rule)
        return lab, n, retarget(reduced, n)
    raise DerivationError("no reduction step is compatible with the derivation")


def _reduce_at(d: Derivation, path: Sequence[int], rule: str) -> Derivation:
    if path:
        i, rest = path[0], path[1:]
        ps = list(d.premises)
        ps[i] = _reduce_at(ps[i], rest, rule)
        if d.rule == "par":
            return par_i(ps[0], ps[1])
        return app(ps[0], ps[1:], d.alignment)
    ps = d.premises
    if rule in ("PlusL", "PlusR"):
        return ps[0]
    if rule == "BetaV":
        fun, arg = ps[0], ps[1]
        (body,) = fun.premises
        return substitute_derivation(body, fun.term.var, arg)
    if rule == "ParAppL":
        fun, args = ps[0], list(zip(d.alignment, ps[1:]))
        sides = []
        for half in fun.premises:
            blocks, chosen = [], []
            for c in half.type.comps:
                j = next(j for j, (b, _) in enumerate(args) if b == c)
                b, a = args.pop(j)
                blocks.append(b)
                chosen.append(a)
            sides.append(app(half, chosen, blocks))
        return par_i(*sides)
    if rule == "ParAppR":
        fun, arg = ps[0], ps[1]
        pool = list(d.alignment[0].arrows)
        blocks = []
        for half in arg.premises:
            picked = []
            for c in half.type.comps:
                j = next(j for j, a in enumerate(pool) if a.dom == c)
                picked.append(pool.pop(j))
            blocks.append(Comp(tuple(picked)))
        funs = split_value_derivation(fun, blocks)
        return par_i(*(app(f, [h], [b]) for f, h, b in zip(funs, arg.premises, blocks)))
    raise ValueError(f"unknown rule {rule}")


def guided_run(d: Derivation, max_steps: int = 10_000) -> Trace:
    """Reduce along ``d`` until a parallel composition of values is reached."""
    trace = Trace(d.term)
    while parallel_values(d.term) is None:
        if len(trace) >= max_steps:
            raise RuntimeError("guided run exceeded max_steps")
        lab, n, d = guided_step(d)
        trace.steps.append((lab, d.term))
    return trace


# -- subject expansion ------------------------------------------------------


def expand_step(d: Derivation, m: Term, label: StepLabel) -> Derivation:
    """From ``D |- N : a`` and a step ``m -> N`` build ``D |- m : a`` (measure + 1)."""
    n = apply_step(m, label)
    d = retarget(d, n)
    return retarget(_expand_at(d, m, label.path, label.rule), m)


def _expand_at(d: Derivation, m: Term, path: Sequence[int], rule: str) -> Derivation:
    if path:
        i, rest = path[0], path[1:]
        ps = list(d.premises)
        if isinstance(m, Par):
            ps[i] = _expand_at(ps[i], m.left if i == 0 else m.right, rest, rule)
            return par_i(ps[0], ps[1])
        if i == 1 and len(ps) != 2:
            raise DerivationError("argument position typed more than once")
        ps[i] = _expand_at(ps[i], m.fun if i == 0 else m.arg, rest, rule)
        return app(ps[0], ps[1:], d.alignment)
    if rule == "PlusL":
        return plus_l(d, m.right)
    if rule == "PlusR":
        return plus_r(m.left, d)
    if rule == "ParAppL":
        e1, e2 = d.premises
        return app(par_i(e1.premises[0], e2.premises[0]), e1.premises[1:] + e2.premises[1:], e1.alignment + e2.alignment)
    if rule == "ParAppR":
        e1, e2 = d.premises
        fun = join_value_derivations([e1.premises[0], e2.premises[0]])
        block = tensor(e1.alignment[0], e2.alignment[0])
        return app(fun, [par_i(e1.premises[1], e2.premises[1])], [block])
    if rule == "BetaV":
        f, v = m.fun, m.arg
        d_body, d_val = antisubstitute(f.body, f.var, v, d)
        return app(lam(f.var, d_body.term, [d_body]), [d_val])
    raise ValueError(f"unknown rule {rule}")


def antisubstitute(b: Term, x: str, v: Term, d: Derivation) -> tuple[Derivation, Derivation]:
    """Split ``D |- b[v/x] : a`` into ``D', x:t |- b : a`` and ``G |- v : t``.

    ``d`` must type exactly the term ``substitute(b, x, v)``.  Measures add up.
    """
    if x not in free_vars(b):
        return d, unit_value(v)
    match b:
        case Var():
            return ax(x, d.type.single), d
        case Lam(y, body):
            if y in free_vars(v):
                new = fresh_name(y, free_vars(v) | all_names(body) | {x})
                body = rename_free(body, y, new)
                y = new
            pairs = [antisubstitute(body, x, v, p) for p in d.premises]
            d_b = lam(y, body, [p for p, _ in pairs])
            d_v = join_value_derivations([q for _, q in pairs]) if pairs else unit_value(v)
            return d_b, d_v
        case App(fun, arg):
            head = antisubstitute(fun, x, v, d.premises[0])
            args = [antisubstitute(arg, x, v, p) for p in d.premises[1:]]
            d_b = app(head[0], [p for p, _ in args], d.alignment)
            return d_b, join_value_derivations([head[1]] + [q for _, q in args])
        case Sum(left, right):
            if d.rule == "plusL":
                p, q = antisubstitute(left, x, v, d.premises[0])
                return plus_l(p, right), q
            p, q = antisubstitute(right, x, v, d.premises[0])
            return plus_r(left, p), q
        case Par(left, right):
            p1, q1 = antisubstitute(left, x, v, d.premises[0])
            p2, q2 = antisubstitute(right, x, v, d.premises[1])
            return par_i(p1, p2), join_value_derivations([q1, q2])
    raise TypeError(f"not a term: {b!r}")


def type_via_trace(trace: Trace) -> Derivation:
    """Type the start of a converging trace with ``1 % ... % 1``; measure = length."""
    if parallel_values(trace.end) is None:
        raise ValueError(f"trace ends in {print_term(trace.end)}, not a parallel composition of values")
    d = unit_parallel(trace.end)
    prev = [trace.start] + [n for _, n in trace.steps[:-1]]
    for m, (lab, _) in zip(reversed(prev), reversed(trace.steps)):
        d = expand_step(d, m, lab)
    check(d)
    return d
