"""Typing derivations, the rule checker, the measure, and value-derivation lemmas.

Rules (``Derivation.rule``):

* ``ax``    -- ``x:t |- x:t``
* ``lam``   -- n >= 0 premises ``D_i, x:t_i |- M : a_i`` concluding
  ``(x) D_i |- \\x.M : (x)(t_i -o a_i)``
* ``app``   -- principal premise ``D |- M : A`` and k >= 1 argument premises;
  ``alignment`` lists the k non-empty tensor blocks of ``A`` in argument
  order, and argument ``i`` must have the par of the domains of block ``i``
* ``plusL`` / ``plusR`` -- keep one branch of a choice
* ``par``   -- type both sides of ``M || N`` and par the types
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .syntax import (
    App,
    Lam,
    Par,
    Sum,
    Term,
    Var,
    alpha_eq,
    all_names,
    free_vars,
    fresh_name,
    is_value,
    parse_term,
    print_term,
    rename_free,
    substitute,
)
from .typesys import (
    ONE,
    Arrow,
    Comp,
    Context,
    ParT,
    as_par,
    par,
    parse_comp,
    parse_type,
    print_type,
    tensor_all,
    tensor_ctx,
    tensor_ctxs,
)


class DerivationError(ValueError):
    def __init__(self, message: str, path: tuple[int, ...] = ()):
        self.path = path
        where = "/".join(map(str, path)) or "root"
        super().__init__(f"at {where}: {message}")


@dataclass(frozen=True, eq=False)
class Derivation:
    rule: str
    ctx: Context
    term: Term
    type: ParT
    premises: tuple["Derivation", ...] = ()
    alignment: tuple[Comp, ...] | None = None

    def judgment(self) -> tuple[Context, Term, ParT]:
        return self.ctx, self.term, self.type

    def __str__(self) -> str:
        return judgment_str(self)


def judgment_str(d: Derivation) -> str:
    return f"{d.ctx} |- {print_term(d.term)} : {print_type(d.type)}"


def same_judgment(a: Derivation, b: Derivation) -> bool:
    return a.ctx == b.ctx and a.type == b.type and alpha_eq(a.term, b.term)


# -- constructors (conclusions computed from premises) ----------------------


def ax(x: str, t: Comp = ONE) -> Derivation:
    return Derivation("ax", Context.of({x: t}), Var(x), as_par(t))


def lam(x: str, body: Term, premises: Sequence[Derivation] = ()) -> Derivation:
    arrows = []
    ctxs = []
    for p in premises:
        arrows.append(Arrow(p.ctx[x], p.type))
        ctxs.append(p.ctx.without(x))
    return Derivation("lam", tensor_ctxs(ctxs), Lam(x, body), as_par(Comp(tuple(arrows))), tuple(premises))


def app(principal: Derivation, args: Sequence[Derivation], alignment: Sequence[Comp] | None = None) -> Derivation:
    if alignment is None:
        alignment = principal.type.comps
    alignment = tuple(alignment)
    cods = [a.cod for block in alignment for a in block.arrows]
    if not cods:
        raise DerivationError("application with no arrows")
    ctx = tensor_ctxs([principal.ctx] + [a.ctx for a in args])
    arg_term = args[0].term if args else None
    return Derivation("app", ctx, App(principal.term, arg_term), par(*cods), (principal, *args), alignment)


def plus_l(d: Derivation, other: Term) -> Derivation:
    return Derivation("plusL", d.ctx, Sum(d.term, other), d.type, (d,))


def plus_r(other: Term, d: Derivation) -> Derivation:
    return Derivation("plusR", d.ctx, Sum(other, d.term), d.type, (d,))


def par_i(left: Derivation, right: Derivation) -> Derivation:
    return Derivation("par", tensor_ctx(left.ctx, right.ctx), Par(left.term, right.term), par(left.type, right.type), (left, right))


# -- checking ---------------------------------------------------------------


def check(d: Derivation, path: tuple[int, ...] = ()) -> tuple[Context, Term, ParT]:
    """Verify every node bottom-up; return the root judgment."""
    for i, p in enumerate(d.premises):
        check(p, path + (i,))
    err = _node_error(d)
    if err:
        raise DerivationError(err, path)
    return d.judgment()


def is_valid(d: Derivation) -> bool:
    try:
        check(d)
    except DerivationError:
        return False
    return True


def _node_error(d: Derivation) -> str | None:
    t, ps = d.term, d.premises
    if d.rule == "ax":
        if ps or not isinstance(t, Var):
            return "axiom must have no premises and a variable subject"
        c = d.type.single
        if c is None:
            return "axiom type must be computational"
        if d.ctx != Context.of({t.name: c}):
            return f"axiom context must be exactly {t.name}:{c}"
        return None
    if d.rule == "lam":
        if not isinstance(t, Lam):
            return "abstraction rule needs an abstraction subject"
        for p in ps:
            if p.term != t.body:
                return "premise subject is not the abstraction body"
        expected = lam(t.var, t.body, ps)
        if d.type != expected.type:
            return f"abstraction type should be {expected.type}, found {d.type}"
        if d.ctx != expected.ctx:
            return f"abstraction context should be {expected.ctx}, found {d.ctx}"
        if t.var in d.ctx.names():
            return f"binder {t.var} leaks into the conclusion context"
        return None
    if d.rule == "app":
        if not isinstance(t, App):
            return "application rule needs an application subject"
        if d.alignment is None:
            return "application node lacks alignment"
        k = len(d.alignment)
        if k == 0:
            return "application needs k >= 1 argument premises"
        if len(ps) != k + 1:
            return f"application with {k} blocks needs {k + 1} premises, found {len(ps)}"
        principal, args = ps[0], ps[1:]
        if principal.term != t.fun or any(a.term != t.arg for a in args):
            return "premise subjects do not match the application"
        for i, block in enumerate(d.alignment):
            if not block.arrows:
                return f"block {i} is empty (n_i must be >= 1)"
        if principal.type != ParT(d.alignment):
            return f"principal type {principal.type} is not the par of the alignment blocks"
        for i, (block, a) in enumerate(zip(d.alignment, args)):
            want = par(*(ar.dom for ar in block.arrows))
            if a.type != want:
                return f"argument {i} has type {a.type}, alignment needs {want}"
        want_type = par(*(ar.cod for block in d.alignment for ar in block.arrows))
        if d.type != want_type:
            return f"application type should be {want_type}, found {d.type}"
        want_ctx = tensor_ctxs(p.ctx for p in ps)
        if d.ctx != want_ctx:
            return f"context tensor mismatch: expected {want_ctx}, found {d.ctx}"
        return None
    if d.rule in ("plusL", "plusR"):
        if not isinstance(t, Sum) or len(ps) != 1:
            return "choice rule needs a sum subject and one premise"
        kept = t.left if d.rule == "plusL" else t.right
        if ps[0].term != kept:
            return "premise subject is not the kept branch"
        if ps[0].type != d.type or ps[0].ctx != d.ctx:
            return "choice rule must keep context and type"
        return None
    if d.rule == "par":
        if not isinstance(t, Par) or len(ps) != 2:
            return "parallel rule needs a parallel subject and two premises"
        if ps[0].term != t.left or ps[1].term != t.right:
            return "premise subjects do not match the parallel composition"
        if d.type != par(ps[0].type, ps[1].type):
            return "parallel type must be the par of the premise types"
        if d.ctx != tensor_ctxs([ps[0].ctx, ps[1].ctx]):
            return "context tensor mismatch"
        return None
    return f"unknown rule {d.rule!r}"


def measure(d: Derivation) -> int:
    own = 0
    if d.rule == "app":
        own = sum(2 * len(b.arrows) for b in d.alignment) - 1
    elif d.rule in ("plusL", "plusR"):
        own = 1
    return own + sum(measure(p) for p in d.premises)


def nodes(d: Derivation):
    yield d
    for p in d.premises:
        yield from nodes(p)


# -- renaming ---------------------------------------------------------------


def rename_free_derivation(d: Derivation, old: str, new: str) -> Derivation:
    """Rename the free variable ``old`` to ``new`` throughout ``d``."""
    if old == new or old not in free_vars(d.term):
        return d
    match d.rule:
        case "ax":
            return ax(new, d.type.single)
        case "lam":
            y, body = d.term.var, d.term.body
            ps = d.premises
            if y == new:
                fresh = fresh_name(y, all_names(d.term) | {new, old})
                ps = tuple(rename_free_derivation(p, y, fresh) for p in ps)
                body = rename_free(body, y, fresh)
                y = fresh
            ps = tuple(rename_free_derivation(p, old, new) for p in ps)
            return lam(y, rename_free(body, old, new), ps)
        case "app":
            ps = [rename_free_derivation(p, old, new) for p in d.premises]
            return app(ps[0], ps[1:], d.alignment)
        case "plusL":
            return plus_l(rename_free_derivation(d.premises[0], old, new), rename_free(d.term.right, old, new))
        case "plusR":
            return plus_r(rename_free(d.term.left, old, new), rename_free_derivation(d.premises[0], old, new))
        case "par":
            return par_i(*(rename_free_derivation(p, old, new) for p in d.premises))
    raise DerivationError(f"unknown rule {d.rule!r}")


def retarget(d: Derivation, target: Term) -> Derivation:
    """Rewrite bound names in ``d`` so its subject is exactly ``target``.

    ``target`` must be alpha-equivalent to the subject of ``d``.
    """
    if d.term == target:
        return d
    if not alpha_eq(d.term, target):
        raise DerivationError(f"{print_term(d.term)} is not alpha-equivalent to {print_term(target)}")
    match d.rule:
        case "ax":
            return d
        case "lam":
            y, z = d.term.var, target.var
            ps = d.premises
            if y != z:
                ps = tuple(rename_free_derivation(p, y, z) for p in ps)
            return lam(z, target.body, [retarget(p, target.body) for p in ps])
        case "app":
            principal = retarget(d.premises[0], target.fun)
            args = [retarget(a, target.arg) for a in d.premises[1:]]
            return app(principal, args, d.alignment)
        case "plusL":
            return plus_l(retarget(d.premises[0], target.left), target.right)
        case "plusR":
            return plus_r(target.left, retarget(d.premises[0], target.right))
        case "par":
            return par_i(retarget(d.premises[0], target.left), retarget(d.premises[1], target.right))
    raise DerivationError(f"unknown rule {d.rule!r}")


# -- value lemmas -----------------------------------------------------------


def unit_value(v: Term) -> Derivation:
    """``|- V : 1`` with measure 0 (axiom or an abstraction with no premises)."""
    match v:
        case Var(x):
            return ax(x, ONE)
        case Lam(x, body):
            return lam(x, body, ())
    raise DerivationError(f"{print_term(v)} is not a value")


def unit_parallel(m: Term) -> Derivation:
    """``|- V1 || ... || Vk : 1 % ... % 1`` following the shape of ``m``."""
    if is_value(m):
        return unit_value(m)
    if isinstance(m, Par):
        return par_i(unit_parallel(m.left), unit_parallel(m.right))
    raise DerivationError(f"{print_term(m)} is not a parallel composition of values")


def split_value_derivation(d: Derivation, blocks: Sequence[Comp]) -> list[Derivation]:
    """Split ``D |- V : (x) t_i`` into derivations ``D_i |- V : t_i``; measures add up."""
    if not is_value(d.term):
        raise DerivationError(f"cannot split: {print_term(d.term)} is not a value")
    whole = d.type.single
    if whole is None or tensor_all(blocks) != whole:
        raise DerivationError(f"blocks {[str(b) for b in blocks]} do not tensor to {d.type}")
    if d.rule == "ax":
        return [ax(d.term.name, b) for b in blocks]
    x = d.term.var
    pool = list(d.premises)
    out = []
    for block in blocks:
        chosen = []
        for a in block.arrows:
            for j, p in enumerate(pool):
                if p.ctx[x] == a.dom and p.type == a.cod:
                    chosen.append(pool.pop(j))
                    break
            else:
                raise DerivationError(f"no premise provides the arrow {a}")
        out.append(lam(x, d.term.body, chosen))
    return out


def join_value_derivations(ds: Sequence[Derivation]) -> Derivation:
    """Tensor derivations of the same value into one; measures add up."""
    if not ds:
        raise DerivationError("nothing to join")
    v = ds[0].term
    if not is_value(v):
        raise DerivationError(f"cannot join: {print_term(v)} is not a value")
    ds = [retarget(d, v) for d in ds]
    if isinstance(v, Var):
        return ax(v.name, tensor_all(d.type.single for d in ds))
    return lam(v.var, v.body, [p for d in ds for p in d.premises])


# -- substitution lemma -----------------------------------------------------


def substitute_derivation(d1: Derivation, x: str, d2: Derivation) -> Derivation:
    """From ``D, x:t |- M : a`` and ``G |- V : t`` build ``D (x) G |- M[V/x] : a``.

    The measure of the result is the sum of the two measures.
    """
    v = d2.term
    if not is_value(v):
        raise DerivationError(f"substituted term {print_term(v)} is not a value")
    tau = d2.type.single
    if tau != d1.ctx[x]:
        raise DerivationError(f"type mismatch at {x}: context has {d1.ctx[x]}, value has {d2.type}")
    return _subst(d1, x, d2, free_vars(v))


def _subst(d: Derivation, x: str, d2: Derivation, fv: frozenset[str]) -> Derivation:
    t = d.term
    if x not in free_vars(t):
        if d2.ctx or d2.type.single != ONE:
            raise DerivationError(f"{x} is unused but the value is typed {d2.type}")
        return d
    match d.rule:
        case "ax":
            return d2
        case "lam":
            y, body, ps = t.var, t.body, d.premises
            if y in fv:
                fresh = fresh_name(y, fv | all_names(t) | {x})
                ps = tuple(rename_free_derivation(p, y, fresh) for p in ps)
                body = rename_free(body, y, fresh)
                y = fresh
            pieces = split_value_derivation(d2, [p.ctx[x] for p in ps])
            new_ps = [_subst(p, x, piece, fv) for p, piece in zip(ps, pieces)]
            new_body = new_ps[0].term if new_ps else substitute(body, x, d2.term)
            return lam(y, new_body, new_ps)
        case "app":
            ps = d.premises
            pieces = split_value_derivation(d2, [p.ctx[x] for p in ps])
            new_ps = [_subst(p, x, piece, fv) for p, piece in zip(ps, pieces)]
            return app(new_ps[0], new_ps[1:], d.alignment)
        case "plusL":
            return plus_l(_subst(d.premises[0], x, d2, fv), substitute(t.right, x, d2.term))
        case "plusR":
            return plus_r(substitute(t.left, x, d2.term), _subst(d.premises[0], x, d2, fv))
        case "par":
            ps = d.premises
            pieces = split_value_derivation(d2, [p.ctx[x] for p in ps])
            return par_i(*(_subst(p, x, piece, fv) for p, piece in zip(ps, pieces)))
    raise DerivationError(f"unknown rule {d.rule!r}")


# -- JSON -------------------------------------------------------------------


def to_json(d: Derivation) -> dict:
    out = {
        "rule": d.rule,
        "judgment": {
            "ctx": [{"var": n, "type": print_type(c)} for n, c in d.ctx],
            "term": print_term(d.term),
            "type": print_type(d.type),
        },
    }
    if d.alignment is not None:
        out["alignment"] = [print_type(b) for b in d.alignment]
    out["premises"] = [to_json(p) for p in d.premises]
    return out


def from_json(data: dict, corpus=None) -> Derivation:
    """Load a derivation as written; nothing is trusted until ``check`` runs."""
    j = data["judgment"]
    ctx = Context.of((e["var"], parse_comp(e["type"])) for e in j["ctx"])
    alignment = None
    if "alignment" in data and data["alignment"] is not None:
        alignment = tuple(parse_comp(b) for b in data["alignment"])
    return Derivation(
        data["rule"],
        ctx,
        parse_term(j["term"], corpus),
        parse_type(j["type"]),
        tuple(from_json(p, corpus) for p in data.get("premises", [])),
        alignment,
    )

