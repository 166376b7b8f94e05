"""Bounded relational interpretation and observational experiments.

The interpretation of a closed term is the set of types it can be given.
Here it is approximated by bounded search: every type of size at most the
bound that admits a derivation within the search bounds.  Observational
comparisons apply both terms to the same argument vectors from a finite
pool, so they only ever give one-sided evidence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .derivation import check
from .inference import SearchBounds, Searcher
from .reduction import converges, step
from .syntax import App, Lam, Term, Var, alpha_eq, free_vars, print_term
from .typesys import EMPTY, Comp, ParT, as_par, enumerate_types, print_type


@dataclass(frozen=True)
class InterpApprox:
    subject: Term
    bound: SearchBounds
    types: frozenset[ParT]

    def __contains__(self, t: ParT | Comp) -> bool:
        return as_par(t) in self.types

    def sorted_types(self) -> list[ParT]:
        return sorted(self.types, key=lambda t: (_size_key(t), t.key))

    def to_json(self) -> dict:
        return {
            "term": print_term(self.subject),
            "bound": _bounds_json(self.bound),
            "types": [print_type(t) for t in self.sorted_types()],
        }


def _size_key(t: ParT) -> int:
    from .typesys import type_size

    return type_size(t)


def _bounds_json(b: SearchBounds) -> dict:
    return {"max_type_size": b.max_type_size, "max_depth": b.max_depth, "max_k": b.max_k, "max_results": b.max_results}


def interp_bounds(type_size: int) -> SearchBounds:
    """The search bounds used for an interpretation up to ``type_size``."""
    return SearchBounds(max_type_size=type_size, max_depth=32, max_k=2)


def interp(m: Term, b: SearchBounds | int, searcher: Searcher | None = None) -> InterpApprox:
    """Every type of size at most the bound that ``m`` can be given, each one checked."""
    if free_vars(m):
        raise ValueError(f"interp expects a closed term: {print_term(m)}")
    if isinstance(b, int):
        b = interp_bounds(b)
    s = searcher or Searcher(b)
    found = set()
    for goal in enumerate_types(b.max_type_size):
        sols = s.solutions(EMPTY, m, goal)
        if not sols:
            continue
        d = next(s.derivations(EMPTY, m, goal, next(iter(sols))))
        check(d)
        found.add(goal)
    return InterpApprox(m, b, frozenset(found))


# -- the ogre ---------------------------------------------------------------


def is_ogre_type(t: ParT | Comp) -> bool:
    """True for a single computational type whose arrows all have domain 1 and ogre codomains."""
    t = as_par(t)
    c = t.single
    if c is None:
        return False
    return all(a.dom.is_unit and is_ogre_type(a.cod) for a in c.arrows)


def ogre_types(bound: int) -> frozenset[ParT]:
    return frozenset(t for t in enumerate_types(bound) if is_ogre_type(t))


def ogre() -> Term:
    """``Y* = D D`` with ``D = \\x y.x x``."""
    d = Lam("x", Lam("y", App(Var("x"), Var("x"))))
    return App(d, d)


def check_ogre_unfolding(fuel: int = 200, arity: int = 3, pool: Sequence[Term] = ()) -> bool:
    """The ogre has exactly one reduct, itself under an abstraction, and absorbs arguments."""
    y = ogre()
    steps = step(y)
    if len(steps) != 1 or steps[0][0].rule != "BetaV":
        return False
    reduct = steps[0][1]
    if not (isinstance(reduct, Lam) and alpha_eq(reduct.body, y) and reduct.var not in free_vars(y)):
        return False
    args = list(pool) or [Lam("x", Var("x"))]
    for combo in itertools.product(args, repeat=arity):
        t = y
        for a in combo:
            t = App(t, a)
        if not converges(t, max_steps=fuel).converges:
            return False
    return True


# -- observational experiments ----------------------------------------------


@dataclass(frozen=True)
class SeparationReport:
    """Outcome of testing ``left <= right`` against argument vectors from ``pool``.

    ``Separated`` means the witness arguments make ``left`` converge and
    ``right`` definitely diverge; ``direction`` records this orientation.
    """

    pair: tuple[Term, Term]
    pool: tuple[Term, ...]
    max_args: int
    verdict: str  # "Separated" | "NotSeparatedWithinBounds"
    witness: tuple[Term, ...] | None = None
    direction: str | None = None
    tried: int = 0
    unknown: int = 0

    @property
    def separated(self) -> bool:
        return self.verdict == "Separated"

    def to_json(self) -> dict:
        out = {
            "pair": [print_term(t) for t in self.pair],
            "pool": [print_term(t) for t in self.pool],
            "max_args": self.max_args,
            "verdict": self.verdict,
            "tried": self.tried,
            "unknown": self.unknown,
        }
        if self.separated:
            out["witness"] = [print_term(t) for t in self.witness]
            out["direction"] = self.direction
        return out


def apply_all(m: Term, args: Iterable[Term]) -> Term:
    for a in args:
        m = App(m, a)
    return m


def arg_vectors(pool: Sequence[Term], max_args: int) -> Iterable[tuple[Term, ...]]:
    for n in range(max_args + 1):
        yield from itertools.product(pool, repeat=n)


def obs_check(
    m: Term,
    n: Term,
    max_args: int = 2,
    arg_pool: Sequence[Term] | None = None,
    fuel: tuple[int, int] = (200, 5000),
) -> SeparationReport:
    """Look for arguments under which ``m`` converges while ``n`` provably diverges."""
    for t in (m, n):
        if free_vars(t):
            raise ValueError(f"obs_check expects closed terms: {print_term(t)}")
    pool = tuple(default_pool() if arg_pool is None else arg_pool)
    for t in pool:
        if free_vars(t):
            raise ValueError(f"argument pool holds an open term: {print_term(t)}")
    max_steps, max_states = fuel
    tried = unknown = 0
    for args in arg_vectors(pool, max_args):
        tried += 1
        vm = converges(apply_all(m, args), max_steps, max_states)
        if not vm.converges:
            unknown += vm.status == "Unknown"
            continue
        vn = converges(apply_all(n, args), max_steps, max_states)
        if vn.diverges:
            return SeparationReport((m, n), pool, max_args, "Separated", args, "left converges, right diverges", tried, unknown)
        unknown += vn.status == "Unknown"
    return SeparationReport((m, n), pool, max_args, "NotSeparatedWithinBounds", tried=tried, unknown=unknown)


def default_pool() -> tuple[Term, ...]:
    from .corpus import OBS_POOL, term

    return tuple(term(s) for s in OBS_POOL)


@dataclass(frozen=True)
class AdequacyResult:
    ok: bool
    included: bool
    report: SeparationReport | None = None
    missing: tuple[ParT, ...] = field(default=())


def adequacy_check(
    m: Term,
    n: Term,
    b: SearchBounds | int = 3,
    max_args: int = 2,
    arg_pool: Sequence[Term] | None = None,
    fuel: tuple[int, int] = (200, 5000),
    interps: dict | None = None,
) -> AdequacyResult:
    """Fails only on a counterexample: bounded inclusion of interpretations yet ``m`` separated from ``n``.

    ``interps`` may cache interpretations across calls, keyed by term.
    """
    cache = {} if interps is None else interps

    def get(t: Term) -> InterpApprox:
        if t not in cache:
            cache[t] = interp(t, b)
        return cache[t]

    im, in_ = get(m), get(n)
    missing = tuple(sorted(im.types - in_.types, key=lambda t: t.key))
    if missing:
        return AdequacyResult(True, False, None, missing)
    report = obs_check(m, n, max_args, arg_pool, fuel)
    return AdequacyResult(not report.separated, True, report)
