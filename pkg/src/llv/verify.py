"""Executable checks of the calculus' main claims, grouped into suites.

Each criterion returns a pass/fail status with a one-line explanation and is
timed against its own limit.  ``run_suite`` runs a suite in criterion order.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from typing import Callable

from .corpus import (
    ADEQUACY_BOUND,
    LENGTH_CASES,
    OBS_FUEL,
    OGRE_BOUND,
    TYPED_BOUNDS,
    TYPED_EXAMPLES,
    UNTYPABLE,
    UNTYPABLE_BOUNDS,
    WITNESS_TYPE,
    Corpus,
    fig3_derivation,
    load_corpus,
    term,
)
from .derivation import (
    Derivation,
    check,
    join_value_derivations,
    measure,
    nodes,
    same_judgment,
    split_value_derivation,
    substitute_derivation,
)
from .enumerate import TermEnumerator, count_terms, enumerate_terms, terms_of_size
from .inference import SearchBounds, Searcher, expand_step, guided_run, guided_step, typable, unit_measures
from .reduction import converges, explore, parallel_values, reduction_lengths, step
from .semantics import adequacy_check, check_ogre_unfolding, default_pool, interp, obs_check, ogre, ogre_types
from .syntax import alpha_eq, canonical, free_vars, is_value, print_term
from .typesys import EMPTY, Context, ParT, comp_size, enumerate_comps, enumerate_types, parse_type, split_comp


@dataclass(frozen=True)
class CriterionResult:
    id: str
    title: str
    status: str  # "pass" | "fail" | "skipped"
    details: str
    seconds: float
    limit: float

    @property
    def ok(self) -> bool:
        return self.status != "fail"

    def line(self) -> str:
        return f"{self.id} {self.status.upper():4} {self.seconds:7.2f}s  {self.title}: {self.details}"

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "status": self.status,
            "details": self.details,
            "limit_seconds": self.limit,
        }


@dataclass(frozen=True)
class SuiteResult:
    name: str
    results: tuple[CriterionResult, ...]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def render(self) -> str:
        lines = [r.line() for r in self.results]
        passed = sum(r.status == "pass" for r in self.results)
        lines.append(f"suite {self.name}: {passed}/{len(self.results)} passed")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {"suite": self.name, "ok": self.ok, "results": [r.to_json() for r in self.results]}


class Failure(Exception):
    pass


def _expect(cond: bool, message: str) -> None:
    if not cond:
        raise Failure(message)


@dataclass(frozen=True)
class Options:
    corpus: Corpus
    size: int | None = None
    seed: int = 0


# -- criteria ---------------------------------------------------------------


def worked_derivation(opts: Options) -> str:
    c = opts.corpus
    pi = fig3_derivation()
    ctx, subject, ty = check(pi)
    _expect(not ctx and alpha_eq(subject, c["Fig3"]), f"judgment subject is {print_term(subject)}")
    _expect(ty == parse_type("1 % 1"), f"judgment type is {ty}")
    _expect(measure(pi) == 5, f"measure {measure(pi)}, expected 5")
    trace = guided_run(pi)
    trace.replay()
    end = term(r"I || \y.Omega", c)
    _expect(len(trace) == 5, f"guided run has {len(trace)} steps")
    _expect(alpha_eq(trace.end, end), f"guided run ends in {print_term(trace.end)}")
    _, _, pi2 = guided_step(pi)
    check(pi2)
    _expect(measure(pi2) == 4, f"one guided step gives measure {measure(pi2)}")
    return "measure 5, 5-step guided run to I || \\y.Omega, first step to measure 4"


def exact_lengths(opts: Options) -> str:
    c = opts.corpus
    out = []
    for case in LENGTH_CASES:
        g = explore(c[case.name], case.max_steps, case.max_states)
        _expect(g.exhausted, f"{case.name}: reduction graph not exhausted")
        lengths = reduction_lengths(g, case.k)
        measures = unit_measures(c[case.name], case.k, case.bounds)
        _expect(lengths == measures, f"{case.name}: lengths {sorted(lengths)} but measures {sorted(measures)}")
        out.append(f"{case.name}={sorted(lengths)}")
    return ", ".join(out)


def typability(opts: Options) -> str:
    c = opts.corpus
    s = Searcher(UNTYPABLE_BOUNDS)
    for name in UNTYPABLE:
        _expect(typable(c[name], searcher=s) is None, f"{name} is typable")
        v = converges(c[name])
        _expect(v.diverges, f"{name}: divergence not established ({v.status})")
    s = Searcher(TYPED_BOUNDS)
    for name, ty in TYPED_EXAMPLES:
        ds = s.search(EMPTY, c[name], parse_type(ty), limit=1)
        _expect(bool(ds), f"{name} not typed with {ty}")
        check(ds[0])
    return f"{len(UNTYPABLE)} untypable and divergent, {len(TYPED_EXAMPLES)} stated typings found"


def measure_clock(opts: Options) -> str:
    size = opts.size or 6
    bounds = SearchBounds(max_type_size=3, max_depth=8, max_k=3)
    s = Searcher(bounds)
    goals = [g for g in enumerate_types(bounds.max_type_size) if len(g.comps) <= bounds.max_k]
    typed = derivations = reductions = expansions = 0
    for t in enumerate_terms(TermEnumerator(size)):
        found = False
        reducts = step(t)
        for goal in goals:
            for d in s.search(EMPTY, t, goal):
                found = True
                derivations += 1
                reductions += _check_reduction_chain(d)
            if not s.results(EMPTY, t, goal):
                continue
            for lab, n in reducts:
                for dn in s.search(EMPTY, n, goal):
                    back = expand_step(dn, t, lab)
                    check(back)
                    _expect(measure(back) == measure(dn) + 1, f"expansion of {print_term(n)} to {print_term(t)} gives {measure(back)}")
                    lab2, _, again = guided_step(back)
                    _expect(measure(again) == measure(dn), f"reducing the expansion of {print_term(n)} gives {measure(again)}")
                    # the guided step may fire a different redex of t; compare only when it fires this one
                    if lab2 == lab:
                        _expect(same_judgment(again, dn), f"round trip through {print_term(t)} changes the judgment")
                    expansions += 1
        typed += found
    return f"{typed} typable terms of size <= {size}, {derivations} derivations, {reductions} reduction and {expansions} expansion steps"


def _check_reduction_chain(d: Derivation) -> int:
    count = 0
    while parallel_values(d.term) is None:
        lab, n, d2 = guided_step(d)
        check(d2)
        _expect(measure(d2) == measure(d) - 1, f"step {lab} on {print_term(d.term)} gives measure {measure(d2)}")
        back = expand_step(d2, d.term, lab)
        check(back)
        _expect(measure(back) == measure(d), f"expanding {lab} back gives measure {measure(back)}")
        _expect(same_judgment(back, d), f"round trip changes the judgment of {print_term(d.term)}")
        d = d2
        count += 1
    return count


def lemmas(opts: Options) -> str:
    s = Searcher(SearchBounds(max_type_size=3, max_depth=8, max_k=2))
    values = [t for t in enumerate_terms(TermEnumerator(6)) if is_value(t)]
    bodies = [t for t in enumerate_terms(TermEnumerator(5, free_vars=1, closed=False)) if free_vars(t) == {"a"}]
    value_ds = {tau: [d for v in values for d in s.search(EMPTY, v, ParT((tau,)), limit=4)] for tau in enumerate_comps(3)}
    rng = random.Random(opts.seed)
    subst_pairs = split_pairs = 0
    for tau, vds in value_ds.items():
        if not vds:
            continue
        if comp_size(tau) <= 2:
            for body in bodies:
                for alpha in enumerate_types(1):
                    for d1 in s.search(Context.of({"a": tau}), body, alpha, limit=2):
                        d2 = rng.choice(vds)
                        d3 = substitute_derivation(d1, "a", d2)
                        check(d3)
                        _expect(measure(d3) == measure(d1) + measure(d2), f"substitution into {print_term(body)} breaks additivity")
                        subst_pairs += 1
        if len(tau.arrows) < 2:
            continue
        for d in vds:
            for blocks in split_comp(tau, 2):
                pieces = split_value_derivation(d, blocks)
                for p in pieces:
                    check(p)
                _expect(sum(map(measure, pieces)) == measure(d), f"split of {print_term(d.term)} breaks additivity")
                joined = join_value_derivations(pieces)
                check(joined)
                _expect(same_judgment(joined, d) and measure(joined) == measure(d), "join does not undo split")
                split_pairs += 1
    _expect(subst_pairs >= 200, f"only {subst_pairs} substitution pairs")
    _expect(split_pairs >= 200, f"only {split_pairs} split/join pairs")
    return f"{subst_pairs} substitution pairs, {split_pairs} split/join pairs"


def reduction_claims(opts: Options) -> str:
    c = opts.corpus
    fs = converges(c["FS"])
    _expect(fs.converges and any(alpha_eq(n, c["I"]) for n, _ in fs.normal_forms), "FS does not reach I")
    fs2 = converges(c["FS'"])
    _expect(fs2.diverges, f"FS' is {fs2.status}")
    g = explore(c["SumDup"])
    nfs = {canonical(n) for n, _ in g.normal_forms()}
    _expect(g.exhausted and nfs == {canonical(term("I || Delta", c))}, "SumDup normal forms differ from {I || Delta}")
    a, b = explore(c["ChoiceApp"]), explore(c["ChoiceAppExpanded"])
    na = {canonical(n) for n, _ in a.normal_forms()}
    nb = {canonical(n) for n, _ in b.normal_forms()}
    _expect(a.exhausted and b.exhausted and na == nb, "choice application normal forms differ")
    return f"FS -> I, FS' diverges, SumDup -> I || Delta only, {len(na)} shared choice normal forms"


def semantics_claims(opts: Options) -> str:
    c = opts.corpus
    _expect(not interp(c["Omega"], OGRE_BOUND).types, "Omega has a type")
    witness = parse_type(WITNESS_TYPE)
    iy = interp(ogre(), OGRE_BOUND)
    _expect(witness in interp(c["I"], OGRE_BOUND), "the witness type is not a type of I")
    _expect(witness not in iy, "the witness type is a type of the ogre")
    for b in range(OGRE_BOUND + 1):
        _expect(interp(ogre(), b).types == ogre_types(b), f"ogre types at bound {b} differ from the characterization")
    report = obs_check(c["I"], ogre(), 2, default_pool(), OBS_FUEL)
    _expect(not report.separated, f"I separated from the ogre by {report.witness}")
    cache: dict = {}
    names = list(c)
    for x, y in itertools.product(names, repeat=2):
        r = adequacy_check(c[x], c[y], ADEQUACY_BOUND, 2, default_pool(), OBS_FUEL, cache)
        _expect(r.ok, f"adequacy fails for ({x}, {y})")
    return f"ogre types match up to size {OGRE_BOUND}; I <= ogre not refuted; adequacy on {len(names) ** 2} pairs"


def progress_and_values(opts: Options) -> str:
    size = 9
    total = 0
    for n in range(1, size + 1):
        for t in terms_of_size(n):
            _expect(parallel_values(t) is not None or bool(step(t)), f"{print_term(t)} is stuck")
            total += 1
    s = Searcher(SearchBounds(max_type_size=2, max_depth=8, max_k=2))
    checked = 0
    for t in enumerate_terms(TermEnumerator(5)):
        for goal in enumerate_types(2):
            for d in s.search(EMPTY, t, goal, limit=2):
                for sub in nodes(d):
                    if is_value(sub.term):
                        _expect(sub.type.single is not None, f"value {print_term(sub.term)} typed with {sub.type}")
                        checked += 1
    return f"progress on {total} closed terms of size <= {size}; {checked} value judgments computational"


def enumeration_count(opts: Options) -> str:
    for n in range(1, 7):
        terms = list(terms_of_size(n))
        _expect(len(terms) == count_terms(n, 0), f"size {n}: {len(terms)} terms, count says {count_terms(n, 0)}")
        _expect(len({canonical(t) for t in terms}) == len(terms), f"size {n}: alpha-duplicates")
    return "closed terms up to size 6 match the recursive count, no alpha-duplicates"


def ogre_unfolding(opts: Options) -> str:
    _expect(check_ogre_unfolding(arity=3, pool=default_pool()[:2]), "the ogre does not unfold to \\y.Ystar")
    return "single beta step to \\y.Ystar; absorbs 3 arguments"


def monotone_interp(opts: Options) -> str:
    c = opts.corpus
    for name, t in c.items():
        prev = frozenset()
        for b in range(4):
            cur = interp(t, b).types
            _expect(prev <= cur, f"{name}: interpretation shrinks at bound {b}")
            prev = cur
    return f"{len(c)} corpus terms, bounds 0..3"


def interp_iff_converges(opts: Options) -> str:
    c = opts.corpus
    for name, t in c.items():
        v = converges(t)
        _expect(v.status != "Unknown", f"{name}: convergence unknown")
        nonempty = bool(interp(t, 3).types)
        _expect(nonempty == v.converges, f"{name}: interpretation {'non-empty' if nonempty else 'empty'} but {v.status}")
    return f"{len(c)} corpus terms"


Check = tuple[str, str, float, Callable[[Options], str]]

CRITERIA: dict[str, Check] = {
    "C1": ("C1", "worked derivation", 1.0, worked_derivation),
    "C2": ("C2", "exact lengths", 60.0, exact_lengths),
    "C3": ("C3", "typability iff convergence", 30.0, typability),
    "C4": ("C4", "measure clock", 300.0, measure_clock),
    "C5": ("C5", "substitution and splitting", 120.0, lemmas),
    "C6": ("C6", "reduction claims", 30.0, reduction_claims),
    "C7": ("C7", "semantics", 300.0, semantics_claims),
    "C8": ("C8", "progress and values", 120.0, progress_and_values),
    "P1": ("P1", "enumeration count", 60.0, enumeration_count),
    "S1": ("S1", "ogre unfolding", 30.0, ogre_unfolding),
    "S2": ("S2", "monotone interpretations", 120.0, monotone_interp),
    "S3": ("S3", "interpretation iff convergence", 120.0, interp_iff_converges),
}

SUITES: dict[str, tuple[str, ...]] = {
    "paper": ("C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8"),
    "properties": ("C4", "C5", "C8", "P1"),
    "semantics": ("C7", "S1", "S2", "S3"),
}


def run_criterion(cid: str, opts: Options) -> CriterionResult:
    _, title, limit, fn = CRITERIA[cid]
    start = time.perf_counter()
    try:
        details = fn(opts)
        status = "pass"
    except Failure as e:
        details, status = str(e), "fail"
    except Exception as e:  # a crash is a failed check, reported as such
        details, status = f"{type(e).__name__}: {e}", "fail"
    elapsed = time.perf_counter() - start
    if status == "pass" and elapsed > limit:
        status, details = "fail", f"took {elapsed:.1f}s, limit {limit:.0f}s ({details})"
    return CriterionResult(cid, title, status, details, elapsed, limit)


def run_suite(name: str, size: int | None = None, seed: int = 0, corpus: Corpus | None = None) -> SuiteResult:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    opts = Options(load_corpus() if corpus is None else corpus, size, seed)
    return SuiteResult(name, tuple(run_criterion(cid, opts) for cid in SUITES[name]))
