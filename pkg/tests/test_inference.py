import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llv.corpus import LENGTH_CASES, TYPED_BOUNDS, TYPED_EXAMPLES, UNTYPABLE, UNTYPABLE_BOUNDS, fig3_derivation
from llv.derivation import ax, check, measure, same_judgment, substitute_derivation, unit_parallel
from llv.enumerate import TermEnumerator, enumerate_terms
from llv.inference import (
    SearchBounds,
    Searcher,
    Trace,
    antisubstitute,
    expand_step,
    guided_run,
    guided_step,
    search,
    type_via_trace,
    typable,
    unit_measures,
    unit_typings,
)
from llv.reduction import StepLabel, converges, explore, parallel_values, reduction_lengths, step
from llv.syntax import Var, alpha_eq, free_vars, parse_term, substitute
from llv.typesys import EMPTY, ONE, Context, arrow, comp, par_unit, parse_type

SMALL = SearchBounds(max_type_size=2, max_depth=16, max_k=2)
CLOSED_5 = [t for t in enumerate_terms(TermEnumerator(5))]


def test_bounds_validation():
    with pytest.raises(ValueError):
        SearchBounds(max_type_size=-1)
    with pytest.raises(ValueError):
        SearchBounds(max_depth=0)
    SearchBounds(max_type_size=0)


# -- search -----------------------------------------------------------------


def test_typable_fig3(corpus):
    d = typable(corpus["Fig3"], SMALL)
    assert d.type == par_unit(2) and measure(d) == 5
    check(d)


@pytest.mark.parametrize("name", UNTYPABLE)
def test_untypable_terms(corpus, name):
    assert typable(corpus[name], UNTYPABLE_BOUNDS) is None
    assert converges(corpus[name]).diverges


@pytest.mark.parametrize("name,type_", TYPED_EXAMPLES)
def test_worked_example_types(corpus, name, type_):
    ds = search(EMPTY, corpus[name], parse_type(type_), TYPED_BOUNDS)
    assert ds
    for d in ds:
        assert check(d) == (EMPTY, corpus[name], parse_type(type_))


def test_open_terms_against_a_context():
    ctx = Context.of({"f": comp(arrow(ONE, ONE))})
    [d] = search(ctx, parse_term("f y"), parse_type("1"), SMALL)
    assert check(d)[0] == ctx and measure(d) == 1


def test_typable_requires_closed_terms():
    with pytest.raises(ValueError):
        typable(Var("x"))
    with pytest.raises(ValueError):
        unit_measures(parse_term(r"\x.x"), 0)


def test_searcher_is_reusable_and_deterministic(corpus):
    s = Searcher(SMALL)
    a = [m for m in s.results(EMPTY, corpus["XIXP"], par_unit(2))]
    b = Searcher(SMALL).results(EMPTY, corpus["XIXP"], par_unit(2))
    assert a == b == s.results(EMPTY, corpus["XIXP"], par_unit(2))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(CLOSED_5), st.sampled_from(list(parse_type(t) for t in ("1", "1 % 1", "1 -o 1", "(1 -o 1) -o 1"))))
def test_every_search_result_checks(t, goal):
    for d in search(EMPTY, t, goal, SMALL):
        assert check(d) == (EMPTY, t, goal)


@pytest.mark.parametrize("case", LENGTH_CASES, ids=lambda c: c.name)
def test_unit_measures_are_the_reduction_lengths(corpus, case):
    t = corpus[case.name]
    lengths = reduction_lengths(explore(t, case.max_steps, case.max_states), case.k)
    assert unit_measures(t, case.k, case.bounds) == lengths


def test_unit_typings_check_and_carry_their_measure(corpus):
    for d, m in unit_typings(corpus["SumDup"], 2, SMALL):
        check(d)
        assert measure(d) == m


# -- guided reduction and expansion -----------------------------------------


def test_guided_run_on_fig3(corpus):
    d = fig3_derivation()
    trace = guided_run(d)
    assert len(trace) == 5
    assert alpha_eq(trace.end, parse_term(r"I || \y.Omega", corpus))
    trace.replay()


def test_guided_step_decreases_measure_by_one():
    d = fig3_derivation()
    while parallel_values(d.term) is None:
        lab, n, e = guided_step(d)
        check(e)
        assert measure(e) == measure(d) - 1
        assert e.type == d.type and e.term == n
        d = e
    with pytest.raises(ValueError):
        guided_step(d)


def test_guided_step_follows_the_chosen_branch(corpus):
    [d] = [d for d, m in unit_typings(parse_term("I + Omega", corpus), 1, SMALL)]
    lab, n, _ = guided_step(d)
    assert lab == StepLabel("PlusL") and alpha_eq(n, corpus["I"])


def test_expand_then_reduce_round_trip():
    d = fig3_derivation()
    steps = []
    while parallel_values(d.term) is None:
        lab, n, e = guided_step(d)
        steps.append((d.term, lab, e))
        d = e
    for m, lab, e in reversed(steps):
        back = expand_step(e, m, lab)
        check(back)
        assert back.term == m and measure(back) == measure(e) + 1
        again = guided_step(back)[2]
        assert same_judgment(again, e) and measure(again) == measure(e)


def test_type_via_trace_gives_the_trace_length(corpus):
    t = corpus["XIXP"]
    path = []
    cur = t
    while parallel_values(cur) is None:
        lab, cur = step(cur)[-1]
        path.append((lab, cur))
    d = type_via_trace(Trace(t, path))
    assert d.type == par_unit(len(parallel_values(cur))) and measure(d) == len(path)


def test_type_via_trace_rejects_unfinished_traces(corpus):
    with pytest.raises(ValueError):
        type_via_trace(Trace(corpus["Omega"]))


def test_trace_json_round_trip():
    trace = guided_run(fig3_derivation())
    again = Trace.from_json(trace.to_json())
    assert again.to_json() == trace.to_json()


def test_antisubstitution_inverts_substitution():
    b, v = parse_term("x (x y)"), parse_term(r"\z.z")
    t = substitute(b, "x", v)
    d = search(Context.of({"y": comp(arrow(ONE, ONE))}), t, parse_type("1 -o 1"), SMALL)[0]
    d_b, d_v = antisubstitute(b, "x", v, d)
    check(d_b)
    check(d_v)
    assert measure(d_b) + measure(d_v) == measure(d)
    assert same_judgment(substitute_derivation(d_b, "x", d_v), d)


def test_antisubstitution_of_an_unused_variable():
    d = ax("y")
    d_b, d_v = antisubstitute(Var("y"), "x", parse_term(r"\z.z"), d)
    assert d_b is d and measure(d_v) == 0 and d_v.type == par_unit(1)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([t for t in CLOSED_5 if not free_vars(t)]))
def test_unit_typing_iff_parallel_normal_form(t):
    g = explore(t)
    for k in (1, 2):
        reach = {len(vs) for n, _ in g.normal_forms() if (vs := parallel_values(n)) is not None}
        assert bool(unit_measures(t, k, SMALL)) == (k in reach)
    d = unit_parallel(t) if parallel_values(t) is not None else None
    if d is not None:
        assert measure(d) == 0
