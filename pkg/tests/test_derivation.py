import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llv.corpus import fig3_derivation
from llv.derivation import (
    Derivation,
    DerivationError,
    app,
    ax,
    check,
    from_json,
    is_valid,
    join_value_derivations,
    lam,
    measure,
    par_i,
    plus_l,
    plus_r,
    rename_free_derivation,
    retarget,
    same_judgment,
    split_value_derivation,
    substitute_derivation,
    to_json,
    unit_parallel,
    unit_value,
)
from llv.enumerate import TermEnumerator, enumerate_terms
from llv.inference import SearchBounds, Searcher
from llv.syntax import Lam, Var, is_value, parse_term, substitute
from llv.typesys import EMPTY, ONE, Context, arrow, comp, enumerate_comps, parse_comp, parse_type, split_comp, tensor

U = comp(arrow(ONE, ONE))


def p(text):
    return parse_term(text)


# -- construction and checking ----------------------------------------------


def test_identity_typed_with_unit_arrow():
    d = lam("x", Var("x"), [ax("x", ONE)])
    assert check(d) == (EMPTY, p(r"\x.x"), parse_type("1 -o 1"))
    assert measure(d) == 0


def test_application_measure_counts_arrows():
    # (\x.x) y with y:1 -- one block with one arrow: 2*1 - 1
    d = app(lam("x", Var("x"), [ax("x")]), [ax("y")])
    check(d)
    assert measure(d) == 1
    assert d.ctx == EMPTY  # y : 1 is dropped from the context


def test_plus_nodes_cost_one():
    d = plus_l(unit_value(p(r"\x.x")), Var("y"))
    assert measure(d) == 1
    d = plus_r(Var("y"), unit_value(p(r"\x.x")))
    assert check(d)[1] == p(r"y + \x.x")


def test_par_types_both_sides():
    d = par_i(unit_value(Var("x")), ax("y", U))
    assert check(d)[2] == parse_type("1 % (1 -o 1)")
    assert d.ctx == Context.of({"y": U})


def test_fig3_derivation_checks_with_measure_five():
    d = fig3_derivation()
    _, t, a = check(d)
    assert a == parse_type("1 % 1")
    assert measure(d) == 5


def node(rule, ctx, term, type_, premises=(), alignment=None):
    return Derivation(rule, ctx, p(term), parse_type(type_), tuple(premises), alignment)


@pytest.mark.parametrize(
    "bad",
    [
        node("ax", Context.of({"x": U}), "x", "1"),
        node("ax", EMPTY, "x y", "1"),
        node("lam", EMPTY, r"\x.x", "1 -o 1"),
        node("plusL", EMPTY, r"(\x.x) + y", "1", [node("lam", EMPTY, r"\y.y", "1")]),
        node("par", EMPTY, "x || y", "1", [ax("x"), ax("y")]),
        node("app", EMPTY, "x y", "1", [ax("x", U), ax("y")]),
        node("nope", EMPTY, "x", "1"),
    ],
)
def test_checker_rejects_broken_nodes(bad):
    with pytest.raises(DerivationError):
        check(bad)
    assert not is_valid(bad)


def test_errors_carry_the_node_path():
    broken = node("lam", EMPTY, r"\z.z", "1 -o 1")
    d = par_i(unit_value(Var("x")), broken)
    with pytest.raises(DerivationError) as e:
        check(d)
    assert e.value.path == (1,)
    assert "at 1:" in str(e.value)


def test_application_needs_matching_argument_type():
    principal = ax("f", parse_comp("(1 -o 1) -o 1"))
    with pytest.raises(DerivationError):
        check(app(principal, [ax("y")]))


# -- JSON -------------------------------------------------------------------


def test_json_round_trip():
    d = fig3_derivation()
    data = to_json(d)
    again = from_json(json.loads(json.dumps(data)))
    assert to_json(again) == data
    assert set(data) == {"rule", "judgment", "alignment", "premises"}
    assert set(data["judgment"]) == {"ctx", "term", "type"}


# -- renaming ---------------------------------------------------------------


def test_retarget_to_alpha_equivalent_subject():
    d = lam("x", Var("x"), [ax("x", U)])
    e = retarget(d, p(r"\w.w"))
    check(e)
    assert e.term == p(r"\w.w") and e.type == d.type
    with pytest.raises(DerivationError):
        retarget(d, p(r"\w.v"))


def test_rename_free_avoids_capture():
    # y free, renamed to the bound name x
    d = lam("x", p("y x"), [app(ax("y", comp(arrow(U, ONE))), [ax("x", U)])])
    e = rename_free_derivation(d, "y", "x")
    check(e)
    assert e.ctx == Context.of({"x": comp(arrow(U, ONE))})


# -- value lemmas -----------------------------------------------------------


def test_unit_parallel():
    d = unit_parallel(p(r"x || \y.y || z"))
    assert check(d)[2] == parse_type("1 % 1 % 1")
    assert measure(d) == 0
    with pytest.raises(DerivationError):
        unit_parallel(p("x y"))


SEARCH = Searcher(SearchBounds(max_type_size=3, max_depth=8, max_k=2))
VALUES = [t for t in enumerate_terms(TermEnumerator(5)) if is_value(t)]
TYPED_VALUES = [
    d for tau in enumerate_comps(3) if len(tau.arrows) >= 2 for v in VALUES for d in SEARCH.search(EMPTY, v, parse_type(str(tau)), limit=2)
]


def test_there_are_values_to_split():
    assert len(TYPED_VALUES) >= 20


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_split_then_join_is_identity(data):
    d = data.draw(st.sampled_from(TYPED_VALUES))
    blocks = data.draw(st.sampled_from(split_comp(d.type.single, 2)))
    pieces = split_value_derivation(d, blocks)
    for piece, block in zip(pieces, blocks):
        assert check(piece)[2].single == block
    assert sum(map(measure, pieces)) == measure(d)
    joined = join_value_derivations(pieces)
    assert same_judgment(joined, d) and measure(joined) == measure(d)


def test_split_rejects_wrong_blocks():
    d = lam("x", Var("x"), [ax("x", ONE)])
    with pytest.raises(DerivationError):
        split_value_derivation(d, [U, U])


def test_substitution_lemma_on_an_example():
    # a:1 -o 1 |- a y, then a := \x.x
    d1 = app(ax("a", U), [ax("y")])
    d2 = lam("x", Var("x"), [ax("x")])
    d3 = substitute_derivation(d1, "a", d2)
    check(d3)
    assert d3.term == substitute(d1.term, "a", d2.term)
    assert measure(d3) == measure(d1) + measure(d2)


def test_substitution_into_a_binder_renames():
    d1 = lam("y", p("a y"), [app(ax("a", U), [ax("y")])])
    with pytest.raises(DerivationError):
        substitute_derivation(d1, "a", unit_value(Lam("w", Var("y"))))  # context wants 1 -o 1
    # \y.a with a := \w.y must not capture y
    d2 = unit_value(Lam("w", Var("y")))
    d1 = lam("y", p("a"), [])
    d3 = substitute_derivation(d1, "a", d2)
    check(d3)
    assert d3.term.var != "y"


def test_substitution_needs_a_value():
    with pytest.raises(DerivationError):
        substitute_derivation(ax("a"), "a", app(ax("f", U), [ax("y")]))


def test_tensor_of_axioms_joins():
    j = join_value_derivations([ax("x", U), ax("x", U)])
    assert j.type.single == tensor(U, U)
