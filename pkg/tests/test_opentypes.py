import pytest
from hypothesis import given
from hypothesis import strategies as st

from llv.opentypes import (
    UNIT,
    OArrow,
    OComp,
    OPar,
    groundings,
    lift,
    lift_par,
    lower,
    lower_par,
    match,
    otensor,
    resolve,
    row,
    rows_of,
    unify,
)
from llv.typesys import enumerate_comps, enumerate_types, parse_comp, parse_type, tensor

SMALL = list(enumerate_comps(3))


@given(st.sampled_from(SMALL))
def test_lift_lower_round_trip(c):
    assert lower(lift(c)) == c
    assert lift(c).ground and not rows_of(lift(c))


@pytest.mark.parametrize("t", list(enumerate_types(2)))
def test_par_lift_round_trip(t):
    assert lower_par(lift_par(t)) == t


def test_rows_read_as_unit_when_lowered():
    assert lower(otensor(lift(parse_comp("1 -o 1")), row(7))) == parse_comp("1 -o 1")


def test_empty_open_par_is_rejected():
    with pytest.raises(ValueError):
        OPar(())


def test_resolve_splices_row_bindings():
    a = lift(parse_comp("1 -o 1"))
    o = OComp((), (1, 2))
    got = resolve(o, {1: a, 2: OComp((), (3,)), 3: a})
    assert got == otensor(a, a)


def test_rows_inside_codomains():
    o = OComp((OArrow(UNIT, OPar((row(4),))),))
    assert rows_of(o) == {4}
    assert lower(resolve(o, {4: lift(parse_comp("1 -o 1"))})) == parse_comp("1 -o 1 -o 1")


@given(st.sampled_from(SMALL), st.sampled_from(SMALL))
def test_matching_a_split_target(a, b):
    # ?1 * ?2 against a * b: every solution tensors back to the target
    target = lift(tensor(a, b))
    sols = list(match(OComp((), (1, 2)), target, {}, 3))
    assert sols
    for th in sols:
        assert resolve(OComp((), (1, 2)), th) == target
    keys = {(th[1].key, th[2].key) for th in sols}
    assert len(keys) == len(sols)


def test_match_respects_fixed_structure():
    pattern = OComp((OArrow(row(1), lift_par(parse_type("1"))),))
    target = lift(parse_comp("(1 -o 1) -o 1"))
    [th] = list(match(pattern, target, {}, 3))
    assert lower(th[1]) == parse_comp("1 -o 1")
    assert list(match(pattern, lift(parse_comp("1 -o (1 % 1)")), {}, 3)) == []


def test_repeated_row_gets_equal_shares():
    target = lift(parse_comp("(1 -o 1) * (1 -o 1)"))
    sols = list(match(OComp((), (1, 1)), target, {}, 3))
    assert [lower(th[1]) for th in sols] == [parse_comp("1 -o 1")]
    assert list(match(OComp((), (1, 1)), lift(parse_comp("1 -o 1")), {}, 3)) == []


def test_unify_binds_bare_rows_with_occurs_check():
    t = otensor(lift(parse_comp("1 -o 1")), row(2))
    assert list(unify(row(1), t, {}, 2)) == [{1: t}]
    assert list(unify(row(2), t, {}, 2)) == []


def test_unify_grounds_open_sides_within_the_bound():
    a = otensor(lift(parse_comp("1 -o 1")), row(1))
    b = otensor(lift(parse_comp("1 -o 1")), row(2))
    sols = list(unify(a, b, {}, 1))
    assert sols and all(resolve(a, th) == resolve(b, th) for th in sols)


def test_groundings_cover_every_small_comp():
    gs = list(groundings([1, 2], {}, 1))
    assert len(gs) == len(list(enumerate_comps(1))) ** 2
    assert list(groundings([1], {1: UNIT}, 1)) == [{1: UNIT}]
