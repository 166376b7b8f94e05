from collections import Counter
from math import comb, prod

import pytest
from hypothesis import given
from hypothesis import strategies as st

from llv.typesys import (
    EMPTY,
    ONE,
    Arrow,
    Comp,
    Context,
    ParT,
    TypeSyntaxError,
    arrow,
    as_par,
    comp,
    ctx_difference,
    encode_type,
    enumerate_comps,
    enumerate_types,
    multiset_partitions,
    par,
    par_unit,
    parse_comp,
    parse_type,
    print_type,
    split_comp,
    tensor,
    tensor_ctx,
    type_size,
)

U = comp(arrow(ONE, ONE))  # 1 -o 1


# -- a naive oracle for types up to size ------------------------------------
# Types are generated as ordered trees and then collapsed to a canonical
# nested-sorted form, so the count of distinct results is an independent
# count of types up to commutativity.


def naive_comps(n):
    """Ordered lists of arrows whose comp size is exactly ``n``."""
    if n == 0:
        return [()]
    out = []
    for first in range(1, n + 1):
        for a in naive_arrows(first):
            rest_budget = n - first - 1
            if rest_budget < 0:
                if first == n:
                    out.append((a,))
                continue
            for rest in naive_comps(rest_budget):
                if rest:
                    out.append((a,) + rest)
    return out


def naive_arrows(n):
    out = []
    for d in range(n):
        for dom in naive_comps(d):
            for cod in naive_pars(n - 1 - d):
                out.append(("arrow", dom, cod))
    return out


def naive_pars(n):
    out = [(c,) for c in naive_comps(n)]
    for first in range(n):
        for c in naive_comps(first):
            for rest in naive_pars(n - first - 1):
                out.append((c,) + rest)
    return out


def canon_comp(c):
    return tuple(sorted(canon_arrow(a) for a in c))


def canon_arrow(a):
    _, dom, cod = a
    return (canon_comp(dom), canon_par(cod))


def canon_par(p):
    return tuple(sorted(canon_comp(c) for c in p))


@pytest.mark.parametrize("n", range(5))
def test_enumeration_matches_naive_count(n):
    naive = {canon_par(p) for p in naive_pars(n)}
    ours = [t for t in enumerate_types(n) if type_size(t) == n]
    assert len(ours) == len(set(ours)) == len(naive)


def test_small_type_counts():
    assert [print_type(t) for t in enumerate_types(1)] == ["1", "1 % 1", "1 -o 1"]


# -- sizes and equality -----------------------------------------------------


def test_size_counts_binary_connectives():
    assert type_size(ONE) == 0
    assert type_size(par_unit(3)) == 2
    assert type_size(parse_type("(1 -o 1) -o (1 -o 1)")) == 3
    assert type_size(parse_type("(1 -o 1) * (1 -o 1)")) == 3


def test_tensor_and_par_are_commutative():
    a, b = parse_comp("1 -o 1"), parse_comp("(1 -o 1) -o 1")
    assert tensor(a, b) == tensor(b, a)
    assert par(a, b) == par(b, a)
    assert tensor(ONE, a) == a


def test_unit_is_neutral_for_tensor_only():
    assert parse_type("(1 -o 1) * 1") == parse_type("1 -o 1")
    assert parse_type("1 % 1") != parse_type("1")


def test_empty_par_is_rejected():
    with pytest.raises(TypeSyntaxError):
        ParT(())


# -- printing and parsing ---------------------------------------------------


@pytest.mark.parametrize("t", list(enumerate_types(4)))
def test_print_parse_round_trip(t):
    assert parse_type(print_type(t)) == t


def test_arrow_is_right_associative():
    assert parse_type("1 -o 1 -o 1") == parse_type("1 -o (1 -o 1)")


def test_unicode_connectives():
    assert parse_type("(1 ⊸ 1) ⊗ (1 ⊸ 1) ⅋ 1") == parse_type("(1 -o 1) * (1 -o 1) % 1")


@pytest.mark.parametrize("bad", ["", "(1 % 1) -o 1", "1 -o", "(1", "1 1", "2"])
def test_type_syntax_errors(bad):
    with pytest.raises(TypeSyntaxError):
        parse_type(bad)


def test_parse_comp_rejects_par():
    with pytest.raises(TypeSyntaxError):
        parse_comp("1 % 1")


# -- relational encoding ----------------------------------------------------


def test_encoding_is_injective_on_small_types():
    ts = list(enumerate_types(3))
    assert len({repr(encode_type(t)) for t in ts}) == len(ts)


def test_encoding_of_unit_is_the_singleton_of_the_empty_bag():
    assert repr(encode_type(ONE)) == "[[]]"


# -- contexts ---------------------------------------------------------------


def test_context_merges_and_drops_units():
    g = Context.of([("x", U), ("y", ONE), ("x", U)])
    assert g.names() == ["x"] and g["x"] == tensor(U, U)
    assert g["z"] == ONE


def test_context_difference():
    g = Context.of({"x": tensor(U, U)})
    assert ctx_difference(g, Context.of({"x": U})) == Context.of({"x": U})
    assert ctx_difference(EMPTY, g) is None
    assert tensor_ctx(EMPTY, g) == g


# -- splitting --------------------------------------------------------------

comps = st.sampled_from(list(enumerate_comps(4)))


@given(comps, st.integers(1, 3))
def test_split_comp_is_exhaustive_and_exact(c, n):
    splits = split_comp(c, n)
    counts = Counter(c.arrows)
    # each distinct arrow's copies are spread over n slots independently
    expected = prod(_compositions_count(k, n) for k in counts.values())
    assert len(splits) == len(set(splits)) == expected
    for parts in splits:
        assert len(parts) == n
        assert Comp(tuple(a for p in parts for a in p.arrows)) == c


def _compositions_count(k, n):
    return comb(k + n - 1, n - 1)


def test_split_rejects_zero_parts():
    with pytest.raises(ValueError):
        split_comp(ONE, 0)


def test_multiset_partitions_of_a_multiset():
    # partitions of {a, a, b}: {aab}, {aa}{b}, {ab}{a}, {a}{a}{b}
    assert len(multiset_partitions(("a", "a", "b"))) == 4
    assert multiset_partitions(()) == [[]]


def test_constructors():
    a = Arrow(ONE, par_unit(2))
    assert print_type(comp(a)) == "1 -o (1 % 1)"
    assert as_par(ONE) == par_unit(1)
