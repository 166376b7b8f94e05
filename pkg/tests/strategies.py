"""Hypothesis strategies shared by the test modules."""

from hypothesis import strategies as st

from llv.syntax import App, Lam, Par, Sum, Var

NAMES = ("x", "y", "z", "a")


def terms(names=NAMES, max_leaves=12):
    leaves = st.sampled_from(names).map(Var)
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.tuples(st.sampled_from(names), sub).map(lambda p: Lam(*p)),
            st.tuples(sub, sub).map(lambda p: App(*p)),
            st.tuples(sub, sub).map(lambda p: Sum(*p)),
            st.tuples(sub, sub).map(lambda p: Par(*p)),
        ),
        max_leaves=max_leaves,
    )


def values(names=NAMES):
    return st.one_of(st.sampled_from(names).map(Var), st.tuples(st.sampled_from(names), terms(names, 6)).map(lambda p: Lam(*p)))
