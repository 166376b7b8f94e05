import pytest

from llv.enumerate import FREE, TermEnumerator, binder_name, count_terms, enumerate_terms, terms_of_size
from llv.reduction import parallel_values, step
from llv.syntax import App, Lam, Par, Sum, Var, canonical, free_vars, print_term, size


def naive(n, names):
    """Every named term of size ``n`` over ``names``, duplicates included."""
    if n == 1:
        return [Var(x) for x in names]
    out = [Lam(x, b) for x in names for b in naive(n - 1, names)]
    for k in range(1, n - 1):
        for a in naive(k, names):
            for b in naive(n - 1 - k, names):
                out += [App(a, b), Sum(a, b), Par(a, b)]
    return out


@pytest.mark.parametrize("n", range(1, 6))
def test_closed_terms_match_naive_alpha_classes(n):
    # three names suffice below size 6: no closed term that small needs four binders at once
    oracle = {canonical(t) for t in naive(n, "xyz") if not free_vars(t)}
    ours = [canonical(t) for t in terms_of_size(n)]
    assert len(ours) == len(set(ours))
    assert set(ours) == oracle


@pytest.mark.parametrize("n", range(1, 5))
def test_open_terms_match_naive_alpha_classes(n):
    oracle = {canonical(t) for t in naive(n, "xyab") if free_vars(t) <= {"a", "b"}}
    ours = {canonical(t) for t in terms_of_size(n, closed=False, free_vars=2)}
    assert ours == oracle


def test_counts_agree_with_the_recursive_count():
    for n in range(1, 10):
        assert count_terms(n, 0) == sum(1 for _ in terms_of_size(n))
    assert sum(count_terms(n, 0) for n in range(1, 7)) == 168


def test_size_two_closed_is_the_identity_only():
    assert [print_term(t) for t in enumerate_terms(TermEnumerator(2))] == [r"\x.x"]


def test_enumeration_is_ordered_by_size_and_deterministic():
    a = list(enumerate_terms(TermEnumerator(5)))
    assert a == list(enumerate_terms(TermEnumerator(5)))
    assert [size(t) for t in a] == sorted(size(t) for t in a)


def test_closed_terms_make_progress():
    for t in enumerate_terms(TermEnumerator(7)):
        assert parallel_values(t) is not None or step(t)


def test_binder_names():
    assert [binder_name(i) for i in range(3)] == ["x", "y", "z"]
    assert binder_name(10) == "x10"
    assert not set(FREE) & {binder_name(i) for i in range(20)}


def test_enumerator_validation():
    with pytest.raises(ValueError):
        TermEnumerator(-1)
    with pytest.raises(ValueError):
        TermEnumerator(3, free_vars=len(FREE) + 1, closed=False)
    assert TermEnumerator(3, free_vars=2).free_names == ()
