"""Exhaustive enumeration of terms by node count, one representative per alpha class.

Terms are generated nameless (a bound variable is an index into the binders
above it) and then named deterministically: the binder at depth ``d`` gets the
``d``-th name of ``BINDERS``.  Free variables, when allowed, come from a fixed
budget of names that never clash with binder names.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .syntax import App, Lam, Par, Sum, Term, Var

BINDERS = ("x", "y", "z", "w", "u", "v")
FREE = ("a", "b", "c", "d")


def binder_name(depth: int) -> str:
    if depth < len(BINDERS):
        return BINDERS[depth]
    return f"x{depth}"


@dataclass(frozen=True)
class TermEnumerator:
    """Terms of size at most ``max_size``; ``free_vars`` free names are available when not closed."""

    max_size: int
    free_vars: int = 0
    closed: bool = True

    def __post_init__(self):
        if self.max_size < 0 or self.free_vars < 0:
            raise ValueError("sizes must be non-negative")
        if self.free_vars > len(FREE):
            raise ValueError(f"at most {len(FREE)} free variables")

    @property
    def free_names(self) -> tuple[str, ...]:
        return () if self.closed else FREE[: self.free_vars]


def enumerate_terms(e: TermEnumerator) -> Iterator[Term]:
    """Every term of size 1..max_size, by size, in a fixed order."""
    free = e.free_names
    for n in range(1, e.max_size + 1):
        yield from _terms(n, 0, free)


def terms_of_size(n: int, closed: bool = True, free_vars: int = 0) -> Iterator[Term]:
    free = () if closed else FREE[:free_vars]
    return _terms(n, 0, free)


def _terms(n: int, depth: int, free: tuple[str, ...]) -> Iterator[Term]:
    if n == 1:
        for i in range(depth):
            yield Var(binder_name(i))
        for name in free:
            yield Var(name)
        return
    x = binder_name(depth)
    for body in _terms(n - 1, depth + 1, free):
        yield Lam(x, body)
    for k in range(1, n - 1):
        lefts = list(_terms(k, depth, free))
        rights = list(_terms(n - 1 - k, depth, free))
        for ctor in (App, Sum, Par):
            for a in lefts:
                for b in rights:
                    yield ctor(a, b)


@lru_cache(maxsize=None)
def count_terms(n: int, env: int) -> int:
    """Number of terms of size ``n`` over ``env`` available variables.

    An independent count: variables contribute ``env`` at size 1, an
    abstraction one more variable, and each of the three binary constructors
    a convolution over the split of the remaining size.
    """
    if n <= 0:
        return 0
    if n == 1:
        return env
    total = count_terms(n - 1, env + 1)
    total += 3 * sum(count_terms(k, env) * count_terms(n - 1 - k, env) for k in range(1, n - 1))
    return total
