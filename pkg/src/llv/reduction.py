"""Lazy call-by-value reduction with choice and parallel composition.

Single steps follow the five axiom rules (beta on values, the two choice
projections, and distribution of application over ``||`` on either side)
closed under the contextual rules: both sides of ``||``, the function
position of an application unless it is a ``||``, and the argument position
when the function is a value and the argument is not a ``||``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from .syntax import App, Lam, Par, Sum, Term, canonical, free_vars, is_value, print_term, substitute

RULES = ("BetaV", "PlusL", "PlusR", "ParAppL", "ParAppR")


@dataclass(frozen=True)
class StepLabel:
    rule: str
    path: tuple[int, ...] = ()

    def __str__(self) -> str:
        where = "".join(map(str, self.path)) or "root"
        return f"{self.rule}@{where}"


def _root_steps(m: Term) -> list[tuple[str, Term]]:
    match m:
        case Sum(a, b):
            return [("PlusL", a), ("PlusR", b)]
        case App(Par(a, b), p):
            return [("ParAppL", Par(App(a, p), App(b, p)))]
        case App(Lam(x, body), v) if is_value(v):
            return [("BetaV", substitute(body, x, v))]
        case App(f, Par(a, b)) if is_value(f):
            return [("ParAppR", Par(App(f, a), App(f, b)))]
    return []


def step(m: Term) -> list[tuple[StepLabel, Term]]:
    """All one-step reducts, leftmost-outermost first."""
    out = [(StepLabel(rule), n) for rule, n in _root_steps(m)]
    match m:
        case Par(a, b):
            out += [(StepLabel(lab.rule, (0,) + lab.path), Par(n, b)) for lab, n in step(a)]
            out += [(StepLabel(lab.rule, (1,) + lab.path), Par(a, n)) for lab, n in step(b)]
        case App(f, a):
            if not isinstance(f, Par):
                out += [(StepLabel(lab.rule, (0,) + lab.path), App(n, a)) for lab, n in step(f)]
            if is_value(f) and not isinstance(a, Par):
                out += [(StepLabel(lab.rule, (1,) + lab.path), App(f, n)) for lab, n in step(a)]
    return out


def apply_step(m: Term, label: StepLabel) -> Term:
    """Replay a labelled step; raises ``ValueError`` if it does not apply."""
    for lab, n in step(m):
        if lab == label:
            return n
    raise ValueError(f"step {label} does not apply to {print_term(m)}")


def is_normal(m: Term) -> bool:
    return not step(m)


def parallel_values(m: Term) -> list[Term] | None:
    if is_value(m):
        return [m]
    if isinstance(m, Par):
        left = parallel_values(m.left)
        right = parallel_values(m.right)
        if left is not None and right is not None:
            return left + right
    return None


@dataclass
class ReductionGraph:
    root: Term
    nodes: list[Term] = field(default_factory=list)
    layer: list[int] = field(default_factory=list)
    edges: list[tuple[int, StepLabel, int]] = field(default_factory=list)
    index: dict[tuple, int] = field(default_factory=dict)
    frontier: list[int] = field(default_factory=list)
    exhausted: bool = False
    fuel_hit: bool = False

    def node_id(self, t: Term) -> int | None:
        return self.index.get(canonical(t))

    def successors(self, i: int) -> list[int]:
        return [dst for src, _, dst in self.edges if src == i]

    def normal_ids(self) -> list[int]:
        expanded = set(range(len(self.nodes))) - set(self.frontier)
        has_out = {src for src, _, _ in self.edges}
        return [i for i in sorted(expanded) if i not in has_out]

    def normal_forms(self) -> list[tuple[Term, int]]:
        return [(self.nodes[i], self.layer[i]) for i in self.normal_ids()]

    def to_json(self) -> dict:
        normal = set(self.normal_ids())
        return {
            "nodes": [
                {"id": i, "term": print_term(t), "normal": i in normal, "layer": self.layer[i]}
                for i, t in enumerate(self.nodes)
            ],
            "edges": [
                {"src": s, "rule": lab.rule, "path": list(lab.path), "dst": d}
                for s, lab, d in self.edges
            ],
            "exhausted": self.exhausted,
        }


def explore(m: Term, max_steps: int = 200, max_states: int = 10000) -> ReductionGraph:
    """Breadth-first exploration of the reduction graph, states up to alpha."""
    if max_steps < 1 or max_states < 1:
        raise ValueError("bounds must be positive")
    g = ReductionGraph(root=m)
    g.nodes.append(m)
    g.layer.append(0)
    g.index[canonical(m)] = 0
    queue = deque([0])
    while queue:
        i = queue[0]
        if g.layer[i] >= max_steps:
            break
        reducts = step(g.nodes[i])
        new = [n for _, n in reducts if canonical(n) not in g.index]
        if len({canonical(n) for n in new}) + len(g.nodes) > max_states:
            break
        queue.popleft()
        for lab, n in reducts:
            key = canonical(n)
            j = g.index.get(key)
            if j is None:
                j = len(g.nodes)
                g.index[key] = j
                g.nodes.append(n)
                g.layer.append(g.layer[i] + 1)
                queue.append(j)
            g.edges.append((i, lab, j))
    g.frontier = list(queue)
    g.exhausted = not queue
    g.fuel_hit = bool(queue)
    return g


@dataclass(frozen=True)
class Verdict:
    status: str  # "Converges" | "Diverges" | "Unknown"
    normal_forms: tuple[tuple[Term, int], ...] = ()

    @property
    def converges(self) -> bool:
        return self.status == "Converges"

    @property
    def diverges(self) -> bool:
        return self.status == "Diverges"

    def __str__(self) -> str:
        if self.status != "Converges":
            return self.status
        inner = ", ".join(f"({print_term(t)}, {n})" for t, n in self.normal_forms)
        return f"Converges([{inner}])"


def converges(m: Term, max_steps: int = 200, max_states: int = 10000) -> Verdict:
    if free_vars(m):
        raise ValueError(f"converges expects a closed term: {print_term(m)}")
    g = explore(m, max_steps, max_states)
    nfs = tuple(g.normal_forms())
    if nfs:
        return Verdict("Converges", nfs)
    return Verdict("Diverges" if g.exhausted else "Unknown")


def reduction_lengths(g: ReductionGraph, k: int | None = None) -> set[int]:
    """Lengths of all reduction paths from the root to a parallel of ``k`` values.

    Requires an exhausted graph in which no cycle can reach such a normal form
    (otherwise the set is infinite and ``ValueError`` is raised).
    """
    if not g.exhausted:
        raise ValueError("graph not exhausted")
    succ: dict[int, list[int]] = {}
    for s, _, d in g.edges:
        succ.setdefault(s, []).append(d)

    def target(i: int) -> bool:
        vs = parallel_values(g.nodes[i])
        return vs is not None and (k is None or len(vs) == k)

    memo: dict[int, frozenset[int]] = {}
    on_stack: set[int] = set()

    def lengths(i: int) -> frozenset[int]:
        if i in memo:
            return memo[i]
        if i in on_stack:
            return frozenset()
        on_stack.add(i)
        out = {0} if target(i) else set()
        for j in succ.get(i, ()):
            out |= {n + 1 for n in lengths(j)}
        on_stack.discard(i)
        memo[i] = frozenset(out)
        return memo[i]

    result = lengths(0)
    # any cycle through a node that reaches a target makes the set infinite
    reaching = {i for i, ls in memo.items() if ls}
    for s, _, d in g.edges:
        if s in reaching and d in reaching and _reaches(succ, d, s):
            raise ValueError("a cycle reaches a normal form; infinitely many lengths")
    return set(result)


def _reaches(succ: dict[int, list[int]], a: int, b: int) -> bool:
    seen = {a}
    todo = [a]
    while todo:
        i = todo.pop()
        if i == b:
            return True
        for j in succ.get(i, ()):
            if j not in seen:
                seen.add(j)
                todo.append(j)
    return False


def iter_paths(m: Term, depth: int) -> Iterator[list[tuple[StepLabel, Term]]]:
    """Every reduction sequence from ``m`` of length at most ``depth``."""
    yield []
    if depth == 0:
        return
    for lab, n in step(m):
        for rest in iter_paths(n, depth - 1):
            yield [(lab, n)] + rest
