"""Terms of the call-by-value lambda calculus with choice (+) and parallel (||).

Concrete syntax::

    term    := app ("+" app)*  |  app ("||" app)*
    app     := atom+ [lambda]  |  lambda
    lambda  := ("\\" | "λ") ident+ "." app-level body
    atom    := ident | "(" term ")"

A lambda body extends as far right as possible but stops at ``+`` and ``||``,
so ``\\k.D || D`` reads as ``(\\k.D) || D``.  Identifiers starting with an
upper-case letter are corpus references and are inlined at parse time; all
other identifiers are variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union


class ParseError(ValueError):
    """Raised on malformed concrete syntax; ``pos`` is a character offset."""

    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lam:
    var: str
    body: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Sum:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Par:
    left: "Term"
    right: "Term"


Term = Union[Var, Lam, App, Sum, Par]


def is_value(t: Term) -> bool:
    return isinstance(t, (Var, Lam))


def free_vars(t: Term) -> frozenset[str]:
    match t:
        case Var(name):
            return frozenset((name,))
        case Lam(var, body):
            return free_vars(body) - {var}
        case App(a, b) | Sum(a, b) | Par(a, b):
            return free_vars(a) | free_vars(b)
    raise TypeError(f"not a term: {t!r}")


def all_names(t: Term) -> set[str]:
    """Every variable name occurring in ``t``, bound or free."""
    match t:
        case Var(name):
            return {name}
        case Lam(var, body):
            return {var} | all_names(body)
        case App(a, b) | Sum(a, b) | Par(a, b):
            return all_names(a) | all_names(b)
    raise TypeError(f"not a term: {t!r}")


def size(t: Term) -> int:
    """Node count."""
    match t:
        case Var():
            return 1
        case Lam(_, body):
            return 1 + size(body)
        case App(a, b) | Sum(a, b) | Par(a, b):
            return 1 + size(a) + size(b)
    raise TypeError(f"not a term: {t!r}")


def height(t: Term) -> int:
    match t:
        case Var():
            return 1
        case Lam(_, body):
            return 1 + height(body)
        case App(a, b) | Sum(a, b) | Par(a, b):
            return 1 + max(height(a), height(b))
    raise TypeError(f"not a term: {t!r}")


def canonical(t: Term, env: tuple[str, ...] = ()) -> tuple:
    """Nameless key: two terms are alpha-equivalent iff their keys are equal."""
    match t:
        case Var(name):
            for i in range(len(env) - 1, -1, -1):
                if env[i] == name:
                    return ("b", len(env) - 1 - i)
            return ("f", name)
        case Lam(var, body):
            return ("lam", canonical(body, env + (var,)))
        case App(a, b):
            return ("app", canonical(a, env), canonical(b, env))
        case Sum(a, b):
            return ("sum", canonical(a, env), canonical(b, env))
        case Par(a, b):
            return ("par", canonical(a, env), canonical(b, env))
    raise TypeError(f"not a term: {t!r}")


def alpha_eq(a: Term, b: Term) -> bool:
    return a == b or canonical(a) == canonical(b)


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    stem = base.rstrip("0123456789'") or "v"
    i = 1
    while f"{stem}{i}" in avoid:
        i += 1
    return f"{stem}{i}"


def rename_free(t: Term, old: str, new: str) -> Term:
    """Replace free ``old`` by the variable ``new`` (``new`` must not be captured)."""
    return substitute(t, old, Var(new))


def substitute(m: Term, x: str, v: Term) -> Term:
    """Capture-avoiding ``m[v/x]``; ``v`` must be a value."""
    if not is_value(v):
        raise ValueError("only values may be substituted")
    return _subst(m, x, v, free_vars(v))


def _subst(m: Term, x: str, v: Term, fv: frozenset[str]) -> Term:
    match m:
        case Var(name):
            return v if name == x else m
        case Lam(var, body):
            if var == x or x not in free_vars(body):
                return m
            if var in fv:
                new = fresh_name(var, fv | all_names(body) | {x})
                body = _subst(body, var, Var(new), frozenset((new,)))
                var = new
            return Lam(var, _subst(body, x, v, fv))
        case App(a, b):
            return App(_subst(a, x, v, fv), _subst(b, x, v, fv))
        case Sum(a, b):
            return Sum(_subst(a, x, v, fv), _subst(b, x, v, fv))
        case Par(a, b):
            return Par(_subst(a, x, v, fv), _subst(b, x, v, fv))
    raise TypeError(f"not a term: {m!r}")


def subterm(t: Term, path: Iterable[int]) -> Term:
    for i in path:
        match t:
            case Lam(_, body) if i == 0:
                t = body
            case App(a, b) | Sum(a, b) | Par(a, b):
                t = a if i == 0 else b
            case _:
                raise IndexError(f"bad path component {i} at {print_term(t)}")
    return t


# -- printing ---------------------------------------------------------------


def print_term(t: Term) -> str:
    """Concrete syntax with the fewest parentheses that still round-trip."""
    match t:
        case Sum(a, b):
            return f"{_operand(a, Sum)} + {_operand(b, None)}"
        case Par(a, b):
            return f"{_operand(a, Par)} || {_operand(b, None)}"
    return _app_level(t)


def _operand(t: Term, same: type | None) -> str:
    if same is not None and isinstance(t, same):
        return print_term(t)
    if isinstance(t, (Sum, Par, Lam)):
        return f"({print_term(t)})"
    return _app_level(t)


def _app_level(t: Term) -> str:
    match t:
        case Var(name):
            return name
        case Lam(var, body):
            return f"\\{var}.{_body(body)}"
        case App(f, a):
            head = _app_level(f) if isinstance(f, (Var, App)) else f"({print_term(f)})"
            arg = a.name if isinstance(a, Var) else f"({print_term(a)})"
            return f"{head} {arg}"
    return f"({print_term(t)})"


def _body(t: Term) -> str:
    if isinstance(t, (Sum, Par)):
        return f"({print_term(t)})"
    return _app_level(t)


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<par>\|\|)|(?P<sym>[+().\\λ;=])|(?P<ident>[^\W\d][\w']*)|(?P<bad>\S))",
    re.UNICODE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        pos = m.end()
        if m.group("par"):
            tokens.append(("op", "||", m.start("par")))
        elif m.group("sym"):
            s = m.group("sym")
            tokens.append(("op", "\\" if s == "λ" else s, m.start("sym")))
        elif m.group("ident"):
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            raise ParseError(f"unexpected character {m.group('bad')!r}", m.start("bad"))
    if text[pos:].strip():
        raise ParseError("unexpected input", pos)
    tokens.append(("eof", "", len(text)))
    return tokens


def is_reference(name: str) -> bool:
    return name[:1].isupper()


class _Parser:
    def __init__(self, text: str, corpus: Mapping[str, Term]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.corpus = corpus

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, v, pos = self.advance()
        if v != value or kind == "ident":
            raise ParseError(f"expected {value!r}, found {v or 'end of input'!r}", pos)

    def term(self) -> Term:
        left = self.app()
        op = None
        while True:
            kind, v, pos = self.peek()
            if kind != "op" or v not in ("+", "||"):
                return left
            if op is not None and v != op:
                raise ParseError("ambiguous operator mixing of '+' and '||'; add parentheses", pos)
            op = v
            self.advance()
            right = self.app()
            left = Sum(left, right) if v == "+" else Par(left, right)

    def starts_atom(self) -> bool:
        kind, v, _ = self.peek()
        return kind == "ident" or (kind == "op" and v in ("(", "\\"))

    def app(self) -> Term:
        if not self.starts_atom():
            kind, v, pos = self.peek()
            raise ParseError(f"expected a term, found {v or 'end of input'!r}", pos)
        head = None
        while self.starts_atom():
            if self.peek()[1] == "\\" and self.peek()[0] == "op":
                atom = self.lam()
                head = atom if head is None else App(head, atom)
                break
            atom = self.atom()
            head = atom if head is None else App(head, atom)
        return head

    def lam(self) -> Term:
        self.expect("\\")
        binders = []
        while self.peek()[0] == "ident":
            _, name, pos = self.advance()
            if is_reference(name):
                raise ParseError(f"binder {name!r} must start with a lower-case letter", pos)
            binders.append(name)
        if not binders:
            raise ParseError("expected a binder after lambda", self.peek()[2])
        self.expect(".")
        body = self.app()
        for name in reversed(binders):
            body = Lam(name, body)
        return body

    def atom(self) -> Term:
        kind, v, pos = self.advance()
        if kind == "ident":
            if is_reference(v):
                if v not in self.corpus:
                    raise ParseError(f"unbound corpus name {v!r}", pos)
                return self.corpus[v]
            return Var(v)
        if v == "(":
            t = self.term()
            self.expect(")")
            return t
        raise ParseError(f"unexpected {v or 'end of input'!r}", pos)


def parse_term(text: str, corpus: Mapping[str, Term] | None = None) -> Term:
    p = _Parser(text, corpus or {})
    t = p.term()
    kind, v, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected {v!r}", pos)
    return t


def parse_corpus(text: str, base: Mapping[str, Term] | None = None) -> dict[str, Term]:
    """Parse ``let Name = term;`` definitions; later ones may use earlier ones."""
    corpus: dict[str, Term] = dict(base or {})
    src = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    offset = 0
    for chunk in src.split(";"):
        start = offset
        offset += len(chunk) + 1
        if not chunk.strip():
            continue
        m = re.match(r"\s*let\s+([^\W\d][\w']*)\s*=(.*)\Z", chunk, re.S | re.U)
        if m is None:
            raise ParseError("expected 'let <Name> = <term>;'", start)
        name = m.group(1)
        if not is_reference(name):
            raise ParseError(f"corpus name {name!r} must start with an upper-case letter", start)
        if name in corpus and (base is None or name not in base):
            raise ParseError(f"duplicate corpus name {name!r}", start)
        try:
            corpus[name] = parse_term(m.group(2), corpus)
        except ParseError as e:
            raise ParseError(f"in definition of {name}: {e}", start) from e
    return corpus
