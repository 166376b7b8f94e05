"""The shipped corpus of named terms and the bounds pinned for each check."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .derivation import Derivation, from_json
from .inference import SearchBounds
from .syntax import Term, parse_corpus, parse_term

Corpus = dict[str, Term]


@lru_cache(maxsize=1)
def default_corpus_text() -> str:
    return resources.files("llv").joinpath("data/corpus.llv").read_text(encoding="utf-8")


def load_corpus(path: str | Path | None = None) -> Corpus:
    """The corpus in ``path``, or the shipped one."""
    text = default_corpus_text() if path is None else Path(path).read_text(encoding="utf-8")
    return parse_corpus(text)


def term(name_or_text: str, corpus: Corpus | None = None) -> Term:
    corpus = load_corpus() if corpus is None else corpus
    return corpus[name_or_text] if name_or_text in corpus else parse_term(name_or_text, corpus)


def fig3_derivation() -> Derivation:
    """The shipped derivation typing ``Delta (I || \\x y.Omega)`` with ``1 % 1``."""
    text = resources.files("llv").joinpath("data/fig3.json").read_text(encoding="utf-8")
    return from_json(json.loads(text))


@dataclass(frozen=True)
class LengthCase:
    """A converging term, its arity and the bounds under which measures are complete."""

    name: str
    k: int
    bounds: SearchBounds
    max_steps: int = 200
    max_states: int = 10_000


# Every case already reaches all its reduction lengths at type size 1; the
# pinned bound leaves one step of slack.
_LEN_BOUNDS = SearchBounds(max_type_size=2, max_depth=16, max_k=2)
LENGTH_CASES = (
    LengthCase("Fig3", 2, _LEN_BOUNDS),
    LengthCase("ParDup", 2, _LEN_BOUNDS),
    LengthCase("SumDup", 2, _LEN_BOUNDS),
    LengthCase("FS", 1, _LEN_BOUNDS),
    LengthCase("XIXP", 2, _LEN_BOUNDS),
    LengthCase("II", 1, _LEN_BOUNDS),
)

# Bounds for the typability/divergence checks.
UNTYPABLE_BOUNDS = SearchBounds(max_type_size=3, max_depth=16, max_k=2)
UNTYPABLE = ("Omega", "LamOmegaParOmega", "FS'")

# Terms with a type taken from the worked examples; types in ASCII syntax.
TYPED_EXAMPLES = (
    ("LamOmega", "1"),
    ("LamOmegaOrOmega", "1"),
    ("IParLamOmega", "(1 -o 1) % 1"),
    ("IParLamOmega", "1 % 1"),
    ("I", "(1 -o 1) -o (1 -o 1)"),
    ("I", "(1 -o 1) * ((1 -o 1) -o (1 -o 1))"),
    ("E_I", "1 -o ((1 -o 1) * (1 -o 1))"),
    ("Delta", "((1 -o 1) * 1) -o 1"),
    ("Delta", "(1 -o (1 -o 1)) -o (1 -o 1)"),
    ("Ystar", "1"),
    ("Ystar", "(1 -o 1) * (1 -o (1 -o 1))"),
    ("YstarUnfolded", "1"),
    ("YstarUnfolded", "(1 -o 1) * (1 -o (1 -o 1))"),
)
TYPED_BOUNDS = SearchBounds(max_type_size=3, max_depth=16, max_k=2)

# Semantics.  Interpretations are compared at type size 5: at 3 and 4 the
# bounded sets of I and DeltaStar (among others) still coincide although the
# terms are observationally apart, the first separating type having size 5.
OGRE_BOUND = 4
WITNESS_TYPE = "(1 -o 1) -o (1 -o 1)"
ADEQUACY_BOUND = 5
OBS_POOL = ("I", "Delta", "LamOmega", r"\x y.x", r"\z.(I || I)")
OBS_FUEL = (200, 5000)
