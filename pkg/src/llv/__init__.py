"""A call-by-value lambda calculus with may/must non-determinism and its linear-logic type system."""

from .derivation import Derivation, DerivationError, check, measure
from .inference import (
    SearchBounds,
    Searcher,
    Trace,
    antisubstitute,
    expand_step,
    guided_run,
    guided_step,
    search,
    typable,
    unit_measures,
    unit_typings,
)
from .reduction import ReductionGraph, StepLabel, Verdict, converges, explore, step
from .semantics import InterpApprox, SeparationReport, interp, obs_check
from .syntax import App, Lam, Par, ParseError, Sum, Term, Var, parse_term, print_term
from .typesys import Arrow, Comp, Context, ParT, parse_type, print_type

__all__ = [
    "App", "Arrow", "Comp", "Context", "Derivation", "DerivationError", "InterpApprox", "Lam", "Par",
    "ParT", "ParseError", "ReductionGraph", "SearchBounds", "Searcher", "SeparationReport", "StepLabel",
    "Sum", "Term", "Trace", "Var", "Verdict", "antisubstitute", "check", "converges", "expand_step",
    "explore", "guided_run", "guided_step", "interp", "measure", "obs_check", "parse_term", "parse_type",
    "print_term", "print_type", "search", "step", "typable", "unit_measures", "unit_typings",
]
