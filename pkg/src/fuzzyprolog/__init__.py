"""Fuzzy Prolog with default knowledge: Borel-set truth values, a top-down
engine and a bottom-up fixpoint oracle."""
from .aggregators import Aggregator, Registry, union_aggregate
from .engine import Answer, Options, solve, solve_crisp, success_set
from .fixpoint import Interpretation, ground, lfp
from .syntax import Program, ProgramError, parse_program, parse_query
from .truthlattice import BorelSet, canonicalize

__all__ = [
    "Aggregator", "Answer", "BorelSet", "Interpretation", "Options", "Program",
    "ProgramError", "Registry", "canonicalize", "ground", "lfp", "parse_program",
    "parse_query", "solve", "solve_crisp", "success_set", "union_aggregate",
]
