"""Lexer, parser and program model for Fuzzy Prolog source text."""
from .lexer import FplSyntaxError, tokenize
from .parser import parse_statements, parse_term
from .program import (
    CRISP_BUILTINS,
    CrispClause,
    DefaultDecl,
    Diagnostic,
    FuzzyClause,
    FuzzyFact,
    PiecewiseDecl,
    Program,
    ProgramError,
    build_program,
    parse_program,
    render_clause,
    truth_from_term,
    validate,
)


def parse_query(source: str):
    """Parse a goal; conjunctions are kept as ``','/2`` terms."""
    term, _ = parse_term(source)
    return term


__all__ = [
    "CRISP_BUILTINS", "CrispClause", "DefaultDecl", "Diagnostic", "FplSyntaxError",
    "FuzzyClause", "FuzzyFact", "PiecewiseDecl", "Program", "ProgramError",
    "build_program", "parse_program", "parse_query", "parse_statements", "parse_term",
    "render_clause", "tokenize", "truth_from_term", "validate",
]
