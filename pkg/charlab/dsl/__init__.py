"""The .cdl definition language: AST, parser, printer and evaluators."""

from .ast import DefinableFormula, Declaration, PolyExpr, PredicateExpr, Program
from .evaluator import eval_formula, eval_predicate, formula_points
from .parser import parse_file, parse_node, parse_source
from .printer import format_node, print_program

__all__ = [
    "Declaration",
    "DefinableFormula",
    "PolyExpr",
    "PredicateExpr",
    "Program",
    "eval_formula",
    "eval_predicate",
    "format_node",
    "formula_points",
    "parse_file",
    "parse_node",
    "parse_source",
    "print_program",
]
