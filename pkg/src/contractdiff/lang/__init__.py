"""Mini contract language: syntax tree, parser, printer, validator, CAST."""
from . import ast
from .ast import ContractAst, FunctionDecl
from .cast import CastTree, build_cast, erase
from .emit import dump, emit_source
from .parser import ContractSyntaxError, ContractTypeError, ParseError, parse
from .validate import Violation, validate

__all__ = [
    "ast", "ContractAst", "FunctionDecl", "CastTree", "build_cast", "erase", "dump",
    "emit_source", "ContractSyntaxError", "ContractTypeError", "ParseError", "parse",
    "Violation", "validate",
]
