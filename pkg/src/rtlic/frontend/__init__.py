from .ast import Ast
from .elaborate import ElaboratedDesign, SignalInfo, elaborate
from .lexer import SourceDesign
from .parser import parse_design
from .printer import format_ast, format_expr
from .target import BranchTarget, LineLocator, MarkerLocator, parse_locator, resolve_target


def load_design(path, overrides=None) -> ElaboratedDesign:
    src = SourceDesign.from_file(path)
    return elaborate(parse_design(src), overrides, src.path)


__all__ = [
    "Ast", "BranchTarget", "ElaboratedDesign", "LineLocator", "MarkerLocator", "SignalInfo",
    "SourceDesign", "elaborate", "format_ast", "format_expr", "load_design", "parse_design",
    "parse_locator", "resolve_target",
]
