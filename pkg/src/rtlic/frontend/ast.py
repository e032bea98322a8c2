"""Syntax tree for the supported Verilog subset.

The same node classes are used before and after elaboration. Before
elaboration ``width`` is ``None`` and identifiers may name parameters; after
elaboration every expression node carries a concrete width and parameters
have been folded into :class:`Const` nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

UNARY_OPS = ("~", "!", "-")
BINARY_OPS = (
    "==", "!=", "<", "<=", ">", ">=",
    "&", "|", "^", "&&", "||",
    "+", "-", "<<", ">>",
)
# only legal inside constant expressions (folded away by elaboration)
CONST_ONLY_OPS = ("*", "**")
COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
LOGICAL_OPS = ("&&", "||")


@dataclass(frozen=True)
class Const:
    value: int
    width: Optional[int] = None
    name: Optional[str] = None  # parameter the constant was folded from
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Ref:
    name: str
    width: Optional[int] = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Index:
    """``name[index]`` before elaboration decides memory word vs bit select."""

    name: str
    index: "Expr"
    width: Optional[int] = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class MemRead:
    mem: str
    addr: "Expr"
    width: Optional[int] = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BitSel:
    base: "Expr"
    index: "Expr"
    width: Optional[int] = 1
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Slice:
    base: "Expr"
    msb: "Expr"
    lsb: "Expr"
    width: Optional[int] = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    width: Optional[int] = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    width: Optional[int] = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Concat:
    parts: tuple
    width: Optional[int] = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Mux:
    cond: "Expr"
    if_true: "Expr"
    if_false: "Expr"
    width: Optional[int] = None
    line: int = field(default=0, compare=False)


Expr = Union[Const, Ref, Index, MemRead, BitSel, Slice, Unary, Binary, Concat, Mux]


@dataclass(frozen=True)
class LValue:
    name: str
    index: Optional[Expr] = None  # memory word address
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Assign:
    target: LValue
    value: Expr
    blocking: bool
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Display:
    text: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    otherwise: Optional["Stmt"] = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Block:
    stmts: tuple
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Null:
    line: int = field(default=0, compare=False)


Stmt = Union[Assign, Display, If, Block, Null]


@dataclass(frozen=True)
class Process:
    id: int
    kind: str  # "clocked" or "comb"
    body: Stmt
    clock: Optional[str] = None
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class PortDecl:
    direction: str  # "input" | "output"
    names: tuple
    msb: Optional[Expr] = None
    lsb: Optional[Expr] = None
    is_reg: bool = False
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RegDecl:
    names: tuple
    msb: Optional[Expr] = None
    lsb: Optional[Expr] = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class MemDecl:
    name: str
    msb: Optional[Expr]
    lsb: Optional[Expr]
    hi: Expr
    lo: Expr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Ast:
    module_name: str
    params: tuple = ()  # (name, Expr) pairs in declaration order
    ports: tuple = ()
    regs: tuple = ()
    memories: tuple = ()
    processes: tuple = ()
    port_order: tuple = ()
    header_params: int = field(default=0, compare=False)

    @property
    def port_names(self) -> list[str]:
        return [n for p in self.ports for n in p.names]

    @property
    def output_regs(self) -> list[str]:
        return [n for p in self.ports if p.direction == "output" and p.is_reg for n in p.names]


def expr_children(e: Expr) -> tuple:
    if isinstance(e, (Const, Ref)):
        return ()
    if isinstance(e, (Index, MemRead)):
        return (e.index,) if isinstance(e, Index) else (e.addr,)
    if isinstance(e, BitSel):
        return (e.base, e.index)
    if isinstance(e, Slice):
        return (e.base, e.msb, e.lsb)
    if isinstance(e, Unary):
        return (e.operand,)
    if isinstance(e, Binary):
        return (e.left, e.right)
    if isinstance(e, Concat):
        return tuple(e.parts)
    if isinstance(e, Mux):
        return (e.cond, e.if_true, e.if_false)
    raise TypeError(f"not an expression: {e!r}")


def signals_of(e: Expr) -> list[str]:
    """Signal names read by ``e``, first-occurrence order, memories included."""
    out: list[str] = []

    def walk(x):
        if isinstance(x, Ref):
            if x.name not in out:
                out.append(x.name)
            return
        if isinstance(x, (MemRead, Index)):
            name = x.mem if isinstance(x, MemRead) else x.name
            if name not in out:
                out.append(name)
        for c in expr_children(x):
            walk(c)

    walk(e)
    return out


def constants_of(e: Expr) -> list[Const]:
    out: list[Const] = []

    def walk(x):
        if isinstance(x, Const):
            out.append(x)
            return
        if isinstance(x, Slice):
            walk(x.base)  # slice bounds are not value leaves
            return
        for c in expr_children(x):
            walk(c)

    walk(e)
    return out
