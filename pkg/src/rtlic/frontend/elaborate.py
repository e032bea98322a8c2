"""Parameter resolution, width inference and constant folding."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .. import bv
from ..errors import Diagnostic
from . import ast as A


@dataclass(frozen=True)
class SignalInfo:
    kind: str  # input | output | reg | memory
    width: int
    depth: int = 0
    addr_width: int = 0
    is_clock: bool = False


@dataclass(frozen=True)
class ElaboratedDesign:
    ast: A.Ast
    signal_table: Mapping[str, SignalInfo]
    path: str = field(default="<input>", compare=False)

    @property
    def processes(self):
        return self.ast.processes

    def inputs(self) -> dict[str, int]:
        """Driven inputs (clocks excluded) in port order, name -> width."""
        return {n: self.signal_table[n].width for n in self.ast.port_order
                if self.signal_table[n].kind == "input" and not self.signal_table[n].is_clock}

    def state_signals(self) -> list[str]:
        return [n for n, s in self.signal_table.items() if s.kind in ("reg", "output")]

    def memories(self) -> list[str]:
        return [n for n, s in self.signal_table.items() if s.kind == "memory"]


def const_int(e: A.Expr, env: Mapping[str, int], path="<input>") -> int:
    """Unbounded integer evaluation used for parameters and ranges."""
    if isinstance(e, A.Const):
        return e.value
    if isinstance(e, A.Ref):
        if e.name not in env:
            raise Diagnostic(f"undefined parameter {e.name}", e.line, 0, path)
        return env[e.name]
    if isinstance(e, A.Unary):
        v = const_int(e.operand, env, path)
        return {"-": -v, "~": ~v, "!": int(v == 0)}[e.op]
    if isinstance(e, A.Binary):
        a = const_int(e.left, env, path)
        b = const_int(e.right, env, path)
        ops = {
            "+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
            "**": lambda: a ** b, "<<": lambda: a << b, ">>": lambda: a >> b,
            "&": lambda: a & b, "|": lambda: a | b, "^": lambda: a ^ b,
            "==": lambda: int(a == b), "!=": lambda: int(a != b),
            "<": lambda: int(a < b), "<=": lambda: int(a <= b),
            ">": lambda: int(a > b), ">=": lambda: int(a >= b),
            "&&": lambda: int(bool(a) and bool(b)), "||": lambda: int(bool(a) or bool(b)),
        }
        return ops[e.op]()
    if isinstance(e, A.Mux):
        c = const_int(e.cond, env, path)
        return const_int(e.if_true if c else e.if_false, env, path)
    raise Diagnostic("expression is not constant", getattr(e, "line", 0), 0, path)


class Elaborator:
    def __init__(self, ast: A.Ast, overrides: Mapping[str, int], path: str):
        self.ast = ast
        self.path = path
        self.params: dict[str, A.Const] = {}
        known = {n for n, _ in ast.params}
        for name in overrides:
            if name not in known:
                raise Diagnostic(f"undefined parameter {name} (override)", 0, 0, path)
        env: dict[str, int] = {}
        for name, expr in ast.params:
            if name in overrides:
                value = int(overrides[name])
                width = bv.min_width(value)
            else:
                value = const_int(expr, env, path)
                width = expr.width if isinstance(expr, A.Const) and expr.width else bv.min_width(value)
            if value < 0:
                raise Diagnostic(f"parameter {name} is negative", 0, 0, path)
            env[name] = value
            self.params[name] = A.Const(value & bv.mask(width), width)
        self.env = env
        self.signals: dict[str, SignalInfo] = {}

    def err(self, msg, line=0):
        return Diagnostic(msg, line, 0, self.path)

    def width_of(self, msb, lsb, line) -> tuple[int, Optional[A.Expr], Optional[A.Expr]]:
        if msb is None:
            return 1, None, None
        hi = const_int(msb, self.env, self.path)
        lo = const_int(lsb, self.env, self.path)
        if lo != 0:
            raise self.err("unsupported feature 'non-zero lsb range'", line)
        width = hi - lo + 1
        if width <= 0:
            raise self.err(f"width {width} <= 0 after parameter folding", line)
        return width, A.Const(hi, bv.min_width(max(hi, 0))), A.Const(lo, 1)

    def declare(self, name, info, line):
        if name in self.signals or name in self.params:
            raise self.err(f"duplicate identifier {name}", line)
        self.signals[name] = info

    def run(self) -> ElaboratedDesign:
        ast = self.ast
        clocks = {p.clock for p in ast.processes if p.kind == "clocked"}
        ports = []
        for p in ast.ports:
            width, msb, lsb = self.width_of(p.msb, p.lsb, p.line)
            for n in p.names:
                kind = "input" if p.direction == "input" else "output"
                self.declare(n, SignalInfo(kind, width, is_clock=n in clocks), p.line)
            ports.append(replace(p, msb=msb, lsb=lsb))
        regs = []
        for r in ast.regs:
            width, msb, lsb = self.width_of(r.msb, r.lsb, r.line)
            for n in r.names:
                if n in self.signals and self.signals[n].kind == "output":
                    continue  # non-ANSI "output x; reg x;" style
                self.declare(n, SignalInfo("reg", width), r.line)
            regs.append(replace(r, msb=msb, lsb=lsb))
        mems = []
        for m in ast.memories:
            width, msb, lsb = self.width_of(m.msb, m.lsb, m.line)
            hi = const_int(m.hi, self.env, self.path)
            lo = const_int(m.lo, self.env, self.path)
            if min(hi, lo) != 0:
                raise self.err("unsupported feature 'memory base index other than 0'", m.line)
            depth = abs(hi - lo) + 1
            addr_w = max(1, (depth - 1).bit_length())
            self.declare(m.name, SignalInfo("memory", width, depth, addr_w), m.line)
            mems.append(replace(m, msb=msb, lsb=lsb, hi=A.Const(max(hi, lo), bv.min_width(max(hi, lo))),
                                lo=A.Const(0, 1)))
        for c in clocks:
            if c not in self.signals or self.signals[c].kind != "input":
                raise self.err(f"clock {c} is not an input port")
        procs = [replace(p, body=self.stmt(p.body, p)) for p in ast.processes]
        new_ast = replace(
            ast,
            params=tuple((n, c) for n, c in self.params.items()),
            ports=tuple(ports), regs=tuple(regs), memories=tuple(mems),
            processes=tuple(procs),
        )
        return ElaboratedDesign(new_ast, dict(self.signals), self.path)

    # -- statements ----------------------------------------------------
    def stmt(self, s, proc: A.Process):
        if isinstance(s, A.Block):
            return replace(s, stmts=tuple(self.stmt(x, proc) for x in s.stmts))
        if isinstance(s, A.If):
            return replace(
                s, cond=self.expr(s.cond),
                then=self.stmt(s.then, proc),
                otherwise=None if s.otherwise is None else self.stmt(s.otherwise, proc),
            )
        if isinstance(s, (A.Display, A.Null)):
            return s
        if isinstance(s, A.Assign):
            if proc.kind == "clocked" and s.blocking:
                raise self.err("blocking assignment in clocked process", s.line)
            if proc.kind == "comb" and not s.blocking:
                raise self.err("nonblocking assignment in combinational process", s.line)
            name = s.target.name
            info = self.signals.get(name)
            if info is None:
                raise self.err(f"undeclared signal {name}", s.line)
            if info.kind == "input":
                raise self.err(f"assignment to input {name}", s.line)
            if info.kind == "output" and not self.is_output_reg(name):
                raise self.err(f"assignment to non-reg output {name}", s.line)
            index = None
            if info.kind == "memory":
                if s.target.index is None:
                    raise self.err(f"whole-memory assignment to {name}", s.line)
                index = self.expr(s.target.index)
            elif s.target.index is not None:
                raise self.err("unsupported feature 'bit-select assignment'", s.line)
            return replace(s, target=replace(s.target, index=index), value=self.expr(s.value))
        raise TypeError(s)

    def is_output_reg(self, name):
        return any(name in p.names and p.is_reg for p in self.ast.ports) or \
            any(name in r.names for r in self.ast.regs)

    # -- expressions ---------------------------------------------------
    def expr(self, e) -> A.Expr:
        out = self._expr(e)
        if not isinstance(out, A.Const) and _all_const(out):
            out = fold(out)
        return out

    def _expr(self, e) -> A.Expr:
        if isinstance(e, A.Const):
            if e.width is not None:
                return e
            return replace(e, width=bv.min_width(e.value))
        if isinstance(e, A.Ref):
            if e.name in self.params:
                c = self.params[e.name]
                return A.Const(c.value, c.width, e.name, line=e.line)
            info = self.signals.get(e.name)
            if info is None:
                raise self.err(f"undefined identifier {e.name}", e.line)
            if info.kind == "memory":
                raise self.err(f"memory {e.name} used without index", e.line)
            return replace(e, width=info.width)
        if isinstance(e, A.MemRead):
            return replace(e, addr=self.expr(e.addr))
        if isinstance(e, A.Index):
            info = self.signals.get(e.name)
            if info is None:
                if e.name in self.params:
                    raise self.err("unsupported feature 'parameter bit-select'", e.line)
                raise self.err(f"undefined identifier {e.name}", e.line)
            idx = self.expr(e.index)
            if info.kind == "memory":
                return A.MemRead(e.name, idx, info.width, line=e.line)
            base = A.Ref(e.name, info.width, line=e.line)
            if isinstance(idx, A.Const):
                if idx.value >= info.width:
                    raise self.err(f"bit index {idx.value} out of range for {e.name}", e.line)
                c = A.Const(idx.value, bv.min_width(idx.value))
                return A.Slice(base, c, c, 1, line=e.line)
            return A.BitSel(base, idx, 1, line=e.line)
        if isinstance(e, A.BitSel):
            return replace(e, base=self._expr(e.base), index=self.expr(e.index), width=1)
        if isinstance(e, A.Slice):
            base = self._expr(e.base)
            if not isinstance(base, A.Ref):
                raise self.err("unsupported feature 'slice of expression'", e.line)
            hi = const_int(e.msb, self.env, self.path)
            lo = const_int(e.lsb, self.env, self.path)
            if not (0 <= lo <= hi < base.width):
                raise self.err(f"part-select [{hi}:{lo}] out of range for {base.name}", e.line)
            return A.Slice(base, A.Const(hi, bv.min_width(hi)), A.Const(lo, bv.min_width(lo)),
                           hi - lo + 1, line=e.line)
        if isinstance(e, A.Unary):
            a = self.expr(e.operand)
            return replace(e, operand=a, width=1 if e.op == "!" else a.width)
        if isinstance(e, A.Binary):
            if e.op in A.CONST_ONLY_OPS:
                try:
                    value = const_int(e, self.env, self.path)
                except Diagnostic:
                    raise self.err(f"unsupported feature 'non-constant {e.op}'", e.line)
                if value < 0:
                    raise self.err("negative constant expression", e.line)
                return A.Const(value, bv.min_width(value), line=e.line)
            a = self.expr(e.left)
            b = self.expr(e.right)
            return replace(e, left=a, right=b, width=bv.result_width(e.op, a.width, b.width))
        if isinstance(e, A.Concat):
            parts = tuple(self.expr(p) for p in e.parts)
            return replace(e, parts=parts, width=sum(p.width for p in parts))
        if isinstance(e, A.Mux):
            c = self.expr(e.cond)
            a = self.expr(e.if_true)
            b = self.expr(e.if_false)
            return replace(e, cond=c, if_true=a, if_false=b, width=max(a.width, b.width))
        raise TypeError(e)


def _all_const(e) -> bool:
    if isinstance(e, A.Const):
        return True
    if isinstance(e, (A.Ref, A.MemRead, A.Index)):
        return False
    if isinstance(e, A.Slice):
        return _all_const(e.base)
    return all(_all_const(c) for c in A.expr_children(e))


def fold(e) -> A.Const:
    """Evaluate a fully constant, width-annotated expression."""
    if isinstance(e, A.Const):
        return e
    if isinstance(e, A.Unary):
        a = fold(e.operand)
        return A.Const(bv.eval_unary(e.op, a.value, a.width), e.width, line=e.line)
    if isinstance(e, A.Binary):
        a = fold(e.left)
        b = fold(e.right)
        return A.Const(bv.eval_binary(e.op, a.value, b.value, e.width), e.width, line=e.line)
    if isinstance(e, A.Concat):
        v = 0
        for p in e.parts:
            c = fold(p)
            v = (v << c.width) | c.value
        return A.Const(v, e.width, line=e.line)
    if isinstance(e, A.Mux):
        c = fold(e.cond)
        return A.Const(fold(e.if_true if c.value else e.if_false).value, e.width, line=e.line)
    if isinstance(e, A.Slice):
        b = fold(e.base)
        return A.Const((b.value >> e.lsb.value) & bv.mask(e.width), e.width, line=e.line)
    if isinstance(e, A.BitSel):
        b = fold(e.base)
        i = fold(e.index)
        return A.Const((b.value >> i.value) & 1 if i.value < b.width else 0, 1, line=e.line)
    raise TypeError(e)


def elaborate(ast: A.Ast, overrides: Optional[Mapping[str, int]] = None,
              path: str = "<input>") -> ElaboratedDesign:
    return Elaborator(ast, dict(overrides or {}), path).run()
