"""Render an Ast back to Verilog-subset text accepted by the parser."""

from __future__ import annotations

from .. import bv
from . import ast as A


def format_const(c: A.Const, use_names: bool = True) -> str:
    if use_names and c.name:
        return c.name
    if c.width is None or c.width == bv.min_width(c.value):
        return str(c.value) if c.value < 16 else f"'h{c.value:x}"
    return f"{c.width}'h{c.value:x}"


_ASSOC = ("&&", "||", "&", "|", "^", "+")


def format_expr(e, top: bool = True) -> str:
    if isinstance(e, A.Const):
        return format_const(e)
    if isinstance(e, A.Ref):
        return e.name
    if isinstance(e, A.Index):
        return f"{e.name}[{format_expr(e.index)}]"
    if isinstance(e, A.MemRead):
        return f"{e.mem}[{format_expr(e.addr)}]"
    if isinstance(e, A.BitSel):
        return f"{format_expr(e.base, False)}[{format_expr(e.index)}]"
    if isinstance(e, A.Slice):
        return f"{format_expr(e.base, False)}[{format_expr(e.msb)}:{format_expr(e.lsb)}]"
    if isinstance(e, A.Unary):
        return f"{e.op}{format_expr(e.operand, False)}"
    if isinstance(e, A.Binary):
        flat = e.op in _ASSOC and isinstance(e.left, A.Binary) and e.left.op == e.op
        s = f"{format_expr(e.left, flat)} {e.op} {format_expr(e.right, False)}"
        return s if top else f"({s})"
    if isinstance(e, A.Concat):
        return "{" + ", ".join(format_expr(p) for p in e.parts) + "}"
    if isinstance(e, A.Mux):
        s = f"{format_expr(e.cond, False)} ? {format_expr(e.if_true, False)} : {format_expr(e.if_false, False)}"
        return s if top else f"({s})"
    raise TypeError(e)


def _range(msb, lsb) -> str:
    if msb is None:
        return ""
    return f"[{format_expr(msb)}:{format_expr(lsb)}] "


def _stmt(s, ind: int, out: list[str]):
    pad = "  " * ind
    if isinstance(s, A.Block):
        out.append(pad + "begin")
        for x in s.stmts:
            _stmt(x, ind + 1, out)
        out.append(pad + "end")
    elif isinstance(s, A.If):
        out.append(f"{pad}if ({format_expr(s.cond)})")
        _stmt(s.then, ind + 1, out)
        if s.otherwise is not None:
            out.append(pad + "else")
            _stmt(s.otherwise, ind + 1, out)
    elif isinstance(s, A.Assign):
        lhs = s.target.name
        if s.target.index is not None:
            lhs += f"[{format_expr(s.target.index)}]"
        op = "=" if s.blocking else "<="
        out.append(f"{pad}{lhs} {op} {format_expr(s.value)};")
    elif isinstance(s, A.Display):
        text = s.text.replace("\\", "\\\\").replace('"', '\\"')
        out.append(f'{pad}$display("{text}");')
    elif isinstance(s, A.Null):
        out.append(pad + ";")
    else:
        raise TypeError(s)


def format_ast(ast: A.Ast) -> str:
    out = []
    head = f"module {ast.module_name}"
    header = ast.params[: ast.header_params] if ast.header_params else ast.params
    if header:
        head += " #(" + ", ".join(f"parameter {n} = {format_expr(v)}" for n, v in header) + ")"
    if ast.port_order:
        head += " (" + ", ".join(ast.port_order) + ")"
    out.append(head + ";")
    for n, v in ast.params[len(header):]:
        out.append(f"  localparam {n} = {format_expr(v)};")
    for p in ast.ports:
        kind = p.direction + (" reg" if p.is_reg else "")
        out.append(f"  {kind} {_range(p.msb, p.lsb)}{', '.join(p.names)};")
    for r in ast.regs:
        out.append(f"  reg {_range(r.msb, r.lsb)}{', '.join(r.names)};")
    for m in ast.memories:
        out.append(f"  reg {_range(m.msb, m.lsb)}{m.name} [{format_expr(m.hi)}:{format_expr(m.lo)}];")
    for proc in ast.processes:
        sens = f"posedge {proc.clock}" if proc.kind == "clocked" else "*"
        out.append(f"  always @({sens})")
        _stmt(proc.body, 2, out)
    out.append("endmodule")
    return "\n".join(out) + "\n"
