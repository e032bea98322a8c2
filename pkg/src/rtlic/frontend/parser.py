"""Recursive-descent parser for the Verilog subset."""

from __future__ import annotations

from ..errors import Diagnostic
from . import ast as A
from .lexer import KEYWORDS, UNSUPPORTED, SourceDesign, Token, tokenize

# binary precedence, loosest first
_LEVELS = [
    ("||",), ("&&",), ("|",), ("^",), ("&",),
    ("==", "!="), ("<", "<=", ">", ">="), ("<<", ">>"),
    ("+", "-"), ("*",),
]


class Parser:
    def __init__(self, src: SourceDesign):
        self.src = src
        self.toks = tokenize(src)
        self.pos = 0
        self.proc_count = 0

    # -- token helpers -------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def error(self, msg, tok: Token | None = None):
        tok = tok or self.tok
        return Diagnostic(msg, tok.line, tok.col, self.src.path)

    def advance(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def at(self, text, kind=None) -> bool:
        t = self.tok
        return t.text == text and (kind is None or t.kind == kind) and t.kind != "str"

    def accept(self, text) -> Token | None:
        if self.at(text):
            return self.advance()
        return None

    def expect(self, text) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of file"
            raise self.error(f"expected '{text}', found '{found}'")
        return self.advance()

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "id":
            raise self.error(f"expected identifier, found '{t.text or 'end of file'}'")
        if t.text in UNSUPPORTED:
            raise self.error(f"unsupported feature '{t.text}'")
        if t.text in KEYWORDS:
            raise self.error(f"expected identifier, found keyword '{t.text}'")
        return self.advance()

    def check_unsupported(self):
        t = self.tok
        if t.kind == "id" and t.text in UNSUPPORTED:
            raise self.error(f"unsupported feature '{t.text}'")

    # -- module --------------------------------------------------------
    def parse_module(self) -> A.Ast:
        self.check_unsupported()
        self.expect("module")
        name = self.ident().text
        params: list = []
        ports: list = []
        port_order: list = []
        if self.accept("#"):
            self.expect("(")
            self.accept("parameter")
            params.extend(self.param_assignments(header=True))
            self.expect(")")
        header_params = len(params)
        if self.accept("("):
            if not self.at(")"):
                if self.at("input") or self.at("output"):
                    while True:
                        decl = self.port_decl(ansi=True)
                        ports.append(decl)
                        port_order.extend(decl.names)
                        if not self.accept(","):
                            break
                else:
                    port_order.append(self.ident().text)
                    while self.accept(","):
                        port_order.append(self.ident().text)
            self.expect(")")
        self.expect(";")

        regs, mems, procs = [], [], []
        while not self.at("endmodule"):
            t = self.tok
            if t.kind == "eof":
                raise self.error("expected 'endmodule', found 'end of file'")
            self.check_unsupported()
            if self.at("input") or self.at("output"):
                ports.append(self.port_decl(ansi=False))
                self.expect(";")
            elif self.at("reg"):
                r, m = self.reg_decl()
                regs.extend(r)
                mems.extend(m)
            elif self.at("parameter") or self.at("localparam"):
                self.advance()
                params.extend(self.param_assignments(header=False))
                self.expect(";")
            elif self.at("always"):
                procs.append(self.always())
            elif self.at("module") or (t.kind == "id" and self.pos + 1 < len(self.toks)
                                       and (self.toks[self.pos + 1].kind == "id"
                                            or self.toks[self.pos + 1].text == "#")):
                raise self.error("unsupported feature 'module hierarchy'")
            else:
                raise self.error(f"expected module item, found '{t.text}'")
        self.expect("endmodule")
        if self.tok.kind != "eof":
            if self.at("module"):
                raise self.error("unsupported feature 'multiple modules'")
            raise self.error(f"unexpected '{self.tok.text}' after endmodule")

        declared = {n for p in ports for n in p.names}
        for pn in port_order:
            if pn not in declared:
                raise self.error(f"port '{pn}' has no direction declaration")
        for p in ports:
            for n in p.names:
                if n not in port_order:
                    port_order.append(n)
        return A.Ast(name, tuple(params), tuple(ports), tuple(regs), tuple(mems),
                     tuple(procs), tuple(port_order), header_params)

    def param_assignments(self, header: bool) -> list:
        out = []
        while True:
            if header:
                self.accept("parameter")
            self.range_opt()  # parameter ranges are accepted and ignored
            name = self.ident().text
            self.expect("=")
            out.append((name, self.expr()))
            if not self.at(","):
                return out
            self.advance()

    def range_opt(self):
        if self.accept("["):
            msb = self.expr()
            self.expect(":")
            lsb = self.expr()
            self.expect("]")
            return msb, lsb
        return None, None

    def port_decl(self, ansi: bool) -> A.PortDecl:
        t = self.advance()
        direction = t.text
        is_reg = bool(self.accept("reg"))
        if is_reg and direction == "input":
            raise self.error("input ports cannot be reg", t)
        msb, lsb = self.range_opt()
        names = [self.ident().text]
        # in ANSI headers a comma may start the next declaration
        while self.at(","):
            nxt = self.toks[self.pos + 1]
            if ansi and nxt.text in ("input", "output"):
                break
            self.advance()
            names.append(self.ident().text)
        return A.PortDecl(direction, tuple(names), msb, lsb, is_reg, t.line)

    def reg_decl(self):
        t = self.expect("reg")
        msb, lsb = self.range_opt()
        regs, mems = [], []
        while True:
            name = self.ident().text
            if self.accept("["):
                hi = self.expr()
                self.expect(":")
                lo = self.expr()
                self.expect("]")
                if self.at("["):
                    raise self.error("unsupported feature 'multi-dimensional memory'")
                mems.append(A.MemDecl(name, msb, lsb, hi, lo, t.line))
            else:
                regs.append(name)
            if not self.accept(","):
                break
        self.expect(";")
        reg_decls = [A.RegDecl((n,), msb, lsb, t.line) for n in regs]
        return reg_decls, mems

    def always(self) -> A.Process:
        t = self.expect("always")
        self.expect("@")
        clock = None
        if self.accept("*"):
            kind = "comb"
        else:
            self.expect("(")
            if self.accept("*"):
                kind = "comb"
            else:
                self.check_unsupported()
                if not self.at("posedge"):
                    raise self.error("unsupported feature 'explicit sensitivity list'")
                self.advance()
                clock = self.ident().text
                kind = "clocked"
                if self.at("or") or self.at(","):
                    raise self.error("unsupported feature 'multiple clock events'")
            self.expect(")")
        body = self.stmt()
        end_line = self.toks[self.pos - 1].line
        self.proc_count += 1
        return A.Process(self.proc_count, kind, body, clock, (t.line, end_line))

    # -- statements ----------------------------------------------------
    def stmt(self):
        t = self.tok
        self.check_unsupported()
        if self.accept(";"):
            return A.Null(t.line)
        if self.at("begin"):
            self.advance()
            if self.accept(":"):
                self.ident()
            stmts = []
            while not self.at("end"):
                if self.tok.kind == "eof" or self.at("endmodule"):
                    raise self.error("expected 'end', found " + repr(self.tok.text or "end of file"))
                stmts.append(self.stmt())
            self.expect("end")
            return A.Block(tuple(stmts), t.line)
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.stmt()
            other = self.stmt() if self.accept("else") else None
            return A.If(cond, then, other, t.line)
        if t.kind == "sysid":
            if t.text != "$display":
                raise self.error(f"unsupported feature '{t.text}'")
            self.advance()
            self.expect("(")
            s = self.tok
            if s.kind != "str":
                raise self.error("expected string literal in $display")
            self.advance()
            if self.at(","):
                raise self.error("unsupported feature '$display arguments'")
            self.expect(")")
            self.expect(";")
            return A.Display(s.value, t.line)
        if t.kind == "id" and t.text not in KEYWORDS:
            name = self.ident().text
            index = None
            if self.accept("["):
                index = self.expr()
                if self.at(":"):
                    raise self.error("unsupported feature 'part-select assignment'")
                self.expect("]")
            lv = A.LValue(name, index, t.line)
            if self.accept("<="):
                blocking = False
            elif self.accept("="):
                blocking = True
            else:
                raise self.error(f"expected '<=' or '=', found '{self.tok.text}'")
            value = self.expr()
            self.expect(";")
            return A.Assign(lv, value, blocking, t.line)
        raise self.error(f"expected statement, found '{t.text or 'end of file'}'")

    # -- expressions ---------------------------------------------------
    def expr(self):
        cond = self.binary(0)
        if self.at("?"):
            t = self.advance()
            a = self.expr()
            self.expect(":")
            b = self.expr()
            return A.Mux(cond, a, b, line=t.line)
        return cond

    def binary(self, level):
        if level == len(_LEVELS):
            return self.power()
        left = self.binary(level + 1)
        while self.tok.kind == "op" and self.tok.text in _LEVELS[level]:
            t = self.advance()
            right = self.binary(level + 1)
            left = A.Binary(t.text, left, right, line=t.line)
        return left

    def power(self):
        base = self.unary()
        if self.at("**"):
            t = self.advance()
            return A.Binary("**", base, self.power(), line=t.line)
        return base

    def unary(self):
        t = self.tok
        if t.kind == "op" and t.text in ("~", "!", "-", "+"):
            self.advance()
            operand = self.unary()
            if t.text == "+":
                return operand
            return A.Unary(t.text, operand, line=t.line)
        if t.kind == "op" and t.text in ("&", "|", "^"):
            raise self.error(f"unsupported feature 'reduction operator {t.text}'")
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            value, size = t.value
            return A.Const(value, size, line=t.line)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.at("{"):
            self.advance()
            parts = [self.expr()]
            while self.accept(","):
                parts.append(self.expr())
            if self.at("{"):
                raise self.error("unsupported feature 'replication'")
            self.expect("}")
            return A.Concat(tuple(parts), line=t.line)
        if t.kind == "id" and t.text not in KEYWORDS:
            name = self.ident().text
            if self.accept("["):
                first = self.expr()
                if self.accept(":"):
                    lsb = self.expr()
                    self.expect("]")
                    return A.Slice(A.Ref(name, line=t.line), first, lsb, line=t.line)
                self.expect("]")
                if self.at("["):
                    raise self.error("unsupported feature 'chained select'")
                return A.Index(name, first, line=t.line)
            return A.Ref(name, line=t.line)
        if t.kind == "op" and t.text == ".":
            raise self.error("unsupported feature 'hierarchical reference'")
        raise self.error(f"expected expression, found '{t.text or 'end of file'}'")


def parse_design(src: SourceDesign | str) -> A.Ast:
    if isinstance(src, str):
        src = SourceDesign.from_text(src)
    if not src.source.strip():
        raise Diagnostic("empty design", 1, 1, src.path)
    return Parser(src).parse_module()
