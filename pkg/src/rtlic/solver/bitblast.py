"""Tseitin bit-blasting of terms into CNF.

Memories are scalarized eagerly: an array term becomes a list of word bit
vectors, ``store`` muxes the written word in, ``select`` is a mux tree over
the words.
"""

from __future__ import annotations

from ..errors import SolverError
from .terms import Term, iter_dag

MAX_ADDR_WIDTH = 8


class BitBlaster:
    def __init__(self):
        self.nvars = 1
        self.T = 1  # variable 1 is constant true
        self.clauses: list[list[int]] = [[1]]
        self.gates: dict = {}
        self.bits: dict[int, list] = {}  # id(term) -> list of literals, LSB first
        self.var_bits: dict[str, list] = {}

    def fresh(self) -> int:
        self.nvars += 1
        return self.nvars

    # -- gates with constant propagation and structural hashing --------
    def AND(self, a, b):
        T = self.T
        if a == -T or b == -T or a == -b:
            return -T
        if a == T:
            return b
        if b == T or a == b:
            return a
        key = ("and", min(a, b), max(a, b))
        g = self.gates.get(key)
        if g is None:
            g = self.fresh()
            self.clauses += [[-g, a], [-g, b], [g, -a, -b]]
            self.gates[key] = g
        return g

    def OR(self, a, b):
        return -self.AND(-a, -b)

    def XOR(self, a, b):
        T = self.T
        if a == -T:
            return b
        if b == -T:
            return a
        if a == T:
            return -b
        if b == T:
            return -a
        if a == b:
            return -T
        if a == -b:
            return T
        key = ("xor", min(a, b), max(a, b))
        g = self.gates.get(key)
        if g is None:
            g = self.fresh()
            self.clauses += [[-g, a, b], [-g, -a, -b], [g, -a, b], [g, a, -b]]
            self.gates[key] = g
        return g

    def MUX(self, c, a, b):
        """c ? a : b"""
        T = self.T
        if c == T:
            return a
        if c == -T:
            return b
        if a == b:
            return a
        key = ("mux", c, a, b)
        g = self.gates.get(key)
        if g is None:
            g = self.fresh()
            self.clauses += [[-g, -c, a], [-g, c, b], [g, -c, -a], [g, c, -b]]
            self.gates[key] = g
        return g

    def ANDN(self, lits):
        out = self.T
        for l in lits:
            out = self.AND(out, l)
        return out

    def ORN(self, lits):
        out = -self.T
        for l in lits:
            out = self.OR(out, l)
        return out

    # -- words ---------------------------------------------------------
    def const_bits(self, value, width):
        return [self.T if (value >> i) & 1 else -self.T for i in range(width)]

    def add_bits(self, a, b, cin):
        out = []
        c = cin
        for x, y in zip(a, b):
            s = self.XOR(x, y)
            out.append(self.XOR(s, c))
            c = self.OR(self.AND(x, y), self.AND(s, c))
        return out, c

    def ult_bits(self, a, b):
        # a < b iff no carry out of a + ~b + 1
        _, carry = self.add_bits(a, [-x for x in b], self.T)
        return -carry

    def eq_bits(self, a, b):
        return self.ANDN([-self.XOR(x, y) for x, y in zip(a, b)])

    def eq_const(self, a, value):
        return self.ANDN([x if (value >> i) & 1 else -x for i, x in enumerate(a)])

    def shift(self, a, amount, left):
        w = len(a)
        cur = list(a)
        F = -self.T
        for k, s in enumerate(amount):
            step = 1 << k
            if step >= w:
                # any set high bit shifts everything out
                cur = [self.AND(-s, x) for x in cur]
                continue
            if left:
                shifted = [F] * step + cur[: w - step]
            else:
                shifted = cur[step:] + [F] * step
            cur = [self.MUX(s, y, x) for x, y in zip(cur, shifted)]
        return cur

    def zext_bits(self, bits, width):
        return (bits + [-self.T] * width)[:width]

    # -- terms ---------------------------------------------------------
    def blast(self, root: Term):
        for t in iter_dag([root]):
            if id(t) not in self.bits:
                self.bits[id(t)] = self._blast(t, [self.bits[id(a)] for a in t.args])
        return self.bits[id(root)]

    def _blast(self, t: Term, a):
        op, w = t.op, t.width
        if op == "const":
            return self.const_bits(t.value, w)
        if op == "var":
            name = t.params[0]
            bits = self.var_bits.get(name)
            if bits is None:
                bits = [self.fresh() for _ in range(w)]
                self.var_bits[name] = bits
            elif len(bits) != w:
                raise SolverError(f"variable {name} used at widths {len(bits)} and {w}")
            return bits
        if op == "not":
            return [-x for x in a[0]]
        if op == "neg":
            return self.add_bits([-x for x in a[0]], self.const_bits(0, w), self.T)[0]
        if op == "and":
            return [self.AND(x, y) for x, y in zip(a[0], a[1])]
        if op == "or":
            return [self.OR(x, y) for x, y in zip(a[0], a[1])]
        if op == "xor":
            return [self.XOR(x, y) for x, y in zip(a[0], a[1])]
        if op == "add":
            return self.add_bits(a[0], a[1], -self.T)[0]
        if op == "sub":
            return self.add_bits(a[0], [-x for x in a[1]], self.T)[0]
        if op == "shl":
            return self.shift(a[0], a[1], True)
        if op == "lshr":
            return self.shift(a[0], a[1], False)
        if op == "eq":
            return [self.eq_bits(a[0], a[1])]
        if op == "ult":
            return [self.ult_bits(a[0], a[1])]
        if op == "ule":
            return [-self.ult_bits(a[1], a[0])]
        if op == "redor":
            return [self.ORN(a[0])]
        if op == "zext":
            return self.zext_bits(a[0], w)
        if op == "extract":
            hi, lo = t.params
            return a[0][lo: hi + 1]
        if op == "concat":
            out = []
            for bits in reversed(a):
                out += bits
            return out
        if op == "ite":
            c = a[0][0]
            return [self.MUX(c, x, y) for x, y in zip(a[1], a[2])]
        if op in ("memzero", "store"):
            if t.params[0] > MAX_ADDR_WIDTH:
                raise SolverError(
                    f"memory address width {t.params[0]} exceeds {MAX_ADDR_WIDTH}; "
                    "export SMT-LIB (QF_ABV) and use an external solver")
            if op == "memzero":
                return [self.const_bits(0, w) for _ in range(t.depth)]
            words, addr, data = a
            out = []
            for i, word in enumerate(words):
                hit = self.eq_const(addr, i) if i < (1 << len(addr)) else -self.T
                out.append([self.MUX(hit, d, x) for d, x in zip(data, word)])
            return out
        if op == "select":
            words, addr = a
            out = self.const_bits(0, w)
            for i in reversed(range(len(words))):
                if i >= (1 << len(addr)):
                    continue
                hit = self.eq_const(addr, i)
                out = [self.MUX(hit, x, y) for x, y in zip(words[i], out)]
            return out
        raise SolverError(f"cannot bit-blast op {op}")
