"""Hash-consed bit-vector and array terms.

Terms are interned, so structurally equal terms are the same object and
identity comparison is exact. Constructors fold constants eagerly; a term
built only from constants is always a ``const`` node.
"""

from __future__ import annotations

from typing import Iterable

from ..bv import mask

_TABLE: dict = {}


class Term:
    __slots__ = ("op", "args", "width", "params", "depth", "_hash")

    def __init__(self, op, args, width, params, depth):
        self.op = op
        self.args = args
        self.width = width
        self.params = params
        self.depth = depth  # > 0 for array terms: number of words
        self._hash = hash((op, tuple(id(a) for a in args), width, params, depth))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __repr__(self):
        from .smtlib import to_sexpr
        return to_sexpr(self)

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    @property
    def value(self) -> int:
        return self.params[0]

    @property
    def is_array(self) -> bool:
        return self.depth > 0


def _mk(op, args=(), width=1, params=(), depth=0) -> Term:
    key = (op, tuple(id(a) for a in args), width, params, depth)
    t = _TABLE.get(key)
    if t is None:
        t = Term(op, tuple(args), width, params, depth)
        _TABLE[key] = t
    return t


def const(value: int, width: int) -> Term:
    return _mk("const", (), width, (value & mask(width),))


def var(name: str, width: int) -> Term:
    return _mk("var", (), width, (name,))


TRUE = const(1, 1)
FALSE = const(0, 1)


def bool_const(b: bool) -> Term:
    return TRUE if b else FALSE


def zext(a: Term, width: int) -> Term:
    if width == a.width:
        return a
    if width < a.width:
        return extract(a, width - 1, 0)
    if a.is_const:
        return const(a.value, width)
    return _mk("zext", (a,), width)


def extract(a: Term, hi: int, lo: int) -> Term:
    if lo == 0 and hi == a.width - 1:
        return a
    if a.is_const:
        return const(a.value >> lo, hi - lo + 1)
    return _mk("extract", (a,), hi - lo + 1, (hi, lo))


def bvnot(a: Term) -> Term:
    if a.is_const:
        return const(~a.value, a.width)
    if a.op == "not":
        return a.args[0]
    return _mk("not", (a,), a.width)


def neg(a: Term) -> Term:
    if a.is_const:
        return const(-a.value, a.width)
    return _mk("neg", (a,), a.width)


def _same(a: Term, b: Term):
    w = max(a.width, b.width)
    return zext(a, w), zext(b, w), w


def bvand(a: Term, b: Term) -> Term:
    a, b, w = _same(a, b)
    if a.is_const and b.is_const:
        return const(a.value & b.value, w)
    for x, y in ((a, b), (b, a)):
        if x.is_const:
            if x.value == 0:
                return x
            if x.value == mask(w):
                return y
    if a is b:
        return a
    return _mk("and", _order(a, b), w)


def bvor(a: Term, b: Term) -> Term:
    a, b, w = _same(a, b)
    if a.is_const and b.is_const:
        return const(a.value | b.value, w)
    for x, y in ((a, b), (b, a)):
        if x.is_const:
            if x.value == 0:
                return y
            if x.value == mask(w):
                return x
    if a is b:
        return a
    return _mk("or", _order(a, b), w)


def bvxor(a: Term, b: Term) -> Term:
    a, b, w = _same(a, b)
    if a.is_const and b.is_const:
        return const(a.value ^ b.value, w)
    for x, y in ((a, b), (b, a)):
        if x.is_const and x.value == 0:
            return y
    if a is b:
        return const(0, w)
    return _mk("xor", _order(a, b), w)


def _order(a, b):
    return (a, b) if id(a) <= id(b) else (b, a)


def add(a: Term, b: Term) -> Term:
    a, b, w = _same(a, b)
    if a.is_const and b.is_const:
        return const(a.value + b.value, w)
    if a.is_const and a.value == 0:
        return b
    if b.is_const and b.value == 0:
        return a
    return _mk("add", (a, b), w)


def sub(a: Term, b: Term) -> Term:
    a, b, w = _same(a, b)
    if a.is_const and b.is_const:
        return const(a.value - b.value, w)
    if b.is_const and b.value == 0:
        return a
    return _mk("sub", (a, b), w)


def shl(a: Term, b: Term) -> Term:
    if a.is_const and b.is_const:
        return const(a.value << b.value if b.value < a.width else 0, a.width)
    if b.is_const and b.value == 0:
        return a
    return _mk("shl", (a, b), a.width)


def lshr(a: Term, b: Term) -> Term:
    if a.is_const and b.is_const:
        return const(a.value >> b.value if b.value < a.width else 0, a.width)
    if b.is_const and b.value == 0:
        return a
    return _mk("lshr", (a, b), a.width)


def eq(a: Term, b: Term) -> Term:
    a, b, _ = _same(a, b)
    if a.is_const and b.is_const:
        return bool_const(a.value == b.value)
    if a is b:
        return TRUE
    if a.width == 1:
        # 1-bit equality is xnor; keep literals small
        if a.is_const:
            return b if a.value else bvnot(b)
        if b.is_const:
            return a if b.value else bvnot(a)
    return _mk("eq", _order(a, b), 1)


def ult(a: Term, b: Term) -> Term:
    a, b, _ = _same(a, b)
    if a.is_const and b.is_const:
        return bool_const(a.value < b.value)
    if a is b or (b.is_const and b.value == 0):
        return FALSE
    return _mk("ult", (a, b), 1)


def ule(a: Term, b: Term) -> Term:
    a, b, _ = _same(a, b)
    if a.is_const and b.is_const:
        return bool_const(a.value <= b.value)
    if a is b or (a.is_const and a.value == 0):
        return TRUE
    return _mk("ule", (a, b), 1)


def redor(a: Term) -> Term:
    if a.width == 1:
        return a
    if a.is_const:
        return bool_const(a.value != 0)
    return _mk("redor", (a,), 1)


def land(a: Term, b: Term) -> Term:
    return bvand(redor(a), redor(b))


def lor(a: Term, b: Term) -> Term:
    return bvor(redor(a), redor(b))


def lnot(a: Term) -> Term:
    return bvnot(redor(a))


def conj(terms: Iterable[Term]) -> Term:
    out = TRUE
    for t in terms:
        out = bvand(out, redor(t))
        if out is FALSE:
            return out
    return out


def concat(parts) -> Term:
    """Concatenate, most significant part first."""
    parts = list(parts)
    if len(parts) == 1:
        return parts[0]
    width = sum(p.width for p in parts)
    if all(p.is_const for p in parts):
        v = 0
        for p in parts:
            v = (v << p.width) | p.value
        return const(v, width)
    return _mk("concat", tuple(parts), width)


def ite(c: Term, a: Term, b: Term) -> Term:
    c = redor(c)
    a, b, w = _same(a, b)
    if c.is_const:
        return a if c.value else b
    if a is b:
        return a
    if w == 1 and a.is_const and b.is_const:
        return c if a.value else bvnot(c)
    return _mk("ite", (c, a, b), w)


# -- arrays ----------------------------------------------------------------

def memzero(depth: int, width: int, addr_width: int) -> Term:
    return _mk("memzero", (), width, (addr_width,), depth)


def memconst(words, width: int, addr_width: int) -> Term:
    """Concrete memory contents as a chain of stores over the zero array."""
    arr = memzero(len(words), width, addr_width)
    for i, w in enumerate(words):
        if w:
            arr = store(arr, const(i, addr_width), const(w, width))
    return arr


def store(arr: Term, addr: Term, data: Term) -> Term:
    addr = zext(addr, arr.params[0]) if addr.width <= arr.params[0] else addr
    data = zext(data, arr.width)
    if addr.is_const and addr.value >= arr.depth:
        return arr  # out-of-range writes are dropped
    if addr.is_const and arr.op == "store" and arr.args[1].is_const:
        # keep concrete store chains canonical: one store per concrete address
        if arr.args[1].value == addr.value:
            return store(arr.args[0], addr, data)
        if arr.args[1].value > addr.value:
            inner = store(arr.args[0], addr, data)
            return _mk("store", (inner, arr.args[1], arr.args[2]), arr.width, arr.params, arr.depth)
    if addr.is_const and arr.op == "memzero" and data.is_const and data.value == 0:
        return arr
    return _mk("store", (arr, addr, data), arr.width, arr.params, arr.depth)


def select(arr: Term, addr: Term) -> Term:
    while True:
        if arr.op == "memzero":
            return const(0, arr.width)
        if addr.is_const and addr.value >= arr.depth:
            return const(0, arr.width)
        a2 = arr.args[1]
        if addr is a2:
            return arr.args[2]
        if addr.is_const and a2.is_const:
            if addr.value == a2.value:
                return arr.args[2]
            arr = arr.args[0]
            continue
        break
    return _mk("select", (arr, addr), arr.width)


# -- traversal helpers ------------------------------------------------------

def iter_dag(roots: Iterable[Term]):
    """Post-order over the shared DAG below ``roots``."""
    seen = set()
    out = []
    stack = [(r, False) for r in roots]
    while stack:
        t, done = stack.pop()
        if done:
            out.append(t)
            continue
        if id(t) in seen:
            continue
        seen.add(id(t))
        stack.append((t, True))
        for a in t.args:
            if id(a) not in seen:
                stack.append((a, False))
    return out


def variables(roots: Iterable[Term]) -> dict[str, Term]:
    out = {}
    for t in iter_dag(roots):
        if t.op == "var":
            out[t.params[0]] = t
    return dict(sorted(out.items()))


def evaluate(t: Term, env: dict, memo=None):
    """Concrete value of ``t``; arrays evaluate to a list of words."""
    memo = {} if memo is None else memo
    for n in iter_dag([t]):
        if id(n) in memo:
            continue
        memo[id(n)] = _eval_node(n, [memo[id(a)] for a in n.args], env)
    return memo[id(t)]


def _eval_node(n: Term, a, env):
    op, w = n.op, n.width
    m = mask(w)
    if op == "const":
        return n.value
    if op == "var":
        return env[n.params[0]] & m
    if op == "not":
        return ~a[0] & m
    if op == "neg":
        return -a[0] & m
    if op == "and":
        return a[0] & a[1]
    if op == "or":
        return a[0] | a[1]
    if op == "xor":
        return a[0] ^ a[1]
    if op == "add":
        return (a[0] + a[1]) & m
    if op == "sub":
        return (a[0] - a[1]) & m
    if op == "shl":
        return (a[0] << a[1]) & m if a[1] < w else 0
    if op == "lshr":
        return a[0] >> a[1] if a[1] < w else 0
    if op == "eq":
        return int(a[0] == a[1])
    if op == "ult":
        return int(a[0] < a[1])
    if op == "ule":
        return int(a[0] <= a[1])
    if op == "redor":
        return int(a[0] != 0)
    if op == "zext":
        return a[0]
    if op == "extract":
        hi, lo = n.params
        return (a[0] >> lo) & mask(hi - lo + 1)
    if op == "concat":
        v = 0
        for p, val in zip(n.args, a):
            v = (v << p.width) | val
        return v
    if op == "ite":
        return a[1] if a[0] else a[2]
    if op == "memzero":
        return [0] * n.depth
    if op == "store":
        words = list(a[0])
        if a[1] < n.depth:
            words[a[1]] = a[2]
        return words
    if op == "select":
        return a[0][a[1]] if a[1] < len(a[0]) else 0
    raise ValueError(f"unknown op {op}")
