"""Independent reference implementations used to check the package.

Nothing here imports the simulator, the CFG builder or the bit-blaster; the
oracles work straight from the elaborated AST or from term semantics.
"""

from __future__ import annotations

import itertools
import random

import numpy as np

from rtlic.frontend import ast as A
from rtlic.solver import terms as T
from rtlic.solver.core import ConstraintVector, Predicate, var_name

# -- random designs ----------------------------------------------------------

_BIN = ["==", "!=", "<", ">=", "+", "-", "&", "|", "^", "&&", "||"]


def random_design(rng: random.Random, n_clocked: int = 2, n_comb: int = 1) -> str:
    ins = {f"i{k}": rng.randint(1, 4) for k in range(3)}
    ins["a"] = 2  # memory address
    regs = {f"q{k}": rng.randint(1, 4) for k in range(n_clocked)}
    combs = {f"c{k}": rng.randint(1, 4) for k in range(n_comb)}
    lines = [f"module rnd(clk, {', '.join(ins)}, q0);", " input clk;"]
    for name, w in ins.items():
        lines.append(f" input [{w - 1}:0] {name};")
    lines.append(f" output reg [{regs['q0'] - 1}:0] q0;")
    for name, w in list(regs.items())[1:]:
        lines.append(f" reg [{w - 1}:0] {name};")
    for name, w in combs.items():
        lines.append(f" reg [{w - 1}:0] {name};")
    lines.append(" reg [3:0] m [0:3];")

    def leaf(readable):
        r = rng.random()
        if r < 0.25:
            return str(rng.randint(0, 9))
        if r < 0.35:
            return f"m[{rng.choice(['a', 'i0', '2'])}]"
        return rng.choice(readable)

    def expr(readable, depth=2):
        if depth == 0 or rng.random() < 0.3:
            return leaf(readable)
        r = rng.random()
        if r < 0.1:
            return f"~{expr(readable, depth - 1)}"
        if r < 0.15:
            return f"!{expr(readable, depth - 1)}"
        if r < 0.2:
            return f"({expr(readable, depth - 1)} ? {leaf(readable)} : {leaf(readable)})"
        return f"({expr(readable, depth - 1)} {rng.choice(_BIN)} {expr(readable, depth - 1)})"

    def body(targets, readable, op, depth, mem_ok):
        out = []
        for _ in range(rng.randint(1, 2)):
            if depth > 0 and rng.random() < 0.5:
                then = body(targets, readable, op, depth - 1, mem_ok)
                s = f"if ({expr(readable, 1)}) begin {' '.join(then)} end"
                if rng.random() < 0.6:
                    s += f" else begin {' '.join(body(targets, readable, op, depth - 1, mem_ok))} end"
                out.append(s)
            elif mem_ok and rng.random() < 0.2:
                out.append(f"m[{rng.choice(['a', 'i0'])}] {op} {expr(readable)};")
            else:
                out.append(f"{rng.choice(targets)} {op} {expr(readable)};")
        return out

    base = list(ins) + list(regs)
    for k, name in enumerate(regs):
        readable = base + list(combs)
        stmts = body([name], readable, "<=", 2, k == 0)
        lines.append(f" always @(posedge clk) begin {' '.join(stmts)} end")
    for k, name in enumerate(combs):
        readable = base + list(combs)[:k]
        stmts = [f"{name} = {expr(readable)};"] + body([name], readable, "=", 2, False)
        lines.append(f" always @(*) begin {' '.join(stmts)} end")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


# -- reference simulator ------------------------------------------------------

def _mask(w):
    return (1 << w) - 1


def ref_eval(e, val):
    if isinstance(e, A.Const):
        return e.value
    if isinstance(e, A.Ref):
        return val[e.name]
    if isinstance(e, A.MemRead):
        a = ref_eval(e.addr, val)
        return val[e.mem][a] if a < len(val[e.mem]) else 0
    if isinstance(e, A.Slice):
        return (ref_eval(e.base, val) >> e.lsb.value) & _mask(e.width)
    if isinstance(e, A.BitSel):
        i = ref_eval(e.index, val)
        return (ref_eval(e.base, val) >> i) & 1 if i < e.base.width else 0
    if isinstance(e, A.Unary):
        x = ref_eval(e.operand, val)
        return {"~": lambda: ~x & _mask(e.width), "-": lambda: -x & _mask(e.width),
                "!": lambda: int(x == 0)}[e.op]()
    if isinstance(e, A.Binary):
        x, y = ref_eval(e.left, val), ref_eval(e.right, val)
        m = _mask(e.width)
        table = {
            "==": lambda: int(x == y), "!=": lambda: int(x != y), "<": lambda: int(x < y),
            "<=": lambda: int(x <= y), ">": lambda: int(x > y), ">=": lambda: int(x >= y),
            "&&": lambda: int(bool(x) and bool(y)), "||": lambda: int(bool(x) or bool(y)),
            "&": lambda: x & y, "|": lambda: x | y, "^": lambda: x ^ y,
            "+": lambda: (x + y) & m, "-": lambda: (x - y) & m,
            "<<": lambda: (x << y) & m, ">>": lambda: x >> y,
        }
        return table[e.op]()
    if isinstance(e, A.Concat):
        v = 0
        for p in e.parts:
            v = (v << p.width) | ref_eval(p, val)
        return v
    if isinstance(e, A.Mux):
        return ref_eval(e.if_true, val) if ref_eval(e.cond, val) else ref_eval(e.if_false, val)
    raise TypeError(e)


def _exec(s, val, table, nba):
    if isinstance(s, A.Block):
        for x in s.stmts:
            _exec(x, val, table, nba)
    elif isinstance(s, A.If):
        if ref_eval(s.cond, val):
            _exec(s.then, val, table, nba)
        elif s.otherwise is not None:
            _exec(s.otherwise, val, table, nba)
    elif isinstance(s, A.Assign):
        name = s.target.name
        v = ref_eval(s.value, val) & _mask(table[name].width)
        a = ref_eval(s.target.index, val) if s.target.index is not None else None
        if nba is not None:
            nba.append((name, a, v))
        else:
            _store(val, name, a, v)


def _store(val, name, a, v):
    if a is None:
        val[name] = v
    elif a < len(val[name]):
        val[name] = val[name][:a] + [v] + val[name][a + 1:]


def ref_simulate(d, tests, n) -> list[dict]:
    """Per-cycle state snapshots of the elaborated design ``d``."""
    table = d.signal_table
    val = {k: ([0] * s.depth if s.kind == "memory" else 0) for k, s in table.items()}
    comb = [p for p in d.processes if p.kind == "comb"]
    clocked = [p for p in d.processes if p.kind == "clocked"]

    def settle():
        for _ in range(2 * len(comb) + 3):
            before = dict(val)
            for p in comb:
                _exec(p.body, val, table, None)
            if val == before:
                return
        raise RuntimeError("no fixpoint")

    out = []
    for c in range(1, n + 1):
        for k in d.inputs():
            val[k] = tests.value(k, c)
        settle()
        nba = []
        for p in clocked:
            _exec(p.body, val, table, nba)
        for name, a, v in nba:
            _store(val, name, a, v)
        settle()
        out.append({k: (list(v) if isinstance(v, list) else v) for k, v in val.items()})
    return out


# -- shortest paths -------------------------------------------------------------

def floyd_distances(nodes, edges, target) -> dict:
    """Distance from every node to ``target`` along ``edges`` (unit weights)."""
    inf = float("inf")
    idx = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    d = [[inf] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = 0
    for s, t in edges:
        d[idx[s]][idx[t]] = min(d[idx[s]][idx[t]], 1)
    for k in range(n):
        for i in range(n):
            dik = d[i][k]
            if dik == inf:
                continue
            row_k, row_i = d[k], d[i]
            for j in range(n):
                if dik + row_k[j] < row_i[j]:
                    row_i[j] = dik + row_k[j]
    t = idx[target]
    return {x: int(d[idx[x]][t]) for x in nodes if d[idx[x]][t] != inf}


# -- exhaustive evaluation of terms -----------------------------------------------

def np_eval(t: T.Term, env: dict, memo=None):
    """Vectorised evaluation: ``env`` maps variable names to uint64 arrays."""
    memo = {} if memo is None else memo
    if id(t) in memo:
        return memo[id(t)]
    size = len(next(iter(env.values()))) if env else 1
    a = [np_eval(x, env, memo) for x in t.args]
    w = t.width
    m = np.uint64((1 << w) - 1)
    op = t.op
    if op == "const":
        r = np.full(size, t.value, dtype=np.uint64)
    elif op == "var":
        r = env[t.params[0]]
    elif op == "not":
        r = ~a[0] & m
    elif op == "neg":
        r = (np.uint64(0) - a[0]) & m
    elif op == "and":
        r = a[0] & a[1]
    elif op == "or":
        r = a[0] | a[1]
    elif op == "xor":
        r = a[0] ^ a[1]
    elif op == "add":
        r = (a[0] + a[1]) & m
    elif op == "sub":
        r = (a[0] - a[1]) & m
    elif op in ("shl", "lshr"):
        amt = a[1]
        safe = np.minimum(amt, np.uint64(63))
        shifted = (a[0] << safe) & m if op == "shl" else a[0] >> safe
        r = np.where(amt < np.uint64(w), shifted, np.uint64(0))
    elif op == "eq":
        r = (a[0] == a[1]).astype(np.uint64)
    elif op == "ult":
        r = (a[0] < a[1]).astype(np.uint64)
    elif op == "ule":
        r = (a[0] <= a[1]).astype(np.uint64)
    elif op == "redor":
        r = (a[0] != 0).astype(np.uint64)
    elif op == "zext":
        r = a[0] & m
    elif op == "extract":
        hi, lo = t.params
        r = (a[0] >> np.uint64(lo)) & m
    elif op == "concat":
        r = np.zeros(size, dtype=np.uint64)
        for x, part in zip(a, t.args):
            r = (r << np.uint64(part.width)) | x
    elif op == "ite":
        r = np.where(a[0] == 1, a[1], a[2])
    elif op == "memzero":
        r = [np.zeros(size, dtype=np.uint64) for _ in range(t.depth)]
    elif op == "store":
        words, addr, data = a
        r = [np.where(addr == np.uint64(i), data, word) for i, word in enumerate(words)]
    elif op == "select":
        words, addr = a
        r = np.zeros(size, dtype=np.uint64)
        for i, word in enumerate(words):
            r = np.where(addr == np.uint64(i), word, r)
    else:
        raise ValueError(op)
    if isinstance(r, np.ndarray) and r.shape != (size,):
        r = np.broadcast_to(r, (size,)).copy()
    memo[id(t)] = r
    return r


def enumerate_sat(cv: ConstraintVector) -> bool:
    """Brute-force satisfiability over every input bit of the vector."""
    vars_ = {name: v.width for name, v in T.variables(p.term for p in cv.predicates()).items()}
    names = sorted(vars_)
    total = sum(vars_.values())
    size = 1 << total
    space = np.arange(size, dtype=np.uint64)
    env, shift = {}, 0
    for nme in names:
        w = vars_[nme]
        env[nme] = (space >> np.uint64(shift)) & np.uint64((1 << w) - 1)
        shift += w
    if not env:
        env = {"__dummy": np.zeros(1, dtype=np.uint64)}
    ok = np.ones(len(next(iter(env.values()))), dtype=bool)
    memo: dict = {}
    for p in cv.predicates():
        ok &= np_eval(p.term, env, memo) == np.uint64(int(p.polarity))
    return bool(ok.any())


def random_cv(rng: random.Random, max_bits: int = 20) -> ConstraintVector:
    """A random constraint vector over at most ``max_bits`` input bits."""
    ncycles = rng.randint(1, 3)
    widths = {}
    budget = rng.randint(2, max_bits)
    sigs = ["x", "y", "z"]
    while True:
        widths = {s: rng.randint(1, 4) for s in sigs[: rng.randint(1, 3)]}
        if sum(widths.values()) * ncycles <= budget:
            break
        if ncycles > 1:
            ncycles -= 1
    mem = T.memzero(4, 3, 2)

    def leaf(cycle, w):
        if rng.random() < 0.3:
            return T.const(rng.randrange(1 << w), w)
        s = rng.choice(list(widths))
        return T.zext(T.var(var_name(s, rng.randint(1, cycle)), widths[s]), w)

    def term(cycle, w, depth):
        if depth == 0:
            return leaf(cycle, w)
        r = rng.random()
        x = term(cycle, w, depth - 1)
        y = term(cycle, w, depth - 1)
        if r < 0.55:
            return rng.choice([T.add, T.sub, T.bvand, T.bvor, T.bvxor])(x, y)
        if r < 0.65:
            return T.bvnot(x)
        if r < 0.72:
            return rng.choice([T.shl, T.lshr])(x, T.extract(y, min(1, w - 1), 0))
        if r < 0.8:
            return T.ite(boolean(cycle, 0), x, y)
        if r < 0.9:
            return T.zext(T.select(T.store(mem, T.extract(T.zext(x, 2), 1, 0), T.zext(y, 3)),
                                   T.extract(T.zext(leaf(cycle, 2), 2), 1, 0)), w)
        return T.zext(T.concat([T.extract(x, 0, 0), T.extract(y, 0, 0)]), w)

    def boolean(cycle, depth):
        w = rng.randint(1, 4)
        x, y = term(cycle, w, depth), term(cycle, w, depth)
        return rng.choice([T.eq, T.ult, T.ule, lambda a, b: T.redor(T.bvand(a, b))])(x, y)

    per = []
    for c in range(1, ncycles + 1):
        per.append(tuple(Predicate(boolean(c, rng.randint(0, 2)), rng.random() < 0.7, c)
                         for _ in range(rng.randint(0, 2))))
    pivot = Predicate(boolean(ncycles, rng.randint(0, 2)), rng.random() < 0.5, ncycles)
    inputs = tuple(widths.items())
    defaults = {var_name(s, c): 0 for c in range(1, ncycles + 1) for s in widths}
    return ConstraintVector(tuple(per), pivot, inputs, defaults)


def all_assignments(widths: dict):
    names = sorted(widths)
    for vals in itertools.product(*(range(1 << widths[n]) for n in names)):
        yield dict(zip(names, vals))
