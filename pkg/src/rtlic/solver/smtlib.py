"""SMT-LIB2 export of constraint vectors (QF_BV scalarized, or QF_ABV)."""

from __future__ import annotations

import os
import re
import subprocess
from typing import Optional

from ..errors import SolverError
from .terms import Term, iter_dag


def _bv(value, width):
    return f"(_ bv{value} {width})"


def _b1(cond):
    return f"(ite {cond} #b1 #b0)"


def _zext(s, frm, to):
    if to == frm:
        return s
    if to < frm:
        return f"((_ extract {to - 1} 0) {s})"
    return f"((_ zero_extend {to - frm}) {s})"


class _Emitter:
    def __init__(self, scalarize: bool):
        self.scalarize = scalarize
        self.names: dict[int, object] = {}
        self.defs: list[str] = []
        self.decls: dict[str, int] = {}
        self.count = 0

    def define(self, sort, body):
        self.count += 1
        name = f"t{self.count}"
        self.defs.append(f"(define-fun {name} () {sort} {body})")
        return name

    def emit(self, root: Term) -> str:
        for t in iter_dag([root]):
            if id(t) not in self.names:
                self.names[id(t)] = self.node(t, [self.names[id(a)] for a in t.args])
        return self.names[id(root)]

    def node(self, t: Term, a):
        op, w = t.op, t.width
        bvs = f"(_ BitVec {w})"
        if op == "const":
            return _bv(t.value, w)
        if op == "var":
            self.decls[t.params[0]] = w
            return t.params[0]
        if t.is_array:
            return self.array(t, a)
        if op == "select":
            return self.select(t, a)
        simple = {"not": "bvnot", "neg": "bvneg", "and": "bvand", "or": "bvor", "xor": "bvxor",
                  "add": "bvadd", "sub": "bvsub"}
        if op in simple:
            body = f"({simple[op]} {' '.join(a)})"
        elif op in ("shl", "lshr"):
            wb = t.args[1].width
            big = max(w, wb)
            fn = "bvshl" if op == "shl" else "bvlshr"
            body = _zext(f"({fn} {_zext(a[0], w, big)} {_zext(a[1], wb, big)})", big, w)
        elif op == "eq":
            body = _b1(f"(= {a[0]} {a[1]})")
        elif op == "ult":
            body = _b1(f"(bvult {a[0]} {a[1]})")
        elif op == "ule":
            body = _b1(f"(bvule {a[0]} {a[1]})")
        elif op == "redor":
            body = _b1(f"(not (= {a[0]} {_bv(0, t.args[0].width)}))")
        elif op == "zext":
            body = _zext(a[0], t.args[0].width, w)
        elif op == "extract":
            body = f"((_ extract {t.params[0]} {t.params[1]}) {a[0]})"
        elif op == "concat":
            body = f"(concat {' '.join(a)})"
        elif op == "ite":
            body = f"(ite (= {a[0]} #b1) {a[1]} {a[2]})"
        else:
            raise SolverError(f"cannot export op {op}")
        return self.define(bvs, body)

    def _addr_ok(self, addr_term: Term, addr, depth):
        if depth >= (1 << addr_term.width):
            return None
        return f"(bvult {addr} {_bv(depth, addr_term.width)})"

    def array(self, t: Term, a):
        aw, w, depth = t.params[0], t.width, t.depth
        if self.scalarize:
            if t.op == "memzero":
                return [_bv(0, w)] * depth
            words, addr, data = a
            addr_t = t.args[1]
            out = []
            for i, word in enumerate(words):
                if i >= (1 << addr_t.width):
                    out.append(word)
                    continue
                hit = f"(= {addr} {_bv(i, addr_t.width)})"
                out.append(self.define(f"(_ BitVec {w})", f"(ite {hit} {data} {word})"))
            return out
        sort = f"(Array (_ BitVec {aw}) (_ BitVec {w}))"
        if t.op == "memzero":
            return f"((as const {sort}) {_bv(0, w)})"
        arr, addr, data = a
        addr_t = t.args[1]
        idx = _zext(addr, addr_t.width, aw)
        body = f"(store {arr} {idx} {data})"
        guard = self._addr_ok(addr_t, addr, depth)
        if guard is None and addr_t.width > aw:
            guard = f"(bvult {addr} {_bv(depth, addr_t.width)})"
        if guard is not None:
            body = f"(ite {guard} {body} {arr})"
        return self.define(sort, body)

    def select(self, t: Term, a):
        arr, addr = a
        arr_t, addr_t = t.args
        w = t.width
        if self.scalarize:
            out = _bv(0, w)
            for i in reversed(range(len(arr))):
                if i >= (1 << addr_t.width):
                    continue
                out = f"(ite (= {addr} {_bv(i, addr_t.width)}) {arr[i]} {out})"
            return self.define(f"(_ BitVec {w})", out)
        aw, depth = arr_t.params[0], arr_t.depth
        body = f"(select {arr} {_zext(addr, addr_t.width, aw)})"
        guard = self._addr_ok(addr_t, addr, depth)
        if guard is None and addr_t.width > aw:
            guard = f"(bvult {addr} {_bv(depth, addr_t.width)})"
        if guard is not None:
            body = f"(ite {guard} {body} {_bv(0, w)})"
        return self.define(f"(_ BitVec {w})", body)


def emit_smtlib(cv, scalarize: bool = True) -> str:
    """Script with declarations, one assert per predicate, check-sat, get-model."""
    em = _Emitter(scalarize)
    asserts = []
    for p in cv.predicates():
        name = em.emit(p.term)
        asserts.append(f"(assert (= {name} {'#b1' if p.polarity else '#b0'}))")
    uses_arrays = any(t.is_array for p in cv.predicates() for t in iter_dag([p.term]))
    logic = "QF_ABV" if uses_arrays and not scalarize else "QF_BV"
    lines = [f"(set-logic {logic})", "(set-option :produce-models true)"]
    lines += [f"(declare-fun {n} () (_ BitVec {w}))" for n, w in sorted(em.decls.items())]
    lines += em.defs + asserts + ["(check-sat)", "(get-model)"]
    return "\n".join(lines) + "\n"


def to_sexpr(t: Term) -> str:
    if t.op == "const":
        return f"{t.value}:{t.width}"
    if t.op == "var":
        return t.params[0]
    inner = " ".join(to_sexpr(a) for a in t.args)
    extra = "".join(f" {p}" for p in t.params) if t.op == "extract" else ""
    return f"({t.op}{extra} {inner})"


_MODEL_RE = re.compile(r"\(define-fun\s+(\S+)\s+\(\)\s+\(_ BitVec \d+\)\s+(#b[01]+|#x[0-9a-fA-F]+|\(_ bv\d+ \d+\))")


def run_external(script: str, executable: Optional[str] = None, timeout: float = 60.0):
    """Pipe ``script`` to an external SMT solver; returns (verdict, {var: value})."""
    exe = executable or os.environ.get("RTLIC_SOLVER")
    if not exe:
        raise SolverError("no external solver configured (set RTLIC_SOLVER)")
    cmd = exe.split()
    if len(cmd) == 1 and os.path.basename(cmd[0]).startswith("z3"):
        cmd += ["-in", "-smt2"]
    elif len(cmd) == 1 and os.path.basename(cmd[0]).startswith("cvc5"):
        cmd += ["--lang", "smt2", "--produce-models"]
    try:
        proc = subprocess.run(cmd, input=script, capture_output=True, text=True, timeout=timeout)
    except (OSError, subprocess.TimeoutExpired) as e:
        raise SolverError(f"external solver failed: {e}") from e
    out = proc.stdout.strip()
    first = out.splitlines()[0].strip() if out else ""
    if first not in ("sat", "unsat", "unknown"):
        raise SolverError(f"unexpected external solver output: {out[:200]!r}")
    model = {}
    for name, val in _MODEL_RE.findall(out):
        if val.startswith("#b"):
            model[name] = int(val[2:], 2)
        elif val.startswith("#x"):
            model[name] = int(val[2:], 16)
        else:
            model[name] = int(val.split()[1][2:])
    return first, model


def external_solve(cv, executable: Optional[str] = None, scalarize: bool = True):
    """Solve ``cv`` with an external SMT-LIB2 solver; same contract as the internal ``solve``."""
    from .core import SolveResult, complete_model

    verdict, found = run_external(emit_smtlib(cv, scalarize), executable)
    if verdict != "sat":
        return SolveResult(verdict)
    return SolveResult("sat", complete_model(cv, found))
