"""Turn sequence events into synthetic checker branches.

For each event block the guards on its path are read off as constraints;
signals it touches without a literal value are resolved against the final
target's constraints, directly or through the def-use chain. The resolved
conjunction becomes an ``if`` in one extra combinational process whose
only effect is a marker.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .cfg import CfgSet, build_cfg_set, intra_bfs
from .errors import InstrumentError
from .frontend import ast as A
from .frontend.elaborate import ElaboratedDesign
from .frontend.printer import format_ast, format_expr


@dataclass(frozen=True)
class Constraint:
    signal: str
    value: Optional[A.Const] = None  # None while unresolved
    width: int = 0  # declared width of the signal

    @property
    def resolved(self) -> bool:
        return self.value is not None

    def __str__(self):
        return f"{self.signal}={format_expr(self.value) if self.value is not None else 'UR'}"


@dataclass(frozen=True)
class ConstraintSet:
    owner: str
    resolved: tuple = ()
    unresolved: tuple = ()
    opaque: tuple = ()  # (Expr, polarity) guards carried verbatim

    def value_of(self, signal) -> Optional[A.Const]:
        for c in self.resolved:
            if c.signal == signal:
                return c.value
        return None

    def as_dict(self) -> dict:
        return {c.signal: c.value.value for c in self.resolved}

    def __str__(self):
        parts = [str(c) for c in self.resolved + self.unresolved]
        parts += [("" if p else "!") + f"({format_expr(e)})" for e, p in self.opaque]
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class SyntheticTarget:
    marker: str
    constraints: ConstraintSet
    origin: str  # sequence block the branch stands for
    condition: A.Expr = field(compare=False)
    block: Optional[str] = None  # label inside the instrumented design


@dataclass(frozen=True)
class TargetQueue:
    entries: tuple = ()

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class InstrumentedDesign:
    design: ElaboratedDesign
    cfg: CfgSet = field(repr=False)
    marker_table: dict = field(repr=False)
    targets: TargetQueue = TargetQueue()
    checker: Optional[int] = None  # process id of the checker process

    def emit(self) -> str:
        return format_ast(self.design.ast)


def _split_guard(expr, pol, table, out_resolved, out_opaque):
    if isinstance(expr, A.Binary) and expr.op == "&&" and pol:
        _split_guard(expr.left, True, table, out_resolved, out_opaque)
        _split_guard(expr.right, True, table, out_resolved, out_opaque)
        return
    if isinstance(expr, A.Binary) and expr.op in ("==", "!=") and pol == (expr.op == "=="):
        ref, lit = expr.left, expr.right
        if isinstance(ref, A.Const):
            ref, lit = lit, ref
        if isinstance(ref, A.Ref) and isinstance(lit, A.Const) and table[ref.name].kind != "memory":
            w = table[ref.name].width
            if lit.value >> w == 0:
                out_resolved.append(Constraint(ref.name, lit, w))
                return
    if isinstance(expr, A.Ref) and table[expr.name].kind != "memory":
        w = table[expr.name].width
        if not pol:
            out_resolved.append(Constraint(expr.name, A.Const(0, w), w))
            return
        if w == 1:
            out_resolved.append(Constraint(expr.name, A.Const(1, 1), 1))
            return
    if isinstance(expr, A.Unary) and expr.op == "!" and isinstance(expr.operand, A.Ref):
        _split_guard(expr.operand, not pol, table, out_resolved, out_opaque)
        return
    out_opaque.append((expr, pol))


def extract_constraints(cs: CfgSet, b: str) -> ConstraintSet:
    cfg = cs.cfg_of(b)
    table = cs.design.signal_table
    doms = cfg.dominators(b)
    path = [x for x in intra_bfs(cfg, b) if x in doms]
    resolved, opaque = [], []
    for label in reversed(path):  # root first
        guard = cfg.blocks[label].guard
        if guard is not None:
            _split_guard(guard[0], guard[1], table, resolved, opaque)
    seen, uniq = set(), []
    for c in resolved:
        if c.signal not in seen:
            seen.add(c.signal)
            uniq.append(c)
    unresolved = []
    for s in cs.block(b).stmts:
        if not isinstance(s, A.Assign):
            continue
        names = A.signals_of(s.value) + [s.target.name]
        if s.target.index is not None:
            names += A.signals_of(s.target.index)
        mems = [n for n in names if table[n].kind == "memory"]
        addrs = A.signals_of(s.target.index) if s.target.index is not None else []
        addrs += [x for e in _mem_reads(s.value) for x in A.signals_of(e.addr)]
        for n in mems + addrs + names:
            if n not in seen:
                seen.add(n)
                unresolved.append(Constraint(n, None, table[n].width))
    return ConstraintSet(b, tuple(uniq), tuple(unresolved), tuple(opaque))


def _mem_reads(e):
    if isinstance(e, A.MemRead):
        yield e
    for c in A.expr_children(e):
        yield from _mem_reads(c)


def _value_flow(cs: CfgSet, sig: str) -> list[str]:
    """Signals reached from ``sig`` along assignment data flow, depth-first."""
    order, seen = [], {sig}

    def walk(s):
        for c in cs.cfgs:
            for b in c.blocks.values():
                for st in b.stmts:
                    if isinstance(st, A.Assign) and s in A.signals_of(st.value):
                        d = st.target.name
                        if d not in seen:
                            seen.add(d)
                            order.append(d)
                            walk(d)

    walk(sig)
    return order


def modify(tc: ConstraintSet, sc: ConstraintSet, cs: CfgSet) -> ConstraintSet:
    """Resolve ``sc``'s unresolved signals from ``tc`` and drop the rest."""
    table = cs.design.signal_table
    resolved = list(sc.resolved)
    for u in sc.unresolved:
        if table[u.signal].kind == "memory":
            continue
        v = tc.value_of(u.signal)
        if v is None:
            for dep in _value_flow(cs, u.signal):
                cand = tc.value_of(dep)
                if cand is not None and table[dep].width == table[u.signal].width:
                    v = cand
                    break
        if v is not None:
            resolved.append(Constraint(u.signal, v, u.width))
    return ConstraintSet(sc.owner, tuple(resolved), (), sc.opaque)


def create_branch(sc: ConstraintSet, marker: str, origin: str = "") -> SyntheticTarget:
    terms = []
    for c in sc.resolved:
        terms.append(A.Binary("==", A.Ref(c.signal, c.width), c.value, 1))
    for e, pol in sc.opaque:
        terms.append(e if pol else A.Unary("!", e, 1))
    if not terms:
        raise InstrumentError(f"unconstrained sequence event {origin or sc.owner}")
    cond = terms[0]
    for t in terms[1:]:
        cond = A.Binary("&&", cond, t, 1)
    return SyntheticTarget(marker, sc, origin or sc.owner, cond)


def build_target_queue(cs: CfgSet, target_block: str, sequence) -> TargetQueue:
    tc = extract_constraints(cs, target_block)
    tc = ConstraintSet(tc.owner, tc.resolved, (), tc.opaque)
    entries = []
    for k, b in enumerate(sequence, 1):
        sc = modify(tc, extract_constraints(cs, b), cs)
        entries.append(create_branch(sc, f"Target{k}", b))
    return TargetQueue(tuple(entries))


def instrument_design(d: ElaboratedDesign, tq: TargetQueue) -> InstrumentedDesign:
    procs = list(d.ast.processes)
    checker = None
    if len(tq):
        checker = max(p.id for p in procs) + 1
        body = A.Block(tuple(A.If(t.condition, A.Block((A.Display(t.marker),))) for t in tq))
        procs.append(A.Process(checker, "comb", body))
    new = ElaboratedDesign(replace(d.ast, processes=tuple(procs)), d.signal_table, d.path)
    cs = build_cfg_set(new)
    markers = {}
    for label, b in cs.blocks.items():
        texts = [s.text for s in b.stmts if isinstance(s, A.Display)]
        markers[label] = texts[0] if texts else label
    placed = []
    if checker is not None:
        ccfg = cs.cfg(checker)
        for t in tq:
            hits = [b.label for b in ccfg.blocks.values()
                    if any(isinstance(s, A.Display) and s.text == t.marker for s in b.stmts)]
            if len(hits) != 1:
                raise InstrumentError(f"cannot place marker {t.marker}")
            markers[hits[0]] = t.marker
            placed.append(replace(t, block=hits[0]))
    return InstrumentedDesign(new, cs, markers, TargetQueue(tuple(placed)), checker)
