"""Per-process control-flow graphs with def-use edges between processes.

Block labels follow a fixed convention: each process has an entry block
``E<pid>``; the two children of every ``if`` are numbered consecutively
(then-block first) as ``B<n>`` from a counter shared across the design, and
the then-subtree is numbered before the else-subtree. Join blocks created
after an ``if`` that is followed by more statements are numbered after all
branch blocks of their process. For the memory example this reproduces the
B1..B16 numbering used in its documentation, with the implicit else blocks
taking the otherwise unused ids.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .errors import RtlicError
from .frontend import ast as A
from .frontend.elaborate import ElaboratedDesign


@dataclass(frozen=True)
class Block:
    label: str
    process: int
    key: tuple
    stmts: tuple = ()
    guard: Optional[tuple] = None  # (Expr, polarity) under which the block is entered
    branch: Optional[A.Expr] = None  # condition of the if that ends the block
    branch_line: int = 0
    defined: tuple = ()
    used: tuple = ()
    span: tuple = (0, 0)

    @property
    def is_branch(self) -> bool:
        return self.branch is not None


@dataclass(frozen=True)
class Cfg:
    process_id: int
    kind: str
    entry: str
    blocks: dict  # label -> Block, creation order
    edges: tuple  # (src, dst, polarity) with polarity True/False/None

    def successors(self, label) -> list[tuple[str, Optional[bool]]]:
        return [(d, p) for s, d, p in self.edges if s == label]

    def predecessors(self, label) -> list[str]:
        return [s for s, d, _ in self.edges if d == label]

    def succ(self, label, polarity) -> Optional[str]:
        for s, d, p in self.edges:
            if s == label and p is polarity:
                return d
        return None

    def dominators(self, label) -> set[str]:
        """Blocks lying on every path from the entry to ``label``."""
        nodes = list(self.blocks)
        dom = {n: set(nodes) for n in nodes}
        dom[self.entry] = {self.entry}
        preds = {n: self.predecessors(n) for n in nodes}
        changed = True
        while changed:
            changed = False
            for n in nodes:
                if n == self.entry or not preds[n]:
                    continue
                new = set.intersection(*(dom[p] for p in preds[n])) | {n}
                if new != dom[n]:
                    dom[n] = new
                    changed = True
        return dom[label]


@dataclass(frozen=True)
class CfgSet:
    design: ElaboratedDesign = field(repr=False)
    cfgs: tuple
    inter_edges: tuple  # (def_block, use_block, signal)

    @property
    def blocks(self) -> dict:
        out = {}
        for c in self.cfgs:
            out.update(c.blocks)
        return out

    def block(self, label) -> Block:
        for c in self.cfgs:
            if label in c.blocks:
                return c.blocks[label]
        raise RtlicError(f"unknown block {label}")

    def cfg_of(self, label) -> Cfg:
        for c in self.cfgs:
            if label in c.blocks:
                return c
        raise RtlicError(f"unknown block {label}")

    def cfg(self, process_id) -> Cfg:
        for c in self.cfgs:
            if c.process_id == process_id:
                return c
        raise RtlicError(f"unknown process {process_id}")


@dataclass(frozen=True)
class DistanceMap:
    target: str
    dist: dict

    def get(self, label) -> Optional[int]:
        return self.dist.get(label)


def stmt_defs(s) -> list[str]:
    return [s.target.name] if isinstance(s, A.Assign) else []


def stmt_uses(s) -> list[str]:
    if not isinstance(s, A.Assign):
        return []
    out = A.signals_of(s.value)
    if s.target.index is not None:
        out += [x for x in A.signals_of(s.target.index) if x not in out]
    return out


class _Builder:
    def __init__(self, pid, counter):
        self.pid = pid
        self.counter = counter
        self.blocks = []  # dicts
        self.edges = []
        self.joins = []

    def new(self, guard, numbered=True):
        b = {"label": None, "stmts": [], "guard": guard, "branch": None, "line": 0, "lines": []}
        if numbered:
            self.counter[0] += 1
            b["label"] = f"B{self.counter[0]}"
            b["num"] = self.counter[0]
        self.blocks.append(b)
        return b

    def run(self, body) -> None:
        entry = self.new(None, numbered=False)
        entry["label"] = f"E{self.pid}"
        entry["num"] = -1
        self.build([body], entry)
        for j in self.joins:
            self.counter[0] += 1
            j["label"] = f"B{self.counter[0]}"
            j["num"] = self.counter[0]

    def build(self, stmts, cur) -> list:
        """Append ``stmts`` starting at ``cur``; return the open exit blocks."""
        work = list(stmts)
        exits = [cur]
        while work:
            s = work.pop(0)
            if isinstance(s, A.Block):
                work[:0] = list(s.stmts)
                continue
            if isinstance(s, A.Null):
                continue
            if len(exits) > 1 or cur["branch"] is not None:
                join = self.new(None, numbered=False)
                self.joins.append(join)
                for x in exits:
                    self.edges.append((id(x), id(join), None))
                cur = join
                exits = [cur]
            if isinstance(s, A.If):
                cur["branch"] = s.cond
                cur["line"] = s.line
                t = self.new((s.cond, True))
                f = self.new((s.cond, False))
                t["lines"].append(s.line)
                f["lines"].append(s.line)
                self.edges.append((id(cur), id(t), True))
                self.edges.append((id(cur), id(f), False))
                exits = self.build([s.then], t)
                exits += self.build([s.otherwise] if s.otherwise is not None else [], f)
            else:
                cur["stmts"].append(s)
                cur["lines"].append(s.line)
        return exits


def build_cfg_set(d: ElaboratedDesign) -> CfgSet:
    counter = [0]
    cfgs = []
    for proc in d.processes:
        b = _Builder(proc.id, counter)
        b.run(proc.body)
        by_id = {id(x): x for x in b.blocks}
        blocks = {}
        for x in b.blocks:
            defined, used = [], []
            if x["guard"] is not None:
                used += A.signals_of(x["guard"][0])
            if x["branch"] is not None:
                used += A.signals_of(x["branch"])
            for s in x["stmts"]:
                used += stmt_uses(s)
                defined += stmt_defs(s)
            lines = x["lines"] or [x["line"]] or [0]
            key = (0, proc.id) if x["num"] < 0 else (1, x["num"])
            blocks[x["label"]] = Block(
                label=x["label"], process=proc.id, key=key, stmts=tuple(x["stmts"]),
                guard=x["guard"], branch=x["branch"], branch_line=x["line"],
                defined=tuple(dict.fromkeys(defined)), used=tuple(dict.fromkeys(used)),
                span=(min(lines), max(lines + [x["line"]])),
            )
        edges = tuple((by_id[s]["label"], by_id[t]["label"], p) for s, t, p in b.edges)
        cfgs.append(Cfg(proc.id, proc.kind, f"E{proc.id}", blocks, edges))
    inter = []
    for c1 in cfgs:
        for db in c1.blocks.values():
            for sig in db.defined:
                for c2 in cfgs:
                    if c2.process_id == c1.process_id:
                        continue
                    for ub in c2.blocks.values():
                        if sig in ub.used:
                            inter.append((db.label, ub.label, sig))
    inter.sort(key=lambda e: (_key_of(cfgs, e[0]), _key_of(cfgs, e[1]), e[2]))
    return CfgSet(d, tuple(cfgs), tuple(inter))


def _key_of(cfgs, label):
    for c in cfgs:
        if label in c.blocks:
            return c.blocks[label].key
    raise KeyError(label)


def find_assignment_blocks(cs: CfgSet, sig: str) -> list[str]:
    if sig not in cs.design.signal_table:
        raise RtlicError(f"unknown signal {sig}")
    hits = []
    for c in cs.cfgs:
        for b in c.blocks.values():
            if sig in b.defined:
                first = min(s.line for s in b.stmts if sig in stmt_defs(s))
                hits.append((c.process_id, first, b.key, b.label))
    return [h[-1] for h in sorted(hits)]


def intra_bfs(cfg: Cfg, b: str) -> list[str]:
    """Reverse breadth-first order from ``b`` towards the entry.

    The entry block is only reported when the search starts there.
    """
    if b not in cfg.blocks:
        raise RtlicError(f"block {b} not in process {cfg.process_id}")
    if b == cfg.entry:
        return [b]
    order, seen = [], {b}
    queue = deque([b])
    while queue:
        n = queue.popleft()
        order.append(n)
        preds = sorted(set(cfg.predecessors(n)), key=lambda x: cfg.blocks[x].key)
        for p in preds:
            if p not in seen and p != cfg.entry:
                seen.add(p)
                queue.append(p)
    return order


def compute_distance(cs: CfgSet, target: str) -> DistanceMap:
    blocks = cs.blocks
    if target not in blocks:
        raise RtlicError(f"unknown block {target}")
    rev: dict[str, set] = {n: set() for n in blocks}
    for c in cs.cfgs:
        for s, d, _ in c.edges:
            rev[d].add(s)
    for d, u, _ in cs.inter_edges:
        rev[u].add(d)
    dist = {target: 0}
    queue = deque([target])
    while queue:
        n = queue.popleft()
        for p in sorted(rev[n], key=lambda x: blocks[x].key):
            if p not in dist:
                dist[p] = dist[n] + 1
                queue.append(p)
    return DistanceMap(target, dist)


def to_dot(cs: CfgSet) -> str:
    out = ["digraph cfg {", "  node [shape=box];"]
    for c in cs.cfgs:
        out.append(f"  subgraph cluster_{c.process_id} {{")
        out.append(f'    label="CFG{c.process_id} ({c.kind})";')
        for b in c.blocks.values():
            text = b.label
            if b.branch is not None:
                from .frontend.printer import format_expr
                text += "\\nif (" + format_expr(b.branch).replace('"', '\\"') + ")"
            out.append(f'    "{b.label}" [label="{text}"];')
        for s, d, p in c.edges:
            style = {True: "solid", False: "dashed", None: "dotted"}[p]
            out.append(f'    "{s}" -> "{d}" [style={style}];')
        out.append("  }")
    for d, u, sig in cs.inter_edges:
        out.append(f'  "{d}" -> "{u}" [color=red, style=dotted, label="{sig}"];')
    out.append("}")
    return "\n".join(out) + "\n"
