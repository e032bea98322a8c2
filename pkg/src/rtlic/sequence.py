"""Ordered assignment events that have to happen before a branch can fire.

Starting from the signals read by a target's guard, every block assigning
one of them is collected, then the search recurses into the signals those
assignments read. Inputs end the recursion. The collected blocks, read in
reverse discovery order, give the temporal order of the events: the write
that must happen first comes first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .cfg import CfgSet, find_assignment_blocks, stmt_uses
from .frontend import ast as A

MAX_ALTERNATIVES = 8


@dataclass(frozen=True)
class SignalExpression:
    signals: tuple
    constants: tuple  # (value, width)
    origin: A.Expr = field(default=None, compare=False)


@dataclass(frozen=True)
class SequenceStack:
    blocks: tuple  # earliest event first
    visited: frozenset = frozenset()
    choices: tuple = ()  # (signal, blocks) for signals with several assignment blocks

    def __str__(self):
        return "S = <" + ", ".join(self.blocks) + ">"

    def to_json(self) -> dict:
        return {"sequence": list(self.blocks),
                "alternatives": {s: list(b) for s, b in self.choices}}


def get_signal_expression(t) -> SignalExpression:
    """Split a target's guard into its signal and literal leaves."""
    guard = t.guard[0] if t.guard is not None else A.Const(1, 1)
    return SignalExpression(
        tuple(A.signals_of(guard)),
        tuple((c.value, c.width) for c in A.constants_of(guard)),
        guard,
    )


def dependency_search(cs: CfgSet, se: SignalExpression) -> SequenceStack:
    table = cs.design.signal_table
    pushed: list[str] = []
    visited: set[str] = set()
    choices = []

    def search(sig):
        if sig in visited:
            return
        visited.add(sig)
        if table[sig].kind == "input":
            return
        blocks = find_assignment_blocks(cs, sig)
        if len(blocks) > 1:
            choices.append((sig, tuple(blocks)))
        for b in blocks:
            if b not in pushed:
                pushed.append(b)
        for b in blocks:
            for s in cs.block(b).stmts:
                if isinstance(s, A.Assign) and s.target.name == sig:
                    for used in stmt_uses(s):
                        search(used)

    for sig in se.signals:
        search(sig)
    return SequenceStack(tuple(reversed(pushed)), frozenset(visited), tuple(choices))


def alternative_sequences(ss: SequenceStack, cap: int = MAX_ALTERNATIVES) -> list[SequenceStack]:
    """One stack per choice of assignment block for multiply-assigned signals."""
    if not ss.choices:
        return [ss]
    out = []
    for pick in itertools.product(*(blocks for _, blocks in ss.choices)):
        dropped = {b for (_, blocks), chosen in zip(ss.choices, pick) for b in blocks if b != chosen}
        dropped -= set(pick)
        out.append(SequenceStack(tuple(b for b in ss.blocks if b not in dropped), ss.visited))
        if len(out) >= cap:
            break
    return out
