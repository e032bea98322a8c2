from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from ..errors import TargetError
from . import ast as A


@dataclass(frozen=True)
class LineLocator:
    line: int
    polarity: bool = True


@dataclass(frozen=True)
class MarkerLocator:
    text: str


TargetLocator = Union[LineLocator, MarkerLocator]


@dataclass(frozen=True)
class BranchTarget:
    block: str
    process: int
    guard: Optional[tuple]  # (Expr, polarity)

    @property
    def condition(self):
        return None if self.guard is None else self.guard[0]


def parse_locator(text: str) -> TargetLocator:
    """``line:<n>[:true|false]`` or ``marker:<text>``."""
    kind, _, rest = text.partition(":")
    if kind == "line":
        num, _, pol = rest.partition(":")
        if not num.isdigit():
            raise TargetError(f"bad line locator {text!r}")
        if pol not in ("", "true", "false"):
            raise TargetError(f"bad polarity {pol!r}")
        return LineLocator(int(num), pol != "false")
    if kind == "marker" and rest:
        return MarkerLocator(rest)
    raise TargetError(f"bad target locator {text!r}; use line:<n>[:true|false] or marker:<text>")


def resolve_target(d, locator: TargetLocator, cs=None) -> BranchTarget:
    from ..cfg import build_cfg_set

    cs = cs or build_cfg_set(d)
    if isinstance(locator, MarkerLocator):
        hits = [b for b in cs.blocks.values()
                if any(isinstance(s, A.Display) and s.text == locator.text for s in b.stmts)]
        if not hits:
            raise TargetError(f"no $display marker {locator.text!r}")
        if len(hits) > 1:
            names = ", ".join(b.label for b in hits)
            raise TargetError(f"ambiguous marker {locator.text!r}: candidates {names}")
        b = hits[0]
    else:
        b = None
        for c in cs.cfgs:
            for blk in c.blocks.values():
                if blk.branch is not None and blk.branch_line == locator.line:
                    b = c.blocks[c.succ(blk.label, locator.polarity)]
                    break
            if b is not None:
                break
        if b is None:
            # a statement line selects the guarded block that holds it
            for blk in cs.blocks.values():
                if blk.guard is not None and any(s.line == locator.line for s in blk.stmts):
                    b = blk
                    break
        if b is None:
            raise TargetError(f"no branch at line {locator.line}")
    if b.guard is None:
        raise TargetError(f"block {b.label} is not guarded by a branch")
    return BranchTarget(b.label, b.process, b.guard)
