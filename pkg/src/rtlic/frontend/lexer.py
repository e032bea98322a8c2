from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import Diagnostic


@dataclass(frozen=True)
class SourceDesign:
    path: str
    source: str
    line_starts: tuple = field(default=(), compare=False, repr=False)

    @classmethod
    def from_text(cls, source: str, path: str = "<input>") -> "SourceDesign":
        starts = [0] + [m.end() for m in re.finditer("\n", source)]
        return cls(path, source, tuple(starts))

    @classmethod
    def from_file(cls, path) -> "SourceDesign":
        return cls.from_text(Path(path).read_text(encoding="utf-8"), str(path))

    def position(self, offset: int) -> tuple[int, int]:
        """1-based (line, column) of a character offset."""
        i = bisect.bisect_right(self.line_starts, offset) - 1
        return i + 1, offset - self.line_starts[i] + 1


@dataclass(frozen=True)
class Token:
    kind: str  # id, sysid, num, str, op, eof
    text: str
    line: int
    col: int
    value: object = None


KEYWORDS = {
    "module", "endmodule", "input", "output", "reg", "parameter", "localparam",
    "always", "posedge", "begin", "end", "if", "else",
}
UNSUPPORTED = {
    "task", "endtask", "function", "endfunction", "fork", "join", "generate",
    "endgenerate", "initial", "assign", "case", "casez", "casex", "endcase",
    "for", "while", "repeat", "forever", "negedge", "wire", "integer", "inout",
    "genvar", "always_ff", "always_comb", "logic",
}

_OPS = sorted(
    ["<=", ">=", "==", "!=", "&&", "||", "<<", ">>", "**", "===", "!==",
     "(", ")", "[", "]", "{", "}", ";", ",", ":", "?", "=", "<", ">",
     "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "@", "#", "."],
    key=len, reverse=True,
)
_NUM = re.compile(r"(\d[\d_]*)?\s*'\s*([sS]?[bBoOdDhH])\s*([0-9a-fA-FxXzZ_?]+)|\d[\d_]*")
_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")
_SYSID = re.compile(r"\$[A-Za-z_][A-Za-z0-9_]*")
_STR = re.compile(r'"((?:[^"\\\n]|\\.)*)"')
_BASES = {"b": 2, "o": 8, "d": 10, "h": 16}


def _number(m: re.Match, src: SourceDesign, offset: int) -> tuple[int, int | None]:
    if m.group(2) is None:
        return int(m.group(0).replace("_", "")), None
    size = int(m.group(1).replace("_", "")) if m.group(1) else None
    base = _BASES[m.group(2)[-1].lower()]
    digits = m.group(3).replace("_", "")
    if re.search(r"[xXzZ?]", digits):
        line, col = src.position(offset)
        raise Diagnostic("unsupported feature: four-state literal", line, col, src.path)
    value = int(digits, base)
    if size is not None:
        if size <= 0:
            line, col = src.position(offset)
            raise Diagnostic("literal size must be positive", line, col, src.path)
        value &= (1 << size) - 1
    return value, size


def tokenize(src: SourceDesign) -> list[Token]:
    text = src.source
    toks: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                line, col = src.position(i)
                raise Diagnostic("unterminated block comment", line, col, src.path)
            i = j + 2
            continue
        line, col = src.position(i)
        if c == "`":
            raise Diagnostic("unsupported feature: compiler directive", line, col, src.path)
        m = _STR.match(text, i)
        if m:
            toks.append(Token("str", m.group(0), line, col, re.sub(r"\\(.)", r"\1", m.group(1))))
            i = m.end()
            continue
        m = _SYSID.match(text, i)
        if m:
            toks.append(Token("sysid", m.group(0), line, col))
            i = m.end()
            continue
        m = _ID.match(text, i)
        if m:
            toks.append(Token("id", m.group(0), line, col))
            i = m.end()
            continue
        m = _NUM.match(text, i)
        if m and (c.isdigit() or c == "'"):
            toks.append(Token("num", m.group(0), line, col, _number(m, src, i)))
            i = m.end()
            continue
        for op in _OPS:
            if text.startswith(op, i):
                toks.append(Token("op", op, line, col))
                i += len(op)
                break
        else:
            raise Diagnostic(f"unexpected character {c!r}", line, col, src.path)
    line, col = src.position(n) if n else (1, 1)
    toks.append(Token("eof", "", line, col))
    return toks
