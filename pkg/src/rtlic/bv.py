"""Two-valued unsigned bit-vector semantics shared by folding and simulation."""


def mask(width: int) -> int:
    return (1 << width) - 1


def min_width(value: int) -> int:
    return max(1, value.bit_length())


def eval_unary(op: str, a: int, width: int) -> int:
    if op == "~":
        return ~a & mask(width)
    if op == "-":
        return -a & mask(width)
    if op == "!":
        return int(a == 0)
    raise ValueError(f"unknown unary operator {op}")


def eval_binary(op: str, a: int, b: int, width: int) -> int:
    """Operands are already zero-extended; ``width`` is the result width."""
    if op == "==":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    if op == "<":
        return int(a < b)
    if op == "<=":
        return int(a <= b)
    if op == ">":
        return int(a > b)
    if op == ">=":
        return int(a >= b)
    if op == "&&":
        return int(a != 0 and b != 0)
    if op == "||":
        return int(a != 0 or b != 0)
    m = mask(width)
    if op == "&":
        return a & b
    if op == "|":
        return a | b
    if op == "^":
        return a ^ b
    if op == "+":
        return (a + b) & m
    if op == "-":
        return (a - b) & m
    if op == "<<":
        return (a << b) & m if b < width else 0
    if op == ">>":
        return a >> b if b < width else 0
    if op == "*":
        return (a * b) & m
    if op == "**":
        return (a ** b) & m
    raise ValueError(f"unknown binary operator {op}")


def result_width(op: str, wa: int, wb: int) -> int:
    if op in ("==", "!=", "<", "<=", ">", ">=", "&&", "||"):
        return 1
    if op in ("<<", ">>"):
        return wa
    return max(wa, wb)
