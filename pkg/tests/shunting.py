"""Independent arithmetic evaluator used as an oracle.

Precedence-climbing over a tiny regex tokenizer; shares nothing with the
package under test. Division follows IEEE-754 (no trap on zero).
"""

import math
import re

_TOKEN = re.compile(r"\d+\.\d*|\d+|[-+*/()]|\s+")

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}  # higher binds tighter


def _tokens(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad character at {pos}")
        if not m.group().isspace():
            out.append(m.group())
        pos = m.end()
    return out


def _divide(a, b):
    try:
        return a / b
    except ZeroDivisionError:
        if a == 0:
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)


def evaluate(text):
    toks = _tokens(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take():
        nonlocal pos
        pos += 1
        return toks[pos - 1]

    def primary():
        tok = take()
        if tok == "(":
            value = expression(1)
            assert take() == ")"
            return value
        if tok in ("+", "-"):
            value = primary()
            return -value if tok == "-" else value
        return float(tok)

    def expression(min_prec):
        lhs = primary()
        while peek() in _PREC and _PREC[peek()] >= min_prec:
            op = take()
            rhs = expression(_PREC[op] + 1)  # left associative
            if op == "+":
                lhs = lhs + rhs
            elif op == "-":
                lhs = lhs - rhs
            elif op == "*":
                lhs = lhs * rhs
            else:
                lhs = _divide(lhs, rhs)
        return lhs

    value = expression(1)
    assert pos == len(toks), f"trailing input at {pos}"
    return value
