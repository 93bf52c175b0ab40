"""Closed-form scalar expressions over grid coordinates.

Weights and forcings are given as strings in a small arithmetic grammar

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ('-')? power
    power  := atom ('^' factor)?
    atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'

with identifiers x1..xN (coordinates), the constant pi, and the functions
sin, cos, exp, ln, abs, min, max.  '^' is right-associative and binds
tighter than unary minus, so "-2^2" is -4.

An Expr is a nested tuple AST; evaluation is vectorised over numpy
coordinate arrays.  Division by zero, ln of a non-positive argument and
non-finite powers raise ExprEvalError at the offending point.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "Expr",
    "ParseError",
    "ExprEvalError",
    "parse",
    "to_string",
    "evaluate",
    "scale_expr",
]

# An Expr is one of:
#   ("num", float)
#   ("var", k)              k = 0-based coordinate index (x1 -> 0)
#   ("pi",)
#   ("neg", e)
#   ("add"|"sub"|"mul"|"div"|"pow", e1, e2)
#   ("call", name, (e1, ..., en))
Expr = tuple

_FUNCTIONS = {"sin": 1, "cos": 1, "exp": 1, "ln": 1, "abs": 1, "min": 2, "max": 2}


class ParseError(ValueError):
    """Syntax/identifier error; carries the byte offset into the source."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class ExprEvalError(ArithmeticError):
    """Evaluation hit an invalid operation; carries a flat point index."""

    def __init__(self, message, bad_index=None):
        super().__init__(message)
        self.bad_index = bad_index


# ---------------------------------------------------------------- tokenizer

_NUM_CHARS = set("0123456789")


def _tokenize(text):
    tokens = []  # (kind, value, offset)
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/^(),":
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch in _NUM_CHARS or ch == ".":
            j = i
            while j < n and (text[j] in _NUM_CHARS or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k] in _NUM_CHARS:
                    while k < n and text[k] in _NUM_CHARS:
                        k += 1
                    j = k
            try:
                value = float(text[i:j])
            except ValueError:
                raise ParseError(f"bad number literal {text[i:j]!r}", i) from None
            tokens.append(("num", value, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", n))
    return tokens


# ------------------------------------------------------------------- parser


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None):
        tok = self.tokens[self.pos]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        self.pos += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            rhs = self.factor()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def factor(self):
        if self.peek()[0] == "-":
            self.take()
            return ("neg", self.power())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            return ("pow", base, self.factor())  # right-associative
        return base

    def atom(self):
        kind, value, offset = self.peek()
        if kind == "num":
            self.take()
            return ("num", value)
        if kind == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if kind == "ident":
            self.take()
            if self.peek()[0] == "(":
                self.take()
                args = [self.expr()]
                while self.peek()[0] == ",":
                    self.take()
                    args.append(self.expr())
                self.take(")")
                if value not in _FUNCTIONS:
                    raise ParseError(f"unknown function {value!r}", offset)
                arity = _FUNCTIONS[value]
                if len(args) != arity:
                    raise ParseError(
                        f"{value} takes {arity} argument(s), got {len(args)}", offset
                    )
                return ("call", value, tuple(args))
            if value == "pi":
                return ("pi",)
            if len(value) >= 2 and value[0] == "x" and value[1:].isdigit():
                idx = int(value[1:])
                if idx >= 1:
                    return ("var", idx - 1)
            raise ParseError(f"unknown identifier {value!r}", offset)
        raise ParseError(f"unexpected token {value!r}", offset)


def parse(text):
    """Parse an expression string into an Expr tuple tree."""
    parser = _Parser(_tokenize(text))
    node = parser.expr()
    tok = parser.peek()
    if tok[0] != "end":
        raise ParseError(f"trailing input {tok[1]!r}", tok[2])
    return node


# ------------------------------------------------------------------ printer

# precedence levels used when re-parenthesising
_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_ATOM_PREC = 5


def _prec(node):
    return _PREC.get(node[0], _ATOM_PREC)


def to_string(node):
    """Render an Expr so that parse(to_string(e)) evaluates identically."""
    kind = node[0]
    if kind == "num":
        return repr(node[1])
    if kind == "var":
        return f"x{node[1] + 1}"
    if kind == "pi":
        return "pi"
    if kind == "neg":
        inner = to_string(node[1])
        # operand of unary minus is a 'power'; a nested neg needs parens too
        if _prec(node[1]) < _PREC["neg"] or node[1][0] == "neg":
            inner = f"({inner})"
        return f"-{inner}"
    if kind == "call":
        return f"{node[1]}({', '.join(to_string(a) for a in node[2])})"
    lhs, rhs = node[1], node[2]
    ls, rs = to_string(lhs), to_string(rhs)
    p = _PREC[kind]
    if kind in ("add", "sub", "mul", "div"):
        # strict parens on equal-precedence right children so the re-parsed
        # tree (left-associative grammar) matches the original exactly
        if _prec(lhs) < p:
            ls = f"({ls})"
        if _prec(rhs) <= p:
            rs = f"({rs})"
    else:  # pow, right-associative; '^' binds tighter than everything below it
        if _prec(lhs) <= p:
            ls = f"({ls})"
        if _prec(rhs) < _PREC["neg"] or rhs[0] == "neg":
            rs = f"({rs})"
    op = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}[kind]
    return f"{ls} {op} {rs}" if kind != "pow" else f"{ls}^{rs}"


# ---------------------------------------------------------------- evaluator


def _first_bad(mask):
    idx = np.argmax(mask)
    return int(idx)


def evaluate(node, coords):
    """Evaluate an Expr at points given by a tuple of coordinate arrays.

    coords[k] holds the x_{k+1} values; all arrays share one shape (scalars
    are fine).  Returns an array of that shape.
    """
    coords = tuple(np.asarray(c, dtype=float) for c in coords)
    shape = np.broadcast_shapes(*(c.shape for c in coords)) if coords else ()

    def ev(n):
        kind = n[0]
        if kind == "num":
            return np.full(shape, n[1])
        if kind == "pi":
            return np.full(shape, math.pi)
        if kind == "var":
            k = n[1]
            if k >= len(coords):
                raise ExprEvalError(f"x{k + 1} undefined on a {len(coords)}-d grid")
            return np.broadcast_to(coords[k], shape).astype(float)
        if kind == "neg":
            return -ev(n[1])
        if kind == "call":
            args = [ev(a) for a in n[2]]
            name = n[1]
            if name == "ln":
                bad = args[0] <= 0.0
                if np.any(bad):
                    raise ExprEvalError("ln of non-positive value", _first_bad(bad))
                return np.log(args[0])
            if name == "abs":
                return np.abs(args[0])
            if name == "min":
                return np.minimum(args[0], args[1])
            if name == "max":
                return np.maximum(args[0], args[1])
            return getattr(np, name)(args[0])
        a = ev(n[1])
        if kind == "div":
            b = ev(n[2])
            bad = b == 0.0
            if np.any(bad):
                raise ExprEvalError("division by zero", _first_bad(bad))
            return a / b
        b = ev(n[2])
        if kind == "add":
            return a + b
        if kind == "sub":
            return a - b
        if kind == "mul":
            return a * b
        # pow: flag domain failures (0^negative, negative^fractional)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.power(a, b)
        bad = ~np.isfinite(out) & np.isfinite(a) & np.isfinite(b)
        if np.any(bad):
            raise ExprEvalError("invalid power", _first_bad(bad))
        return out

    out = ev(node)
    bad = ~np.isfinite(out)
    if np.any(bad):
        raise ExprEvalError("non-finite value", _first_bad(bad))
    return out


def scale_expr(node, factor):
    """Multiply an expression by a constant, staying inside the grammar."""
    return ("mul", ("num", float(factor)), node)
