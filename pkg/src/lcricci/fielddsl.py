"""A tiny expression language for real scalar fields f(z, zbar) on a chart.

Grammar (whitespace is insignificant)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' INT)?
    atom    := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'
    VAR     := 'x' INT | 'y' INT | 'absq'
    FUNC    := 'sin' | 'cos' | 'exp' | 'log' | 'sqrt'

``xk``/``yk`` are the real and imaginary parts of the k-th coordinate and
``absq`` is |z|^2.  Exponents are integer literals only.  Because ``^``
binds tighter than unary minus, ``-x1^2`` means ``-(x1^2)``.

Evaluation is vectorised: ``evaluate(expr, z)`` accepts coordinates of shape
``(..., n)`` and returns a real array of shape ``(...)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


class FieldSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class FieldEvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    kind: str  # "x", "y" or "absq"
    index: int = 0  # 1-based for x/y


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Pow, Call]


@dataclass(frozen=True)
class FieldExpr:
    """Parsed scalar field; ``text`` is the canonical printed form."""

    ast: Node

    @property
    def text(self) -> str:
        return to_text(self.ast)

    def __call__(self, z):
        return evaluate(self, z)

    def __str__(self):
        return self.text


# --------------------------------------------------------------------------
# Lexer / parser

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),])"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    data = text.encode("utf-8")
    # offsets are reported as 1-based byte offsets
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FieldSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(("end", "", len(data) + 1))
    return tokens


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8")) + 1


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.take()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise FieldSyntaxError(f"expected {value!r}, found {found}", off)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise FieldSyntaxError(f"expected operator or end of input, found {val!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            kind, val, off = self.take()
            if kind != "num" or not val.isdigit():
                raise FieldSyntaxError("expected integer exponent", off)
            return Pow(base, sign * int(val))
        return base

    def atom(self) -> Node:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val == "absq":
                return Var("absq")
            m = re.fullmatch(r"([xy])([1-9]\d*)", val)
            if m:
                return Var(m.group(1), int(m.group(2)))
            raise FieldSyntaxError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise FieldSyntaxError(f"expected number, variable, function or '(', found {found}", off)


def parse(text: str) -> FieldExpr:
    """Parse field-expression text into a :class:`FieldExpr`."""
    if isinstance(text, FieldExpr):
        return text
    return FieldExpr(_Parser(text).parse())


# --------------------------------------------------------------------------
# Printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_num(v: float) -> str:
    r = repr(float(v))
    if r in ("inf", "nan", "-inf"):
        raise ValueError("non-finite constant")
    return r


def to_text(node: Node) -> str:
    """Print with the minimum parentheses needed to re-parse to the same AST."""
    return _print(node, 0)


def _print(node: Node, ctx: int) -> str:
    # ctx: binding strength required by the parent (0 none, 1 additive,
    # 2 multiplicative, 3 unary, 4 power base)
    if isinstance(node, Num):
        if node.value < 0:
            raise ValueError("negative literals are represented as Neg(Num)")
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return "absq" if node.kind == "absq" else f"{node.kind}{node.index}"
    if isinstance(node, Call):
        return f"{node.func}({_print(node.arg, 0)})"
    if isinstance(node, Pow):
        s = f"{_print(node.base, 4)}^{node.exponent}"
        return f"({s})" if ctx >= 4 else s
    if isinstance(node, Neg):
        s = "-" + _print(node.arg, 3)
        return f"({s})" if ctx >= 4 else s
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        s = f"{_print(node.left, p)}{node.op}{_print(node.right, p + 1)}"
        return f"({s})" if p < ctx else s
    raise TypeError(node)


# --------------------------------------------------------------------------
# Evaluation


def max_index(node: Node) -> int:
    if isinstance(node, Var):
        return node.index
    if isinstance(node, (Neg, Call)):
        return max_index(node.arg)
    if isinstance(node, Pow):
        return max_index(node.base)
    if isinstance(node, BinOp):
        return max(max_index(node.left), max_index(node.right))
    return 0


def evaluate(expr, p) -> np.ndarray:
    """Evaluate at one point (returns a float) or a batch of points."""
    from .linalg import as_coords

    ast = expr.ast if isinstance(expr, FieldExpr) else parse(expr).ast
    z = as_coords(p)
    n = z.shape[-1]
    k = max_index(ast)
    if k > n:
        raise IndexError(f"coordinate index {k} exceeds chart dimension {n}")
    with np.errstate(all="ignore"):
        out = _eval(ast, z)
    out = np.broadcast_to(np.asarray(out, dtype=float), z.shape[:-1])
    if not np.all(np.isfinite(out)):
        raise FieldEvaluationError(f"non-finite value of {to_text(ast)}")
    return float(out) if out.ndim == 0 else np.array(out)


def _eval(node: Node, z: np.ndarray):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.kind == "absq":
            return np.sum(np.abs(z) ** 2, axis=-1)
        c = z[..., node.index - 1]
        return c.real if node.kind == "x" else c.imag
    if isinstance(node, Neg):
        return -_eval(node.arg, z)
    if isinstance(node, Pow):
        base = np.asarray(_eval(node.base, z), dtype=float)
        if node.exponent < 0 and np.any(base == 0):
            raise FieldEvaluationError(f"division by zero in {to_text(node)}")
        return base ** float(node.exponent)
    if isinstance(node, BinOp):
        a = _eval(node.left, z)
        b = _eval(node.right, z)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if np.any(np.asarray(b) == 0):
            raise FieldEvaluationError(f"division by zero in {to_text(node)}")
        return a / b
    if isinstance(node, Call):
        a = np.asarray(_eval(node.arg, z), dtype=float)
        if node.func == "log":
            if np.any(a <= 0):
                raise FieldEvaluationError(f"log of non-positive value in {to_text(node)}")
            return np.log(a)
        if node.func == "sqrt":
            if np.any(a < 0):
                raise FieldEvaluationError(f"sqrt of negative value in {to_text(node)}")
            return np.sqrt(a)
        return getattr(np, node.func)(a)
    raise TypeError(node)


# --------------------------------------------------------------------------
# Seeded generators (used by tests and by the conformal sweeps)


def random_ast(rng: np.random.Generator, n: int, depth: int = 3) -> Node:
    """Random AST that evaluates finitely everywhere (no log/sqrt/division)."""
    if depth == 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.3:
            v = float(np.round(rng.uniform(-2, 2), 3))
            return Neg(Num(-v)) if v < 0 else Num(v)
        if r < 0.85:
            return Var(str(rng.choice(["x", "y"])), int(rng.integers(1, n + 1)))
        return Var("absq")
    r = rng.random()
    if r < 0.45:
        return BinOp(str(rng.choice(["+", "-", "*"])), random_ast(rng, n, depth - 1),
                     random_ast(rng, n, depth - 1))
    if r < 0.6:
        return Neg(random_ast(rng, n, depth - 1))
    if r < 0.75:
        return Pow(random_ast(rng, n, depth - 1), int(rng.integers(0, 4)))
    return Call(str(rng.choice(["sin", "cos"])), random_ast(rng, n, depth - 1))


def seeded_factors(count: int, n: int, seed: int = 0) -> list[FieldExpr]:
    """Smooth conformal factors with |f| <= 1, so e^f stays within [1/e, e]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        i, j = (int(v) for v in rng.integers(1, n + 1, size=2))
        a, b, c = np.round(rng.uniform(-1.5, 1.5, size=3), 3)
        w = float(np.round(rng.uniform(0.2, 0.6), 3))
        text = (f"{w}*sin({a}*x{i}+{b}*y{j}+{c}*absq)"
                f"+{np.round(1 - w, 3)}*cos({np.round(a - b, 3)}*y{i}*x{j})")
        out.append(parse(text))
    return out
