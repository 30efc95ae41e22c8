"""A small expression language for complex scalar fields on tori.

Grammar (whitespace insignificant):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' int)?
    base   := number | 'i' | 'pi' | var | func '(' expr ')' | '(' expr ')' | '-' base

with func in {sin, cos, exp} and var in {x1, x2, x3, x4}.  Exponents are
integers (optionally negative).  Trees are immutable after parsing.

Evaluation is batched over arrays of points and carries exact first
partial derivatives via forward-mode dual numbers: each node produces the
pair (value, gradient) and the arithmetic/chain rules propagate both.
Trees also support exact symbolic differentiation and complex conjugation,
which is what lets matrix fields built from expressions stay closed under
products, adjoints and the derivative-bearing formulas downstream.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import DivisionByZero, ParseError, UnknownIdentifier

_FUNCTIONS = ("sin", "cos", "exp")


def _as_node(x) -> "Node":
    if isinstance(x, Node):
        return x
    return constant(x)


class Node:
    """Base class for expression tree nodes."""

    __slots__ = ()

    # -- symbolic building (used by matrix-field algebra) --

    def __add__(self, other):
        return _fold_add(self, _as_node(other))

    def __radd__(self, other):
        return _fold_add(_as_node(other), self)

    def __sub__(self, other):
        return _fold_sub(self, _as_node(other))

    def __rsub__(self, other):
        return _fold_sub(_as_node(other), self)

    def __mul__(self, other):
        return _fold_mul(self, _as_node(other))

    def __rmul__(self, other):
        return _fold_mul(_as_node(other), self)

    def __truediv__(self, other):
        return Div(self, _as_node(other))

    def __neg__(self):
        if isinstance(self, Num) and self.value == 0.0:
            return self
        return Neg(self)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Num(Node):
    value: float


@dataclass(frozen=True, slots=True)
class Imag(Node):
    pass


@dataclass(frozen=True, slots=True)
class PiConst(Node):
    pass


@dataclass(frozen=True, slots=True)
class Var(Node):
    index: int  # 1-based: x1..x4


@dataclass(frozen=True, slots=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True, slots=True)
class Add(Node):
    left: Node
    right: Node


@dataclass(frozen=True, slots=True)
class Sub(Node):
    left: Node
    right: Node


@dataclass(frozen=True, slots=True)
class Mul(Node):
    left: Node
    right: Node


@dataclass(frozen=True, slots=True)
class Div(Node):
    left: Node
    right: Node


@dataclass(frozen=True, slots=True)
class Pow(Node):
    base: Node
    exponent: int


@dataclass(frozen=True, slots=True)
class Fn(Node):
    name: str
    arg: Node


ZERO = Num(0.0)
ONE = Num(1.0)


def constant(z) -> Node:
    """Build a literal node for a real or complex constant."""
    z = complex(z)
    re_part = Num(abs(z.real)) if z.real >= 0 else Neg(Num(abs(z.real)))
    if z.imag == 0.0:
        return re_part
    im_mag = Mul(Num(abs(z.imag)), Imag())
    im_part = im_mag if z.imag > 0 else Neg(im_mag)
    if z.real == 0.0:
        return im_part
    return Add(re_part, im_part)


def _is_zero(n: Node) -> bool:
    return isinstance(n, Num) and n.value == 0.0


def _is_one(n: Node) -> bool:
    return isinstance(n, Num) and n.value == 1.0


def _fold_add(a: Node, b: Node) -> Node:
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return Add(a, b)


def _fold_sub(a: Node, b: Node) -> Node:
    if _is_zero(b):
        return a
    if _is_zero(a):
        return -b
    return Sub(a, b)


def _fold_mul(a: Node, b: Node) -> Node:
    if _is_zero(a) or _is_zero(b):
        return ZERO
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    return Mul(a, b)


# -- parsing ------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == m.start():
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos:].strip()[0]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, val, at = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", at)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, at = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", at)
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                node = Add(node, rhs) if val == "+" else Sub(node, rhs)
            else:
                return node

    def term(self) -> Node:
        node = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.factor()
                node = Mul(node, rhs) if val == "*" else Div(node, rhs)
            else:
                return node

    def factor(self) -> Node:
        node = self.base()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            node = Pow(node, self.integer())
        return node

    def integer(self) -> int:
        sign = 1
        kind, val, at = self.take()
        if kind == "op" and val == "-":
            sign = -1
            kind, val, at = self.take()
        if kind != "num" or not re.fullmatch(r"\d+", val):
            raise ParseError("expected an integer exponent", at)
        return sign * int(val)

    def base(self) -> Node:
        kind, val, at = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "op" and val == "-":
            return Neg(self.base())
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "name":
            if val == "i":
                return Imag()
            if val == "pi":
                return PiConst()
            m = re.fullmatch(r"x([1-4])", val)
            if m:
                return Var(int(m.group(1)))
            if val in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Fn(val, arg)
            raise UnknownIdentifier(f"unknown identifier {val!r} at position {at}")
        raise ParseError(f"unexpected token {val!r}", at)


def parse_expression(text: str) -> Node:
    """Parse source text into an immutable expression tree."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text).parse()


# -- printing -----------------------------------------------------------------

def _num_text(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _atomic(n: Node) -> bool:
    return isinstance(n, (Num, Imag, PiConst, Var, Fn))


def to_text(node: Node) -> str:
    """Render a tree as source text that reparses to the identical tree."""
    if isinstance(node, Num):
        return _num_text(node.value)
    if isinstance(node, Imag):
        return "i"
    if isinstance(node, PiConst):
        return "pi"
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Fn):
        return f"{node.name}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.arg)
        if _atomic(node.arg) or isinstance(node.arg, Neg):
            return f"-{inner}"
        return f"-({inner})"
    if isinstance(node, Pow):
        base = to_text(node.base)
        if not _atomic(node.base):
            base = f"({base})"
        return f"{base}^{node.exponent}"
    if isinstance(node, (Mul, Div)):
        op = "*" if isinstance(node, Mul) else "/"
        left = to_text(node.left)
        if isinstance(node.left, (Add, Sub)):
            left = f"({left})"
        right = to_text(node.right)
        if isinstance(node.right, (Add, Sub, Mul, Div)):
            right = f"({right})"
        return f"{left}{op}{right}"
    if isinstance(node, (Add, Sub)):
        op = "+" if isinstance(node, Add) else "-"
        left = to_text(node.left)
        right = to_text(node.right)
        if isinstance(node.right, (Add, Sub)) or (op == "-" and isinstance(node.right, Neg)):
            right = f"({right})"
        if isinstance(node.right, Neg) and op == "+":
            right = f"({right})"
        return f"{left}{op}{right}"
    raise TypeError(f"unknown node {node!r}")


# -- analysis -----------------------------------------------------------------

def max_var(node: Node) -> int:
    """Highest variable index referenced (0 if none)."""
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Neg):
        return max_var(node.arg)
    if isinstance(node, Fn):
        return max_var(node.arg)
    if isinstance(node, Pow):
        return max_var(node.base)
    if isinstance(node, (Add, Sub, Mul, Div)):
        return max(max_var(node.left), max_var(node.right))
    return 0


def check_dim(node: Node, dim: int) -> None:
    """Reject expressions referencing variables beyond the chart dimension."""
    mv = max_var(node)
    if mv > dim:
        raise UnknownIdentifier(f"variable x{mv} is unavailable on a {dim}-dimensional chart")


# -- evaluation with exact gradients ------------------------------------------

def _eval(node: Node, xs: np.ndarray):
    """Return (value, gradient) arrays; xs has shape (dim, K...)."""
    dim = xs.shape[0]
    shape = xs.shape[1:]

    if isinstance(node, Num):
        return (np.full(shape, node.value, dtype=complex),
                np.zeros((dim,) + shape, dtype=complex))
    if isinstance(node, Imag):
        return (np.full(shape, 1j, dtype=complex),
                np.zeros((dim,) + shape, dtype=complex))
    if isinstance(node, PiConst):
        return (np.full(shape, np.pi, dtype=complex),
                np.zeros((dim,) + shape, dtype=complex))
    if isinstance(node, Var):
        if node.index > dim:
            raise UnknownIdentifier(
                f"variable x{node.index} is unavailable on a {dim}-dimensional chart")
        grad = np.zeros((dim,) + shape, dtype=complex)
        grad[node.index - 1] = 1.0
        return xs[node.index - 1].astype(complex), grad
    if isinstance(node, Neg):
        v, g = _eval(node.arg, xs)
        return -v, -g
    if isinstance(node, Add):
        va, ga = _eval(node.left, xs)
        vb, gb = _eval(node.right, xs)
        return va + vb, ga + gb
    if isinstance(node, Sub):
        va, ga = _eval(node.left, xs)
        vb, gb = _eval(node.right, xs)
        return va - vb, ga - gb
    if isinstance(node, Mul):
        va, ga = _eval(node.left, xs)
        vb, gb = _eval(node.right, xs)
        return va * vb, ga * vb + va * gb
    if isinstance(node, Div):
        va, ga = _eval(node.left, xs)
        vb, gb = _eval(node.right, xs)
        if np.any(vb == 0):
            raise DivisionByZero(f"denominator {to_text(node.right)} vanishes at a sample point")
        return va / vb, (ga * vb - va * gb) / vb**2
    if isinstance(node, Pow):
        v, g = _eval(node.base, xs)
        n = node.exponent
        if n == 0:
            return (np.ones_like(v), np.zeros_like(g))
        if n < 0 and np.any(v == 0):
            raise DivisionByZero(f"base {to_text(node.base)} vanishes under exponent {n}")
        return v**n, n * v**(n - 1) * g
    if isinstance(node, Fn):
        v, g = _eval(node.arg, xs)
        if node.name == "sin":
            return np.sin(v), np.cos(v) * g
        if node.name == "cos":
            return np.cos(v), -np.sin(v) * g
        if node.name == "exp":
            ev = np.exp(v)
            return ev, ev * g
    raise TypeError(f"unknown node {node!r}")


def eval_batch(node: Node, xs: np.ndarray):
    """Evaluate at a batch of points; xs shape (dim, K) -> ((K,), (dim, K))."""
    return _eval(node, np.asarray(xs, dtype=float))


def eval_with_gradient(node: Node, point, dim: int):
    """Value and exact partials at a single point.

    Returns (complex, ndarray of shape (dim,)).
    """
    pt = np.asarray(point, dtype=float).reshape(-1)
    if pt.size != dim:
        raise UnknownIdentifier(f"point has {pt.size} coordinates, chart has {dim}")
    check_dim(node, dim)
    v, g = _eval(node, pt.reshape(dim, 1))
    return complex(v[0]), g[:, 0]


# -- symbolic calculus ---------------------------------------------------------

def differentiate(node: Node, k: int) -> Node:
    """Exact symbolic partial derivative with respect to x_k (1-based)."""
    if isinstance(node, (Num, Imag, PiConst)):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.index == k else ZERO
    if isinstance(node, Neg):
        return -differentiate(node.arg, k)
    if isinstance(node, Add):
        return differentiate(node.left, k) + differentiate(node.right, k)
    if isinstance(node, Sub):
        return differentiate(node.left, k) - differentiate(node.right, k)
    if isinstance(node, Mul):
        return (differentiate(node.left, k) * node.right
                + node.left * differentiate(node.right, k))
    if isinstance(node, Div):
        num = (differentiate(node.left, k) * node.right
               - node.left * differentiate(node.right, k))
        return Div(num, Pow(node.right, 2)) if not _is_zero(num) else ZERO
    if isinstance(node, Pow):
        n = node.exponent
        if n == 0:
            return ZERO
        db = differentiate(node.base, k)
        if _is_zero(db):
            return ZERO
        power = node.base if n == 2 else Pow(node.base, n - 1)
        if n == 1:
            return db
        return constant(n) * power * db
    if isinstance(node, Fn):
        da = differentiate(node.arg, k)
        if _is_zero(da):
            return ZERO
        if node.name == "sin":
            return Fn("cos", node.arg) * da
        if node.name == "cos":
            return -(Fn("sin", node.arg) * da)
        if node.name == "exp":
            return Fn("exp", node.arg) * da
    raise TypeError(f"unknown node {node!r}")


def conjugate(node: Node) -> Node:
    """Complex conjugate as a tree transform.

    Valid because every function in the language has real Taylor
    coefficients and variables are real: conj(f(z)) = f(conj(z)).
    """
    if isinstance(node, (Num, PiConst, Var)):
        return node
    if isinstance(node, Imag):
        return Neg(node)
    if isinstance(node, Neg):
        return -conjugate(node.arg)
    if isinstance(node, Add):
        return conjugate(node.left) + conjugate(node.right)
    if isinstance(node, Sub):
        return conjugate(node.left) - conjugate(node.right)
    if isinstance(node, Mul):
        return conjugate(node.left) * conjugate(node.right)
    if isinstance(node, Div):
        return Div(conjugate(node.left), conjugate(node.right))
    if isinstance(node, Pow):
        return Pow(conjugate(node.base), node.exponent)
    if isinstance(node, Fn):
        return Fn(node.name, conjugate(node.arg))
    raise TypeError(f"unknown node {node!r}")


# -- 2x2 matrices of expressions ------------------------------------------------

class MatrixField:
    """A 2x2 matrix of expressions defining a matrix-valued field on a torus.

    Supports the symbolic algebra needed for gauge actions: products,
    conjugate transpose, scalar multiples, sums and entrywise derivatives,
    all staying inside the expression language.
    """

    __slots__ = ("entries",)

    def __init__(self, entries):
        rows = tuple(tuple(_as_node(e) for e in row) for row in entries)
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise ValueError("MatrixField requires a 2x2 array of expressions")
        self.entries = rows

    @classmethod
    def parse(cls, texts) -> "MatrixField":
        return cls([[parse_expression(t) for t in row] for row in texts])

    @classmethod
    def zero(cls) -> "MatrixField":
        return cls([[ZERO, ZERO], [ZERO, ZERO]])

    @classmethod
    def identity(cls) -> "MatrixField":
        return cls([[ONE, ZERO], [ZERO, ONE]])

    @classmethod
    def scalar(cls, e) -> "MatrixField":
        e = _as_node(e)
        return cls([[e, ZERO], [ZERO, e]])

    def max_var(self) -> int:
        return max(max_var(e) for row in self.entries for e in row)

    def texts(self):
        return [[to_text(e) for e in row] for row in self.entries]

    def conj_transpose(self) -> "MatrixField":
        e = self.entries
        return MatrixField([[conjugate(e[0][0]), conjugate(e[1][0])],
                            [conjugate(e[0][1]), conjugate(e[1][1])]])

    def det(self) -> Node:
        e = self.entries
        return e[0][0] * e[1][1] - e[0][1] * e[1][0]

    def adjugate(self) -> "MatrixField":
        e = self.entries
        return MatrixField([[e[1][1], -e[0][1]], [-e[1][0], e[0][0]]])

    def d(self, k: int) -> "MatrixField":
        return MatrixField([[differentiate(e, k) for e in row] for row in self.entries])

    def __matmul__(self, other: "MatrixField") -> "MatrixField":
        a, b = self.entries, other.entries
        return MatrixField([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])

    def __add__(self, other: "MatrixField") -> "MatrixField":
        a, b = self.entries, other.entries
        return MatrixField([[a[i][j] + b[i][j] for j in range(2)] for i in range(2)])

    def __sub__(self, other: "MatrixField") -> "MatrixField":
        a, b = self.entries, other.entries
        return MatrixField([[a[i][j] - b[i][j] for j in range(2)] for i in range(2)])

    def scale(self, factor) -> "MatrixField":
        f = _as_node(factor)
        return MatrixField([[f * e for e in row] for row in self.entries])

    def eval(self, xs: np.ndarray):
        """Values and exact first derivatives at points xs of shape (dim, K).

        Returns (values (K, 2, 2), derivs (dim, K, 2, 2)).
        """
        xs = np.asarray(xs, dtype=float)
        dim = xs.shape[0]
        K = xs.shape[1]
        vals = np.empty((K, 2, 2), dtype=complex)
        ders = np.empty((dim, K, 2, 2), dtype=complex)
        for r in range(2):
            for c in range(2):
                v, g = _eval(self.entries[r][c], xs)
                vals[:, r, c] = v
                ders[:, :, r, c] = g
        return vals, ders

    def values_at(self, xs: np.ndarray) -> np.ndarray:
        return self.eval(xs)[0]
