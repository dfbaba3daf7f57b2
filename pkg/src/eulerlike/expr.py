"""A small expression language for smooth coefficient functions.

Grammar (whitespace is ignored, newlines are allowed)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := atom (('^' | '**') ['-'] INT)?
    atom    := NUMBER | 'pi' | 'I' | VAR | FUNC '(' expr ')' | '(' expr ')'
    VAR     := 'x' INT          (x1 .. x{dim})
    FUNC    := exp | log | sin | cos | sqrt

Exponents are integer literals.  ``I`` (the imaginary unit) is accepted only
when parsing in complex mode.  Trees are immutable and evaluate on batches of
points through :class:`eulerlike.jet.Jet`.
"""

import math
import re
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DomainGuardError, ParseError
from .jet import Jet, JetValue

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")


# -- nodes ------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Var:
    index: int  # zero based


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Sub:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Div:
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


Node = object


@dataclass(frozen=True)
class Expr:
    """A parsed expression together with the chart dimension it lives on."""

    root: Node
    dim: int
    source: str = ""
    complex_mode: bool = False

    def __call__(self, points):
        return evaluate(self, np.atleast_2d(np.asarray(points, dtype=float)), order=0).val

    def __str__(self):
        return self.source or to_source(self.root)


# -- tokenizer --------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)"
    r"|(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[+\-*/^()])"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(src):
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    toks.append(_Tok("end", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, src, dim, complex_mode):
        self.toks = _tokenize(src)
        self.i = 0
        self.dim = dim
        self.complex_mode = complex_mode

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def expect(self, text):
        t = self.peek()
        if t.text != text:
            what = "end of input" if t.kind == "end" else repr(t.text)
            self.fail(f"syntax error: expected {text!r}, found {what}")
        return self.next()

    def parse(self):
        if self.peek().kind == "end":
            self.fail("syntax error: empty expression")
        node = self.expr()
        if self.peek().kind != "end":
            self.fail(f"syntax error: unexpected {self.peek().text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.next().text
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self):
        t = self.peek()
        if t.text == "-":
            self.next()
            return Neg(self.unary())
        if t.text == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().text in ("^", "**"):
            self.next()
            sign = 1
            if self.peek().text == "-":
                self.next()
                sign = -1
            t = self.peek()
            if t.kind != "num" or not t.text.isdigit():
                self.fail("syntax error: exponent must be an integer literal")
            self.next()
            base = Pow(base, sign * int(t.text))
            if self.peek().text in ("^", "**"):
                self.fail("syntax error: chained exponents need parentheses")
        return base

    def atom(self):
        t = self.peek()
        if t.kind == "num":
            self.next()
            return Const(float(t.text))
        if t.text == "(":
            self.next()
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "name":
            self.next()
            name = t.text
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(name, arg)
            if name == "pi":
                return Const(math.pi)
            if name == "I":
                if not self.complex_mode:
                    self.fail("unknown identifier 'I' (the imaginary unit needs complex mode)", t)
                return Const(1j)
            m = re.fullmatch(r"x([1-9]\d*)", name)
            if m:
                idx = int(m.group(1))
                if idx > self.dim:
                    self.fail(f"variable {name} out of range for dimension {self.dim}", t)
                return Var(idx - 1)
            self.fail(f"unknown identifier {name!r}", t)
        if t.kind == "end":
            self.fail("syntax error: unexpected end of input")
        self.fail(f"syntax error: unexpected {t.text!r}")


def parse(src, dim, complex_mode=False):
    """Parse ``src`` into an :class:`Expr` over ``x1..x{dim}``."""
    if dim < 1:
        raise ValueError("chart dimension must be at least 1")
    if isinstance(src, (int, float)):
        src = repr(float(src))
    root = _Parser(str(src), dim, complex_mode).parse()
    return Expr(root, dim, str(src), complex_mode)


def constant(value, dim):
    return Expr(Const(value), dim, repr(value), isinstance(value, complex))


def to_source(node):
    """Fully parenthesised source text (round-trips through :func:`parse`)."""
    if isinstance(node, Const):
        v = node.value
        if isinstance(v, complex):
            return f"({v.real!r}+{v.imag!r}*I)"
        return f"({v!r})"
    if isinstance(node, Var):
        return f"x{node.index + 1}"
    if isinstance(node, Neg):
        return f"(-{to_source(node.arg)})"
    if isinstance(node, Pow):
        return f"({to_source(node.base)}^{node.exponent})" if node.exponent >= 0 else \
            f"({to_source(node.base)}^-{-node.exponent})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(node)]
    return f"({to_source(node.left)}{op}{to_source(node.right)})"


# -- evaluation -------------------------------------------------------------

def _check_finite(jet, what):
    for a in jet.parts():
        if not np.all(np.isfinite(a)):
            raise DomainGuardError(f"non-finite value produced by {what}")
    return jet


def evaluate(e, x, order=2, complex_mode=None):
    """Evaluate ``e`` on a coordinate jet (or a ``(B, n)`` array of points).

    Returns a :class:`Jet` of scalar shape.  The derivative directions are
    those seeded in ``x``.
    """
    if complex_mode is None:
        complex_mode = e.complex_mode
    if not isinstance(x, Jet):
        x = Jet.coordinates(np.atleast_2d(np.asarray(x, dtype=float)), order)
    else:
        x = x.truncate(min(order, x.order))
    if x.shape[-1] != e.dim:
        raise ValueError(f"expression has dimension {e.dim}, points have {x.shape[-1]}")
    memo = {}
    return _check_finite(_eval(e.root, x, complex_mode, memo), "expression")


def _eval(node, x, cplx, memo):
    key = id(node)
    if key in memo:
        return memo[key]
    out = _eval_node(node, x, cplx, memo)
    memo[key] = out
    return out


def _eval_node(node, x, cplx, memo):
    if isinstance(node, Const):
        v = node.value
        val = np.full(x.batch, v, dtype=complex if isinstance(v, complex) else float)
        return Jet.constant(val, x.ndir or 0, x.order)
    if isinstance(node, Var):
        return x[node.index]
    if isinstance(node, Neg):
        return -_eval(node.arg, x, cplx, memo)
    if isinstance(node, Add):
        return _eval(node.left, x, cplx, memo) + _eval(node.right, x, cplx, memo)
    if isinstance(node, Sub):
        return _eval(node.left, x, cplx, memo) - _eval(node.right, x, cplx, memo)
    if isinstance(node, Mul):
        return _eval(node.left, x, cplx, memo) * _eval(node.right, x, cplx, memo)
    if isinstance(node, Div):
        num = _eval(node.left, x, cplx, memo)
        den = _eval(node.right, x, cplx, memo)
        if np.any(den.val == 0):
            raise DomainGuardError("division by zero")
        return num * den.reciprocal()
    if isinstance(node, Pow):
        return _pow(_eval(node.base, x, cplx, memo), node.exponent)
    if isinstance(node, Call):
        return _call(node.func, _eval(node.arg, x, cplx, memo), cplx)
    raise TypeError(f"unknown node {node!r}")


def _pow(u, n):
    if n == 0:
        return Jet.constant(np.ones_like(u.val), u.ndir or 0, u.order)
    if n == 1:
        return u
    if n == 2:
        return u * u
    v = u.val
    if n < 0 and np.any(v == 0):
        raise DomainGuardError("division by zero in negative power")
    f0 = v ** n
    f1 = n * v ** (n - 1)
    f2 = n * (n - 1) * v ** (n - 2)
    return u.unary(f0, f1, f2)


def _call(name, u, cplx):
    v = u.val
    if name == "exp":
        f = np.exp(v)
        return u.unary(f, f, f)
    if name == "sin":
        s, c = np.sin(v), np.cos(v)
        return u.unary(s, c, -s)
    if name == "cos":
        s, c = np.sin(v), np.cos(v)
        return u.unary(c, -s, -c)
    if name == "log":
        if np.iscomplexobj(v) or cplx:
            if np.any(v == 0):
                raise DomainGuardError("log of zero")
            v = v.astype(complex)
        elif np.any(v <= 0):
            raise DomainGuardError("log of a non-positive value")
        r = 1.0 / v
        return u.unary(np.log(v), r, -r * r)
    if name == "sqrt":
        if np.iscomplexobj(v) or cplx:
            v = v.astype(complex)
        elif np.any(v < 0):
            raise DomainGuardError("sqrt of a negative value")
        if u.order > 0 and np.any(v == 0):
            raise DomainGuardError("sqrt is not differentiable at zero")
        s = np.sqrt(v)
        if u.order == 0:
            return Jet(s)
        r = 0.5 / s
        return u.unary(s, r, -0.5 * r / v)
    raise TypeError(f"unknown function {name}")


def eval_jet(e, point, directions=None, complex_mode=None):
    """Value, directional gradient and Hessian of ``e`` at a single point.

    ``directions`` is a sequence of tangent vectors (default: coordinate
    basis).  The Hessian is exactly symmetric.
    """
    point = np.asarray(point, dtype=float).reshape(1, -1)
    if directions is None:
        directions = np.eye(point.shape[1])
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    x = Jet.coordinates(point, 2, directions)
    j = evaluate(e, x, 2, complex_mode)
    hess = j.d2[0]
    hess = np.triu(hess) + np.triu(hess, 1).T
    return JetValue(j.val[0], j.d1[0].copy(), hess)


# -- symbolic differentiation (used as an independent oracle) ---------------

def differentiate(node, i):
    """Structural derivative of a node with respect to variable ``i``."""
    if isinstance(node, Const):
        return Const(0.0)
    if isinstance(node, Var):
        return Const(1.0 if node.index == i else 0.0)
    if isinstance(node, Neg):
        return Neg(differentiate(node.arg, i))
    if isinstance(node, Add):
        return Add(differentiate(node.left, i), differentiate(node.right, i))
    if isinstance(node, Sub):
        return Sub(differentiate(node.left, i), differentiate(node.right, i))
    if isinstance(node, Mul):
        return Add(Mul(differentiate(node.left, i), node.right), Mul(node.left, differentiate(node.right, i)))
    if isinstance(node, Div):
        return Div(Sub(Mul(differentiate(node.left, i), node.right), Mul(node.left, differentiate(node.right, i))),
                   Pow(node.right, 2))
    if isinstance(node, Pow):
        n = node.exponent
        if n == 0:
            return Const(0.0)
        return Mul(Mul(Const(float(n)), Pow(node.base, n - 1)), differentiate(node.base, i))
    if isinstance(node, Call):
        a, da = node.arg, differentiate(node.arg, i)
        outer = {
            "exp": Call("exp", a),
            "log": Div(Const(1.0), a),
            "sin": Call("cos", a),
            "cos": Neg(Call("sin", a)),
            "sqrt": Div(Const(0.5), Call("sqrt", a)),
        }[node.func]
        return Mul(outer, da)
    raise TypeError(f"unknown node {node!r}")


def derivative(e: Expr, i: int) -> Expr:
    return Expr(differentiate(e.root, i), e.dim, "", e.complex_mode)


def variables(node) -> Tuple[int, ...]:
    """Sorted indices of the variables occurring in a node."""
    out = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Var):
            out.add(n.index)
        elif isinstance(n, (Neg,)):
            stack.append(n.arg)
        elif isinstance(n, Call):
            stack.append(n.arg)
        elif isinstance(n, Pow):
            stack.append(n.base)
        elif isinstance(n, (Add, Sub, Mul, Div)):
            stack.extend([n.left, n.right])
    return tuple(sorted(out))
