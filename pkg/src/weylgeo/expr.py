"""Scalar expression fields with exact first and second derivatives.

Expressions are small ASTs over chart variables ``x1..x4`` or surface
variables ``u, v``. They are evaluated either on plain floats/arrays or on
forward-mode automatic-differentiation types:

* :class:`HyperDual` -- value, two seeded first-order parts and the mixed
  second-order part.
* :class:`Jet` -- value, full gradient and (optionally) full Hessian with
  respect to every variable, vectorized over arrays of points.

Grammar (``^`` is rejected; use ``pow``)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | primary
    primary := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

CHART_VARS = ("x1", "x2", "x3", "x4")
SURFACE_VARS = ("u", "v")
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "sin": 1, "cos": 1, "tan": 1, "exp": 1, "log": 1, "sqrt": 1,
    "pow": 2, "atan2": 2,
}


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        detail = f" (expected one of: {', '.join(self.expected)})" if expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class ExprNameError(ExprError):
    def __init__(self, name, offset):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


class ExprDomainError(ExprError, ArithmeticError):
    def __init__(self, message, subexpr):
        self.subexpr = subexpr
        super().__init__(f"{message} in {subexpr}")


# ---------------------------------------------------------------------------
# AST


class Expr:
    """Base node. Arithmetic operators build new trees."""

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True, eq=True)
class Num(Expr):
    value: float


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, eq=True)
class Const(Expr):
    name: str


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Call(Expr):
    func: str
    args: tuple


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, str):
        return parse(x)
    return Num(float(x))


def _is_num(e, value=None):
    return isinstance(e, Num) and (value is None or e.value == value)


# Builders with trivial 0/1 folding, so generated frames stay small.
def add(a, b):
    a, b = as_expr(a), as_expr(b)
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    return BinOp("+", a, b)


def sub(a, b):
    a, b = as_expr(a), as_expr(b)
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return neg(b)
    return BinOp("-", a, b)


def mul(a, b):
    a, b = as_expr(a), as_expr(b)
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    return BinOp("*", a, b)


def div(a, b):
    a, b = as_expr(a), as_expr(b)
    if _is_num(a, 0.0):
        return Num(0.0)
    if _is_num(b, 1.0):
        return a
    return BinOp("/", a, b)


def neg(a):
    a = as_expr(a)
    if _is_num(a, 0.0):
        return a
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def call(func, *args):
    return Call(func, tuple(as_expr(a) for a in args))


def is_zero(e) -> bool:
    return _is_num(e, 0.0)


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/(),^]))"
)


def _tokenize(source):
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            start = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {source[start]!r}", _byte_offset(source, start))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


def _byte_offset(source, char_index):
    return len(source[:char_index].encode("utf-8"))


class _Parser:
    def __init__(self, source, variables):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, expected, tok=None):
        tok = tok or self.peek()
        what = "end of input" if tok[0] == "end" else repr(tok[1])
        raise ExprSyntaxError(f"unexpected {what}", _byte_offset(self.source, tok[2]), expected)

    def expect(self, value):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != value:
            self.error({value})
        return self.advance()

    def parse(self):
        e = self.expr()
        if self.peek()[0] != "end":
            self.error({"+", "-", "*", "/", "end of input"})
        return e

    def expr(self):
        left = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.unary()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "*/":
                self.advance()
                left = BinOp(tok[1], left, self.unary())
            elif tok[0] == "op" and tok[1] == "^":
                raise ExprSyntaxError("'^' is not supported, use pow(a, b)",
                                      _byte_offset(self.source, tok[2]), {"*", "/"})
            else:
                return left

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.primary()

    def primary(self):
        tok = self.peek()
        starts = {"number", "identifier", "(", "-"}
        if tok[0] == "num":
            self.advance()
            return Num(float(tok[1]))
        if tok[0] == "name":
            self.advance()
            name = tok[1]
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "(":
                if name not in FUNCTIONS:
                    raise ExprNameError(name, _byte_offset(self.source, tok[2]))
                self.advance()
                args = [self.expr()]
                while self.peek()[0] == "op" and self.peek()[1] == ",":
                    self.advance()
                    args.append(self.expr())
                close = self.peek()
                if close[0] != "op" or close[1] != ")":
                    self.error({")", ","})
                self.advance()
                if len(args) != FUNCTIONS[name]:
                    raise ExprSyntaxError(
                        f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}",
                        _byte_offset(self.source, tok[2]))
                return Call(name, tuple(args))
            if name in CONSTANTS:
                return Const(name)
            if name in self.variables:
                return Var(name)
            raise ExprNameError(name, _byte_offset(self.source, tok[2]))
        if tok[0] == "op" and tok[1] == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.error(starts)


def parse(source: str, variables=CHART_VARS + SURFACE_VARS) -> Expr:
    """Parse expression text into an AST.

    Raises :class:`ExprSyntaxError` (with the byte offset of the first bad
    token and the expected-token set) or :class:`ExprNameError`.
    """
    if not isinstance(source, str) or source.strip() == "":
        raise ExprSyntaxError("empty expression", 0, {"number", "identifier", "(", "-"})
    return _Parser(source, set(variables)).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_string(e: Expr) -> str:
    """Print with the minimal parentheses needed to reparse to the same tree."""
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, (Var, Const)):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({', '.join(to_string(a) for a in e.args)})"
    if isinstance(e, Neg):
        inner = to_string(e.arg)
        if isinstance(e.arg, BinOp):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        left = to_string(e.left)
        if isinstance(e.left, BinOp) and _PREC[e.left.op] < p:
            left = f"({left})"
        right = to_string(e.right)
        # left-associative: equal precedence on the right needs parentheses
        if isinstance(e.right, BinOp) and _PREC[e.right.op] <= p:
            right = f"({right})"
        if isinstance(e.right, Neg):
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression node: {e!r}")


def variables_of(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return variables_of(e.arg)
    if isinstance(e, BinOp):
        return variables_of(e.left) | variables_of(e.right)
    if isinstance(e, Call):
        out = set()
        for a in e.args:
            out |= variables_of(a)
        return out
    return set()


def substitute(e: Expr, mapping: dict) -> Expr:
    """Replace variables by expressions (used to pull chart fields back)."""
    if isinstance(e, Var):
        return as_expr(mapping[e.name]) if e.name in mapping else e
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, mapping))
    if isinstance(e, BinOp):
        return BinOp(e.op, substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Call):
        return Call(e.func, tuple(substitute(a, mapping) for a in e.args))
    return e


def diff(e: Expr, var: str) -> Expr:
    """Symbolic partial derivative (no simplification beyond 0/1 folding)."""
    if isinstance(e, (Num, Const)):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0 if e.name == var else 0.0)
    if isinstance(e, Neg):
        return neg(diff(e.arg, var))
    if isinstance(e, BinOp):
        a, b = e.left, e.right
        da, db = diff(a, var), diff(b, var)
        if e.op == "+":
            return add(da, db)
        if e.op == "-":
            return sub(da, db)
        if e.op == "*":
            return add(mul(da, b), mul(a, db))
        return div(sub(mul(da, b), mul(a, db)), mul(b, b))
    if isinstance(e, Call):
        f = e.func
        if f == "pow":
            a, b = e.args
            db = diff(b, var)
            da = diff(a, var)
            if is_zero(db):
                return mul(mul(b, call("pow", a, sub(b, 1.0))), da)
            return mul(e, add(mul(db, call("log", a)), div(mul(b, da), a)))
        if f == "atan2":
            y, x = e.args
            r2 = add(mul(x, x), mul(y, y))
            return div(sub(mul(x, diff(y, var)), mul(y, diff(x, var))), r2)
        (a,) = e.args
        da = diff(a, var)
        if is_zero(da):
            return Num(0.0)
        outer = {
            "sin": lambda: call("cos", a),
            "cos": lambda: neg(call("sin", a)),
            "tan": lambda: div(1.0, mul(call("cos", a), call("cos", a))),
            "exp": lambda: e,
            "log": lambda: div(1.0, a),
            "sqrt": lambda: div(0.5, e),
        }[f]()
        return mul(outer, da)
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# Forward-mode AD types


class _ADBase:
    """Shared operator plumbing; subclasses supply _lift, _apply, _apply2, _mul."""

    __array_priority__ = 1000

    def __add__(self, other):
        other = self._lift(other)
        return self._linear(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._linear(self._lift(other), -1.0)

    def __rsub__(self, other):
        return self._lift(other)._linear(self, -1.0)

    def __neg__(self):
        return self._scale(-1.0)

    def __mul__(self, other):
        if not isinstance(other, _ADBase):
            return self._scale(other)
        return self._mul(other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, _ADBase):
            return self._scale(1.0 / np.asarray(other, dtype=float))
        return self._mul(other.reciprocal())

    def __rtruediv__(self, other):
        return self.reciprocal()._scale(other)

    def reciprocal(self):
        x = self.value
        return self._apply(1.0 / x, -1.0 / x**2, 2.0 / x**3)

    def sin(self):
        s, c = np.sin(self.value), np.cos(self.value)
        return self._apply(s, c, -s)

    def cos(self):
        s, c = np.sin(self.value), np.cos(self.value)
        return self._apply(c, -s, -c)

    def tan(self):
        t = np.tan(self.value)
        sec2 = 1.0 + t * t
        return self._apply(t, sec2, 2.0 * t * sec2)

    def exp(self):
        ex = np.exp(self.value)
        return self._apply(ex, ex, ex)

    def log(self):
        x = self.value
        return self._apply(np.log(x), 1.0 / x, -1.0 / x**2)

    def sqrt(self):
        r = np.sqrt(self.value)
        return self._apply(r, 0.5 / r, -0.25 / (r * self.value))

    def pow_const(self, p):
        x = self.value

        def term(c, q):
            # c * x**q with an exactly vanishing coefficient kept at 0 (x**q may be inf at 0)
            if c == 0.0:
                return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0
            return c * x**q

        return self._apply(x**p, term(p, p - 1.0), term(p * (p - 1.0), p - 2.0))

    def atan2_with(self, x):
        """atan2(self, x) for self = y."""
        y = self
        yv, xv = y.value, x.value
        r2 = xv * xv + yv * yv
        r4 = r2 * r2
        return _apply2(np.arctan2(yv, xv), y, x,
                       xv / r2, -yv / r2,
                       -2.0 * xv * yv / r4, (yv * yv - xv * xv) / r4, 2.0 * xv * yv / r4)


def _apply2(f0, a, b, fa, fb, faa, fab, fbb):
    return a._apply2(f0, b, fa, fb, faa, fab, fbb)


class HyperDual(_ADBase):
    """value + b1*e1 + b2*e2 + b12*e1*e2 with e1^2 = e2^2 = 0.

    Seeding e1 and e2 along two directions gives both directional first
    derivatives and the mixed second derivative in one pass.
    """

    def __init__(self, value, b1=0.0, b2=0.0, b12=0.0):
        self.value = value
        self.b1 = b1
        self.b2 = b2
        self.b12 = b12

    def __repr__(self):
        return f"HyperDual({self.value!r}, {self.b1!r}, {self.b2!r}, {self.b12!r})"

    def _lift(self, other):
        if isinstance(other, HyperDual):
            return other
        return HyperDual(other)

    def _linear(self, other, s):
        return HyperDual(self.value + s * other.value, self.b1 + s * other.b1,
                         self.b2 + s * other.b2, self.b12 + s * other.b12)

    def _scale(self, c):
        return HyperDual(self.value * c, self.b1 * c, self.b2 * c, self.b12 * c)

    def _mul(self, o):
        return HyperDual(self.value * o.value,
                         self.b1 * o.value + self.value * o.b1,
                         self.b2 * o.value + self.value * o.b2,
                         self.b12 * o.value + self.value * o.b12 + self.b1 * o.b2 + self.b2 * o.b1)

    def _apply(self, f0, f1, f2):
        return HyperDual(f0, f1 * self.b1, f1 * self.b2, f1 * self.b12 + f2 * self.b1 * self.b2)

    def _apply2(self, f0, o, fa, fb, faa, fab, fbb):
        o = self._lift(o)
        return HyperDual(
            f0,
            fa * self.b1 + fb * o.b1,
            fa * self.b2 + fb * o.b2,
            fa * self.b12 + fb * o.b12 + faa * self.b1 * self.b2
            + fab * (self.b1 * o.b2 + o.b1 * self.b2) + fbb * o.b1 * o.b2,
        )


class Jet(_ADBase):
    """Value with full gradient (n, *shape) and optional Hessian (n, n, *shape)."""

    def __init__(self, value, grad, hess=None):
        self.value = value
        self.grad = grad
        self.hess = hess

    @classmethod
    def variable(cls, values, index, n, order=2):
        values = np.asarray(values, dtype=float)
        grad = np.zeros((n,) + values.shape)
        grad[index] = 1.0
        hess = np.zeros((n, n) + values.shape) if order >= 2 else None
        return cls(values, grad, hess)

    @property
    def n(self):
        return self.grad.shape[0]

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(np.shape(self.value), other.shape)
        grad = np.zeros((self.n,) + shape)
        hess = None if self.hess is None else np.zeros((self.n, self.n) + shape)
        return Jet(np.broadcast_to(other, shape).copy(), grad, hess)

    def _linear(self, other, s):
        hess = None
        if self.hess is not None and other.hess is not None:
            hess = self.hess + s * other.hess
        return Jet(self.value + s * other.value, self.grad + s * other.grad, hess)

    def _scale(self, c):
        c = np.asarray(c, dtype=float)
        return Jet(self.value * c, self.grad * c, None if self.hess is None else self.hess * c)

    def _mul(self, o):
        a, b = self.value, o.value
        grad = self.grad * b + a * o.grad
        hess = None
        if self.hess is not None and o.hess is not None:
            cross = self.grad[:, None] * o.grad[None, :]
            hess = self.hess * b + a * o.hess + cross + np.swapaxes(cross, 0, 1)
        return Jet(a * b, grad, hess)

    def _apply(self, f0, f1, f2):
        grad = f1 * self.grad
        hess = None
        if self.hess is not None:
            hess = f1 * self.hess + f2 * self.grad[:, None] * self.grad[None, :]
        return Jet(f0, grad, hess)

    def _apply2(self, f0, o, fa, fb, faa, fab, fbb):
        o = self._lift(o)
        ga, gb = self.grad, o.grad
        grad = fa * ga + fb * gb
        hess = None
        if self.hess is not None and o.hess is not None:
            ab = ga[:, None] * gb[None, :]
            hess = (fa * self.hess + fb * o.hess + faa * ga[:, None] * ga[None, :]
                    + fab * (ab + np.swapaxes(ab, 0, 1)) + fbb * gb[:, None] * gb[None, :])
        return Jet(f0, grad, hess)


# ---------------------------------------------------------------------------
# Evaluation


def _val(x):
    return x.value if isinstance(x, _ADBase) else x


def _check(cond, message, node):
    if np.any(cond):
        raise ExprDomainError(message, to_string(node))


def _eval(e, env):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        return CONSTANTS[e.name]
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise ExprError(f"variable {e.name!r} has no value") from None
    if isinstance(e, Neg):
        return -_eval(e.arg, env)
    if isinstance(e, BinOp):
        a = _eval(e.left, env)
        b = _eval(e.right, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        _check(np.asarray(_val(b)) == 0.0, "division by zero", e)
        return a / b
    if isinstance(e, Call):
        args = [_eval(a, env) for a in e.args]
        f = e.func
        x = args[0]
        xv = np.asarray(_val(x))
        ad = isinstance(x, _ADBase)
        if f == "log":
            _check(xv <= 0.0, "log of non-positive value", e)
        elif f == "sqrt":
            _check(xv < 0.0, "sqrt of negative value", e)
            if ad:
                _check(xv == 0.0, "sqrt is not differentiable at 0", e)
        elif f == "tan":
            _check(np.abs(np.cos(xv)) < 1e-300, "tan at a pole", e)
        if f in ("sin", "cos", "tan", "exp", "log", "sqrt"):
            if ad:
                return getattr(x, f)()
            return getattr(np, f)(x)
        if f == "pow":
            base, p = args
            bv = np.asarray(_val(base))
            if isinstance(p, _ADBase):
                _check(bv <= 0.0, "pow with variable exponent needs a positive base", e)
                return (p * p._lift(base).log()).exp()
            p = float(p)
            integer = p == round(p)
            if not integer:
                _check(bv < 0.0, "pow of negative base to a non-integer power", e)
            if p < 0:
                _check(bv == 0.0, "pow of zero to a negative power", e)
            if isinstance(base, _ADBase):
                if not integer and p < 2:
                    _check(bv == 0.0, "pow is not differentiable at 0", e)
                return base.pow_const(p)
            return np.power(base, p)
        if f == "atan2":
            y, xx = args
            _check((np.asarray(_val(y)) == 0.0) & (np.asarray(_val(xx)) == 0.0), "atan2(0, 0)", e)
            if isinstance(y, _ADBase) or isinstance(xx, _ADBase):
                proto = y if isinstance(y, _ADBase) else xx
                return proto._lift(y).atan2_with(proto._lift(xx))
            return np.arctan2(y, xx)
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e, env: dict):
    """Evaluate on floats, arrays, :class:`HyperDual` or :class:`Jet` values."""
    return _eval(as_expr(e), env)


def eval_jet2(e, point, seeds=(0, 0), variables=None):
    """Value, two seeded directional derivatives and their mixed second partial.

    ``seeds`` holds two directions, each either a variable index or a
    direction vector in variable space.
    """
    e = as_expr(e)
    if variables is None:
        used = variables_of(e)
        variables = SURFACE_VARS if used and used <= set(SURFACE_VARS) else CHART_VARS
    point = np.asarray(point, dtype=float)
    if point.shape != (len(variables),):
        raise ValueError(f"point must have {len(variables)} components")

    def direction(s):
        if np.ndim(s) == 0:
            d = np.zeros(len(variables))
            d[int(s)] = 1.0
            return d
        return np.asarray(s, dtype=float)

    d1, d2 = direction(seeds[0]), direction(seeds[1])
    env = {name: HyperDual(point[k], d1[k], d2[k], 0.0) for k, name in enumerate(variables)}
    out = _eval(e, env)
    if not isinstance(out, HyperDual):
        return float(out), (0.0, 0.0), 0.0
    return float(out.value), (float(out.b1), float(out.b2)), float(out.b12)


def eval_jet(e, points, variables, order=2):
    """Vectorized :class:`Jet` of ``e`` at ``points`` of shape (..., n)."""
    points = np.asarray(points, dtype=float)
    n = len(variables)
    env = {name: Jet.variable(points[..., k], k, n, order) for k, name in enumerate(variables)}
    out = _eval(as_expr(e), env)
    if not isinstance(out, Jet):
        shape = points.shape[:-1]
        return Jet(np.full(shape, float(out)), np.zeros((n,) + shape),
                   np.zeros((n, n) + shape) if order >= 2 else None)
    if out.value.shape != points.shape[:-1]:
        shape = points.shape[:-1]
        return Jet(np.broadcast_to(out.value, shape).copy(),
                   np.broadcast_to(out.grad, (n,) + shape).copy(),
                   None if out.hess is None else np.broadcast_to(out.hess, (n, n) + shape).copy())
    return out


def eval_values(e, points, variables):
    points = np.asarray(points, dtype=float)
    env = {name: points[..., k] for k, name in enumerate(variables)}
    out = _eval(as_expr(e), env)
    return np.broadcast_to(np.asarray(out, dtype=float), points.shape[:-1]).copy()
