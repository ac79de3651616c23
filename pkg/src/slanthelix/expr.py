"""Curve definitions: a small expression language evaluated as jets.

Grammar::

    curve   := "dim" INT ["on" "[" const "," const "]"] ":" coord (";" coord)* [";"]
    coord   := IDENT "=" expr
    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ["^" unary]          # right associative, exponent constant
    atom    := NUMBER | "t" | "pi" | "e" | FUNC "(" expr ")" | "(" expr ")"

Precedence is ``^`` > unary ``-`` > ``* /`` > ``+ -``, so ``-t^2`` is ``-(t^2)``.
``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import jet as jetlib
from .errors import JetOrderError, ParseError
from .jet import Jet

__all__ = [
    "Expression",
    "Num",
    "Var",
    "Const",
    "Neg",
    "BinOp",
    "Call",
    "CurveSpec",
    "parse_expression",
    "parse_curve",
    "eval_jets",
    "default_max_order",
]

CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTION_NAMES = tuple(jetlib.FUNCTIONS)

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


# ---------------------------------------------------------------------------
# Expression trees
# ---------------------------------------------------------------------------


class Expression:
    """Base class of the immutable expression tree."""

    prec = _PREC_ATOM

    def evaluate(self, x: Jet) -> Jet:
        """Evaluate with the free variable bound to the jet ``x``."""
        raise NotImplementedError

    def diff(self) -> "Expression":
        """Symbolic derivative with respect to the free variable."""
        raise NotImplementedError

    def has_var(self) -> bool:
        return False

    def to_source(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.to_source()

    def __call__(self, x, order=0):
        """Numeric evaluation at scalar or array ``x`` (values only by default)."""
        j = self.evaluate(Jet.variable(x, order))
        return j.value if order == 0 else j

    # builders, used by the fixture generators
    def __add__(self, other):
        return BinOp("+", self, _wrap(other))

    def __radd__(self, other):
        return BinOp("+", _wrap(other), self)

    def __sub__(self, other):
        return BinOp("-", self, _wrap(other))

    def __rsub__(self, other):
        return BinOp("-", _wrap(other), self)

    def __mul__(self, other):
        return BinOp("*", self, _wrap(other))

    def __rmul__(self, other):
        return BinOp("*", _wrap(other), self)

    def __truediv__(self, other):
        return BinOp("/", self, _wrap(other))

    def __rtruediv__(self, other):
        return BinOp("/", _wrap(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, other):
        return BinOp("^", self, _wrap(other))


def _wrap(x):
    if isinstance(x, Expression):
        return x
    x = float(x)
    return Num(x) if x >= 0 else Neg(Num(-x))


def _is_num(e, value=None):
    return isinstance(e, Num) and (value is None or e.value == value)


def _fmt_number(x):
    s = repr(float(x))
    if s.endswith(".0"):
        s = s[:-2]
    return s


@dataclass(frozen=True, eq=True, repr=True)
class Num(Expression):
    value: float

    def evaluate(self, x):
        return Jet.constant(np.full(x.batch_shape, self.value), x.order)

    def diff(self):
        return Num(0.0)

    def to_source(self):
        return _fmt_number(self.value)


@dataclass(frozen=True)
class Var(Expression):
    name: str = "t"

    def evaluate(self, x):
        return x

    def diff(self):
        return Num(1.0)

    def has_var(self):
        return True

    def to_source(self):
        return self.name


@dataclass(frozen=True)
class Const(Expression):
    name: str

    def evaluate(self, x):
        return Jet.constant(np.full(x.batch_shape, CONSTANTS[self.name]), x.order)

    def diff(self):
        return Num(0.0)

    def to_source(self):
        return self.name


@dataclass(frozen=True)
class Neg(Expression):
    arg: Expression
    prec = _PREC_NEG

    def evaluate(self, x):
        return -self.arg.evaluate(x)

    def diff(self):
        d = self.arg.diff()
        return Num(0.0) if _is_num(d, 0.0) else Neg(d)

    def has_var(self):
        return self.arg.has_var()

    def to_source(self):
        return "-" + _paren(self.arg, _PREC_NEG)


@dataclass(frozen=True)
class BinOp(Expression):
    op: str
    left: Expression
    right: Expression

    @property
    def prec(self):
        return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[self.op]

    def evaluate(self, x):
        a = self.left.evaluate(x)
        if self.op == "^":
            # exponent is variable-free by construction
            p = self.right.evaluate(Jet.variable(0.0, 0)).value
            return jetlib.power(a, float(p))
        b = self.right.evaluate(x)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b

    def has_var(self):
        return self.left.has_var() or self.right.has_var()

    def diff(self):
        f, g = self.left, self.right
        df, dg = f.diff(), g.diff()
        if self.op in "+-":
            if _is_num(dg, 0.0):
                return df
            if _is_num(df, 0.0):
                return dg if self.op == "+" else Neg(dg)
            return BinOp(self.op, df, dg)
        if self.op == "*":
            return _sum(_prod(df, g), _prod(f, dg))
        if self.op == "/":
            num = _diff_terms(_prod(df, g), _prod(f, dg))
            if _is_num(num, 0.0):
                return num
            return BinOp("/", num, BinOp("^", g, Num(2.0)))
        # power with constant exponent: p * f^(p-1) * f'
        if _is_num(df, 0.0):
            return Num(0.0)
        p = BinOp("-", g, Num(1.0)) if not isinstance(g, Num) else _wrap(g.value - 1.0)
        return _prod(_prod(g, BinOp("^", f, p)), df)

    def to_source(self):
        if self.op == "^":
            return _paren(self.left, _PREC_ATOM) + "^" + _paren(self.right, _PREC_NEG)
        p = self.prec
        sep = f" {self.op} " if p == _PREC_ADD else self.op
        return _paren(self.left, p) + sep + _paren(self.right, p + 1)


@dataclass(frozen=True)
class Call(Expression):
    fn: str
    arg: Expression

    def evaluate(self, x):
        return jetlib.FUNCTIONS[self.fn](self.arg.evaluate(x))

    def has_var(self):
        return self.arg.has_var()

    def diff(self):
        u, du = self.arg, self.arg.diff()
        if _is_num(du, 0.0):
            return Num(0.0)
        fn = self.fn
        if fn == "sin":
            outer = Call("cos", u)
        elif fn == "cos":
            outer = Neg(Call("sin", u))
        elif fn == "tan":
            outer = BinOp("/", Num(1.0), BinOp("^", Call("cos", u), Num(2.0)))
        elif fn == "exp":
            outer = self
        elif fn == "log":
            return BinOp("/", du, u)
        elif fn == "sqrt":
            return BinOp("/", du, BinOp("*", Num(2.0), self))
        elif fn == "sinh":
            outer = Call("cosh", u)
        else:  # cosh
            outer = Call("sinh", u)
        return _prod(outer, du)

    def to_source(self):
        return f"{self.fn}({self.arg.to_source()})"


def _paren(e, min_prec):
    s = e.to_source()
    return s if e.prec >= min_prec else f"({s})"


def _prod(a, b):
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    return BinOp("*", a, b)


def _sum(a, b):
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    return BinOp("+", a, b)


def _diff_terms(a, b):
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return Neg(b)
    return BinOp("-", a, b)


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+) |
    (?P<nl>\n) |
    (?P<comment>\#[^\n]*) |
    (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?) |
    (?P<ident>[A-Za-z_][A-Za-z_0-9]*) |
    (?P<op>[-+*/^()=;:,\[\]])
    """,
    re.VERBOSE,
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
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, src, var="t"):
        self.toks = _tokenize(src)
        self.i = 0
        self.var = var

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def accept(self, text):
        if self.tok.text == text and self.tok.kind in ("op", "ident"):
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    # expressions
    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.i += 1
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            tok = self.tok
            self.i += 1
            exponent = self.unary()
            if exponent.has_var():
                raise self.error(f"exponent must not contain {self.var!r}", tok)
            return BinOp("^", base, exponent)
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.i += 1
            name = tok.text
            if name == self.var:
                return Var(name)
            if name in FUNCTION_NAMES:
                if not (self.tok.kind == "op" and self.tok.text == "("):
                    raise self.error(f"function {name!r} must be called with parentheses")
                self.i += 1
                arg = self.expr()
                self.expect(")")
                return Call(name, arg)
            if name in CONSTANTS:
                return Const(name)
            raise self.error(f"unknown identifier {name!r}", tok)
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            node = self.expr()
            self.expect(")")
            return node
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}")

    def constant(self):
        tok = self.tok
        e = self.expr()
        if e.has_var():
            raise self.error("interval bound must be constant", tok)
        return float(e(0.0))

    def finish(self):
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")


def parse_expression(src: str, var: str = "t") -> Expression:
    """Parse a single expression in the free variable ``var``."""
    p = _Parser(src, var)
    e = p.expr()
    p.finish()
    return e


# ---------------------------------------------------------------------------
# Curve specifications
# ---------------------------------------------------------------------------


def default_max_order(n):
    return 2 * n + 4


@dataclass(frozen=True)
class CurveSpec:
    """A curve in E^n, given analytically, by samples, or by curvatures.

    ``kind`` is ``"analytic"`` (``exprs`` + ``interval``), ``"sampled"``
    (``samples_t`` + ``samples_x``) or ``"synthetic"`` (``prescription``,
    see :mod:`slanthelix.synthesize`).
    """

    n: int
    kind: str
    interval: tuple = (0.0, 1.0)
    exprs: tuple = ()
    names: tuple = ()
    samples_t: np.ndarray | None = field(default=None, compare=False, repr=False)
    samples_x: np.ndarray | None = field(default=None, compare=False, repr=False)
    prescription: object = field(default=None, compare=False, repr=False)
    max_order: int | None = None

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"dimension must be at least 3, got {self.n}")
        t0, t1 = self.interval
        if not t0 < t1:
            raise ValueError(f"empty parameter interval [{t0}, {t1}]")
        if self.kind == "analytic" and len(self.exprs) != self.n:
            raise ValueError(f"expected {self.n} coordinates, found {len(self.exprs)}")

    @property
    def jet_order_cap(self):
        return self.max_order if self.max_order is not None else default_max_order(self.n)

    def to_source(self):
        if self.kind != "analytic":
            raise ValueError("only analytic curves have a source form")
        t0, t1 = self.interval
        coords = "; ".join(f"{nm} = {e.to_source()}" for nm, e in zip(self.names, self.exprs))
        return f"dim {self.n} on [{_fmt_number(t0)}, {_fmt_number(t1)}]: {coords}"

    @classmethod
    def analytic(cls, exprs, interval, names=None, max_order=None):
        exprs = tuple(parse_expression(e) if isinstance(e, str) else e for e in exprs)
        names = tuple(names) if names else tuple(f"x_{i + 1}" for i in range(len(exprs)))
        return cls(len(exprs), "analytic", tuple(map(float, interval)), exprs, names, max_order=max_order)

    @classmethod
    def sampled(cls, t, points):
        t = np.asarray(t, dtype=float)
        x = np.asarray(points, dtype=float)
        if x.ndim != 2 or x.shape[0] != t.shape[0]:
            raise ValueError("points must have shape (len(t), n)")
        if t.shape[0] < 6:
            raise ValueError("a sampled curve needs at least 6 points")
        if np.any(np.diff(t) <= 0):
            raise ValueError("sample parameters must be strictly increasing")
        return cls(x.shape[1], "sampled", (float(t[0]), float(t[-1])), samples_t=t, samples_x=x)


def parse_curve(source: str) -> CurveSpec:
    """Parse the curve grammar into an analytic :class:`CurveSpec`.

    Without an ``on [a, b]`` clause the interval defaults to ``[0, 1]``.
    """
    p = _Parser(source)
    start = p.tok
    p.expect("dim")
    tok = p.tok
    if tok.kind != "num" or not tok.text.isdigit():
        raise p.error("expected an integer dimension after 'dim'")
    n = int(tok.text)
    p.i += 1
    if n < 3:
        raise ParseError(f"dimension must be at least 3, got {n}", tok.line, tok.col)
    interval = (0.0, 1.0)
    if p.accept("on"):
        p.expect("[")
        a = p.constant()
        p.expect(",")
        b = p.constant()
        p.expect("]")
        if not a < b:
            raise ParseError(f"empty parameter interval [{a}, {b}]", start.line, start.col)
        interval = (a, b)
    p.expect(":")
    names, exprs = [], []
    while True:
        tok = p.tok
        if tok.kind != "ident":
            raise p.error("expected a coordinate name")
        if tok.text == "t" or tok.text in FUNCTION_NAMES or tok.text in CONSTANTS:
            raise p.error(f"reserved name {tok.text!r} cannot name a coordinate")
        if tok.text in names:
            raise p.error(f"duplicate coordinate {tok.text!r}")
        p.i += 1
        p.expect("=")
        names.append(tok.text)
        exprs.append(p.expr())
        if not p.accept(";"):
            break
        if p.tok.kind == "eof":
            break
    p.finish()
    if len(exprs) != n:
        raise ParseError(f"expected {n} coordinates, found {len(exprs)}", start.line, start.col)
    return CurveSpec(n, "analytic", interval, tuple(exprs), tuple(names))


def eval_jets(spec: CurveSpec, t, order: int, max_order: int | None = None, check_domain=True):
    """Coordinate jets ``alpha_i, alpha_i', ..., alpha_i^(order)`` at ``t``.

    ``t`` may be a scalar or an array (the jets are then batched).
    """
    if spec.kind != "analytic":
        raise ValueError("eval_jets needs an analytic curve")
    cap = spec.jet_order_cap if max_order is None else max_order
    if order < 1:
        raise ValueError("order must be at least 1")
    if order > cap:
        raise JetOrderError(f"jet order {order} exceeds the configured maximum {cap}")
    tt = np.asarray(t, dtype=float)
    if check_domain:
        t0, t1 = spec.interval
        slack = 1e-12 * max(1.0, abs(t0), abs(t1))
        if np.any(tt < t0 - slack) or np.any(tt > t1 + slack):
            raise ValueError(f"t outside the parameter interval [{t0}, {t1}]")
    x = Jet.variable(tt, order)
    return [e.evaluate(x) for e in spec.exprs]
