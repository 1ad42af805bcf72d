"""A small expression language for potentials and frame fields.

Grammar (whitespace insensitive)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | factor
    factor := base ('^' int)?
    base   := number | 'i' | 'z'int | '(' expr ')' | ident '(' expr ')'

with ``ident`` one of ``conj re im abs2 exp log``. ``^`` binds tighter
than unary minus and takes a (possibly negative) integer literal.
"""

from __future__ import annotations

import cmath
import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

from .errors import (
    BadCodimension,
    GuardViolated,
    ParseError,
    UnknownVariable,
)
from .jets import WJet, jet_apply

FUNCTIONS = ("conj", "re", "im", "abs2", "exp", "log")


# AST ----------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Imag:
    pass


@dataclass(frozen=True)
class Var:
    k: int  # 1-based, as written


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    child: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


Expr = Union[Num, Imag, Var, BinOp, Neg, Pow, Call]


# lexer --------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<var>z\d+)(?![A-Za-z_0-9])"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, var, ident, op, end
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(pos, {"number", "variable", "identifier", "operator"}, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(Token(kind, m.group(kind), start))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# parser -------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str, n: int | None):
        self.text = text
        self.n = n
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, expected):
        raise ParseError(self.tok.pos, expected, self.text)

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.fail({repr(text)})

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self.fail({"'+'", "'-'", "'*'", "'/'", "end of input"})
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        return self.factor()

    def factor(self) -> Expr:
        b = self.base()
        if self.accept("^"):
            return Pow(b, self.integer())
        return b

    def integer(self) -> int:
        paren = self.accept("(")
        sign = -1 if self.accept("-") else 1
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            self.fail({"integer exponent"})
        self.i += 1
        if paren:
            self.expect(")")
        return sign * int(t.text)

    def base(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(float(t.text))
        if t.kind == "var":
            self.i += 1
            k = int(t.text[1:])
            if k < 1 or (self.n is not None and k > self.n):
                raise UnknownVariable(k, self.n if self.n is not None else 0)
            return Var(k)
        if t.kind == "ident":
            if t.text == "i":
                self.i += 1
                return Imag()
            if t.text in FUNCTIONS:
                self.i += 1
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            self.fail({"function name", "'i'"})
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.fail({"number", "'i'", "variable", "'('", "function call"})


def parse_expr(text: str, n: int | None = None) -> Expr:
    """Parse one expression; ``n`` bounds the variable indices when given."""
    return _Parser(text, n).parse()


# printing -----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_text(e: Expr) -> str:
    """Render an AST so that parsing the result gives the same tree."""
    return _show(e, 0)


def _show(e: Expr, ctx: int) -> str:
    if isinstance(e, Num):
        s = repr(float(e.value))
        return s
    if isinstance(e, Imag):
        return "i"
    if isinstance(e, Var):
        return f"z{e.k}"
    if isinstance(e, Call):
        return f"{e.fn}({_show(e.arg, 0)})"
    if isinstance(e, Pow):
        base = _show(e.base, 5)
        exp = str(e.exponent) if e.exponent >= 0 else f"({e.exponent})"
        return f"({base}^{exp})" if ctx > 4 else f"{base}^{exp}"
    if isinstance(e, Neg):
        s = "-" + _show(e.child, 3)
        return f"({s})" if ctx > 3 else s
    if isinstance(e, BinOp):
        prec = _PREC[e.op]
        # left-associative: the right operand needs a strictly higher level
        s = f"{_show(e.left, prec)} {e.op} {_show(e.right, prec + 1)}"
        return f"({s})" if ctx > prec else s
    raise TypeError(f"not an expression node: {e!r}")


# evaluation ---------------------------------------------------------------


def variables(e: Expr) -> set[int]:
    if isinstance(e, Var):
        return {e.k}
    if isinstance(e, (BinOp,)):
        return variables(e.left) | variables(e.right)
    if isinstance(e, (Neg,)):
        return variables(e.child)
    if isinstance(e, Pow):
        return variables(e.base)
    if isinstance(e, Call):
        return variables(e.arg)
    return set()


def eval_with(e: Expr, z: Sequence, *, const: Callable, exp: Callable, log: Callable, conj: Callable):
    """Evaluate ``e`` over any numeric type supplied through the callables.

    ``z`` holds the values of ``z_1..z_n``; ``const`` lifts Python numbers.
    """

    def go(e):
        if isinstance(e, Num):
            return const(e.value)
        if isinstance(e, Imag):
            return const(1j)
        if isinstance(e, Var):
            return z[e.k - 1]
        if isinstance(e, BinOp):
            a, b = go(e.left), go(e.right)
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return a * b
            return a / b
        if isinstance(e, Neg):
            return -go(e.child)
        if isinstance(e, Pow):
            return go(e.base) ** e.exponent
        if isinstance(e, Call):
            a = go(e.arg)
            if e.fn == "conj":
                return conj(a)
            if e.fn == "abs2":
                return a * conj(a)
            if e.fn == "re":
                return (a + conj(a)) * const(0.5)
            if e.fn == "im":
                return (a - conj(a)) * const(-0.5j)
            if e.fn == "exp":
                return exp(a)
            return log(a)
        raise TypeError(f"not an expression node: {e!r}")

    return go(e)


def evaluate(e: Expr, point: Sequence[complex]) -> complex:
    """Plain double-precision value of ``e`` at ``point``."""
    z = [complex(v) for v in point]
    return complex(
        eval_with(e, z, const=complex, exp=cmath.exp, log=cmath.log, conj=lambda a: a.conjugate())
    )


def real_defect(e: Expr, point: Sequence[complex]) -> float:
    """``|Im u| / (1 + |u|)`` at ``point``; real-valuedness is checked, not assumed."""
    v = evaluate(e, point)
    return abs(v.imag) / (1 + abs(v))


def eval_jet(e, center: Sequence[complex], order: int, var_jets: Sequence[WJet] | None = None) -> WJet:
    """Jet of ``e`` at ``center``.

    ``e`` may be a :class:`PotentialSpec` (guards are checked) or a bare AST.
    ``var_jets`` substitutes jets for ``z_1..z_n``; by default they are the
    coordinate jets at ``center``, and passing others composes ``e`` with an
    arbitrary holomorphic map.
    """
    if isinstance(e, PotentialSpec):
        e.check_guards(center)
        expr, n = e.expr, e.n
    else:
        expr, n = e, len(center)
    if var_jets is None:
        var_jets = [WJet.variable(n, order, k, center) for k in range(n)]
    proto = var_jets[0]
    cache = {}

    def conj(a: WJet) -> WJet:
        return a.conj()

    def const(v):
        return WJet.constant(proto.n, proto.order, v, proto.center)

    def go(x):
        # the same subtree may appear several times (e.g. inside abs2)
        if x in cache:
            return cache[x]
        if isinstance(x, Num):
            r = const(x.value)
        elif isinstance(x, Imag):
            r = const(1j)
        elif isinstance(x, Var):
            r = var_jets[x.k - 1]
        elif isinstance(x, BinOp):
            a, b = go(x.left), go(x.right)
            r = {"+": a.__add__, "-": a.__sub__, "*": a.__mul__, "/": a.__truediv__}[x.op](b)
        elif isinstance(x, Neg):
            r = -go(x.child)
        elif isinstance(x, Pow):
            r = jet_apply("intpow", go(x.base), x.exponent)
        elif isinstance(x, Call):
            a = go(x.arg)
            if x.fn == "abs2":
                r = a * a.conj()
            else:
                r = jet_apply(x.fn, a)
        else:
            raise TypeError(f"not an expression node: {x!r}")
        cache[x] = r
        return r

    return go(expr)


def hp_evaluator(e: Expr, precision: int = 128) -> Callable:
    """Evaluator of ``e`` in ``precision``-bit complex arithmetic (gmpy2).

    The returned callable takes a sequence of ``gmpy2.mpc`` values and
    returns an ``mpc``; it is meant for the finite-difference oracle,
    where double precision loses too many digits at small steps.
    """
    import gmpy2

    ctx = gmpy2.context(precision=precision, real_prec=precision, imag_prec=precision)

    def const(v):
        return gmpy2.mpc(complex(v))

    def f(z):
        with gmpy2.context(ctx):
            return eval_with(e, z, const=const, exp=gmpy2.exp, log=gmpy2.log, conj=lambda a: a.conjugate())

    f.precision = precision
    return f


# complex literals for points -------------------------------------------------


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` style literals (``i``, ``-0.4i``, ``2``, ``0.3+0.1i``)."""
    toks = tokenize(text)
    i = 0
    total = 0j
    first = True
    while toks[i].kind != "end":
        sign = 1.0
        if toks[i].kind == "op" and toks[i].text in "+-":
            sign = -1.0 if toks[i].text == "-" else 1.0
            i += 1
        elif not first:
            raise ParseError(toks[i].pos, {"'+'", "'-'"}, text)
        t = toks[i]
        if t.kind == "num":
            v = float(t.text)
            i += 1
            if toks[i].kind == "ident" and toks[i].text == "i":
                i += 1
                v = complex(0, v)
        elif t.kind == "ident" and t.text == "i":
            v = 1j
            i += 1
        else:
            raise ParseError(t.pos, {"number", "'i'"}, text)
        total += sign * v
        first = False
    if first:
        raise ParseError(0, {"number", "'i'"}, text)
    return total


def parse_point(text: str) -> tuple[complex, ...]:
    return tuple(parse_complex(part) for part in text.split(","))


# specs ----------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Per-variable sampling intervals ``re[k] = (lo, hi)``, ``im[k] = (lo, hi)``."""

    re: tuple[tuple[float, float], ...]
    im: tuple[tuple[float, float], ...]

    def to_json(self):
        return [{"re": list(r), "im": list(i)} for r, i in zip(self.re, self.im)]

    @classmethod
    def from_json(cls, data) -> "Box":
        return cls(
            tuple(tuple(map(float, d["re"])) for d in data),
            tuple(tuple(map(float, d["im"])) for d in data),
        )

    @classmethod
    def uniform(cls, n: int, lo: float = -1.0, hi: float = 1.0) -> "Box":
        return cls(((lo, hi),) * n, ((lo, hi),) * n)


def _check_guards(guards, guard_text, point):
    for g, txt in zip(guards, guard_text):
        v = evaluate(g, point)
        if not (v.real > 0):
            raise GuardViolated(tuple(point), txt)


@dataclass(frozen=True)
class PotentialSpec:
    n: int
    p: int
    expr: Expr
    guards: tuple = ()
    text: str = ""
    guard_text: tuple[str, ...] = ()
    box: Box | None = None
    reference: dict = field(default_factory=dict, compare=False, hash=False)

    def check_guards(self, point):
        _check_guards(self.guards, self.guard_text, point)

    def guards_ok(self, point) -> bool:
        try:
            self.check_guards(point)
        except GuardViolated:
            return False
        return True

    def with_codim(self, p: int) -> "PotentialSpec":
        if not 1 <= p <= self.n - 1:
            raise BadCodimension(p, self.n)
        return PotentialSpec(self.n, p, self.expr, self.guards, self.text, self.guard_text, self.box, self.reference)


@dataclass(frozen=True)
class FrameSpec:
    n: int
    rows: tuple[tuple[Expr, ...], ...]
    row_text: tuple[str, ...] = ()
    guards: tuple = ()
    guard_text: tuple[str, ...] = ()
    box: Box | None = None
    reference: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def r(self) -> int:
        return len(self.rows)

    @property
    def p(self) -> int:
        return self.n - self.r

    def check_guards(self, point):
        _check_guards(self.guards, self.guard_text, point)

    def guards_ok(self, point) -> bool:
        try:
            self.check_guards(point)
        except GuardViolated:
            return False
        return True


def parse_potential(text: str, n: int, p: int, guards: Sequence[str] = (), box: Box | None = None,
                    reference: dict | None = None) -> PotentialSpec:
    if not 1 <= p <= n - 1:
        raise BadCodimension(p, n)
    expr = parse_expr(text, n)
    g = tuple(parse_expr(t, n) for t in guards)
    return PotentialSpec(n, p, expr, g, text, tuple(guards), box, dict(reference or {}))


def parse_frame(rows: Sequence[str], n: int, guards: Sequence[str] = (), box: Box | None = None,
                reference: dict | None = None) -> FrameSpec:
    parsed = []
    for row in rows:
        parts = _split_top_level(row)
        if len(parts) != n:
            raise ParseError(len(row), {f"{n} comma-separated components"}, row)
        parsed.append(tuple(parse_expr(s, n) for s in parts))
    if not 1 <= len(parsed) <= n - 1:
        raise BadCodimension(n - len(parsed), n)
    g = tuple(parse_expr(t, n) for t in guards)
    return FrameSpec(n, tuple(parsed), tuple(rows), g, tuple(guards), box, dict(reference or {}))


def _split_top_level(row: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in row:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


# spec files -----------------------------------------------------------------

SPEC_KEYS = {"n", "p", "potential", "frame", "guards", "box", "reference", "name"}


def load_spec(source) -> PotentialSpec | FrameSpec:
    """Load a spec from a path, a JSON string or an already-decoded dict."""
    if isinstance(source, dict):
        data = source
    else:
        s = str(source)
        if s.lstrip().startswith("{"):
            data = json.loads(s)
        else:
            with open(s, encoding="utf-8") as fh:
                data = json.load(fh)
    unknown = set(data) - SPEC_KEYS
    if unknown:
        raise ValueError(f"unknown spec fields: {sorted(unknown)}")
    n = int(data["n"])
    guards = list(data.get("guards", []))
    box = Box.from_json(data["box"]) if data.get("box") is not None else None
    ref = data.get("reference") or {}
    if ("potential" in data) == ("frame" in data):
        raise ValueError("a spec needs exactly one of 'potential' or 'frame'")
    if "potential" in data:
        return parse_potential(data["potential"], n, int(data["p"]), guards, box, ref)
    spec = parse_frame(list(data["frame"]), n, guards, box, ref)
    if "p" in data and int(data["p"]) != spec.p:
        raise BadCodimension(int(data["p"]), n)
    return spec


def dump_spec(spec: PotentialSpec | FrameSpec, name: str | None = None) -> dict:
    out = {"n": spec.n, "p": spec.p}
    if name:
        out = {"name": name, **out}
    if isinstance(spec, PotentialSpec):
        out["potential"] = spec.text or to_text(spec.expr)
    else:
        out["frame"] = list(spec.row_text) or [", ".join(to_text(x) for x in row) for row in spec.rows]
    out["guards"] = list(spec.guard_text)
    if spec.box is not None:
        out["box"] = spec.box.to_json()
    if spec.reference:
        out["reference"] = dict(spec.reference)
    return out


def spec_hash(spec: PotentialSpec | FrameSpec) -> str:
    blob = json.dumps(dump_spec(spec), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
