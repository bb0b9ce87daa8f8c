"""Parsing and p-adic evaluation of a_p expressions.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' int)*
    atom   := int | 'p' | 'sqrt' '(' expr ')' | 'root' '(' expr ',' int ')' | '(' expr ')'

The argument of ``sqrt`` and ``root`` must evaluate to a rational integer.
Evaluation first happens symbolically, as an integer combination of products
of radicals, and only then p-adically.  This way ``sqrt(5)*sqrt(7)`` lands in
Q_5(sqrt 35) even though sqrt(7) alone would need an unramified extension.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .padic import (
    FieldElement,
    LocalField,
    NotASquare,
    PadicError,
    PrimeContext,
    UnsupportedExtension,
    hensel_root,
    hensel_sqrt,
    make_field,
    vp,
)


class ParseError(PadicError):
    pass


# ---- AST ----------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class PrimeSym:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exp: int


@dataclass(frozen=True)
class Sqrt:
    arg: "Node"


@dataclass(frozen=True)
class Root:
    arg: "Node"
    degree: int


Node = Union[Num, PrimeSym, BinOp, Pow, Sqrt, Root]

_TOKEN = re.compile(r"\s*(?:(\d+)|(sqrt|root|p)|(.))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        num, word, sym = m.groups()
        if num is not None:
            out.append(("int", num))
        elif word is not None:
            out.append((word, word))
        elif sym is not None:
            if sym.isspace():
                pos = m.end()
                continue
            if sym not in "+-*^(),":
                raise ParseError(f"unexpected character {sym!r}")
            out.append((sym, sym))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, kind: str) -> str:
        if self.peek() != kind:
            got = self.peek() or "end of input"
            raise ParseError(f"expected {kind!r}, got {got!r}")
        val = self.toks[self.i][1]
        self.i += 1
        return val

    def expr(self) -> Node:
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take(self.peek())
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek() == "*":
            self.take("*")
            node = BinOp("*", node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.atom()
        while self.peek() == "^":
            self.take("^")
            node = Pow(node, int(self.take("int")))
        return node

    def atom(self) -> Node:
        kind = self.peek()
        if kind == "int":
            return Num(int(self.take("int")))
        if kind == "p":
            self.take("p")
            return PrimeSym()
        if kind == "sqrt":
            self.take("sqrt")
            self.take("(")
            arg = self.expr()
            self.take(")")
            return Sqrt(arg)
        if kind == "root":
            self.take("root")
            self.take("(")
            arg = self.expr()
            self.take(",")
            deg = int(self.take("int"))
            self.take(")")
            if deg < 1:
                raise ParseError("root degree must be positive")
            return Root(arg, deg)
        if kind == "(":
            self.take("(")
            node = self.expr()
            self.take(")")
            return node
        raise ParseError(f"unexpected token {kind!r}")


def parse_ap(text: str) -> Node:
    parser = _Parser(text)
    if not parser.toks:
        raise ParseError("empty expression")
    node = parser.expr()
    if parser.peek() is not None:
        raise ParseError(f"trailing input at token {parser.peek()!r}")
    return node


# ---- symbolic layer -----------------------------------------------------
#
# A value is a dict  (t, rootkey, j) -> integer coefficient, meaning
# coeff * sqrt(t) * alpha^j  where t is a squarefree integer and alpha is
# the unique higher root atom of the expression (rootkey = (n, d)).

Sym = dict


def _squarefree(n: int) -> tuple[int, int]:
    """Write n = s^2 * t with t squarefree (sign kept in t)."""
    sign = -1 if n < 0 else 1
    n = abs(n)
    s, t = 1, 1
    f = 2
    while f * f <= n:
        while n % (f * f) == 0:
            n //= f * f
            s *= f
        if n % f == 0:
            n //= f
            t *= f
        f += 1
    return s, sign * t * n


def _add(a: Sym, b: Sym, sign: int = 1) -> Sym:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + sign * v
        if out[k] == 0:
            del out[k]
    return out


def _mul(a: Sym, b: Sym) -> Sym:
    out: Sym = {}
    for (t1, rk1, j1), c1 in a.items():
        for (t2, rk2, j2), c2 in b.items():
            if rk1 and rk2 and rk1 != rk2:
                raise UnsupportedExtension("more than one independent root() generator")
            rk = rk1 or rk2
            s, t = _squarefree(t1 * t2)
            c = c1 * c2 * s
            j = j1 + j2
            if rk is not None:
                n, d = rk
                while j >= d:
                    j -= d
                    c *= n
            key = (t, rk if j else None, j)
            out[key] = out.get(key, 0) + c
            if out[key] == 0:
                del out[key]
    return out


def _as_int(s: Sym) -> int:
    if not s:
        return 0
    if set(s) != {(1, None, 0)}:
        raise ParseError("argument of sqrt/root must be a rational integer")
    return s[(1, None, 0)]


def _symbolic(node: Node, p: int) -> Sym:
    if isinstance(node, Num):
        return {(1, None, 0): node.value} if node.value else {}
    if isinstance(node, PrimeSym):
        return {(1, None, 0): p}
    if isinstance(node, BinOp):
        left, right = _symbolic(node.left, p), _symbolic(node.right, p)
        if node.op == "+":
            return _add(left, right)
        if node.op == "-":
            return _add(left, right, -1)
        return _mul(left, right)
    if isinstance(node, Pow):
        base = _symbolic(node.base, p)
        out: Sym = {(1, None, 0): 1}
        for _ in range(node.exp):
            out = _mul(out, base)
        return out
    if isinstance(node, Sqrt):
        n = _as_int(_symbolic(node.arg, p))
        if n == 0:
            return {}
        s, t = _squarefree(n)
        return {(t, None, 0): s}
    if isinstance(node, Root):
        n = _as_int(_symbolic(node.arg, p))
        if n == 0:
            return {}
        if node.degree == 1:
            return {(1, None, 0): n}
        if node.degree == 2:
            return _symbolic(Sqrt(Num(n)), p)
        return {(1, (n, node.degree), 1): 1}
    raise TypeError(node)


# ---- p-adic layer -------------------------------------------------------

@dataclass(frozen=True)
class ApValue:
    field: LocalField
    element: FieldElement
    v: Fraction
    text: str
    root_note: str


def eval_ap(expr: Union[str, Node], ctx: PrimeContext, M: int) -> tuple[LocalField, FieldElement]:
    """Evaluate ``expr`` p-adically.

    ``M`` is the absolute precision in p-units; the resulting field works
    modulo p^M, that is pi^(e*M).
    """
    val = evaluate(expr, ctx, M)
    return val.field, val.element


def evaluate(expr: Union[str, Node], ctx: PrimeContext, M: int, conjugate: bool = False) -> ApValue:
    """Evaluate ``expr`` modulo p^M.

    Square roots of integers that are squares in Z_p but not in Z get the
    Hensel root with residue in 1..p//2, or its negative when ``conjugate``
    is set.
    """
    text = expr if isinstance(expr, str) else repr(expr)
    node = parse_ap(expr) if isinstance(expr, str) else expr
    p = ctx.p
    N = M
    q = p**N
    sym = _symbolic(node, p)

    # classify the square-root radicands
    ramified_t = None
    for (t, rk, j), c in sym.items():
        if t == 1:
            continue
        v = vp(t, p)
        u = t // p**v
        if v % 2 == 0:
            # unit class: fine if a square, else unramified
            if not _is_unit_square(u, p):
                raise UnsupportedExtension(
                    f"sqrt({t}) needs a residue field extension at p={p}")
            continue
        if ramified_t is None:
            ramified_t = t
        elif not _same_class(t, ramified_t, p):
            raise UnsupportedExtension("two independent ramified square roots")
    rootkeys = {rk for (_, rk, _) in sym if rk is not None}
    if ramified_t is not None and rootkeys:
        raise UnsupportedExtension("square root and higher root generators together")

    note = "conjugate" if conjugate else "canonical"
    if rootkeys:
        (n, d), = rootkeys
        field, alpha = _root_field(ctx, n, d, N)
        one = field.one
        total = field.zero
        for (t, rk, j), c in sym.items():
            term = field.from_int(c * _unit_sqrt(ctx, t, N, conjugate))
            aj = one
            for _ in range(j):
                aj = field.mul(aj, alpha)
            total = field.add(total, field.mul(term, aj))
    elif ramified_t is not None:
        v = vp(ramified_t, p)
        D = ramified_t // p ** (v - 1)  # D = p * unit
        u0 = D // p
        field = make_field(ctx, (-D, 0, 1), 2 * N)
        pi = field.pi_power(1)
        total = field.zero
        u0inv = pow(u0, -1, q)
        for (t, rk, j), c in sym.items():
            vt = vp(t, p) if t != 1 else 0
            if t != 1 and vt % 2 == 1:
                # sqrt(t) = p^((vt-1)/2) * sqrt(ut*u0) / u0 * sqrt(D)
                ut = t // p**vt
                root = hensel_sqrt(ctx, ut * u0, N)
                coef = c * p ** ((vt - 1) // 2) * root * u0inv
                total = field.add(total, field.mul(field.from_int(coef), pi))
            else:
                total = field.add(total, field.from_int(c * _unit_sqrt(ctx, t, N, conjugate)))
    else:
        field = make_field(ctx, (0, 1), N)
        total = 0
        for (t, rk, j), c in sym.items():
            total += c * _unit_sqrt(ctx, t, N, conjugate)
        total = field.from_int(total)
    if not sym:
        total = field.zero
    elem = FieldElement(field, total, field.M)
    return ApValue(field, elem, elem.valuation(), text, note)


def _is_unit_square(u: int, p: int) -> bool:
    if p == 2:
        return u % 8 == 1
    return pow(u % p, (p - 1) // 2, p) == 1


def _same_class(t1: int, t2: int, p: int) -> bool:
    prod = t1 * t2
    v = vp(prod, p)
    return v % 2 == 0 and _is_unit_square(prod // p**v, p)


def _unit_sqrt(ctx: PrimeContext, t: int, N: int, conjugate: bool = False) -> int:
    """sqrt(t) in Z_p for t with even valuation and square unit part."""
    s = math.isqrt(t)
    if s * s == t:
        return s
    if conjugate:
        return -_unit_sqrt(ctx, t, N) % ctx.p**N
    p = ctx.p
    v = vp(t, p)
    if v % 2:
        raise NotASquare(f"{t} has odd valuation")
    return p ** (v // 2) * hensel_sqrt(ctx, t // p**v, N) % p**N


def _root_field(ctx: PrimeContext, n: int, d: int, N: int) -> tuple[LocalField, object]:
    """Field containing alpha = n^(1/d), and alpha in it."""
    p = ctx.p
    v = vp(n, p)
    t, s = divmod(v, d)
    nprime = n // p ** (d * t)
    if s == 0:
        field = make_field(ctx, (0, 1), N)
        return field, field.from_int(p**t * hensel_root(ctx, nprime, d, N))
    if math.gcd(s, d) != 1:
        raise UnsupportedExtension(f"root({n},{d}) is not totally ramified of degree {d}")
    u = nprime // p**s
    q = p**N
    # pick a, b with a*s - b*d = 1; the uniformizer is beta^a / p^b
    a = pow(s, -1, d)
    b = (a * s - 1) // d
    c = p * pow(u, a, q) % q
    field = make_field(ctx, (-c,) + (0,) * (d - 1) + (1,), d * N)
    # beta = pi^s * u^(-b)
    beta = field.mul(field.pi_power(s), field.from_int(pow(pow(u, b, q), -1, q)))
    return field, field.scale(beta, p**t)
