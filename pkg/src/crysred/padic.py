"""Truncated arithmetic in Z_p and in totally ramified extensions of Q_p.

An extension is given by an Eisenstein polynomial of degree e over Z_p.  Its
ring of integers R is free over Z_p with basis 1, pi, ..., pi^(e-1), so an
element of R / p^N R is stored as e residues modulo p^N.  Precision is counted
in pi-units: working precision M means that elements are known modulo
pi^M, and we store them modulo p^ceil(M/e), which is at least as fine.

Two layers are exposed:

* :class:`LocalField` carries a small set of "raw" operations on plain ints
  (e = 1) or tuples of ints (e > 1).  The elimination code calls these in its
  inner loops.
* :class:`FieldElement` is the immutable, user facing value built on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

Raw = Union[int, tuple]


class PadicError(ValueError):
    """Base class for errors raised by this module."""


class NotASquare(PadicError):
    pass


class NotEisenstein(PadicError):
    pass


class UnsupportedExtension(PadicError):
    pass


class PrecisionExhausted(ArithmeticError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    n = abs(n)
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


@dataclass(frozen=True)
class PrimeContext:
    p: int
    cap: int = 64

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.cap < 1:
            raise ValueError("cap must be at least 1")


def teichmuller_digits(ctx: PrimeContext, N: int) -> list[int]:
    """Return ``{0} U mu_(p-1)`` modulo p^N, indexed by reduction mod p.

    Entry ``d`` of the result is the Teichmuller lift of ``d``, so the
    digit index of a vertex coordinate doubles as its residue.
    """
    if N > ctx.cap:
        raise PrecisionExhausted(f"N={N} exceeds cap {ctx.cap}")
    p = ctx.p
    q = p**N
    # a^(p^(N-1)) mod p^N is the Teichmuller lift of a
    e = p ** (N - 1)
    return [0] + [pow(a, e, q) for a in range(1, p)]


def hensel_sqrt(ctx: PrimeContext, u: int, N: int) -> int:
    """Square root of a unit ``u`` modulo p^N.

    Of the two roots the one whose reduction lies in 1..p//2 is returned
    (for p = 2 the root that is 1 mod 4).
    """
    p = ctx.p
    q = p**N
    if u % p == 0:
        raise NotASquare(f"{u} is not a unit at {p}")
    if p == 2:
        if u % 8 != 1:
            raise NotASquare(f"{u} is not a 2-adic square (needs u = 1 mod 8)")
        # solve x^2 = u by lifting one bit at a time
        x = 1
        for k in range(3, N + 2):
            if (x * x - u) % (2 ** (k + 1)) != 0:
                x += 2 ** (k - 1)
        x %= q
        if x % 4 != 1:
            x = (-x) % q
        return x
    u %= q
    if pow(u % p, (p - 1) // 2, p) != 1:
        raise NotASquare(f"{u} is not a square modulo {p}")
    x0 = next(x for x in range(1, p) if (x * x - u) % p == 0)
    if x0 > p // 2:
        x0 = p - x0
    x = x0
    prec = 1
    while prec < N:
        prec = min(2 * prec, N)
        m = p**prec
        x = (x - (x * x - u) * pow(2 * x, -1, m)) % m
    return x % q


def hensel_root(ctx: PrimeContext, u: int, d: int, N: int) -> int:
    """A d-th root of the unit ``u`` modulo p^N, for p not dividing d.

    The root with smallest reduction in 1..p-1 is chosen.
    """
    p = ctx.p
    if d % p == 0:
        raise UnsupportedExtension("wildly ramified roots are not supported")
    if u % p == 0:
        raise NotASquare(f"{u} is not a unit at {p}")
    cands = [x for x in range(1, p) if (pow(x, d, p) - u) % p == 0]
    if not cands:
        raise NotASquare(f"{u} is not a {d}-th power modulo {p}")
    x = cands[0]
    prec = 1
    while prec < N:
        prec = min(2 * prec, N)
        m = p**prec
        x = (x - (pow(x, d, m) - u) * pow(d * pow(x, d - 1, m), -1, m)) % m
    return x % p**N


@dataclass(frozen=True, eq=False)
class LocalField:
    """R / pi^M for R = Z_p[x] / (eis) totally ramified of degree e."""

    ctx: PrimeContext
    e: int
    eis: tuple
    M: int
    N: int = field(init=False)
    q: int = field(init=False)
    _red: tuple = field(init=False, repr=False)
    _unit_e: Raw = field(init=False, repr=False)

    def __post_init__(self) -> None:
        p = self.ctx.p
        N = -(-self.M // self.e)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "q", p**N)
        # pi^e = sum red[j] pi^j
        red = tuple((-c) % p**N for c in self.eis[:-1])
        object.__setattr__(self, "_red", red)
        if self.e > 1:
            object.__setattr__(self, "_unit_e", tuple((-c // p) % p**N for c in self.eis[:-1]))
        else:
            object.__setattr__(self, "_unit_e", 1)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, LocalField)
            and self.ctx.p == other.ctx.p
            and self.eis == other.eis
            and self.M == other.M
        )

    def __hash__(self) -> int:
        return hash((self.ctx.p, self.eis, self.M))

    @property
    def p(self) -> int:
        return self.ctx.p

    def with_precision(self, M: int) -> "LocalField":
        return make_field(self.ctx, self.eis, M)

    # ---- raw layer -------------------------------------------------------
    @property
    def zero(self) -> Raw:
        return 0 if self.e == 1 else (0,) * self.e

    @property
    def one(self) -> Raw:
        return 1 if self.e == 1 else (1,) + (0,) * (self.e - 1)

    def from_int(self, n: int) -> Raw:
        if self.e == 1:
            return n % self.q
        return (n % self.q,) + (0,) * (self.e - 1)

    def from_coeffs(self, coeffs: Sequence[int]) -> Raw:
        if self.e == 1:
            return coeffs[0] % self.q
        c = [0] * self.e
        q = self.q
        # fold higher powers through the Eisenstein relation
        acc = list(coeffs)
        while len(acc) > self.e:
            top = acc.pop()
            k = len(acc) - self.e
            for j, rj in enumerate(self._red):
                acc[k + j] += top * rj
        for j, a in enumerate(acc):
            c[j] = a % q
        return tuple(c)

    def coeffs(self, a: Raw) -> tuple:
        return (a,) if self.e == 1 else a

    def add(self, a: Raw, b: Raw) -> Raw:
        if self.e == 1:
            return (a + b) % self.q
        q = self.q
        return tuple((x + y) % q for x, y in zip(a, b))

    def sub(self, a: Raw, b: Raw) -> Raw:
        if self.e == 1:
            return (a - b) % self.q
        q = self.q
        return tuple((x - y) % q for x, y in zip(a, b))

    def neg(self, a: Raw) -> Raw:
        if self.e == 1:
            return (-a) % self.q
        q = self.q
        return tuple((-x) % q for x in a)

    def mul(self, a: Raw, b: Raw) -> Raw:
        if self.e == 1:
            return a * b % self.q
        e = self.e
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        red = self._red
        for k in range(2 * e - 2, e - 1, -1):
            top = prod[k]
            if top:
                base = k - e
                for j, rj in enumerate(red):
                    prod[base + j] += top * rj
        q = self.q
        return tuple(prod[j] % q for j in range(e))

    def scale(self, a: Raw, n: int) -> Raw:
        """Multiply by a rational integer."""
        if self.e == 1:
            return a * n % self.q
        q = self.q
        return tuple(x * n % q for x in a)

    def is_zero(self, a: Raw) -> bool:
        return a == 0 if self.e == 1 else not any(a)

    @property
    def inf(self) -> int:
        """Valuation reported for zero: the precision in pi-units."""
        return self.e * self.N

    @property
    def _vtab(self) -> dict:
        tab = self.__dict__.get("_vtab_cache")
        if tab is None:
            p = self.ctx.p
            tab = {p**k: k for k in range(self.N + 1)}
            self.__dict__["_vtab_cache"] = tab
        return tab

    def val(self, a: Raw) -> int:
        """Valuation in pi-units (``inf`` for zero)."""
        tab = self._vtab
        q = self.q
        if self.e == 1:
            return tab[math.gcd(a, q)]
        e = self.e
        return min(e * tab[math.gcd(c, q)] + j for j, c in enumerate(a))

    def vector_val(self, values) -> int:
        """Minimum valuation over an iterable of raw coefficients."""
        tab = self._vtab
        q = self.q
        if self.e == 1:
            return tab[math.gcd(q, *values)]
        cols = list(zip(*values))
        if not cols:
            return self.inf
        e = self.e
        return min(e * tab[math.gcd(q, *col)] + j for j, col in enumerate(cols))

    def residue(self, a: Raw) -> int:
        """Reduction modulo pi, in 0..p-1."""
        if self.e == 1:
            return a % self.ctx.p
        return a[0] % self.ctx.p

    def shift_down(self, a: Raw, k: int) -> Raw:
        """Divide by pi^k, assuming v(a) >= k.  The top k digits are lost."""
        if k == 0:
            return a
        p = self.ctx.p
        if self.e == 1:
            pk = p**k
            if a % pk:
                raise PrecisionExhausted("division by p^k of a non-multiple")
            return a // pk
        e = self.e
        qq = -(-k // e)
        s = e * qq - k
        b = self.mul(a, self.pi_power(s)) if s else a
        pq = p**qq
        if any(c % pq for c in b):
            raise PrecisionExhausted("division by a power of pi of a non-multiple")
        b = tuple(c // pq for c in b)
        return self.mul(b, self._unit_e_inv_power(qq))

    def _unit_e_inv_power(self, k: int) -> Raw:
        cache = self.__dict__.setdefault("_ue_cache", {})
        if k not in cache:
            ue = self.inverse(self._unit_e)
            out = self.one
            for _ in range(k):
                out = self.mul(out, ue)
            cache[k] = out
        return cache[k]

    def shifted_precision(self, k: int) -> int:
        """Guaranteed precision (pi-units) of ``shift_down(a, k)``."""
        return self.e * (self.N - -(-k // self.e))

    def pi_power(self, k: int) -> Raw:
        if self.e == 1:
            return pow(self.ctx.p, k, self.q)
        coeffs = [0] * (k + 1)
        coeffs[k] = 1
        return self.from_coeffs(coeffs)

    def inverse(self, u: Raw) -> Raw:
        """Inverse of a unit."""
        p = self.ctx.p
        if self.residue(u) == 0:
            raise ZeroDivisionError("not a unit")
        if self.e == 1:
            return pow(u, -1, self.q)
        x = self.from_int(pow(u[0] % p, -1, p))
        two = self.from_int(2)
        prec = 1
        while prec < self.inf:
            x = self.mul(x, self.sub(two, self.mul(u, x)))
            prec *= 2
        return x

    def divide(self, a: Raw, b: Raw) -> Raw:
        """A quotient c with a = c*b, requiring v(a) >= v(b)."""
        k = self.val(b)
        if k >= self.inf:
            raise ZeroDivisionError("division by zero")
        if self.val(a) < k:
            raise PrecisionExhausted("quotient would not be integral")
        if self.e == 1:
            pk = self.ctx.p**k
            return (a // pk) * pow(b // pk, -1, self.q) % self.q
        return self.mul(self.shift_down(a, k), self.inverse(self.shift_down(b, k)))

    # ---- element layer ---------------------------------------------------
    def element(self, n: Union[int, Sequence[int]]) -> "FieldElement":
        raw = self.from_int(n) if isinstance(n, int) else self.from_coeffs(n)
        return FieldElement(self, raw, self.M)

    @property
    def uniformizer(self) -> "FieldElement":
        return FieldElement(self, self.pi_power(1), self.M)


def make_field(ctx: PrimeContext, eis: Sequence[int], M: int) -> LocalField:
    """Validate ``eis`` (low degree first, monic) and build the field."""
    eis = tuple(int(c) for c in eis)
    if len(eis) < 2 or eis[-1] != 1:
        raise NotEisenstein("polynomial must be monic of degree >= 1")
    e = len(eis) - 1
    p = ctx.p
    if e == 1:
        if eis[0] != 0:
            raise NotEisenstein("degree one polynomial must be x")
    else:
        if any(c % p for c in eis[:-1]) or eis[0] % (p * p) == 0:
            raise NotEisenstein(f"{eis} is not Eisenstein at {p}")
    if M < 1:
        raise ValueError("precision must be positive")
    return LocalField(ctx, e, eis, M)


@dataclass(frozen=True, eq=False)
class FieldElement:
    owner: LocalField
    raw: Raw
    known_precision: int

    @property
    def coeffs(self) -> tuple:
        return self.owner.coeffs(self.raw)

    def _lift(self, other: Union["FieldElement", int]) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.owner != self.owner:
                raise ValueError("elements of different fields")
            return other
        return self.owner.element(int(other))

    def __add__(self, other):
        o = self._lift(other)
        return FieldElement(self.owner, self.owner.add(self.raw, o.raw),
                            min(self.known_precision, o.known_precision))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return FieldElement(self.owner, self.owner.sub(self.raw, o.raw),
                            min(self.known_precision, o.known_precision))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return FieldElement(self.owner, self.owner.neg(self.raw), self.known_precision)

    def __mul__(self, other):
        o = self._lift(other)
        prec = min(self.known_precision + o.valuation_units(),
                   o.known_precision + self.valuation_units(), self.owner.M)
        return FieldElement(self.owner, self.owner.mul(self.raw, o.raw), prec)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = self.owner.element(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = self.owner.element(other)
        if not isinstance(other, FieldElement) or other.owner != self.owner:
            return NotImplemented
        diff = self.owner.sub(self.raw, other.raw)
        prec = min(self.known_precision, other.known_precision)
        return self.owner.val(diff) >= prec

    def __hash__(self) -> int:
        return hash(self.residue())

    def is_zero(self) -> bool:
        return self.owner.val(self.raw) >= self.known_precision

    def valuation_units(self) -> int:
        return min(self.owner.val(self.raw), self.known_precision)

    def valuation(self) -> Fraction:
        return Fraction(self.valuation_units(), self.owner.e)

    def residue(self) -> int:
        return self.owner.residue(self.raw)

    def normalized(self) -> "FieldElement":
        """The unit pi^(-v(x)) x; loses v(x) units of precision."""
        k = self.valuation_units()
        if k >= self.known_precision:
            raise PrecisionExhausted("cannot normalize zero")
        prec = min(self.known_precision - k, self.owner.shifted_precision(k))
        return FieldElement(self.owner, self.owner.shift_down(self.raw, k), prec)

    def divide(self, other: "FieldElement") -> "FieldElement":
        o = self._lift(other)
        k = o.valuation_units()
        raw = self.owner.divide(self.raw, o.raw)
        prec = min(self.known_precision - k, o.known_precision - k, self.owner.shifted_precision(k))
        return FieldElement(self.owner, raw, prec)

    def __repr__(self) -> str:
        return f"FieldElement({self.coeffs}, v={self.valuation()}, prec={self.known_precision})"


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def frac_floor(x: Fraction) -> int:
    return math.floor(x)
