"""Vertices of the GL2(Q_p) tree, compactly induced vectors and the operator T.

A vertex ``g^eps_{n,mu}`` is the tuple ``(eps, digits)`` where ``digits`` has
length n and holds Teichmuller digit indices, least significant first.  Since
digit index d is the Teichmuller lift of d, a digit is also its residue.

Coordinates follow the asymmetric convention

    (g^0_{n,mu}, i) = [g^0_{n,mu}, X^(r-i) Y^i]
    (g^1_{n,mu}, i) = [g^1_{n,mu}, X^i Y^(r-i)]

and an :class:`InducedVector` is a sparse map from ``(vertex, i)`` to raw
coefficients of a :class:`~crysred.padic.LocalField`.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from math import comb
from typing import Iterable, Iterator, Mapping

from .padic import LocalField, PrecisionExhausted, teichmuller_digits

Vertex = tuple  # (eps, digits)
Coord = tuple  # (vertex, i)

ORIGIN: Vertex = (0, ())


class CarryRequired(ValueError):
    """A re-indexing would need a carry in the Teichmuller base."""


def distance(v: Vertex) -> int:
    return len(v[1]) + v[0]


def circle(p: int, m: int) -> list[Vertex]:
    """Vertices at distance m, ordered by eps then digits."""
    if m == 0:
        return [ORIGIN]
    out = [(0, ds) for ds in product(range(p), repeat=m)]
    out += [(1, ds) for ds in product(range(p), repeat=m - 1)]
    return out


def enumerate_ball(p: int, n: int) -> list[Vertex]:
    out: list[Vertex] = []
    for m in range(n + 1):
        out.extend(circle(p, m))
    return out


def ball_size(p: int, n: int) -> int:
    return 1 + sum(p**m + p ** (m - 1) for m in range(1, n + 1))


def parent(v: Vertex) -> Vertex:
    eps, ds = v
    if ds:
        return (eps, ds[:-1])
    if eps == 1:
        return ORIGIN
    raise ValueError("the origin has no parent")


def children(p: int, v: Vertex) -> list[Vertex]:
    eps, ds = v
    return [(eps, ds + (u,)) for u in range(p)]


class InducedVector:
    """Finitely supported map (vertex, i) -> coefficient, zero entries absent."""

    __slots__ = ("r", "field", "entries")

    def __init__(self, r: int, field: LocalField, entries: Mapping[Coord, object] | None = None):
        self.r = r
        self.field = field
        ents = {}
        if entries:
            for k, c in entries.items():
                if not field.is_zero(c):
                    ents[k] = c
        self.entries = ents

    @classmethod
    def bracket(cls, r: int, field: LocalField, vertex: Vertex, poly: Iterable) -> "InducedVector":
        """[g, P] where ``poly[i]`` multiplies X^(r-i) Y^i."""
        ents = {}
        for i, c in enumerate(poly):
            raw = field.from_int(c) if isinstance(c, int) else c
            j = i if vertex[0] == 0 else r - i
            ents[(vertex, j)] = raw
        return cls(r, field, ents)

    def support(self) -> set:
        return {v for (v, _) in self.entries}

    def radius(self) -> int:
        return max((distance(v) for v in self.support()), default=-1)

    def is_zero(self) -> bool:
        return not self.entries

    def __add__(self, other: "InducedVector") -> "InducedVector":
        f = self.field
        ents = dict(self.entries)
        for k, c in other.entries.items():
            ents[k] = f.add(ents[k], c) if k in ents else c
        return InducedVector(self.r, f, ents)

    def __sub__(self, other: "InducedVector") -> "InducedVector":
        f = self.field
        ents = dict(self.entries)
        for k, c in other.entries.items():
            ents[k] = f.sub(ents[k], c) if k in ents else f.neg(c)
        return InducedVector(self.r, f, ents)

    def scaled(self, c) -> "InducedVector":
        f = self.field
        raw = f.from_int(c) if isinstance(c, int) else c
        return InducedVector(self.r, f, {k: f.mul(x, raw) for k, x in self.entries.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InducedVector):
            return NotImplemented
        return (self - other).is_zero()

    def __repr__(self) -> str:
        return f"InducedVector(r={self.r}, {len(self.entries)} entries)"


class HeckeTables:
    """Precomputed coefficients of T+ and T- for one (field, r)."""

    def __init__(self, field: LocalField, r: int):
        self.field = field
        self.r = r
        p = field.p
        self.p = p
        teich = teichmuller_digits(field.ctx, field.N)
        self.teich = teich
        q = field.q
        # plus[i] = [(u, j, coeff)]: coefficient of (child_u, j) in T+(., i)
        self.plus: list[list[tuple]] = []
        for i in range(r + 1):
            row = []
            for u in range(p):
                mu = (-teich[u]) % q
                for j in range(i + 1):
                    c = pow(p, j, q) * comb(i, j) * pow(mu, i - j, q) % q
                    if c:
                        row.append((u, j, field.from_int(c)))
            self.plus.append(row)
        # minus[lam][i] = [(j, coeff)]: coefficient of (parent, j) in T-(., i)
        self.minus: list[list[list[tuple]]] = []
        for lam in range(p):
            t = teich[lam]
            per_i = []
            for i in range(r + 1):
                pw = pow(p, r - i, q) if r - i < field.N + 1 else 0
                row = []
                if pw:
                    for j in range(i + 1):
                        c = pw * comb(i, j) * pow(t, i - j, q) % q
                        if c:
                            row.append((j, field.from_int(c)))
                per_i.append(row)
            self.minus.append(per_i)
        self.origin = [field.from_int(pow(p, r - i, q)) if r - i < field.N + 1 else field.zero
                       for i in range(r + 1)]


@lru_cache(maxsize=64)
def hecke_tables(field: LocalField, r: int) -> HeckeTables:
    return HeckeTables(field, r)


def t_plus_coord(tab: HeckeTables, v: Vertex, i: int) -> Iterator[tuple[Coord, object]]:
    eps, ds = v
    for u, j, c in tab.plus[i]:
        yield ((eps, ds + (u,)), j), c


def t_minus_coord(tab: HeckeTables, v: Vertex, i: int) -> Iterator[tuple[Coord, object]]:
    eps, ds = v
    if ds:
        par = (eps, ds[:-1])
        for j, c in tab.minus[ds[-1]][i]:
            yield (par, j), c
    else:
        c = tab.origin[i]
        if not tab.field.is_zero(c):
            yield ((1 - eps, ()), tab.r - i), c


def relation_coord(tab: HeckeTables, v: Vertex, i: int, a) -> dict:
    """(T - a)(v, i) as a dict coord -> raw coefficient."""
    f = tab.field
    out: dict = {}
    for k, c in t_plus_coord(tab, v, i):
        out[k] = c
    for k, c in t_minus_coord(tab, v, i):
        out[k] = f.add(out[k], c) if k in out else c
    if not f.is_zero(a):
        k = (v, i)
        out[k] = f.sub(out[k], a) if k in out else f.neg(a)
    return {k: c for k, c in out.items() if not f.is_zero(c)}


def _apply(f: InducedVector, gen, a=None) -> InducedVector:
    field = f.field
    tab = hecke_tables(field, f.r)
    out: dict = {}
    for (v, i), c in f.entries.items():
        for k, t in gen(tab, v, i):
            prod_ = field.mul(c, t)
            out[k] = field.add(out[k], prod_) if k in out else prod_
    if a is not None and not field.is_zero(a):
        for k, c in f.entries.items():
            prod_ = field.mul(c, a)
            out[k] = field.sub(out[k], prod_) if k in out else field.neg(prod_)
    return InducedVector(f.r, field, out)


def t_plus(f: InducedVector) -> InducedVector:
    return _apply(f, t_plus_coord)


def t_minus(f: InducedVector) -> InducedVector:
    return _apply(f, t_minus_coord)


def hecke_T(f: InducedVector, a=None) -> InducedVector:
    """(T - a) f; ``a`` is a raw coefficient, a FieldElement, an int or None."""
    field = f.field
    if a is not None and not isinstance(a, (int, tuple)):
        a = a.raw
    elif isinstance(a, int) and field.e > 1:
        a = field.from_int(a)
    elif isinstance(a, int):
        a = a % field.q

    def both(tab, v, i):
        yield from t_plus_coord(tab, v, i)
        yield from t_minus_coord(tab, v, i)

    return _apply(f, both, a)


# ---- re-indexing -----------------------------------------------------------

def beta_vertex(v: Vertex) -> Vertex:
    return (1 - v[0], v[1])


def w_vertex(v: Vertex) -> Vertex:
    eps, ds = v
    if eps == 0:
        if not ds or ds[0] != 0:
            raise CarryRequired(f"w needs a leading zero digit at {v}")
        return (1, ds[1:])
    return (0, (0,) + ds)


def translate_vertex(v: Vertex, u: int, pos: int) -> Vertex:
    eps, ds = v
    if u == 0:
        return v
    if eps != 0 or len(ds) <= pos or ds[pos] != 0:
        raise CarryRequired(f"translation by {u}*p^{pos} is not carry free at {v}")
    return (0, ds[:pos] + (u,) + ds[pos + 1:])


def _relabel(f: InducedVector, fn) -> InducedVector:
    return InducedVector(f.r, f.field, {(fn(v), i): c for (v, i), c in f.entries.items()})


def reindex_beta(f: InducedVector) -> InducedVector:
    return _relabel(f, beta_vertex)


def reindex_w(f: InducedVector) -> InducedVector:
    return _relabel(f, w_vertex)


def reindex_translate(f: InducedVector, u: int, pos: int) -> InducedVector:
    return _relabel(f, lambda v: translate_vertex(v, u, pos))


def check_precision(field: LocalField, r: int) -> None:
    if field.N < 1:
        raise PrecisionExhausted("no precision left for T")
