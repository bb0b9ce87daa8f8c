"""Relation vectors (T - a) f, their good bases, and F_p membership.

Two ways to build the relation module restricted to the ball B_(n+1):

* ``baseline``: one elimination over every (T - a)(v, i), v in B_n.
* ``subtree``: a staged elimination over a representative subtree per
  level, whose results are replicated by the carry free translations and by
  w.  Only the representatives are stored; the F_p echelon used for
  membership looks pivots up through the same relabelings.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .linalg import GoodBasis, gauss_good_basis, normalize_and_reduce
from .padic import LocalField
from .symm import eta_change_of_basis, eta_indices
from .tree import (
    Vertex,
    children,
    distance,
    enumerate_ball,
    hecke_tables,
    relation_coord,
    translate_vertex,
    w_vertex,
)

MODES = ("baseline", "subtree")


@dataclass
class Stage:
    """One elimination stage; ``level`` is the depth of the subtree root."""

    index: int  # m in 2..n, or n+1 for the final stage
    level: int
    basis: GoodBasis
    remainder: list
    reduced: list = field(default_factory=list)  # F_p reductions of the pivots
    copies: int = 1  # number of relabeled copies inside B_(n+1)


@dataclass
class RelationModule:
    """Good basis data for (T - a) I restricted to B_(n+1)."""

    mode: str
    p: int
    r: int
    n: int
    field: LocalField
    d_bound: int  # pi-units
    stages: list[Stage]

    @property
    def saw_zero(self) -> bool:
        return any(s.basis.saw_zero for s in self.stages)

    @property
    def delta(self) -> Fraction:
        return max((s.basis.delta for s in self.stages), default=Fraction(0))

    def elementary_divisors(self) -> dict[Fraction, int]:
        """Multiplicity of each pivot valuation across all copies."""
        out: dict[Fraction, int] = {}
        for s in self.stages:
            for v in s.basis.vals:
                out[v] = out.get(v, 0) + s.copies
        return out

    def pivot_count(self) -> int:
        return sum(len(s.basis.pivots) * s.copies for s in self.stages)


def _relations(tab, verts: Iterable[Vertex], r: int, a) -> list[dict]:
    return [relation_coord(tab, v, i, a) for v in verts for i in range(r + 1)]


def _relabel(vec: dict, fn: Callable[[Vertex], Vertex]) -> dict:
    return {(fn(v), i): c for (v, i), c in vec.items()}


def layered_gauss(vectors: list[dict], fld: LocalField, min_depth: int, d_bound: int):
    """Gauss in passes, deepest coordinates first, never pivoting above
    ``min_depth``.  Each pass is a run of admissible pivot steps, so the
    concatenation is one run of the elimination with a particular order.
    """
    depths = {distance(v) for vec in vectors for (v, _) in vec}
    if not depths:
        return gauss_good_basis(vectors, fld, d_bound=d_bound)
    total = GoodBasis(fld.e)
    rest = vectors
    for D in range(max(depths), min_depth - 1, -1):
        cols = {k for vec in rest for k in vec}
        excluded = frozenset(k for k in cols if distance(k[0]) < D)
        gb, rest = gauss_good_basis(rest, fld, excluded=excluded, d_bound=d_bound)
        total.pivots += gb.pivots
        total.saw_zero |= gb.saw_zero
    return total, rest


def _zero_root(level: int) -> Vertex:
    return (0, (0,) * level)


def build_relations(fld: LocalField, r: int, a, n: int, d_bound: int, mode: str = "subtree") -> RelationModule:
    """Good basis of the relations (T - a)(v, i), v in B_n, up to pi^d_bound."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    p = fld.p
    tab = hecke_tables(fld, r)
    stages: list[Stage] = []
    if mode == "baseline" or n < 2:
        verts = [v for v in enumerate_ball(p, n)]
        gb, rem = gauss_good_basis(_relations(tab, verts, r, a), fld, d_bound=d_bound)
        stages.append(Stage(n + 1, 0, gb, rem))
    else:
        prev_rem: list[dict] = []
        for m in range(2, n + 1):
            level = n + 1 - m
            root = _zero_root(level)
            kids = children(p, root)
            vecs = []
            for u in range(p):
                for vec in prev_rem:
                    vecs.append(_relabel(vec, lambda v, u=u: translate_vertex(v, u, level)))
            vecs += _relations(tab, kids, r, a)
            gb, rem = layered_gauss(vecs, fld, level + 2, d_bound)
            copies = p**level + (p ** (level - 1) if level >= 1 else 0)
            stages.append(Stage(m, level, gb, rem, copies=copies))
            prev_rem = rem
        vecs = []
        for u in range(p):
            for vec in prev_rem:
                vecs.append(_relabel(vec, lambda v, u=u: translate_vertex(v, u, 0)))
        for vec in prev_rem:
            vecs.append(_relabel(vec, w_vertex))
        vecs += _relations(tab, enumerate_ball(p, 1), r, a)
        gb, rem = layered_gauss(vecs, fld, 0, d_bound)
        stages.append(Stage(n + 1, 0, gb, rem))
    for s in stages:
        s.reduced = normalize_and_reduce(s.basis, fld, d_bound)
    return RelationModule(mode, p, r, n, fld, d_bound, stages)


# ---- F_p side ---------------------------------------------------------------

class Projector:
    """Vertexwise quotient map onto the eta-coordinates of steps <= i.

    Raw coordinates are projected with the same matrix at g^0 and g^1
    vertices; at g^1 vertices this is a fixed change of coordinates of the
    true quotient, which makes w a pure relabeling.
    """

    def __init__(self, p: int, r: int, keep: set):
        C = eta_change_of_basis(p, r)
        idx = eta_indices(p, r)
        self.p = p
        self.rows = [(k, C[k]) for k, lab in enumerate(idx) if lab in keep]

    def __call__(self, vec: dict) -> dict:
        p = self.p
        by_v: dict = {}
        for (v, j), c in vec.items():
            by_v.setdefault(v, {})[j] = c
        out = {}
        for v, ent in by_v.items():
            for k, row in self.rows:
                s = sum(row[j] * c for j, c in ent.items()) % p
                if s:
                    out[(v, k)] = s
        return out


class StagedEchelon:
    """Semi-echelon F_p basis of the span of every relabeled stage vector.

    Stage s rows are stored in the coordinates of the representative
    subtree rooted at ``(0, (0,)*level)``; a coordinate deep inside some
    other copy is mapped back to the representative before lookup.
    """

    def __init__(self, p: int, n: int):
        self.p = p
        self.n = n
        self.tables: list[tuple[int, int, dict]] = []  # (order, level, coord -> (idx, row))
        self._cache: dict = {}

    # representative of a vertex in the copy of the level-`level` subtree
    @staticmethod
    def _to_rep(v: Vertex, level: int):
        eps, ds = v
        if level == 0:
            return v, None
        if eps == 1:
            ds = (0,) + ds
            wflag = True
        else:
            wflag = False
        if len(ds) < level:
            return None, None
        return (0, (0,) * level + ds[level:]), (ds[:level], wflag)

    @staticmethod
    def _from_rep(v: Vertex, how) -> Vertex:
        if how is None:
            return v
        prefix, wflag = how
        eps, ds = v
        out = (0, prefix + ds[len(prefix):])
        return w_vertex(out) if wflag else out

    def lookup(self, coord):
        v, k = coord
        D = distance(v)
        for order, level, table in self.tables:
            if level and D < level + 2:
                continue
            rep, how = self._to_rep(v, level)
            if rep is None:
                continue
            hit = table.get((rep, k))
            if hit is None:
                continue
            idx, row = hit
            key = (order, level, (rep, k), how)
            rel = self._cache.get(key)
            if rel is None:
                rel = row if how is None else {(self._from_rep(x, how), j): c for (x, j), c in row.items()}
                self._cache[key] = rel
            return (order, idx), rel
        return None

    def reduce(self, vec: dict) -> dict:
        p = self.p
        x = dict(vec)
        heap = []
        seen = set()
        for c in x:
            hit = self.lookup(c)
            if hit:
                heapq.heappush(heap, (hit[0], c))
                seen.add(c)
        while heap:
            _, c = heapq.heappop(heap)
            seen.discard(c)
            a = x.get(c)
            if not a:
                continue
            row = self.lookup(c)[1]
            for k, y in row.items():
                z = (x.get(k, 0) - a * y) % p
                if z:
                    x[k] = z
                    if k not in seen and k != c:
                        hit = self.lookup(k)
                        if hit:
                            heapq.heappush(heap, (hit[0], k))
                            seen.add(k)
                else:
                    x.pop(k, None)
        return x

    def add_stage(self, level: int, vectors: Iterable[dict], pivotable: Callable) -> list[dict]:
        """Insert ``vectors``; pivots only where ``pivotable(coord)``.

        Returns the reduced vectors without a pivotable entry.
        """
        p = self.p
        table: dict = {}
        order = len(self.tables)
        self.tables.append((order, level, table))
        rest = []
        for vec in vectors:
            x = self.reduce(vec)
            if not x:
                continue
            cand = [k for k in x if pivotable(k)]
            if not cand:
                rest.append(x)
                continue
            piv = min(cand)
            inv = pow(x[piv], -1, p)
            row = {k: c * inv % p for k, c in x.items()}
            table[piv] = (len(table), row)
            self._cache.clear()
        return rest


def fp_echelon(mod: RelationModule, project: Projector) -> StagedEchelon:
    """Staged F_p echelon of the projected reductions of all pivots."""
    p, n = mod.p, mod.n
    ech = StagedEchelon(p, n)
    if mod.mode == "baseline" or len(mod.stages) == 1:
        ech.add_stage(0, (project(v) for v in mod.stages[0].reduced), lambda k: True)
        return ech
    rest: list[dict] = []
    for st in mod.stages[:-1]:
        level = st.level
        vecs = [project(v) for v in st.reduced]
        if rest:
            for u in range(p):
                vecs += [_relabel(x, lambda v, u=u: translate_vertex(v, u, level)) for x in rest]
        rest = ech.add_stage(level, vecs, lambda k, lv=level: distance(k[0]) >= lv + 2)
    final = mod.stages[-1]
    vecs = [project(v) for v in final.reduced]
    for u in range(p):
        vecs += [_relabel(x, lambda v, u=u: translate_vertex(v, u, 0)) for x in rest]
    vecs += [_relabel(x, w_vertex) for x in rest]
    ech.add_stage(0, vecs, lambda k: True)
    return ech
