"""Good bases over R / pi^M, elementary divisors, and reduction modulo pi.

Vectors are plain dicts ``coord -> raw`` where ``raw`` is a coefficient of a
:class:`~crysred.padic.LocalField`.  Coordinates must be mutually comparable
(ints in the engine), since ties between pivots are broken by coordinate
order.
"""

from __future__ import annotations

import heapq

import numpy as np
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

from .padic import LocalField, PrecisionExhausted

SparseVector = dict


@dataclass
class Pivot:
    vector: SparseVector
    coord: Hashable
    val: int  # pi-units


@dataclass
class GoodBasis:
    e: int
    pivots: list[Pivot] = field(default_factory=list)
    saw_zero: bool = False

    @property
    def vals(self) -> list[Fraction]:
        return [Fraction(pv.val, self.e) for pv in self.pivots]

    @property
    def delta(self) -> Fraction:
        return max(self.vals, default=Fraction(0))


def vector_val(fld: LocalField, vec: SparseVector) -> int:
    if not vec:
        return fld.inf
    return fld.vector_val(vec.values())


def gauss_good_basis_sparse(
    vectors: Iterable[SparseVector],
    fld: LocalField,
    excluded: frozenset | set = frozenset(),
    d_bound: int | None = None,
) -> tuple[GoodBasis, list[SparseVector]]:
    """Gauss variant producing a good basis up to pi^d_bound.

    ``d_bound`` is in pi-units; vectors whose valuation exceeds it (in
    particular vectors that vanish) are dropped and flagged in ``saw_zero``.
    Pivots are never taken in ``excluded`` coordinates; vectors left without
    an admissible pivot are returned as the remainder.

    Pivot choice: smallest vector valuation, then fewest entries, then the
    lowest admissible coordinate, then input order.
    """
    inf = fld.inf
    if d_bound is None:
        d_bound = inf - 1
    if d_bound >= inf:
        raise PrecisionExhausted(f"d_bound {d_bound} needs precision above {inf}")
    val = fld.val
    vecs: dict[int, SparseVector] = {}
    vals: dict[int, int] = {}
    cols: dict = {}
    basis = GoodBasis(fld.e)
    for idx, v in enumerate(vectors):
        v = {k: c for k, c in v.items() if not fld.is_zero(c)}
        vv = vector_val(fld, v)
        if vv > d_bound:
            basis.saw_zero = True
            continue
        vecs[idx] = v
        vals[idx] = vv
        for k in v:
            cols.setdefault(k, set()).add(idx)

    version = {i: 0 for i in vecs}
    heap = [(vals[i], len(vecs[i]), i, 0) for i in vecs]
    heapq.heapify(heap)
    has_excl = bool(excluded)
    blocked: list[int] = []
    e1 = fld.e == 1
    q = fld.q
    p = fld.p

    while heap:
        vv, nnz, idx, ver = heapq.heappop(heap)
        if idx not in vecs or ver != version[idx]:
            continue
        w = vecs[idx]
        # admissible coordinates realise v(w), are not excluded, and are
        # minimal in their column
        piv = None
        for k in sorted(w):
            if has_excl and k in excluded:
                continue
            if val(w[k]) != vv:
                continue
            if has_excl:
                ok = True
                for j in cols[k]:
                    if j != idx and vals[j] < vv and val(vecs[j][k]) < vv:
                        ok = False
                        break
                if not ok:
                    continue
            piv = k
            break
        if piv is None:
            blocked.append(idx)
            continue
        for j in blocked:
            if j in vecs:
                heapq.heappush(heap, (vals[j], len(vecs[j]), j, version[j]))
        blocked = []
        b = w[piv]
        # eliminate column piv from every other active vector
        del vecs[idx]
        for k in w:
            cols[k].discard(idx)
        others = sorted(cols[piv])
        if e1:
            pk = p**vv
            binv = pow(b // pk, -1, q)
        else:
            binv = fld.inverse(fld.shift_down(b, vv))
        for j in others:
            wj = vecs[j]
            a = wj[piv]
            if e1:
                c = (a // pk) * binv % q
                for k, x in w.items():
                    if k in wj:
                        y = (wj[k] - c * x) % q
                        if y:
                            wj[k] = y
                        else:
                            del wj[k]
                            cols[k].discard(j)
                    else:
                        y = (-c * x) % q
                        if y:
                            wj[k] = y
                            cols.setdefault(k, set()).add(j)
            else:
                c = fld.mul(fld.shift_down(a, vv), binv)
                for k, x in w.items():
                    prod_ = fld.mul(c, x)
                    if k in wj:
                        y = fld.sub(wj[k], prod_)
                        if fld.is_zero(y):
                            del wj[k]
                            cols[k].discard(j)
                        else:
                            wj[k] = y
                    elif not fld.is_zero(prod_):
                        wj[k] = fld.neg(prod_)
                        cols.setdefault(k, set()).add(j)
            if piv in wj:
                # the pivot entry is cancelled exactly up to precision
                del wj[piv]
                cols[piv].discard(j)
            nv = vector_val(fld, wj)
            if nv > d_bound:
                basis.saw_zero = True
                del vecs[j]
                for k in wj:
                    cols[k].discard(j)
                continue
            vals[j] = nv
            version[j] += 1
            heapq.heappush(heap, (nv, len(wj), j, version[j]))
        basis.pivots.append(Pivot(w, piv, vv))

    remainder = [vecs[i] for i in sorted(vecs)]
    return basis, remainder


def leading_residue(fld: LocalField, a, v: int) -> int:
    """Residue of a / pi^v when v(a) == v, else 0."""
    p = fld.p
    if fld.e == 1:
        pk = p**v
        if a % pk:
            raise PrecisionExhausted("entry below the normalising valuation")
        return (a // pk) % p
    if fld.val(a) != v:
        return 0
    e = fld.e
    k, j = divmod(v, e)
    c = a[j] // p**k
    # pi^e = p * u_e, so p^k = pi^(e k) u_e^(-k)
    ue = fld.residue(fld._unit_e)
    return c * pow(ue, -k, p) % p


def normalize_and_reduce(basis: GoodBasis, fld: LocalField, d_bound: int) -> list[dict]:
    """Reductions mod pi of pi^(-v(w)) w for the pivots with v(w) <= d_bound."""
    out = []
    p = fld.p
    for pv in basis.pivots:
        if pv.val > d_bound:
            continue
        red = {}
        for k, c in pv.vector.items():
            r = leading_residue(fld, c, pv.val) if fld.val(c) == pv.val else 0
            if r % p:
                red[k] = r % p
        out.append(red)
    return out


# ---- dense kernel ---------------------------------------------------------------

_INT64_MAX = 2**63 - 1


def dense_supported(fld: LocalField) -> bool:
    """Whether products of residues fit into int64 for the dense kernel."""
    return fld.e * fld.q * fld.q < _INT64_MAX


def gauss_good_basis_dense(
    vectors: Sequence[SparseVector],
    fld: LocalField,
    excluded: frozenset | set = frozenset(),
    d_bound: int | None = None,
) -> tuple[GoodBasis, list[SparseVector]]:
    """Same contract and pivot rule as :func:`gauss_good_basis_sparse`, as a
    compiled loop over a dense block.  Requires :func:`dense_supported`."""
    from . import _dense

    inf = fld.inf
    if d_bound is None:
        d_bound = inf - 1
    if d_bound >= inf:
        raise PrecisionExhausted(f"d_bound {d_bound} needs precision above {inf}")
    if not dense_supported(fld):
        raise PrecisionExhausted("modulus too large for the dense kernel")
    e = fld.e
    basis = GoodBasis(e)
    cols = sorted({k for v in vectors for k in v})
    if not cols:
        basis.saw_zero = bool(vectors)
        return basis, []
    cidx = {k: j for j, k in enumerate(cols)}
    A = np.zeros((len(vectors), len(cols), e), dtype=np.int64)
    for i, v in enumerate(vectors):
        for k, c in v.items():
            A[i, cidx[k]] = fld.coeffs(c)
    excl = np.zeros(len(cols), dtype=np.bool_)
    for k in excluded:
        j = cidx.get(k)
        if j is not None:
            excl[j] = True
    red = np.array(fld._red if e > 1 else (0,), dtype=np.int64)
    tables = _dense.shift_tables(fld)
    rows, pcols, pvals, active, saw_zero, EV = _dense.eliminate(
        A, excl, bool(excl.any()), int(d_bound), fld.p, fld.N, red, *tables)
    basis.saw_zero = bool(saw_zero)

    def to_sparse(i):
        if e == 1:
            return {cols[j]: int(A[i, j, 0]) for j in np.flatnonzero(EV[i] < inf)}
        return {cols[j]: tuple(int(x) for x in A[i, j]) for j in np.flatnonzero(EV[i] < inf)}

    for i, c, v in zip(rows, pcols, pvals):
        basis.pivots.append(Pivot(to_sparse(i), cols[c], int(v)))
    return basis, [to_sparse(i) for i in np.flatnonzero(active)]


def _components(vectors: list[SparseVector], excluded) -> list[list[int]]:
    """Groups of vectors linked through shared non-excluded coordinates."""
    parent = list(range(len(vectors)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner: dict = {}
    for i, v in enumerate(vectors):
        for k in v:
            if k in excluded:
                continue
            j = owner.setdefault(k, i)
            if j != i:
                a, b = find(i), find(j)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    groups: dict = {}
    for i in range(len(vectors)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def gauss_good_basis(
    vectors: Iterable[SparseVector],
    fld: LocalField,
    excluded: frozenset | set = frozenset(),
    d_bound: int | None = None,
    kernel: str = "auto",
) -> tuple[GoodBasis, list[SparseVector]]:
    """Good basis up to pi^d_bound; ``kernel`` is "sparse", "dense" or "auto".

    Vectors are split into groups that share no admissible coordinate; the
    groups never interact, so each is eliminated on its own.  Both kernels
    follow the same pivot rule and give the same result on each group.
    """
    vectors = list(vectors)
    if kernel not in ("auto", "sparse", "dense"):
        raise ValueError(f"unknown kernel {kernel!r}")
    total = GoodBasis(fld.e)
    remainder: list[tuple[int, SparseVector]] = []
    for group in _components(vectors, excluded):
        vecs = [vectors[i] for i in group]
        kern = kernel
        if kern == "auto":
            ncols = len({k for v in vecs for k in v})
            big = len(vecs) * ncols > 20000
            kern = "dense" if big and dense_supported(fld) else "sparse"
        run = gauss_good_basis_dense if kern == "dense" else gauss_good_basis_sparse
        gb, rem = run(vecs, fld, excluded, d_bound)
        total.pivots += gb.pivots
        total.saw_zero |= gb.saw_zero
        remainder += [(group[0], v) for v in rem]
    remainder.sort(key=lambda t: t[0])
    return total, [v for _, v in remainder]


# ---- F_p membership ------------------------------------------------------------

@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Linear:
    lam: int


@dataclass(frozen=True)
class Quadratic:
    mu: int


@dataclass(frozen=True)
class Unknown:
    pass


class FpEchelon:
    """Semi-echelon basis over F_p; pivots taken at the lowest coordinate."""

    def __init__(self, p: int, vectors: Iterable[SparseVector] = ()):
        self.p = p
        self.rows: dict = {}  # pivot coord -> row with 1 at the pivot
        self.order: dict = {}
        for v in vectors:
            self.add(v)

    def reduce(self, vec: SparseVector) -> SparseVector:
        p = self.p
        x = {k: c % p for k, c in vec.items() if c % p}
        heap = [(self.order[k], k) for k in x if k in self.rows]
        heapq.heapify(heap)
        while heap:
            _, k = heapq.heappop(heap)
            a = x.get(k)
            if not a:
                continue
            for j, y in self.rows[k].items():
                z = (x.get(j, 0) - a * y) % p
                if z:
                    if j not in x and j in self.rows:
                        heapq.heappush(heap, (self.order[j], j))
                    x[j] = z
                else:
                    x.pop(j, None)
        return x

    def add(self, vec: SparseVector) -> bool:
        x = self.reduce(vec)
        if not x:
            return False
        piv = min(x)
        inv = pow(x[piv], -1, self.p)
        self.rows[piv] = {k: c * inv % self.p for k, c in x.items()}
        self.order[piv] = len(self.order)
        return True


def _ratio(x: SparseVector, y: SparseVector, p: int) -> int | None:
    """The c in F_p with x = c*y (y nonzero), or None."""
    k = next(iter(y))
    c = x.get(k, 0) * pow(y[k], -1, p) % p
    keys = set(x) | set(y)
    if all((x.get(j, 0) - c * y.get(j, 0)) % p == 0 for j in keys):
        return c
    return None


def membership_solve(targets: Sequence[SparseVector], span, p: int):
    """Outcome of one filtration step from residuals of (v, w1, w2).

    ``span`` is either an object with a ``reduce`` method or a list of
    F_p vectors, all already projected to the step's quotient.
    """
    if not hasattr(span, "reduce"):
        span = FpEchelon(p, span)
    r0, r1, r2 = (span.reduce(t) for t in targets)
    if not r0:
        return Zero()
    lam = _ratio(r1, r0, p)
    if lam is not None:
        return Linear(lam)
    s = dict(r2)
    for k, c in r0.items():
        s[k] = (s.get(k, 0) + c) % p
    s = {k: c for k, c in s.items() if c}
    mu = _ratio(s, r1, p)
    if mu is not None:
        return Quadratic(mu)
    return Unknown()
