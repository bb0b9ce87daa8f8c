"""Symm^r of the standard representation, its theta filtration and eta bases.

A polynomial of degree r is a list of r+1 coefficients, entry i multiplying
X^(r-i) Y^i.  With theta = X^p Y - X Y^p and m = r // (p+1) the eta basis is

    eta_{u,v} = theta^u X^v Y^(r-u(p+1)-v)     (v <= p-1, or u = m)
    eta_{u,p} = theta^u X^(r-u(p+1))           (u < m)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Sequence

from .tree import ORIGIN, InducedVector


class IndexOutOfRange(ValueError):
    pass


def bracket(n: int, p: int) -> int:
    """Representative of n mod p-1 in 1..p-1."""
    if p == 2:
        return 1
    return (n - 1) % (p - 1) + 1


def eta_indices(p: int, r: int) -> list[tuple[int, int]]:
    m = r // (p + 1)
    out = [(u, v) for u in range(m) for v in range(p + 1)]
    out += [(m, v) for v in range(r - m * (p + 1) + 1)]
    return out


def _check(p: int, r: int, u: int, v: int) -> None:
    """Any 0 <= v <= r - u(p+1) is legal; (u, p) with u < m is the basis label X^(r-u(p+1))."""
    if u < 0 or u > r // (p + 1) or v < 0 or v > r - u * (p + 1):
        raise IndexOutOfRange((u, v))


@lru_cache(maxsize=4096)
def _eta(p: int, r: int, u: int, v: int) -> tuple:
    _check(p, r, u, v)
    rest = r - u * (p + 1)
    # (u, p) with u < m is the label of theta^u X^rest
    ypow = 0 if v == p and u < r // (p + 1) else rest - v
    coeffs = [0] * (r + 1)
    # theta^u = sum_k C(u,k) (-1)^k X^(p(u-k)+k) Y^((u-k)+pk)
    for k in range(u + 1):
        y = (u - k) + p * k + ypow
        coeffs[y] += comb(u, k) * (-1) ** k
    return tuple(coeffs)


def eta_expand(p: int, r: int, u: int, v: int) -> list[int]:
    """Integer monomial coefficients of eta_{u,v}."""
    return list(_eta(p, r, u, v))


@dataclass(frozen=True)
class FiltrationStep:
    i: int
    a: int
    b: int
    eta_basis: tuple
    gen: tuple

    @property
    def dim(self) -> int:
        return len(self.eta_basis)


def standard_filtration(p: int, r: int) -> list[FiltrationStep]:
    """Steps J_i = V_i / V_(i+1), in increasing i."""
    m = r // (p + 1)
    t = r - m * (p + 1)
    steps = []
    for i in range(m):
        br = bracket(r - 2 * i, p)
        steps.append(FiltrationStep(
            2 * i, p - 1 - br, (r - i) % (p - 1),
            tuple((i, v) for v in range(br, p)), (i, p - 1)))
        steps.append(FiltrationStep(
            2 * i + 1, br, i % (p - 1),
            tuple((i, v) for v in range(br)) + ((i, p),), (i, p)))
    if t <= p - 1:
        steps.append(FiltrationStep(
            2 * m, t, m % (p - 1), tuple((m, v) for v in range(t + 1)), (m, t)))
    else:
        steps.append(FiltrationStep(
            2 * m, p - 2, (m + 1) % (p - 1), tuple((m, v) for v in range(1, p)), (m, p - 1)))
        steps.append(FiltrationStep(
            2 * m + 1, 1, m % (p - 1), ((m, 0), (m, p)), (m, p)))
    return steps


# ---- change of basis ------------------------------------------------------

def _solve_mod_p(rows: list[list[int]], p: int) -> list[list[int]]:
    """Inverse of a square matrix over F_p (rows are the matrix rows)."""
    n = len(rows)
    a = [[x % p for x in row] + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(rows)]
    for col in range(n):
        piv = next(r_ for r_ in range(col, n) if a[r_][col])
        a[col], a[piv] = a[piv], a[col]
        inv = pow(a[col][col], -1, p)
        a[col] = [x * inv % p for x in a[col]]
        for r_ in range(n):
            if r_ != col and a[r_][col]:
                f = a[r_][col]
                a[r_] = [(x - f * y) % p for x, y in zip(a[r_], a[col])]
    return [row[n:] for row in a]


@lru_cache(maxsize=256)
def eta_change_of_basis(p: int, r: int) -> tuple:
    """Matrix C over F_p with eta-coordinates = C @ monomial coordinates.

    Rows are indexed like ``eta_indices(p, r)``.
    """
    idx = eta_indices(p, r)
    # columns of B are eta expansions: monomial = B @ eta
    B = [[0] * len(idx) for _ in range(r + 1)]
    for c, (u, v) in enumerate(idx):
        for i, x in enumerate(_eta(p, r, u, v)):
            B[i][c] = x % p
    return tuple(tuple(row) for row in _solve_mod_p(B, p))


def to_eta_coordinates(p: int, r: int, P: Sequence[int]) -> dict:
    """Coordinates of P (over F_p) in the eta basis, by rewriting.

    A term theta^n X^A Y^j with p <= A < top and j >= 1 becomes
    theta^n X^(A-p+1) Y^(j+p-1) + theta^(n+1) X^(A-p) Y^(j-1).
    """
    m = r // (p + 1)
    todo: dict = {}
    for i, c in enumerate(P):
        if c % p:
            todo[(0, r - i)] = c % p  # keyed by X power
    out: dict = {}
    while todo:
        (n, A), c = todo.popitem()
        if c % p == 0:
            continue
        top = r - n * (p + 1)
        if n == m or A <= p - 1 or A == top:
            label = (n, p) if (A == top and n < m and A > p - 1) else (n, A)
            out[label] = (out.get(label, 0) + c) % p
            continue
        for key in ((n, A - p + 1), (n + 1, A - p)):
            todo[key] = (todo.get(key, 0) + c) % p
    return {k: c for k, c in out.items() if c}


def theta_divides(p: int, P: Sequence[int], c: int) -> bool:
    """Whether theta^c divides P over F_p, by the three coefficient criteria."""
    r = len(P) - 1
    alpha = [x % p for x in P]
    if c == 0:
        return True
    if r < c * (p + 1):
        return not any(alpha)
    if any(alpha[i] for i in range(c)):
        return False
    if any(alpha[i] for i in range(r - c + 1, r + 1)):
        return False
    for a in range(p - 1):
        for ell in range(c):
            s = sum(comb(i, ell) * alpha[i] for i in range(a, r + 1, p - 1))
            if s % p:
                return False
    return True


def step_witnesses(p: int, r: int, step: FiltrationStep) -> tuple[dict, dict, dict]:
    """(v_i, w_{i,1}, w_{i,2}) as dicts vertex -> monomial coefficient list."""
    e = list(_eta(p, r, *step.gen))
    v = {ORIGIN: e}
    w1 = {(0, (u,)): e for u in range(p)}
    w2 = {(0, (u0, u1)): e for u0 in range(p) for u1 in range(p)}
    if step.a == 0:
        w1[(1, ())] = e
        for u in range(p):
            w2[(1, (u,))] = e
        w2[ORIGIN] = e
    return v, w1, w2


def witnesses_as_induced(p: int, r: int, step: FiltrationStep, field) -> tuple:
    out = []
    for d in step_witnesses(p, r, step):
        acc = InducedVector(r, field)
        for vert, poly in d.items():
            acc = acc + InducedVector.bracket(r, field, vert, poly)
        out.append(acc)
    return tuple(out)


def summodp(p: int, r: int, i: int) -> int:
    """sum_j C(r, j(p-1)+i) mod p."""
    return sum(comb(r, j) for j in range(i, r + 1, p - 1)) % p
