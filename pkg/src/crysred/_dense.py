"""Compiled inner loop of the dense elimination kernel.

Elements of R / p^N are rows of e int64 residues; all products are reduced
immediately, so e * q^2 must fit into int64.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _vp(c, p, N):
    if c == 0:
        return N
    k = 0
    while c % p == 0:
        c //= p
        k += 1
    return k


@njit(cache=True)
def _entry_val(A, i, j, p, N, e):
    best = e * N
    for t in range(e):
        c = A[i, j, t]
        if c != 0:
            v = e * _vp(c, p, N) + t
            if v < best:
                best = v
    return best


@njit(cache=True)
def _mul(x, y, out, red, q, e, prod):
    """out = x * y in R / p^N; ``prod`` is scratch of length 2e-1."""
    if e == 1:
        out[0] = x[0] * y[0] % q
        return
    for k in range(2 * e - 1):
        prod[k] = 0
    for i in range(e):
        xi = x[i]
        if xi == 0:
            continue
        for j in range(e):
            prod[i + j] = (prod[i + j] + xi * y[j]) % q
    for k in range(2 * e - 2, e - 1, -1):
        top = prod[k]
        if top != 0:
            for j in range(e):
                prod[k - e + j] = (prod[k - e + j] + top * red[j]) % q
    for j in range(e):
        out[j] = prod[j]


@njit(cache=True)
def _inv_mod(a, m):
    g, x, x1 = m, 0, 1
    b = a % m
    while b != 0:
        qt = g // b
        g, b = b, g - qt * b
        x, x1 = x1, x - qt * x1
    return x % m


@njit(cache=True)
def _inverse(u, red, q, p, e, N):
    out = np.zeros(e, dtype=np.int64)
    scratch = np.zeros(2 * e - 1, dtype=np.int64)
    if e == 1:
        out[0] = _inv_mod(u[0], q)
        return out
    out[0] = _inv_mod(u[0] % p, p)
    tmp = np.zeros(e, dtype=np.int64)
    two = np.zeros(e, dtype=np.int64)
    prec = 1
    while prec < e * N:
        _mul(u, out, tmp, red, q, e, scratch)
        for j in range(e):
            two[j] = (-tmp[j]) % q
        two[0] = (two[0] + 2) % q
        _mul(out, two, tmp, red, q, e, scratch)
        for j in range(e):
            out[j] = tmp[j]
        prec *= 2
    return out


@njit(cache=True)
def _shift_down(x, k, out, shift_pi, shift_q, shift_u, red, q, e, tmp, scratch):
    """out = x / pi^k using the tables pi^s, p^qq, u^(-qq) for k."""
    if e == 1:
        out[0] = x[0] // shift_q[k]
        return
    _mul(x, shift_pi[k], tmp, red, q, e, scratch)
    d = shift_q[k]
    for j in range(e):
        tmp[j] = tmp[j] // d
    _mul(tmp, shift_u[k], out, red, q, e, scratch)


@njit(cache=True)
def eliminate(A, excl, has_excl, d_bound, p, N, red, shift_pi, shift_q, shift_u):
    """Run the elimination in place.

    Returns (pivot rows, pivot columns, pivot valuations, active mask,
    saw_zero, entry valuations).
    """
    nv, nc, e = A.shape
    q = p**N
    inf = e * N
    EV = np.empty((nv, nc), dtype=np.int64)
    vals = np.empty(nv, dtype=np.int64)
    nnz = np.empty(nv, dtype=np.int64)
    active = np.ones(nv, dtype=np.bool_)
    saw_zero = False
    for i in range(nv):
        mn = inf
        cnt = 0
        for j in range(nc):
            v = _entry_val(A, i, j, p, N, e)
            EV[i, j] = v
            if v < inf:
                cnt += 1
            if v < mn:
                mn = v
        vals[i] = mn
        nnz[i] = cnt
        if mn > d_bound:
            active[i] = False
            saw_zero = True
    colmin = np.empty(nc, dtype=np.int64)
    piv_rows = np.empty(nv, dtype=np.int64)
    piv_cols = np.empty(nv, dtype=np.int64)
    piv_vals = np.empty(nv, dtype=np.int64)
    npiv = 0
    b = np.zeros(e, dtype=np.int64)
    a = np.zeros(e, dtype=np.int64)
    coef = np.zeros(e, dtype=np.int64)
    prod = np.zeros(e, dtype=np.int64)
    tmp = np.zeros(e, dtype=np.int64)
    scratch = np.zeros(2 * e - 1, dtype=np.int64)
    wcols = np.empty(nc, dtype=np.int64)
    while True:
        if has_excl:
            for j in range(nc):
                colmin[j] = inf
            for i in range(nv):
                if active[i]:
                    for j in range(nc):
                        if EV[i, j] < colmin[j]:
                            colmin[j] = EV[i, j]
        best = -1
        best_col = -1
        for i in range(nv):
            if not active[i]:
                continue
            if best >= 0:
                if vals[i] > vals[best]:
                    continue
                if vals[i] == vals[best] and nnz[i] >= nnz[best]:
                    continue
            vv = vals[i]
            col = -1
            for j in range(nc):
                if EV[i, j] == vv and not excl[j]:
                    if has_excl and colmin[j] < vv:
                        continue
                    col = j
                    break
            if col >= 0:
                best = i
                best_col = col
        if best < 0:
            break
        idx = best
        c = best_col
        vv = vals[idx]
        active[idx] = False
        piv_rows[npiv] = idx
        piv_cols[npiv] = c
        piv_vals[npiv] = vv
        npiv += 1
        _shift_down(A[idx, c], vv, b, shift_pi, shift_q, shift_u, red, q, e, tmp, scratch)
        binv = _inverse(b, red, q, p, e, N)
        nw = 0
        for j in range(nc):
            if EV[idx, j] < inf:
                wcols[nw] = j
                nw += 1
        for i in range(nv):
            if not active[i] or EV[i, c] >= inf:
                continue
            _shift_down(A[i, c], vv, a, shift_pi, shift_q, shift_u, red, q, e, tmp, scratch)
            _mul(a, binv, coef, red, q, e, scratch)
            for jj in range(nw):
                j = wcols[jj]
                if e == 1:
                    A[i, j, 0] = (A[i, j, 0] - coef[0] * A[idx, j, 0]) % q
                else:
                    _mul(coef, A[idx, j], prod, red, q, e, scratch)
                    for t in range(e):
                        A[i, j, t] = (A[i, j, t] - prod[t]) % q
                old = EV[i, j]
                if j == c:
                    for t in range(e):
                        A[i, j, t] = 0
                    new = inf
                else:
                    new = _entry_val(A, i, j, p, N, e)
                EV[i, j] = new
                if old < inf and new >= inf:
                    nnz[i] -= 1
                elif old >= inf and new < inf:
                    nnz[i] += 1
            mn = inf
            for j in range(nc):
                if EV[i, j] < mn:
                    mn = EV[i, j]
            vals[i] = mn
            if mn > d_bound:
                active[i] = False
                saw_zero = True
    return piv_rows[:npiv], piv_cols[:npiv], piv_vals[:npiv], active, saw_zero, EV


def shift_tables(fld) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per k: pi^s, p^qq and u_e^(-qq) with k = e*qq - s, for k up to inf."""
    e = fld.e
    n = fld.inf + 1
    shift_pi = np.zeros((n, e), dtype=np.int64)
    shift_q = np.ones(n, dtype=np.int64)
    shift_u = np.zeros((n, e), dtype=np.int64)
    for k in range(n):
        qq = -(-k // e)
        s = e * qq - k
        shift_pi[k] = fld.coeffs(fld.pi_power(s) if e > 1 else 1)
        shift_q[k] = fld.p**qq
        shift_u[k] = fld.coeffs(fld._unit_e_inv_power(qq) if e > 1 else 1)
    return shift_pi, shift_q, shift_u
