"""Independent oracles shared by the unit tests and the acceptance module."""

import random
from fractions import Fraction
from math import comb

import sympy
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form

from crysred.linalg import gauss_good_basis
from crysred.padic import PrimeContext, make_field, vp
from crysred.symm import bracket, summodp, theta_divides
from crysred.tree import InducedVector, enumerate_ball, hecke_T

X, Y = sympy.symbols("X Y")


def theta(p):
    return X**p * Y - X * Y**p


def coeffs(expr, r):
    """Coefficient list of a degree-r form, entry i on X^(r-i) Y^i."""
    poly = sympy.Poly(sympy.expand(expr), X, Y)
    return [int(poly.coeff_monomial(X ** (r - i) * Y**i)) for i in range(r + 1)]


def as_poly(c, r):
    return sum(int(x) * X ** (r - i) * Y**i for i, x in enumerate(c))


# ---- T on the tree, p = 3, from explicit matrices -----------------------------

P = 3
N = 6
Q = P**N
TEICH = {0: 0, 1: 1, 2: -1}  # exact Teichmuller lifts for p = 3


def _val(x: Fraction) -> int:
    if x == 0:
        return 10**6
    v, n, d = 0, x.numerator, x.denominator
    while n % P == 0:
        n //= P
        v += 1
    while d % P == 0:
        d //= P
        v -= 1
    return v


def _mu(ds) -> int:
    return sum(TEICH[d] * P**i for i, d in enumerate(ds))


def vertex_matrix(v):
    eps, ds = v
    n, mu = len(ds), _mu(ds)
    if eps == 0:
        return ((Fraction(P**n), Fraction(mu)), (Fraction(0), Fraction(1)))
    return ((Fraction(1), Fraction(0)), (Fraction(P * mu), Fraction(P ** (n + 1))))


def mat_mul(a, b):
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2)) for i in range(2))


def mat_inv(a):
    det = a[0][0] * a[1][1] - a[0][1] * a[1][0]
    return ((a[1][1] / det, -a[0][1] / det), (-a[1][0] / det, a[0][0] / det))


def act(kappa, poly, r):
    """P(X, Y) -> P(aX + cY, bX + dY), poly[j] multiplying X^(r-j) Y^j."""
    (a, b), (c, d) = kappa
    out = [Fraction(0)] * (r + 1)
    for j, coef in enumerate(poly):
        if not coef:
            continue
        # (aX + cY)^(r-j) (bX + dY)^j
        for s in range(r - j + 1):
            for t in range(j + 1):
                term = comb(r - j, s) * a ** (r - j - s) * c**s * comb(j, t) * b ** (j - t) * d**t
                out[s + t] += coef * term
    return out


def locate(h, verts):
    """Vertex g and kappa in GL2(Z_p) with h = g * p^m * kappa."""
    for v in verts:
        k = mat_mul(mat_inv(vertex_matrix(v)), h)
        m = min(_val(x) for row in k for x in row)
        det = k[0][0] * k[1][1] - k[0][1] * k[1][0]
        if _val(det) == 2 * m:
            s = Fraction(1, P**m) if m >= 0 else Fraction(P ** (-m))
            return v, tuple(tuple(x * s for x in row) for row in k)
    raise AssertionError("no vertex found")


def oracle_T(r, g, poly, verts):
    """T[g, poly] as a dict vertex -> rational polynomial."""
    pieces = []
    for u in range(P):
        g1 = ((Fraction(P), Fraction(TEICH[u])), (Fraction(0), Fraction(1)))
        # v(X, pY - uX)
        pieces.append((mat_mul(g, g1), act(((1, -TEICH[u]), (0, P)), poly, r)))
    alpha = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(P)))
    pieces.append((mat_mul(g, alpha), act(((P, 0), (0, 1)), poly, r)))
    out: dict = {}
    for h, pl in pieces:
        v, kappa = locate(h, verts)
        moved = act(kappa, pl, r)
        acc = out.setdefault(v, [Fraction(0)] * (r + 1))
        for j in range(r + 1):
            acc[j] += moved[j]
    return out


def _mod(x: Fraction) -> int:
    return x.numerator * pow(x.denominator, -1, Q) % Q


def as_induced(r, fld, d):
    acc = InducedVector(r, fld)
    for v, poly in d.items():
        acc = acc + InducedVector.bracket(r, fld, v, [_mod(c) for c in poly])
    return acc

# ---- elementary divisors ------------------------------------------------------

def random_matrix(rng, p, rows, cols, rank):
    B = [[rng.randrange(-p**3, p**3) * p ** rng.choice([0, 0, 1, 2, 3]) for _ in range(rank)]
         for _ in range(rows)]
    C = [[rng.randrange(-p**3, p**3) * p ** rng.choice([0, 0, 1, 2]) for _ in range(cols)]
         for _ in range(rank)]
    return [[sum(B[i][t] * C[t][j] for t in range(rank)) for j in range(cols)] for i in range(rows)]


def smith_vals(A, p, m):
    """p-adic elementary divisors below p^m, from the integer Smith form."""
    S = smith_normal_form(Matrix(A), domain=ZZ)
    out = []
    for i in range(min(S.shape)):
        x = int(S[i, i])
        if x and vp(x, p) < m:
            out.append(vp(x, p))
    return sorted(out)


def vectors(A, fld):
    return [{j: fld.from_int(x) for j, x in enumerate(row) if x % fld.q} for row in A]

# ---- theta divisibility -------------------------------------------------------

def theta_oracle(p, P, c):
    r = len(P) - 1
    if not any(x % p for x in P):
        return True
    if r < c * (p + 1):
        return False
    q, rem = sympy.div(sympy.Poly(as_poly(P, r), X, Y, modulus=p),
                       sympy.Poly(theta(p) ** c, X, Y, modulus=p))
    return rem.is_zero


# ---- batch checks returning mismatch counts -----------------------------------

def smith_mismatches(count=500, seed=7, m=6):
    rng = random.Random(seed)
    bad = 0
    for _ in range(count):
        p = rng.choice([3, 5, 7])
        rank = rng.randint(1, 6)
        rows, cols = rng.randint(rank, 8), rng.randint(rank, 8)
        A = random_matrix(rng, p, rows, cols, rank)
        fld = make_field(PrimeContext(p), (0, 1), m)
        gb, _ = gauss_good_basis(vectors(A, fld), fld)
        bad += sorted(pv.val for pv in gb.pivots) != smith_vals(A, p, m)
    return bad


def coset_mismatches(max_r=4):
    """hecke_T against the coset sum on every basis vector supported in B_1."""
    fld = make_field(PrimeContext(P), (0, 1), N)
    verts = enumerate_ball(P, 3)
    bad = total = 0
    for r in range(max_r + 1):
        for v in enumerate_ball(P, 1):
            for j in range(r + 1):
                unit = [int(i == j) for i in range(r + 1)]
                want = as_induced(r, fld, oracle_T(r, vertex_matrix(v), [Fraction(c) for c in unit], verts))
                bad += hecke_T(InducedVector.bracket(r, fld, v, unit)) != want
                total += 1
    return bad, total


def theta_mismatches(count=200, seed=20261017):
    rng = random.Random(seed)
    bad = 0
    for _ in range(count):
        p = rng.choice([3, 5])
        c = rng.randint(1, 3)
        r = rng.randint(c * (p + 1), 40)
        if rng.random() < 0.5:
            rest = [rng.randrange(p) for _ in range(r - c * (p + 1) + 1)]
            P_ = coeffs(theta(p) ** c * as_poly(rest, r - c * (p + 1)), r)
        else:
            P_ = [rng.randrange(p) for _ in range(r + 1)]
        bad += theta_divides(p, P_, c) != theta_oracle(p, P_, c)
    return bad


def summodp_failures(primes=(3, 5, 7), max_r=300):
    bad = 0
    for p in primes:
        for r in range(1, max_r + 1):
            for i in range(p - 1):
                want = 2 if (bracket(r, p), i) == (p - 1, 0) else comb(bracket(r, p), i)
                bad += summodp(p, r, i) != want % p
    return bad


def determinant_failures(primes=(3, 5, 7), max_b=10, max_n=5):
    bad = 0
    for p in primes:
        for b in range(max_b + 1):
            for n in range(max_n + 1):
                M = Matrix(n + 1, n + 1, lambda j, m: comb(b + m * (p - 1), j))
                bad += (int(M.det()) - (p - 1) ** (n * (n + 1) // 2)) % p != 0
    return bad
