from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from crysred.apexpr import ParseError, evaluate, parse_ap
from crysred.padic import (
    NotASquare,
    NotEisenstein,
    PrimeContext,
    UnsupportedExtension,
    hensel_root,
    hensel_sqrt,
    is_prime,
    make_field,
    teichmuller_digits,
    vp,
)

PRIMES = [3, 5, 7, 11]


def test_is_prime_small():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_vp():
    assert vp(250, 5) == 3
    assert vp(-7, 7) == 1
    with pytest.raises(ValueError):
        vp(0, 3)


@pytest.mark.parametrize("p", PRIMES)
def test_teichmuller_lifts(p):
    N = 8
    q = p**N
    t = teichmuller_digits(PrimeContext(p), N)
    for d, x in enumerate(t):
        assert x % p == d
        assert pow(x, p, q) == x


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(PRIMES), st.integers(1, 10**6), st.integers(1, 20))
def test_hensel_sqrt(p, x, N):
    if x % p == 0:
        return
    u = x * x
    r = hensel_sqrt(PrimeContext(p), u, N)
    assert (r * r - u) % p**N == 0
    assert 1 <= r % p <= p // 2


def test_hensel_sqrt_p2():
    for u in (1, 9, 17, 33, 41):
        r = hensel_sqrt(PrimeContext(2), u, 12)
        assert (r * r - u) % 2**12 == 0 and r % 4 == 1


def test_non_square():
    with pytest.raises(NotASquare):
        hensel_sqrt(PrimeContext(5), 2, 4)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(PRIMES), st.integers(1, 10**4), st.sampled_from([2, 3, 4]))
def test_hensel_root(p, x, d):
    if x % p == 0 or d % p == 0:
        return
    u = x**d
    r = hensel_root(PrimeContext(p), u, d, 10)
    assert (pow(r, d, p**10) - u) % p**10 == 0


def test_eisenstein_checks():
    ctx = PrimeContext(5)
    with pytest.raises(NotEisenstein):
        make_field(ctx, (25, 0, 1), 4)
    with pytest.raises(NotEisenstein):
        make_field(ctx, (-5, 0, 2), 4)


ELEMS = st.lists(st.integers(-10**6, 10**6), min_size=2, max_size=2)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([3, 5, 7]), ELEMS, ELEMS, ELEMS)
def test_ramified_ring_axioms(p, a, b, c):
    fld = make_field(PrimeContext(p), (-p, 0, 1), 12)
    x, y, z = (fld.from_coeffs(t) for t in (a, b, c))
    assert fld.mul(x, fld.mul(y, z)) == fld.mul(fld.mul(x, y), z)
    assert fld.mul(x, fld.add(y, z)) == fld.add(fld.mul(x, y), fld.mul(x, z))
    assert fld.mul(x, y) == fld.mul(y, x)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([3, 5, 7]), ELEMS, ELEMS)
def test_ramified_valuation_multiplicative(p, a, b):
    fld = make_field(PrimeContext(p), (-p, 0, 1), 16)
    x, y = fld.from_coeffs(a), fld.from_coeffs(b)
    if fld.is_zero(x) or fld.is_zero(y):
        return
    vx, vy = fld.val(x), fld.val(y)
    if vx + vy < fld.M:
        assert fld.val(fld.mul(x, y)) == vx + vy


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([3, 5, 7]), ELEMS)
def test_unit_inverse(p, a):
    fld = make_field(PrimeContext(p), (-p, 0, 1), 10)
    u = fld.from_coeffs(a)
    if fld.is_zero(u) or fld.val(u) != 0:
        return
    assert fld.mul(u, fld.inverse(u)) == fld.one


def test_uniformizer_power():
    fld = make_field(PrimeContext(5), (-5, 0, 1), 10)
    assert fld.mul(fld.pi_power(1), fld.pi_power(1)) == fld.from_int(5)
    assert fld.val(fld.pi_power(3)) == 3


# ---- a_p expressions ------------------------------------------------------

def _sq(val):
    return val.element * val.element


@pytest.mark.parametrize("conj", [False, True])
def test_unramified_sqrt(conj):
    ctx = PrimeContext(5)
    val = evaluate("5*sqrt(11*21)", ctx, 10, conjugate=conj)
    assert val.field.e == 1
    assert _sq(val) == val.field.element(25 * 231)
    assert val.v == 1
    assert val.root_note == ("conjugate" if conj else "canonical")


def test_conjugate_is_negative():
    ctx = PrimeContext(5)
    a = evaluate("sqrt(11*21)", ctx, 8).element
    b = evaluate("sqrt(11*21)", ctx, 8, conjugate=True).element
    assert a + b == a.owner.element(0)


def test_ramified_sqrt():
    ctx = PrimeContext(5)
    val = evaluate("5*sqrt(5)*13*sqrt(7)", ctx, 8)
    assert val.field.e == 2
    assert val.v == Fraction(3, 2)
    assert _sq(val) == val.field.element(25 * 5 * 169 * 7)


def test_cube_root():
    ctx = PrimeContext(7)
    val = evaluate("7^2*root(7,3)", ctx, 8)
    assert val.field.e == 3
    assert val.v == Fraction(7, 3)
    assert val.element ** 3 == val.field.element(7**7)


def test_integer_expression():
    ctx = PrimeContext(5)
    val = evaluate("2*5+3*5^2-5^3", ctx, 6)
    assert val.element == val.field.element(10 + 75 - 125)
    assert val.v == 1


def test_perfect_square_root_is_exact():
    ctx = PrimeContext(5)
    a = evaluate("sqrt(36)", ctx, 6, conjugate=True).element
    assert a == a.owner.element(6)


def test_residue_extension_rejected():
    with pytest.raises(UnsupportedExtension):
        evaluate("sqrt(2)", PrimeContext(5), 6)


def test_two_ramified_classes_rejected():
    with pytest.raises(UnsupportedExtension):
        evaluate("sqrt(5)+sqrt(10)", PrimeContext(5), 6)


@pytest.mark.parametrize("bad", ["", "5*", "sqrt(", "5 $ 3", "root(7)"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_ap(bad)
