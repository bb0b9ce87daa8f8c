from fractions import Fraction
from types import SimpleNamespace

from crysred.corpus import compare, parse_galois, parse_row


def _res(p, galois, delta, n, outcomes=()):
    return SimpleNamespace(galois=parse_galois(p, galois), delta=Fraction(delta), n_used=n,
                           outcomes=list(outcomes))


def test_parse_row():
    row = parse_row("5; 24; 2*5; ind w2^3; 2; 2; fast; F0=linear 0")
    assert (row.p, row.k, row.ap, row.delta, row.n, row.tag) == (5, 24, "2*5", 2, 2, "fast")


def test_delta_is_compared_at_table_radius():
    row = parse_row("5; 104; x; ind w2^7; 3; 4; slow")
    early = _res(5, "ind w2^7", 4, 3)
    assert compare(row, early) == ["delta 4 != 3"]
    assert compare(row, early, _res(5, "ind w2^7", 3, 4)) == []


def test_labels_compared_canonically():
    row = parse_row("5; 24; x; ind w2^22; 2; 2; fast")
    assert compare(row, _res(5, "ind w2^14", 2, 2)) == []


def test_larger_radius_is_reported():
    row = parse_row("5; 24; x; ind w2^3; 2; 2; fast")
    assert compare(row, _res(5, "ind w2^3", 2, 3)) == ["n 3 > 2"]
