"""T against a coset-sum oracle built from explicit 2x2 matrices (p = 3)."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from crysred.padic import PrimeContext, make_field
from crysred.tree import (
    ORIGIN,
    CarryRequired,
    InducedVector,
    ball_size,
    circle,
    enumerate_ball,
    hecke_T,
    parent,
    reindex_beta,
    t_minus,
    t_plus,
    w_vertex,
)

from oracles import N, P, Q, as_induced, coset_mismatches, locate, oracle_T, vertex_matrix

FLD = make_field(PrimeContext(P), (0, 1), N)
VERTS = enumerate_ball(P, 3)


def test_T_matches_coset_oracle():
    bad, total = coset_mismatches(4)
    assert total == sum((r + 1) * 5 for r in range(5)) and bad == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 4), st.sampled_from(enumerate_ball(P, 2)), st.data())
def test_T_oracle_random_polys(r, v, data):
    poly = data.draw(st.lists(st.integers(-20, 20), min_size=r + 1, max_size=r + 1))
    want = as_induced(r, FLD, oracle_T(r, vertex_matrix(v), [Fraction(c) for c in poly], VERTS))
    assert hecke_T(InducedVector.bracket(r, FLD, v, poly)) == want


def test_T_is_plus_and_minus():
    f = InducedVector.bracket(3, FLD, (0, (1, 2)), [1, 2, 0, 5])
    assert hecke_T(f) == t_plus(f) + t_minus(f)


def test_T_minus_a():
    f = InducedVector.bracket(2, FLD, ORIGIN, [1, 0, 4])
    assert hecke_T(f, 7) == hecke_T(f) - f.scaled(7)


def test_ball_sizes():
    for p in (2, 3, 5):
        for n in range(4):
            assert len(enumerate_ball(p, n)) == ball_size(p, n)
            assert len(set(enumerate_ball(p, n))) == ball_size(p, n)


def test_parents_in_previous_circle():
    for m in range(1, 4):
        for v in circle(P, m):
            assert parent(v) in circle(P, m - 1)


def test_matrices_are_distinct_cosets():
    verts = enumerate_ball(P, 3)
    for v in verts:
        assert locate(vertex_matrix(v), verts)[0] == v


def test_reindexing():
    f = InducedVector.bracket(2, FLD, (0, (1,)), [1, 2, 3])
    assert reindex_beta(reindex_beta(f)) == f
    assert w_vertex(w_vertex((0, (0, 2)))) == (0, (0, 2))
    with pytest.raises(CarryRequired):
        w_vertex((0, (1,)))


def test_induced_vector_drops_zeros():
    f = InducedVector.bracket(1, FLD, ORIGIN, [0, Q])
    assert f.is_zero()
    assert f.radius() == -1
