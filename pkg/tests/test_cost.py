"""Equation counts and the cost ratio between the two integration routes."""

from fractions import Fraction

import pytest

from casinv.cost import quadrature_cost


def test_three_dim_rank_two():
    r = quadrature_cost(3, 2)
    assert r.casimir_count == 1
    assert r.pfaffian_equations == 1
    assert r.classical_equations == 2
    assert r.ratio == Fraction(1, 2)


def test_six_dim_rank_four():
    r = quadrature_cost(6, 4)
    assert r.casimir_count == 2
    assert r.pfaffian_equations == 2
    assert r.classical_equations == 16
    assert r.ratio == Fraction(1, 8)


def test_ratio_below_one_for_all_degenerate_ranks():
    for n in range(3, 13):
        for rank in range(2, n, 2):
            r = quadrature_cost(n, rank)
            assert r.ratio is not None, (n, rank)
            assert r.ratio < 1, (n, rank)


def test_null_matrix_has_note_and_no_ratio():
    r = quadrature_cost(4, 0)
    assert r.ratio is None
    assert r.casimir_count == 4
    assert "null" in r.note


def test_full_rank_two_dim_degenerates():
    r = quadrature_cost(2, 2)
    assert r.ratio is None
    assert r.casimir_count == 0
    assert r.classical_equations == 0


def test_odd_rank_rejected():
    with pytest.raises(ValueError):
        quadrature_cost(5, 3)


def test_rank_above_dimension_rejected():
    with pytest.raises(ValueError):
        quadrature_cost(3, 4)


def test_nonpositive_dimension_rejected():
    with pytest.raises(ValueError):
        quadrature_cost(0, 0)


def test_counts_are_exact_fractions():
    r = quadrature_cost(9, 6)
    assert r.ratio == Fraction(3, 42)
    assert isinstance(r.ratio, Fraction)
