"""Tests for src/jets.py: linear systems and order-2 separation."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from errors import DimensionMismatch, EmptySample, UsageError
from exactfield import ExactField
from jets import (
    jet_coordinates,
    jet_space_dim,
    monomial_system,
    parse_system,
    random_points,
    sample_member,
    separates_order2,
)
from poly import parse_map


def test_jet_space_dim() -> None:
    assert jet_space_dim(2, 1) == 6
    assert jet_space_dim(2, 2) == 12
    assert jet_space_dim(3, 1) == 10


def test_monomial_system_dimension(Q: ExactField) -> None:
    W = monomial_system(Q, 2, 2, 2)
    assert W.dim == 12
    assert W.source_dim == 2 and W.target_dim == 2


def test_parse_system(F3: ExactField) -> None:
    assert parse_system("monomials(2, 1, 3)", F3).dim == 10
    with pytest.raises(UsageError):
        parse_system("quadrics(2)", F3)


def test_jet_coordinates_keep_square_terms_in_char2(F2: ExactField) -> None:
    F = parse_map("x0^2", F2)
    # (1 + u)^2 = 1 + u^2 over F2; the Hessian vanishes but u^2 survives
    assert jet_coordinates(F, (1,)) == (1, 0, 1)


def test_quadratic_monomials_separate(any_field: ExactField, rng: np.random.Generator) -> None:
    W = monomial_system(any_field, 2, 1, 2)
    pts = random_points(any_field, 2, 4, rng)
    assert separates_order2(W, pts).verdict


def test_linear_monomials_do_not_separate(Q: ExactField) -> None:
    W = monomial_system(Q, 2, 1, 1)
    rep = separates_order2(W, [(Fraction(0), Fraction(0))])
    assert not rep.verdict
    assert rep.points[0]["rank"] == 3
    assert rep.to_dict()["jet_dim"] == 6


def test_separation_needs_points(Q: ExactField) -> None:
    with pytest.raises(EmptySample):
        separates_order2(monomial_system(Q, 1, 1, 2), [])


def test_separation_checks_point_dimension(Q: ExactField) -> None:
    with pytest.raises(DimensionMismatch):
        separates_order2(monomial_system(Q, 2, 1, 2), [(Fraction(1),)])


def test_sample_member_is_reproducible(F5: ExactField) -> None:
    W = monomial_system(F5, 2, 2, 2)
    assert sample_member(W, 7) == sample_member(W, 7)


def test_combine_checks_length(F5: ExactField) -> None:
    W = monomial_system(F5, 1, 1, 2)
    with pytest.raises(DimensionMismatch):
        W.combine([1, 2])
