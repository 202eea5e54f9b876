"""Tests for src/poly.py: polynomials, truncated series, composition, jets, parsing."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import DimensionMismatch, NonzeroConstantTerm, UsageError
from exactfield import ExactField, parse_field
from poly import (
    Poly,
    PolyMap,
    TruncatedSeries,
    grevlex_key,
    jet2_at,
    monomials,
    parse_map,
    parse_point,
    parse_poly,
    series_compose,
    unit_exp,
)


def _random_poly(K: ExactField, n: int, rng: np.random.Generator, degree: int = 3, terms: int = 5) -> Poly:
    pool = monomials(n, degree)
    picks = rng.choice(len(pool), size=min(terms, len(pool)), replace=False)
    return Poly(K, n, [(pool[int(i)], K.random_element(rng)) for i in picks])


# ---------------------------------------------------------------------------
# Monomials
# ---------------------------------------------------------------------------

def test_monomials_count_and_order() -> None:
    mons = monomials(2, 2)
    assert len(mons) == 6
    assert mons[0] == (0, 0)
    assert sorted(mons, key=grevlex_key) == mons
    assert [sum(e) for e in mons] == sorted(sum(e) for e in mons)


def test_monomials_min_degree() -> None:
    assert monomials(3, 2, min_degree=2) == [e for e in monomials(3, 2) if sum(e) == 2]
    assert len(monomials(3, 2, min_degree=2)) == 6


def test_unit_exp() -> None:
    assert unit_exp(3, 1) == (0, 1, 0)
    assert unit_exp(2, 0, power=3) == (3, 0)


# ---------------------------------------------------------------------------
# Arithmetic
# ---------------------------------------------------------------------------

def test_zero_coefficients_are_dropped(F3: ExactField) -> None:
    f = Poly(F3, 1, [((1,), 1), ((1,), 2)])
    assert f.is_zero()


def test_exponent_length_checked(F3: ExactField) -> None:
    with pytest.raises(DimensionMismatch):
        Poly(F3, 2, [((1,), 1)])


def test_freshman_dream_in_char_p(F3: ExactField) -> None:
    x, y = Poly.variable(F3, 2, 0), Poly.variable(F3, 2, 1)
    assert (x + y).pow(3) == x.pow(3) + y.pow(3)


def test_degree_and_order(Q: ExactField) -> None:
    f = parse_poly("x0^2 + x0*x1^3", Q)
    assert f.degree() == 4
    assert f.order() == 2
    assert Poly.zero(Q, 2).degree() == -1
    assert Poly.zero(Q, 2).order() is None


def test_derivative_reduces_exponent_in_field(F3: ExactField) -> None:
    f = parse_poly("x0^3 + x0^2*x1", F3)
    assert f.derive(0) == parse_poly("2*x0*x1", F3, 2)
    with pytest.raises(DimensionMismatch):
        f.derive(2)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["Q", "F2", "F5", "F2^2"]), st.integers(0, 2 ** 32 - 1))
def test_product_rule(label: str, seed: int) -> None:
    K = parse_field(label)
    rng = np.random.default_rng(seed)
    f, g = _random_poly(K, 2, rng), _random_poly(K, 2, rng)
    for i in range(2):
        assert (f * g).derive(i) == f.derive(i) * g + f * g.derive(i)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["Q", "F3", "F2^2"]), st.integers(0, 2 ** 32 - 1))
def test_evaluation_is_a_ring_map(label: str, seed: int) -> None:
    K = parse_field(label)
    rng = np.random.default_rng(seed)
    f, g = _random_poly(K, 2, rng), _random_poly(K, 2, rng)
    pt = (K.random_element(rng), K.random_element(rng))
    assert (f * g).evaluate(pt) == K.mul(f.evaluate(pt), g.evaluate(pt))
    assert (f + g).evaluate(pt) == K.add(f.evaluate(pt), g.evaluate(pt))


def test_shift_is_taylor_expansion(F5: ExactField, rng: np.random.Generator) -> None:
    f = _random_poly(F5, 2, rng, degree=4, terms=8)
    x0 = (2, 3)
    g = f.shift(x0)
    for u in [(0, 0), (1, 4), (3, 3)]:
        assert g.evaluate(u) == f.evaluate((F5.add(2, u[0]), F5.add(3, u[1])))


def test_substitute_zero(Q: ExactField) -> None:
    f = parse_poly("x0 + x1 + x0*x1", Q)
    assert f.substitute_zero([1]) == parse_poly("x0", Q, 2)


# ---------------------------------------------------------------------------
# Truncated series
# ---------------------------------------------------------------------------

def test_truncated_series_drops_high_degree(Q: ExactField) -> None:
    s = TruncatedSeries(Q, 1, 3, [((2,), Fraction(1)), ((4,), Fraction(1))])
    assert s.terms == {(2,): 1}
    assert (s * s).is_zero()


def test_truncation_propagates_through_arithmetic(Q: ExactField) -> None:
    s = parse_poly("x0 + x0^2", Q).truncate(3)
    p = parse_poly("x0^2", Q)
    prod = s * p
    assert isinstance(prod, TruncatedSeries)
    assert prod.trunc_order == 3
    assert prod.terms == {(3,): 1}


def test_series_compose_matches_substitution(Q: ExactField) -> None:
    f = parse_poly("x0^2 + x0*x1", Q)
    subs = [parse_poly("x0 + x1^2", Q), parse_poly("x1", Q)]
    got = series_compose(f, subs, 3)
    assert got == parse_poly("x0^2 + 2*x0*x1^2 + x0*x1 + x1^3", Q).truncate(3)


def test_series_compose_rejects_constant_terms(Q: ExactField) -> None:
    f = parse_poly("x0", Q)
    with pytest.raises(NonzeroConstantTerm):
        series_compose(f, [parse_poly("1 + x0", Q)], 3)


def test_series_compose_is_associative(F3: ExactField, rng: np.random.Generator) -> None:
    N = 4
    f = _random_poly(F3, 2, rng, degree=4, terms=6)
    a = [_random_poly(F3, 2, rng, degree=3) for _ in range(2)]
    b = [_random_poly(F3, 2, rng, degree=3) for _ in range(2)]
    a = [p.sub(Poly.constant(F3, 2, p.constant_term())) for p in a]
    b = [p.sub(Poly.constant(F3, 2, p.constant_term())) for p in b]
    left = series_compose(series_compose(f, a, N), b, N)
    right = series_compose(f, [series_compose(p, b, N) for p in a], N)
    assert left == right


# ---------------------------------------------------------------------------
# Maps and jets
# ---------------------------------------------------------------------------

def test_jet2_of_quadratic_map(Q: ExactField) -> None:
    F = parse_map("x0^2 + x1; x0*x1", Q)
    jet = jet2_at(F, (Fraction(1), Fraction(2)))
    assert jet.value == (3, 2)
    assert jet.jacobian.to_rows() == [[2, 1], [2, 1]]
    assert jet.hessian[0].to_rows() == [[2, 0], [0, 0]]
    assert jet.hessian[1].to_rows() == [[0, 1], [1, 0]]


def test_map_components_must_agree(Q: ExactField) -> None:
    with pytest.raises(DimensionMismatch):
        PolyMap(Q, 2, (parse_poly("x0", Q, 1),))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def test_parse_reduces_coefficients(F3: ExactField) -> None:
    f = parse_poly("4*x0 - x1/2", F3)
    assert f.coefficient((1, 0)) == 1
    assert f.coefficient((0, 1)) == 1      # -1/2 = -2 = 1 mod 3


def test_parse_rejects_unknown_symbols(Q: ExactField) -> None:
    with pytest.raises(UsageError):
        parse_poly("x0 + y", Q)


def test_parse_rejects_non_polynomials(Q: ExactField) -> None:
    with pytest.raises(UsageError):
        parse_poly("1/x0", Q)


@pytest.mark.parametrize("label,text", [("F3", "x0^2/3"), ("F2", "x0 + x1/2"), ("F2^2", "x0/4")])
def test_parse_rejects_denominators_divisible_by_p(label: str, text: str) -> None:
    with pytest.raises(UsageError, match="no image"):
        parse_poly(text, parse_field(label))


def test_parse_point_rejects_denominators_divisible_by_p(F4: ExactField) -> None:
    with pytest.raises(UsageError):
        parse_point("1/3, 0", parse_field("F3"))
    with pytest.raises(UsageError):
        parse_point("t/2", F4)


def test_parse_point_in_extension(F4: ExactField) -> None:
    assert parse_point("0, t, t+1", F4) == (0, 2, 3)


def test_format_roundtrip(Q: ExactField) -> None:
    f = parse_poly("x0^3 - 2*x0*x1 + 5", Q)
    assert parse_poly(f.format(), Q, 2) == f
