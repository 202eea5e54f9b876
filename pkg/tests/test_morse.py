"""Tests for src/morse.py: automorphisms, Milnor numbers, normal forms."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import (NonzeroConstant, NotCertifiedFinite, NotTruncatable, OrderTooLow,
                    PreconditionViolated, TargetTooBig, WrongCorank)
from exactfield import ExactField, parse_field
from morse import (
    LocalAutomorphism,
    corank1_normal_form,
    determinacy_bound,
    milnor,
    monomial_text,
    morse_with_params,
    quad_normal_form,
    right_equiv_truncated,
    verify_normal_form,
)
from poly import Poly, monomials, parse_map, parse_poly, unit_exp


def _random_quadratic(K: ExactField, n: int, rng: np.random.Generator) -> Poly:
    return Poly(K, n, [(e, K.random_element(rng)) for e in monomials(n, 2, 2)])


# ---------------------------------------------------------------------------
# Local automorphisms
# ---------------------------------------------------------------------------

def test_inverse_composes_to_identity(Q: ExactField) -> None:
    N = 5
    phi = LocalAutomorphism.from_images(Q, [parse_poly("x0 + x1^2", Q, 2), parse_poly("x1 + x0^3", Q, 2)], N)
    psi = phi.inverse()
    assert phi.followed_by(psi) == LocalAutomorphism.identity(Q, 2, N)


def test_followed_by_applies_left_first(F3: ExactField) -> None:
    N = 4
    phi = LocalAutomorphism.from_images(F3, [parse_poly("x0 + x1^2", F3, 2), parse_poly("x1", F3, 2)], N)
    psi = LocalAutomorphism.from_images(F3, [parse_poly("2*x0", F3, 2), parse_poly("x1 + x0^2", F3, 2)], N)
    f = parse_poly("x0^2 + x0*x1 + x1^3", F3)
    assert phi.followed_by(psi).apply(f) == psi.apply(phi.apply(f))


def test_validity(Q: ExactField) -> None:
    N = 3
    singular = LocalAutomorphism.from_images(Q, [parse_poly("x1^2", Q, 2), parse_poly("x0", Q, 2)], N)
    assert not singular.is_valid()
    with pytest.raises(PreconditionViolated):
        singular.validate()
    moves_param = LocalAutomorphism.from_images(
        Q, [parse_poly("x0 + x1^2", Q, 2), parse_poly("x1", Q, 2)], N, fixed_prefix=1)
    assert not moves_param.is_valid()
    LocalAutomorphism.identity(Q, 2, N, fixed_prefix=2).validate()


def test_composition_checks_arity(Q: ExactField) -> None:
    with pytest.raises(PreconditionViolated):
        LocalAutomorphism.identity(Q, 2, 3).followed_by(LocalAutomorphism.identity(Q, 3, 3))


def test_monomial_text() -> None:
    assert monomial_text((2, 0, 1)) == "x0^2*x2"
    assert monomial_text((0, 0)) == "1"


# ---------------------------------------------------------------------------
# Milnor numbers
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("label,text,mu,r,basis", [
    ("Q", "x0^2 + x1^3", 2, 2, ["1", "x1"]),
    ("Q", "x0^3 - x1^2", 2, 2, ["1", "x0"]),
    ("F2", "x0^3 + x1^3", 4, 3, ["1", "x0", "x1", "x0*x1"]),
    ("F5", "x0^2 + x1^2 + x2^2", 1, 1, ["1"]),
])
def test_milnor_examples(label: str, text: str, mu: int, r: int, basis: list[str]) -> None:
    rep = milnor(parse_poly(text, parse_field(label)))
    assert rep.certified
    assert rep.mu == mu
    assert rep.r == r
    assert sorted(rep.to_dict()["monomial_basis"]) == sorted(basis)


def test_determinacy_bound(Q: ExactField) -> None:
    assert determinacy_bound(parse_poly("x0^2 + x1^3", Q)) == 4


def test_non_isolated_singularity_is_not_certified(Q: ExactField) -> None:
    f = parse_poly("x0^2", Q, 2)
    rep = milnor(f, N_max=5)
    assert not rep.certified
    assert rep.to_dict()["mu"] == "not certified"
    with pytest.raises(NotCertifiedFinite):
        determinacy_bound(f, N_max=5)


def test_frobenius_square_has_no_jacobian_in_char2(F2: ExactField) -> None:
    assert not milnor(parse_poly("x0^2 + x1^2", F2), N_max=4).certified


def test_milnor_rejects_constants(Q: ExactField) -> None:
    with pytest.raises(NonzeroConstant):
        milnor(parse_poly("1 + x0^2", Q))


# ---------------------------------------------------------------------------
# Quadratic normal forms
# ---------------------------------------------------------------------------

def _check_quad(f: Poly, N: int = 4) -> None:
    quad = quad_normal_form(f, N)
    quad.phi.validate()
    residue = quad.phi.apply(f).sub(quad.q)
    if quad.extra_square:
        assert residue == Poly(f.field, f.nvars, {unit_exp(f.nvars, quad.extra_var, 2): f.field.one}).truncate(N)
    else:
        assert residue.is_zero()


def test_hyperbolic_plane_over_q(Q: ExactField) -> None:
    f = parse_poly("x0*x1", Q)
    quad = quad_normal_form(f)
    assert quad.rank == 2
    assert quad.coefficients == [1, -1]
    assert not quad.closed_field_shape
    _check_quad(f)


def test_rationals_use_squarefree_coefficients(Q: ExactField) -> None:
    quad = quad_normal_form(parse_poly("8*x0^2 + x1^2/3", Q))
    assert sorted(quad.coefficients) == [2, 3]


def test_odd_finite_field_pairs_non_squares(F3: ExactField) -> None:
    # 2 is a non-square mod 3; two of them become two 1s
    quad = quad_normal_form(parse_poly("2*x0^2 + 2*x1^2", F3))
    assert quad.coefficients == [1, 1]
    assert quad.closed_field_shape
    _check_quad(parse_poly("2*x0^2 + 2*x1^2", F3))


def test_anisotropic_plane_over_f2(F2: ExactField) -> None:
    f = parse_poly("x0^2 + x0*x1 + x1^2", F2)
    quad = quad_normal_form(f)
    assert quad.rank == 2
    assert quad.pair_types == ["anisotropic"]
    assert not quad.closed_field_shape
    _check_quad(f)


def test_same_plane_is_hyperbolic_over_f4(F4: ExactField) -> None:
    f = parse_poly("x0^2 + x0*x1 + x1^2", F4)
    quad = quad_normal_form(f)
    assert quad.pair_types == ["hyperbolic"]
    assert quad.q == parse_poly("x0*x1", F4).truncate(quad.phi.trunc_order)
    _check_quad(f)


def test_char2_radical_collapses_to_one_square(F2: ExactField) -> None:
    f = parse_poly("x0^2 + x1^2 + x2^2", F2)
    phi, rk, extra = quad_normal_form(f)
    assert rk == 0 and extra
    _check_quad(f)


def test_quad_normal_form_rejects_linear_terms(Q: ExactField) -> None:
    with pytest.raises(OrderTooLow):
        quad_normal_form(parse_poly("x0 + x1^2", Q))
    with pytest.raises(OrderTooLow):
        quad_normal_form(parse_poly("1 + x0^2", Q))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["Q", "F2", "F3", "F5", "F2^2", "F3^2"]), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_random_quadratic_forms_normalise(label: str, n: int, seed: int) -> None:
    K = parse_field(label)
    _check_quad(_random_quadratic(K, n, np.random.default_rng(seed)))


# ---------------------------------------------------------------------------
# Morse's lemma with parameters
# ---------------------------------------------------------------------------

def test_morse_with_one_parameter(Q: ExactField) -> None:
    f = parse_poly("x1^2 + x0*x1^3", Q)
    split = morse_with_params(f, 1, 6)
    assert split.q_vars == (1,)
    assert split.q == parse_poly("x1^2", Q).truncate(6)
    assert 1 not in split.h.variables()
    assert split.verify(f)


def test_morse_without_parameters_over_f3(F3: ExactField) -> None:
    f = parse_poly("x0^2 + x1^2 + x0^3 + x0*x1^2 + x1^4", F3)
    split = morse_with_params(f, 0, 5)
    assert split.verify(f)
    assert split.h.is_zero() or not (split.h.variables() & set(split.q_vars))


def test_morse_in_char2_with_pair_and_square(F2: ExactField) -> None:
    f = parse_poly("x1*x2 + x3^2 + x0*x1^2 + x0^2*x2^3 + x1*x3^3", F2)
    split = morse_with_params(f, 1, 6)
    assert split.q_vars == (1, 2)
    assert split.quad.extra_square
    assert split.verify(f)


def test_morse_rejects_low_truncation(Q: ExactField) -> None:
    with pytest.raises(NotTruncatable):
        morse_with_params(parse_poly("x0^2", Q), 0, 1)
    with pytest.raises(PreconditionViolated):
        morse_with_params(parse_poly("x0^2", Q), 3, 4)


# ---------------------------------------------------------------------------
# Right-equivalence
# ---------------------------------------------------------------------------

def test_right_equivalence_removes_high_order_perturbation(Q: ExactField) -> None:
    f = parse_poly("x0^2 + x1^3", Q)
    g = f.add(parse_poly("x0*x1^4", Q))
    phi = right_equiv_truncated(f, g, 6)
    assert phi is not None
    assert phi.apply(g) == f.truncate(6)


def test_right_equivalence_identity(F3: ExactField) -> None:
    f = parse_poly("x0^2 + x1^3", F3)
    assert right_equiv_truncated(f, f, 5) == LocalAutomorphism.identity(F3, 2, 5)


def test_right_equivalence_needs_high_order(Q: ExactField) -> None:
    f = parse_poly("x0^2 + x1^3", Q)
    with pytest.raises(PreconditionViolated):
        right_equiv_truncated(f, f.add(parse_poly("x1^4", Q)), 6)


def test_right_equivalence_needs_finite_mu(Q: ExactField) -> None:
    f = parse_poly("x0^2", Q, 2)
    with pytest.raises(NotCertifiedFinite):
        right_equiv_truncated(f, f, 4, N_max=4)


@pytest.mark.parametrize("label", ["Q", "F5", "F7"])
def test_right_equivalence_in_three_variables(label: str) -> None:
    K = parse_field(label)
    f = parse_poly("x0^2 + x1^2 + x2^3", K, 3)
    report = milnor(f)
    assert (report.mu, report.r) == (2, 2)
    assert determinacy_bound(f) == 4
    g = f.add(parse_poly("x0*x2^4 + x1^5 + 2*x2^5", K, 3))
    phi = right_equiv_truncated(f, g, 6)
    assert phi is not None
    assert phi.apply(g) == f.truncate(6)


def test_morse_bound_is_sharp_in_three_variables(Q: ExactField) -> None:
    f = parse_poly("x0^2 + x1^2 + x2^2", Q, 3)
    assert determinacy_bound(f) == 2
    # changing the 2-jet loses isolatedness, so f is not right-equivalent to it
    assert not milnor(f.add(parse_poly("-x2^2", Q, 3)), N_max=4).certified
    # anything from order 3 on is absorbed
    g = f.add(parse_poly("x0*x1*x2 + x2^3 + x1^4", Q, 3))
    phi = right_equiv_truncated(f, g, 4)
    assert phi is not None
    assert phi.apply(g) == f.truncate(4)


# ---------------------------------------------------------------------------
# Corank-1 normal form
# ---------------------------------------------------------------------------

def test_function_normal_form(Q: ExactField) -> None:
    F = parse_map("x0^2 + x1^3", Q)
    rep = corank1_normal_form(F, (Fraction(0), Fraction(0)), 6)
    assert rep.j == 1
    assert rep.q == parse_poly("x0^2", Q, 2).truncate(6)
    assert verify_normal_form(rep)


def test_cusp_map_normal_form(Q: ExactField) -> None:
    F = parse_map("x0; x1^3 + x0*x1", Q)
    rep = corank1_normal_form(F, (Fraction(0), Fraction(0)), 6)
    assert rep.reordering == [0, 1]
    assert rep.j == 1
    assert rep.quad.rank == 0
    assert verify_normal_form(rep)
    assert rep.to_dict()["verified"] is True


def test_fold_at_shifted_point_keeps_constants(Q: ExactField) -> None:
    F = parse_map("x0; x1^2 + 3", Q)
    rep = corank1_normal_form(F, (Fraction(1), Fraction(0)), 4)
    assert rep.j == 0
    assert rep.constants == (1, 3)
    assert rep.h.constant_term() == 3
    assert verify_normal_form(rep)


def test_normal_form_over_f3_with_mixed_parameters(F3: ExactField) -> None:
    F = parse_map("x0 + x1^2; x1*x2 + x2^2 + x0*x2 + x1^3", F3)
    rep = corank1_normal_form(F, (0, 0, 0), 5)
    assert verify_normal_form(rep)


def test_normal_form_errors(Q: ExactField) -> None:
    with pytest.raises(TargetTooBig):
        corank1_normal_form(parse_map("x0; x0^2", Q, 1), (Fraction(0),))
    with pytest.raises(WrongCorank):
        corank1_normal_form(parse_map("x0; x1", Q), (Fraction(0), Fraction(0)))
