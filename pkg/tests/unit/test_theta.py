"""Unit tests for theta sums, chi_sym and the theta closure algebra."""

import math
from fractions import Fraction

import pytest

from charlab.core.characters import MultiplicativeCharacter
from charlab.core.errors import InvalidPadding
from charlab.core.field import make_field
from charlab.dsl.parser import parse_node
from charlab.lab.theta import (
    BasicPredicate,
    PredicatePiece,
    SumPadding,
    check_padding,
    chi_sym,
    default_padding,
    kappa_eval,
    root_multiplicity,
    theta_combine,
    theta_eval,
)

TRIVIAL = MultiplicativeCharacter(0)


@pytest.fixture
def sqrt_theta(theta_program):
    return theta_program.get("theta").node


@pytest.fixture
def cbrt_theta(theta_program):
    return theta_program.get("other").node


class TestThetaEval:
    def test_values(self, f7, psi7, sqrt_theta):
        assert theta_eval(sqrt_theta, (f7.element(2),), f7, psi7, TRIVIAL) == pytest.approx(2)
        assert theta_eval(sqrt_theta, (f7.element(3),), f7, psi7, TRIVIAL) == 0

    def test_gauss_period(self, f7, psi7, cbrt_theta):
        """Test psi(1) + psi(2) + psi(4) = (-1 + i sqrt 7) / 2 over the cube roots of 1."""
        value = theta_eval(cbrt_theta, (f7.one,), f7, psi7, TRIVIAL)
        assert value == pytest.approx(complex(-0.5, math.sqrt(7) / 2))

    def test_kappa_eval(self, f7):
        spec = parse_node("kappa k 1 : y - x1 -> y + 1")
        assert kappa_eval(spec, (f7.element(2),), f7) == f7.element(3)

    def test_kappa_without_roots_is_zero(self, f7):
        spec = parse_node("kappa k 1 : y^2 - x1 -> y + 1")
        assert kappa_eval(spec, (f7.element(3),), f7) == f7.zero

    def test_kappa_disagreeing_roots_is_zero(self, f7):
        spec = parse_node("kappa k 1 : y^2 - x1 -> y")
        assert kappa_eval(spec, (f7.element(2),), f7) == f7.zero

    @pytest.mark.parametrize("p,e", [(7, 1), (11, 1), (3, 2)])
    @pytest.mark.parametrize("p_poly", ["y^2 - x1", "y^3 - x1", "y^2 + x1*y + 1"])
    @pytest.mark.parametrize("q_poly", ["y^4", "y^6 + x1", "x1*y^2 - 3"])
    def test_kappa_ignores_multiples_of_p(self, p, e, p_poly, q_poly):
        """Test Q and Q + c*P give the same kappa at every parameter."""
        desc = make_field(p, e)
        spec = parse_node(f"kappa k 1 : {p_poly} -> {q_poly}")
        for c in ("1", "x1", "y + 2", "x1*y^3 - 5"):
            shifted = parse_node(f"kappa k 1 : {p_poly} -> {q_poly} + ({c})*({p_poly})")
            assert shifted.q_poly != spec.q_poly
            for x in desc.elements():
                assert kappa_eval(shifted, (x,), desc) == kappa_eval(spec, (x,), desc)


class TestChiSym:
    """Test character sums over roots with multiplicity."""

    def test_double_root(self, f7, chi7):
        """Test x^2 + 5x + 1 = (x - 1)^2 over F_7."""
        assert chi_sym(2, (f7.element(5), f7.one), f7, chi7) == pytest.approx(2)

    def test_distinct_roots(self, f7):
        """Test x^2 - 2 has roots 3 and 4, quadratic character values -1 and 1."""
        assert chi_sym(2, (f7.zero, f7.element(-2)), f7, MultiplicativeCharacter(3)) == pytest.approx(0)

    def test_no_roots(self, f7, chi7):
        assert chi_sym(2, (f7.zero, f7.element(-3)), f7, chi7) == 0

    def test_coefficient_count(self, f7, chi7):
        with pytest.raises(ValueError, match="needs 2 coefficients"):
            chi_sym(2, (f7.one,), f7, chi7)

    def test_root_multiplicity(self, f7):
        cube = (f7.zero, f7.zero, f7.zero, f7.one)
        assert root_multiplicity(f7, cube, f7.zero) == 3
        assert root_multiplicity(f7, cube, f7.one) == 0


class TestCombine:
    """Test product, sum and conjugate of theta specs."""

    def test_product(self, f7, psi7, chi7, sqrt_theta, cbrt_theta):
        product = theta_combine("product", sqrt_theta, cbrt_theta)
        assert product.effective_bound == 6
        for x in f7.elements():
            expected = theta_eval(sqrt_theta, (x,), f7, psi7, chi7) * theta_eval(cbrt_theta, (x,), f7, psi7, chi7)
            assert abs(theta_eval(product, (x,), f7, psi7, chi7) - expected) < 1e-9

    def test_conjugate(self, f7, psi7, chi7, cbrt_theta):
        conjugate = theta_combine("conjugate", cbrt_theta)
        for x in f7.elements():
            expected = theta_eval(cbrt_theta, (x,), f7, psi7, chi7).conjugate()
            assert abs(theta_eval(conjugate, (x,), f7, psi7, chi7) - expected) < 1e-9

    def test_default_padding(self, sqrt_theta, cbrt_theta):
        padding = default_padding(sqrt_theta, cbrt_theta)
        assert padding == SumPadding(
            (Fraction(2),), (Fraction(1),), Fraction(0), Fraction(-1), Fraction(1, 2), Fraction(1)
        )
        assert padding.valid_mod(7)
        assert not padding.valid_mod(2)

    def test_sum(self, f7, psi7, chi7, sqrt_theta, cbrt_theta):
        total = theta_combine("sum", sqrt_theta, cbrt_theta, default_padding(sqrt_theta, cbrt_theta))
        assert total.effective_bound == 5
        assert total.dim == sqrt_theta.dim + cbrt_theta.dim + 2
        for x in f7.elements():
            expected = theta_eval(sqrt_theta, (x,), f7, psi7, chi7) + theta_eval(cbrt_theta, (x,), f7, psi7, chi7)
            assert abs(theta_eval(total, (x,), f7, psi7, chi7) - expected) < 1e-9

    def test_padding_must_separate(self, sqrt_theta, cbrt_theta):
        padding = SumPadding((Fraction(1),), (Fraction(1),), Fraction(0), Fraction(-1), Fraction(1), Fraction(1))
        with pytest.raises(InvalidPadding, match="must differ"):
            check_padding(sqrt_theta, cbrt_theta, padding)

    def test_padding_constraints(self, sqrt_theta, cbrt_theta):
        padding = SumPadding((Fraction(2),), (Fraction(1),), Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(1))
        with pytest.raises(InvalidPadding, match="g1"):
            check_padding(sqrt_theta, cbrt_theta, padding)

    def test_no_default_padding(self, cbrt_theta):
        with pytest.raises(InvalidPadding):
            default_padding(cbrt_theta, cbrt_theta)

    def test_sum_needs_padding(self, sqrt_theta, cbrt_theta):
        with pytest.raises(InvalidPadding):
            theta_combine("sum", sqrt_theta, cbrt_theta)

    def test_unknown_kind(self, sqrt_theta):
        with pytest.raises(ValueError, match="Unknown combination"):
            theta_combine("quotient", sqrt_theta, sqrt_theta)

    def test_second_spec_required(self, sqrt_theta):
        with pytest.raises(ValueError, match="two theta specs"):
            theta_combine("product", sqrt_theta)


class TestBasicPredicate:
    """Test piecewise theta combinations."""

    @pytest.fixture
    def predicate(self, sqrt_theta, cbrt_theta) -> BasicPredicate:
        zero = parse_node("formula z 1 : x1 = 0")
        units = parse_node("formula u 1 : x1 != 0")
        return BasicPredicate(
            (
                PredicatePiece(zero, Fraction(0), sqrt_theta, Fraction(0), cbrt_theta),
                PredicatePiece(units, Fraction(2), sqrt_theta, Fraction(1), cbrt_theta),
            )
        )

    def test_arity(self, predicate):
        assert predicate.arity == 1

    def test_values(self, f7, psi7, predicate):
        assert predicate.evaluate(f7, (f7.element(2),), psi7, TRIVIAL) == pytest.approx(4)
        expected = complex(4 - math.sqrt(7) / 2, -0.5)
        assert predicate.evaluate(f7, (f7.one,), psi7, TRIVIAL) == pytest.approx(expected)
        assert predicate.evaluate(f7, (f7.zero,), psi7, TRIVIAL) == 0

    def test_conjugate(self, f7, psi7, chi7, predicate):
        conjugate = predicate.conjugate()
        for x in f7.elements():
            expected = predicate.evaluate(f7, (x,), psi7, chi7).conjugate()
            assert abs(conjugate.evaluate(f7, (x,), psi7, chi7) - expected) < 1e-9

    def test_partition(self, f7, predicate):
        assert predicate.check_partition(f7) == [0, 1, 1, 1, 1, 1, 1]

    def test_overlapping_cells(self, f7, sqrt_theta):
        pieces = tuple(
            PredicatePiece(parse_node(src), Fraction(1), sqrt_theta, Fraction(0), sqrt_theta)
            for src in ("formula a 1 : x1 = 0", "formula b 1 : true")
        )
        with pytest.raises(ValueError, match="2 cells"):
            BasicPredicate(pieces).check_partition(f7)
