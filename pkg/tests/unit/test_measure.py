"""Unit tests for counting-measure fits, definable integration, Fubini checks and case decompositions."""

import math
from fractions import Fraction

import pytest

from charlab.core.characters import AdditiveCharacter, MultiplicativeCharacter, standard_character
from charlab.core.errors import ArityMismatch, InconsistentDimension, OrderTooLarge
from charlab.dsl.parser import parse_node
from charlab.lab.measure import (
    average_over,
    case_decompose,
    count_and_fit,
    count_points,
    coset_size,
    fit_counts,
    fubini_check,
    integrate_predicate,
    trace_coset_check,
)

PRIMES = [5, 7, 11, 13]
QUADRATIC = MultiplicativeCharacter(3)


@pytest.fixture
def everything():
    return parse_node("formula all 1 : true")


class TestCounting:
    """Test point counts and fitted sizes."""

    def test_count_squares(self, squares_program):
        counts = count_points(squares_program.get("phi").node, PRIMES)
        assert counts == [(5, 3), (7, 4), (11, 6), (13, 7)]

    def test_count_with_parameters(self):
        family = parse_node("formula fam 2 : x1^2 = x2")
        assert count_points(family, [7], params=(2,)) == [(7, 2)]
        assert count_points(family, [7], params=(3,)) == [(7, 0)]

    def test_count_extension_fields(self, squares_program):
        assert count_points(squares_program.get("phi").node, [3], extension=2) == [(9, 5)]

    def test_fit_squares(self):
        estimate = fit_counts([(5, 3), (7, 4), (11, 6), (13, 7)], free=1)
        assert estimate.d == 1
        assert estimate.mu == Fraction(1, 2)
        assert estimate.C == pytest.approx(0.5 / math.sqrt(5))
        assert not estimate.degenerate

    def test_mu_snaps_to_simplest_rational(self):
        estimate = fit_counts([(11, 6), (13, 7), (17, 9), (97, 49)], free=1)
        assert estimate.mu_raw == pytest.approx((9 / 17 + 49 / 97) / 2)
        assert Fraction(estimate.mu_raw).limit_denominator(64) != Fraction(1, 2)
        assert estimate.mu == Fraction(1, 2)

    def test_fit_as_dict(self):
        data = fit_counts([(5, 3), (7, 4), (11, 6), (13, 7)]).as_dict()
        assert (data["mu_num"], data["mu_den"]) == (1, 2)
        assert data["counts"][0] == [5, 3]

    def test_fit_hyperbola(self):
        estimate = count_and_fit(parse_node("formula hyp 2 : x1*x2 = 1"), PRIMES)
        assert estimate.d == 1
        assert estimate.mu == 1

    def test_fit_plane(self):
        estimate = count_and_fit(parse_node("formula plane 2 : true"), PRIMES)
        assert estimate.d == 2
        assert estimate.mu == 1
        assert estimate.C == 0.0

    def test_empty_family(self):
        estimate = fit_counts([(q, 0) for q in PRIMES])
        assert estimate.d == 0
        assert estimate.mu == 0
        assert estimate.degenerate

    def test_too_few_fields(self):
        with pytest.raises(ValueError, match="at least 4"):
            fit_counts([(5, 3), (7, 4), (11, 6)])
        with pytest.raises(ValueError, match="at least 4"):
            count_and_fit(parse_node("formula all 1 : true"), [5, 7, 11])

    def test_inconsistent_dimension(self):
        with pytest.raises(InconsistentDimension):
            fit_counts([(5, 1), (7, 1), (11, 1), (13, 169)])

    def test_dimension_capped_by_free_variables(self):
        estimate = fit_counts([(q, q * q) for q in PRIMES], free=1)
        assert estimate.d == 1


class TestIntegration:
    """Test averages of predicates over definable sets."""

    def test_average_of_squares_indicator(self, f7, psi7, chi7, squares_program, everything):
        value = average_over(squares_program.get("f").node, everything, f7, psi7, chi7)
        assert value.rational == Fraction(4, 7)
        assert value.size == 7

    def test_gauss_average_over_units(self, f7, psi7, chi7, gauss_program):
        pred, units = gauss_program.get("f").node, gauss_program.get("units").node
        value = average_over(pred, units, f7, psi7, chi7)
        assert abs(value.value) == pytest.approx(math.sqrt(7) / 6)
        assert value.rational is None

    def test_empty_domain(self, f7, psi7, chi7, gauss_program):
        empty = parse_node("formula none 1 : x1 = 0 and x1 = 1")
        value = average_over(gauss_program.get("f").node, empty, f7, psi7, chi7)
        assert value.size == 0
        assert value.value == 0j

    def test_numeric_predicate(self, f7, psi7, everything):
        pred = parse_node("predicate f 1 : abs(chi(x1) - 1)")
        value = average_over(pred, everything, f7, psi7, QUADRATIC)
        # chi(x) - 1 is 0 on the squares, -2 on the non-squares and -1 at zero
        assert value.value == pytest.approx((3 * 2 + 1) / 7)
        assert value.exact is None

    def test_arity(self, f7, psi7, chi7, gauss_program, elliptic_program):
        with pytest.raises(ArityMismatch):
            average_over(gauss_program.get("f").node, elliptic_program.get("curve").node, f7, psi7, chi7)

    def test_integrate_squares(self, squares_program, everything):
        report = integrate_predicate(squares_program.get("f").node, everything, PRIMES)
        assert [v.rational for v in report.values] == [Fraction(p + 1, 2 * p) for p in PRIMES]
        assert report.tail_max == pytest.approx(6 / 11)
        assert report.within_bound
        assert report.bound == 1

    def test_gauss_decay(self, gauss_program):
        pred, units = gauss_program.get("f").node, gauss_program.get("units").node
        report = integrate_predicate(pred, units, [11, 13, 17, 19, 23, 29, 31])
        for value in report.values:
            assert abs(value.value) == pytest.approx(math.sqrt(value.q) / (value.q - 1))
        assert report.slope == pytest.approx(-0.5, abs=0.15)

    def test_skipped_fields(self, gauss_program):
        pred, units = gauss_program.get("f").node, gauss_program.get("units").node
        report = integrate_predicate(pred, units, PRIMES, chi_rule="order=3")
        assert [v.q for v in report.values] == [7, 13]
        assert report.skipped == [5, 11]
        assert report.as_dict()["skipped"] == [5, 11]


class TestFubini:
    """Test direct against iterated averages."""

    def test_product_domain(self, f7, psi7, chi7, theta_program):
        report = fubini_check(
            theta_program.get("f").node, theta_program.get("box").node, 1, f7, psi7, chi7, program=theta_program
        )
        assert report.hypothesis_holds
        assert report.fiber_sizes == (6,) * 6
        assert report.delta == pytest.approx(0.0, abs=1e-12)

    def test_uneven_fibers(self, f7, psi7, chi7):
        pred = parse_node("predicate f 2 : psi(x1)")
        cross = parse_node("formula cross 2 : x1 = 0 or x2 = 0")
        report = fubini_check(pred, cross, 1, f7, psi7, chi7)
        assert not report.hypothesis_holds
        assert report.lhs == pytest.approx(6 / 13)
        assert report.rhs == pytest.approx(6 / 7)
        assert report.as_dict()["hypothesis"] is False

    @pytest.mark.parametrize("split", [0, 2])
    def test_split_range(self, f7, psi7, chi7, theta_program, split):
        with pytest.raises(ValueError, match="Split"):
            fubini_check(theta_program.get("f").node, theta_program.get("box").node, split, f7, psi7, chi7)


class TestCaseDecomposition:
    """Test character-value cells and their ring formulas."""

    def test_quadratic_cells(self, f7, psi7, gauss_program):
        pred, units = gauss_program.get("f").node, gauss_program.get("units").node
        report = case_decompose(pred, units, f7, psi7, QUADRATIC)
        assert report.order == 2
        assert len(report.cells) == 2
        assert sorted(len(c.points) for c in report.cells) == [3, 3]
        assert report.partition_ok
        assert report.all_match
        assert report.delta == pytest.approx(0.0, abs=1e-12)

    def test_order_too_large(self, f7, psi7, chi7, gauss_program):
        pred, units = gauss_program.get("f").node, gauss_program.get("units").node
        with pytest.raises(OrderTooLarge):
            case_decompose(pred, units, f7, psi7, chi7, max_order=4)

    def test_unknown_kind(self, f7, psi7, chi7, gauss_program):
        pred, units = gauss_program.get("f").node, gauss_program.get("units").node
        with pytest.raises(ValueError, match="Unknown decomposition kind"):
            case_decompose(pred, units, f7, psi7, chi7, kind="mixed")

    def test_trace_cosets_prime_field(self, f7, psi7):
        report = trace_coset_check(f7, psi7)
        assert len(report.cells) == 7
        assert all(len(c.points) == 1 for c in report.cells)
        assert report.all_match

    def test_trace_cosets_extension_field(self, f9):
        report = trace_coset_check(f9, standard_character(f9))
        assert len(report.cells) == 3
        assert all(len(c.points) == 3 for c in report.cells)
        assert report.all_match

    def test_coset_size(self, f7, f9, psi7):
        assert coset_size(f7, psi7) == 1
        assert coset_size(f9, standard_character(f9)) == 3
        assert coset_size(f9, AdditiveCharacter(f9.zero)) == 9
