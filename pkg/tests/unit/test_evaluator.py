"""Unit tests for formula, theta, kappa and predicate evaluation."""

import cmath
import math
from fractions import Fraction

import pytest

from charlab.core.characters import MultiplicativeCharacter
from charlab.core.errors import ArityMismatch, BudgetExceeded, CapExceeded, FiberBoundExceeded, UnresolvedReference
from charlab.dsl.evaluator import (
    PredicateEvaluator,
    eval_formula,
    eval_predicate,
    formula_points,
    is_exact,
    kappa_value,
    laurent_exact,
    polynomial_roots,
    predicate_bound,
    split_laurent_monomials,
    theta_exact,
    theta_fiber,
)
from charlab.dsl.parser import parse_node, parse_source

TRIVIAL = MultiplicativeCharacter(0)
QUADRATIC = MultiplicativeCharacter(3)


def elems(desc, *values):
    return tuple(desc.element(v) for v in values)


class TestFormulas:
    """Test truth values and point enumeration."""

    def test_squares_in_f7(self, f7, squares_program):
        phi = squares_program.get("phi").node
        assert formula_points(f7, phi) == [elems(f7, v) for v in (0, 1, 2, 4)]

    def test_squares_in_f9(self, f9, squares_program):
        phi = squares_program.get("phi").node
        assert len(formula_points(f9, phi)) == 5

    def test_elliptic_points(self, f7, elliptic_program):
        curve = elliptic_program.get("curve").node
        points = formula_points(f7, curve)
        assert len(points) == 7
        assert elems(f7, 0, 0) in points
        assert elems(f7, 1, 3) in points and elems(f7, 1, 4) in points

    def test_eval_formula(self, f7, elliptic_program):
        curve = elliptic_program.get("curve").node
        assert eval_formula(f7, curve, elems(f7, 5, 2))
        assert not eval_formula(f7, curve, elems(f7, 2, 1))

    def test_eval_formula_arity(self, f7, elliptic_program):
        with pytest.raises(ArityMismatch):
            eval_formula(f7, elliptic_program.get("curve").node, elems(f7, 1))

    def test_parameters_fix_trailing_variables(self, f7):
        phi = parse_node("formula phi 2 : x1^2 = x2")
        assert formula_points(f7, phi, elems(f7, 2)) == [elems(f7, 3), elems(f7, 4)]

    def test_connectives_on_extension_field(self, f9):
        phi = parse_node("formula phi 2 : x1 = 0 or (x2 = 1 and not (x1 = 1))")
        points = formula_points(f9, phi)
        # 9 points with x1 = 0, plus 7 with x2 = 1 and x1 outside {0, 1}
        assert len(points) == 16

    def test_budget(self, f7, elliptic_program):
        with pytest.raises(BudgetExceeded):
            formula_points(f7, elliptic_program.get("curve").node, budget=10)

    def test_scan_cap(self, f7, squares_program):
        with pytest.raises(CapExceeded):
            formula_points(f7, squares_program.get("phi").node, scan_cap=5)

    def test_no_free_variables(self, f7):
        phi = parse_node("formula phi 1 : x1 = 0")
        with pytest.raises(ArityMismatch):
            formula_points(f7, phi, elems(f7, 0))


class TestPolynomialRoots:
    def test_prime_field(self, f7):
        assert polynomial_roots(f7, elems(f7, -2, 0, 1)) == list(elems(f7, 3, 4))

    def test_zero_polynomial(self, f7):
        assert len(polynomial_roots(f7, elems(f7, 0))) == 7

    def test_extension_field(self, f9):
        """Test X^2 + 1 has the roots X and 2X in F_9."""
        roots = polynomial_roots(f9, (f9.one, f9.zero, f9.one))
        assert sorted(f9.encode(r) for r in roots) == [3, 6]


class TestTheta:
    """Test fibers and exact theta values."""

    def test_fiber(self, f7, theta_program):
        spec = theta_program.get("theta").node
        assert theta_fiber(f7, spec, elems(f7, 2)) == [elems(f7, 3), elems(f7, 4)]
        assert theta_fiber(f7, spec, elems(f7, 3)) == []

    def test_trivial_chi_counts_fiber(self, f7, psi7, theta_program):
        spec = theta_program.get("theta").node
        assert theta_exact(f7, spec, elems(f7, 2), psi7, TRIVIAL).rational() == 2

    def test_quadratic_chi_cancels(self, f7, psi7, theta_program):
        """Test chi(3) + chi(4) = -1 + 1 for the quadratic character."""
        spec = theta_program.get("theta").node
        assert theta_exact(f7, spec, elems(f7, 2), psi7, QUADRATIC).is_zero()

    def test_fiber_bound(self, f7):
        spec = parse_node("theta t 1 : fiber {root z^2 - x1} g [0] h [1] bound 1")
        with pytest.raises(FiberBoundExceeded):
            theta_fiber(f7, spec, elems(f7, 2))

    def test_constant_component(self, f7):
        spec = parse_node("theta t 1 : fiber {root z - x1, const 1/2} g [0, 0] h [0, 0]")
        assert theta_fiber(f7, spec, elems(f7, 5)) == [elems(f7, 5, 4)]

    def test_arity(self, f7, theta_program):
        with pytest.raises(ArityMismatch):
            theta_fiber(f7, theta_program.get("theta").node, elems(f7, 1, 2))


class TestKappa:
    def test_single_root(self, f7):
        spec = parse_node("kappa k 1 : y - x1 -> y + 1")
        assert kappa_value(f7, spec, elems(f7, 2)) == f7.element(3)

    def test_disagreeing_values(self, f7):
        spec = parse_node("kappa k 1 : y^2 - x1 -> y")
        assert kappa_value(f7, spec, elems(f7, 2)) == f7.zero

    def test_agreeing_values(self, f7):
        spec = parse_node("kappa k 1 : y^2 - x1 -> y^2")
        assert kappa_value(f7, spec, elems(f7, 2)) == f7.element(2)

    def test_no_roots(self, f7):
        spec = parse_node("kappa k 1 : y^2 - x1 -> y + 1")
        assert kappa_value(f7, spec, elems(f7, 3)) == f7.zero


class TestPredicates:
    """Test predicate values."""

    def test_gauss_term(self, f7, psi7, chi7, gauss_program):
        pred = gauss_program.get("f").node
        value = eval_predicate(f7, pred, elems(f7, 3), psi7, chi7, gauss_program)
        expected = cmath.exp(2j * math.pi * (Fraction(3, 7) + Fraction(1, 6)))
        assert abs(value - expected) < 1e-12

    def test_chi_of_zero(self, f7, psi7, chi7, gauss_program):
        pred = gauss_program.get("f").node
        assert eval_predicate(f7, pred, elems(f7, 0), psi7, chi7, gauss_program) == 0

    def test_indicator(self, f7, psi7, chi7, squares_program):
        pred = squares_program.get("f").node
        assert eval_predicate(f7, pred, elems(f7, 2), psi7, chi7) == 1
        assert eval_predicate(f7, pred, elems(f7, 3), psi7, chi7) == 0

    def test_linear_map_row(self, f7, psi7, chi7):
        program = parse_source("linmap a 2 : [[1, 2], [0, -1]]\npredicate m 2 : psi(@a[2])")
        value = eval_predicate(f7, program.get("m").node, elems(f7, 1, 1), psi7, chi7, program)
        assert abs(value - cmath.exp(2j * math.pi / 7)) < 1e-12

    def test_multiplicative_map_row(self, f7, psi7):
        program = parse_source("multmap b 2 : [[1, 1], [0, -1]]\npredicate m 2 : chi(@b[2])")
        # second column x1 * x2^-1 = 3 * 5^-1 = 2, chi_quadratic(2) = 1
        value = eval_predicate(f7, program.get("m").node, elems(f7, 3, 5), psi7, QUADRATIC, program)
        assert abs(value - 1) < 1e-12

    def test_theta_reference(self, f7, psi7, theta_program):
        evaluator = PredicateEvaluator(f7, psi7, TRIVIAL, theta_program)
        pred = theta_program.get("f").node
        # psi(2 + 1) * chi_trivial(2) + |fiber over 2|
        expected = cmath.exp(2j * math.pi * 3 / 7) + 2
        assert abs(evaluator.evaluate(pred, elems(f7, 2, 1)) - expected) < 1e-12

    def test_abs_is_numeric_only(self, f7, psi7):
        pred = parse_node("predicate f 1 : abs(chi(x1) - 1)")
        assert not is_exact(pred)
        assert eval_predicate(f7, pred, elems(f7, 3), psi7, QUADRATIC) == pytest.approx(2)
        evaluator = PredicateEvaluator(f7, psi7, QUADRATIC)
        with pytest.raises(ValueError):
            evaluator.exact(pred.root, elems(f7, 3))

    def test_conjugate_and_imaginary_unit(self, f7, psi7, chi7):
        pred = parse_node("predicate f 1 : conj(i) + 1/2")
        assert eval_predicate(f7, pred, elems(f7, 1), psi7, chi7) == pytest.approx(0.5 - 1j)

    def test_unresolved_reference_at_evaluation(self, f7, psi7, chi7, theta_program):
        pred = theta_program.get("f").node
        with pytest.raises(UnresolvedReference):
            eval_predicate(f7, pred, elems(f7, 1, 1), psi7, chi7)

    def test_arity(self, f7, psi7, chi7, gauss_program):
        with pytest.raises(ArityMismatch):
            eval_predicate(f7, gauss_program.get("f").node, elems(f7, 1, 2), psi7, chi7)

    def test_bound(self, theta_program, gauss_program):
        assert predicate_bound(theta_program.get("f").node, theta_program) == 3
        assert predicate_bound(gauss_program.get("f").node) == 1
        assert predicate_bound(parse_node("predicate f 1 : 2*psi(x1) - 1/3")) == Fraction(7, 3)


class TestLaurent:
    """Test Laurent polynomials on the torus."""

    def test_cancellation(self):
        h = parse_node("laurent h 2 : Y1 Z2 + Y1^-1 Z2^-1")
        assert laurent_exact(h, [Fraction(1, 4), 0], [0, 0]).is_zero()

    def test_value_at_origin(self):
        h = parse_node("laurent h 2 : Y1 Z2 + Y1^-1 Z2^-1")
        assert laurent_exact(h, [0, 0], [0, 0]).rational() == 2

    def test_arity(self):
        h = parse_node("laurent h 2 : Y1 Z2")
        with pytest.raises(ArityMismatch):
            laurent_exact(h, [0], [0])

    def test_split(self):
        split = split_laurent_monomials(parse_node("laurent h 1 : Y1 Z1 + Y1^-1 Z1^-1"))
        assert split.real_on_torus
        assert len(split.terms) == 2
        for coeff, part in split.terms:
            assert coeff == 1
            assert part.plus_part == part.times_part
        assert not split_laurent_monomials(parse_node("laurent h 1 : Y1 Z1")).real_on_torus
