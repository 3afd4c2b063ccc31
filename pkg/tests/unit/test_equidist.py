"""Unit tests for torus discrepancy, the ETK bound, exponent searches and witness searches."""

from fractions import Fraction

import pytest

from charlab.core.errors import IndependencePrecheckFailed, NoPrimesFound, NotIrreducible
from charlab.core.primes import prime_range
from charlab.dsl.parser import parse_node
from charlab.lab.equidist import (
    ETKParams,
    ExponentFailure,
    ExponentResult,
    TorusBox,
    TorusSequence,
    WitnessRecord,
    angle_order,
    check_irreducible,
    circular_distance,
    discrepancy,
    discrepancy_mode,
    etk_bound,
    exponent_search,
    failure_horizon,
    independence_relation,
    split_roots,
    verify_witness,
    witness_search,
)

F = Fraction


def brute_force_exponent(gammas, box, R, f, K, l_max):
    for exponent in range(f, l_max + 1, R):
        point = tuple((exponent * g) % 1 for g in gammas)
        if box.contains(point) and max(angle_order(x) for x in point) >= K:
            return exponent
    return None


class TestAngles:
    def test_angle_order(self):
        assert angle_order(F(3, 6)) == 2
        assert angle_order(F(5, 4)) == 4
        assert angle_order(F(0)) == 1

    def test_circular_distance(self):
        assert circular_distance(F(1, 10), F(9, 10)) == F(1, 5)
        assert circular_distance(F(1, 4), F(1, 4)) == 0


class TestTorus:
    """Test sequences and boxes."""

    def test_sequence_validation(self):
        with pytest.raises(ValueError, match="outside"):
            TorusSequence.of([(F(1),)])
        with pytest.raises(ValueError, match="at least one point"):
            TorusSequence.of([])
        with pytest.raises(ValueError, match="dimension"):
            TorusSequence(2, ((F(0),),))

    def test_multiples_are_exact(self):
        X = TorusSequence.multiples([F(1, 3)], 3)
        assert X.points == ((F(1, 3),), (F(2, 3),), (F(0),))
        assert X.is_exact

    def test_kronecker(self):
        X = TorusSequence.kronecker([0.25], 4)
        assert [pt[0] for pt in X.points] == [0.25, 0.5, 0.75, 0.0]
        assert not X.is_exact

    def test_box_around_wraps(self):
        box = TorusBox.around([F(0)], F(1, 10))
        assert box.volume == F(1, 5)
        assert box.contains([F(19, 20)])
        assert box.contains([F(1, 10)])
        assert not box.contains([F(1, 2)])

    def test_half_open_box(self):
        box = TorusBox((F(0),), (F(1, 2),))
        assert box.contains([F(0)])
        assert not box.contains([F(1, 2)])

    def test_large_radius_is_full(self):
        assert TorusBox.around([F(1, 3), F(1, 5)], F(1, 2)) == TorusBox.full(2)
        assert TorusBox.full(2).volume == 1

    def test_box_bounds(self):
        with pytest.raises(ValueError):
            TorusBox((F(0),), (F(3, 2),))
        with pytest.raises(ValueError):
            TorusBox((F(0),), (F(1), F(1)))


class TestDiscrepancy:
    """Test discrepancy and the ETK bound."""

    def test_two_points(self):
        assert discrepancy(TorusSequence.of([(F(0),), (F(1, 2),)])) == F(1, 2)
        assert discrepancy(TorusSequence.of([(F(1, 4),), (F(3, 4),)])) == F(1, 2)

    def test_multiples_of_one_third(self):
        assert discrepancy(TorusSequence.multiples([F(1, 3)], 3)) == F(1, 3)

    def test_single_point_in_the_square(self):
        X = TorusSequence.of([(0.5, 0.5)])
        assert discrepancy_mode(X) == "exact"
        assert discrepancy(X) == pytest.approx(1.0)

    def test_grid_mode(self):
        X = TorusSequence.kronecker([0.41421356237309503, 0.7320508075688772], 50)
        assert discrepancy_mode(X, exact_max_points=10) == "grid"
        exact = discrepancy(X)
        grid = discrepancy(X, exact_max_points=10, grid_resolution=16)
        assert 0 < grid <= exact + 1e-12

    def test_etk_single_point(self):
        assert etk_bound(TorusSequence.of([(F(0),)]), ETKParams(1)) == pytest.approx(4.5)
        assert etk_bound(TorusSequence.of([(0.0, 0.0)]), ETKParams(1)) == pytest.approx(20.25)

    def test_etk_configured_constant(self):
        assert ETKParams(4, 2.0).constant(3) == 2.0
        assert ETKParams(4).constant(2) == 2.25

    @pytest.mark.parametrize("H", [1, 4, 16])
    def test_etk_dominates_kronecker(self, H):
        X = TorusSequence.kronecker([0.41421356237309503], 200)
        assert float(discrepancy(X)) <= etk_bound(X, ETKParams(H))

    def test_etk_params(self):
        with pytest.raises(ValueError):
            ETKParams(0)
        with pytest.raises(ValueError):
            ETKParams(2, -1.0)


class TestExponentSearch:
    """Test the smallest-exponent search."""

    def test_one_fifth(self):
        result = exponent_search([F(1, 5)], TorusBox.around([F(0)], F(1, 10)))
        assert isinstance(result, ExponentResult)
        assert result.l == 5
        assert result.orders == (1,)

    def test_minimum_order_fails(self):
        result = exponent_search([F(1, 5)], TorusBox.around([F(0)], F(1, 10)), K=2, l_max=100)
        assert isinstance(result, ExponentFailure)
        assert result.horizon is None
        assert result.as_dict() == {"found": False, "l_max": 100, "horizon": None}

    def test_precheck(self):
        with pytest.raises(IndependencePrecheckFailed) as exc_info:
            exponent_search([F(1, 2)], TorusBox.full(1))
        assert exc_info.value.relation == (2,)

    def test_residue_range(self):
        with pytest.raises(ValueError, match="Residue"):
            exponent_search([F(1, 7)], TorusBox.full(1), R=3, f=0)

    def test_box_dimension(self):
        with pytest.raises(ValueError, match="dimension"):
            exponent_search([F(1, 7)], TorusBox.full(2))

    @pytest.mark.parametrize("R,f,K", [(1, 1, 1), (3, 2, 1), (2, 1, 77)])
    def test_matches_brute_force(self, R, f, K):
        gammas = [F(1, 7), F(3, 11)]
        box = TorusBox.around([F(1, 2), F(1, 2)], F(1, 10))
        expected = brute_force_exponent(gammas, box, R, f, K, 500)
        result = exponent_search(gammas, box, R, f, K, l_max=500)
        if expected is None:
            assert isinstance(result, ExponentFailure)
        else:
            assert isinstance(result, ExponentResult)
            assert result.l == expected
            assert result.l % R == f % R

    def test_independence_relation(self):
        assert independence_relation([F(1, 3), F(2, 3)], 2) == (1, 1)
        assert independence_relation([F(1, 7), F(3, 11)], 2) is None

    def test_failure_horizon_is_finite_for_irrational_like_steps(self):
        horizon = failure_horizon([F(1, 10007)], TorusBox.around([F(1, 2)], F(1, 4)), 1)
        assert horizon is not None and horizon > 0


class TestWitness:
    """Test split primes and witness searches."""

    def test_split_roots(self):
        poly = parse_node("witness w 2 : minpoly X^2 - 2").min_poly
        assert split_roots(poly, 7) == [3, 4]
        assert split_roots(poly, 5) is None
        assert split_roots(poly, 2) is None

    def test_split_roots_linear(self):
        poly = parse_node("witness w 1 : minpoly X - 3").min_poly
        assert split_roots(poly, 7) == [3]

    def test_reducible(self):
        with pytest.raises(NotIrreducible):
            check_irreducible(parse_node("witness w 2 : minpoly X^2 - 4").min_poly)

    def test_search_rejects_reducible(self):
        spec = parse_node("witness w 2 : minpoly X^2 - 4 mult X -> 1/3")
        with pytest.raises(NotIrreducible):
            witness_search(spec, [7, 11])

    def test_no_split_primes(self, sqrt2_program):
        with pytest.raises(NoPrimesFound):
            witness_search(sqrt2_program.get("sqrt2").node, [3, 5, 11, 13])

    def test_sqrt2_records(self, sqrt2_program):
        spec = sqrt2_program.get("sqrt2").node
        records = witness_search(spec, prime_range(3, 5000), max_records=2)
        assert 1 <= len(records) <= 2
        for record in records:
            assert record.verified
            assert record.p % 8 in (1, 7)
            assert record.root**2 % record.p == 2
            assert record.multiplicative_exponent % 2 == 1
            assert record.order >= 50
            assert all(circular_distance(a, t.angle) <= F(1, 20) for a, t in zip(record.mult_angles, spec.mult_targets))

    def test_additive_target(self):
        spec = parse_node("witness w 1 : minpoly X - 3 add X -> 1/2 tolerance 1/10")
        records = witness_search(spec, [7, 11], max_records=1)
        assert len(records) == 1
        record = records[0]
        assert (record.p, record.root, record.additive_exponent) == (7, 3, 1)
        assert record.add_angles == (F(3, 7),)
        assert record.verified

    def test_verify_rejects_wrong_root(self, sqrt2_program):
        spec = sqrt2_program.get("sqrt2").node
        assert not verify_witness(spec, WitnessRecord(7, 5, 1, 1, (), (), 6, False))

    def test_record_as_dict(self):
        record = WitnessRecord(7, 3, 1, 5, (F(1, 3),), (), 6, True)
        data = record.as_dict()
        assert data["mult_angles"] == ["1/3"]
        assert data["verified"] is True
