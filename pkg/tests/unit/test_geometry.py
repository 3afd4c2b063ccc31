"""Unit tests for point enumeration and containment searches."""

import pytest

from charlab.core.errors import BudgetExceeded
from charlab.dsl.parser import parse_node
from charlab.lab.geometry import (
    AffineVariety,
    PointSet,
    containment_search,
    enumerate_points,
    fixed_vector_holds,
    height_vectors,
    lang_weil_check,
)

LINE = "formula line 2 : x2 = 2*x1 + 1"
HYPERBOLA = "formula hyp 2 : x1*x2 = 1"


def variety(source: str) -> AffineVariety:
    return AffineVariety.from_formula(parse_node(source))


@pytest.fixture
def elliptic(elliptic_program) -> AffineVariety:
    return AffineVariety.from_formula(elliptic_program.get("curve").node, dimension=1)


class TestAffineVariety:
    def test_from_formula(self):
        V = variety(LINE)
        assert V.ambient_dim == 2
        assert len(V.equations) == 1

    def test_disjunction_is_rejected(self):
        with pytest.raises(ValueError, match="conjunctions"):
            variety("formula f 2 : x1 = 0 or x2 = 0")

    def test_equation_arity_checked(self):
        eq = parse_node("poly p 1 : x1")
        with pytest.raises(ValueError):
            AffineVariety((eq,), 2)

    def test_contains(self, f7):
        V = variety(LINE)
        assert V.contains(f7, (f7.element(1), f7.element(3)))
        assert not V.contains(f7, (f7.element(1), f7.element(4)))


class TestEnumeration:
    """Test enumerate_points strategies."""

    def test_elliptic_curve(self, f7, elliptic):
        pts = enumerate_points(elliptic, f7)
        assert len(pts) == 7
        assert pts.points[0] == (f7.zero, f7.zero)

    def test_nonzero_part_drops_origin(self, f7, elliptic):
        pts = enumerate_points(elliptic, f7)
        assert len(pts.nonzero_part) == 6
        assert not pts.is_zero_degenerate

    def test_points_sorted_by_encoding(self, f7, elliptic):
        pts = enumerate_points(elliptic, f7)
        keys = [tuple(f7.encode(x) for x in pt) for pt in pts]
        assert keys == sorted(keys)

    def test_fiberwise_matches_full_scan(self, f7, elliptic):
        assert enumerate_points(elliptic, f7, budget=48) == enumerate_points(elliptic, f7)

    def test_budget(self, f7, elliptic):
        with pytest.raises(BudgetExceeded):
            enumerate_points(elliptic, f7, budget=5)

    def test_affine_space(self, f7):
        assert len(enumerate_points(AffineVariety.affine_space(2), f7)) == 49

    def test_extension_field(self, f9):
        pts = enumerate_points(variety(HYPERBOLA), f9)
        assert len(pts) == 8
        assert all(f9.mul(x, y) == f9.one for x, y in pts)

    def test_parameter_count(self, f7, elliptic):
        with pytest.raises(ValueError, match="parameters"):
            enumerate_points(elliptic, f7, (f7.one,))

    def test_as_array(self, f7):
        pts = enumerate_points(variety(LINE), f7)
        arr = pts.as_array()
        assert arr.shape == (7, 2)
        assert ((2 * arr[:, 0] + 1 - arr[:, 1]) % 7 == 0).all()

    def test_zero_degenerate(self, f7):
        pts = enumerate_points(variety("formula axis 2 : x1 = 0"), f7)
        assert pts.is_zero_degenerate


class TestContainment:
    """Test hyperplane and coset searches."""

    def test_height_vectors(self):
        assert list(height_vectors(2, 1)) == [(0, 1), (1, -1), (1, 0), (1, 1)]

    def test_height_vectors_are_primitive_up_to_sign(self):
        vectors = list(height_vectors(3, 2))
        assert len(vectors) == len(set(vectors))
        assert all(next(v for v in vec if v) > 0 for vec in vectors)

    def test_line_in_hyperplane(self, f7):
        pts = enumerate_points(variety(LINE), f7)
        witness = containment_search(pts, 2)
        assert witness is not None
        assert witness.vector == (2, -1)
        assert witness.value == f7.element(6)

    def test_line_needs_height_two(self, f7):
        pts = enumerate_points(variety(LINE), f7)
        assert containment_search(pts, 1) is None

    def test_hyperbola_in_coset(self, f7):
        pts = enumerate_points(variety(HYPERBOLA), f7)
        witness = containment_search(pts, 1, mode="coset")
        assert witness is not None
        assert witness.vector == (1, 1)
        assert witness.value == f7.one

    def test_coset_rejects_zero_coordinates(self, f7, elliptic):
        with pytest.raises(ValueError, match="nonzero"):
            containment_search(enumerate_points(elliptic, f7), 1, mode="coset")

    def test_empty_point_set(self, f7):
        with pytest.raises(ValueError, match="nonempty"):
            containment_search(PointSet((), f7, 2), 1)

    def test_unknown_mode(self, f7):
        pts = enumerate_points(variety(LINE), f7)
        with pytest.raises(ValueError, match="Unknown containment mode"):
            containment_search(pts, 1, mode="sphere")

    def test_fixed_vector(self, f7):
        pts = enumerate_points(variety(LINE), f7)
        assert fixed_vector_holds(pts, (2, -1), "hyperplane")
        assert not fixed_vector_holds(pts, (1, 0), "hyperplane")
        hyp = enumerate_points(variety(HYPERBOLA), f7)
        assert fixed_vector_holds(hyp, (1, 1), "coset")
        assert not fixed_vector_holds(hyp, (1, -1), "coset")

    def test_extension_hyperplane(self, f9):
        pts = enumerate_points(variety("formula diag 2 : x1 = x2"), f9)
        witness = containment_search(pts, 1)
        assert witness is not None
        assert witness.vector == (1, -1)
        assert witness.value == f9.zero


class TestLangWeil:
    def test_elliptic_count(self, f7, elliptic):
        report = lang_weil_check(elliptic, f7, constant=1.0)
        assert report.count == 7
        assert report.deviation == 0.0
        assert report.within is True

    def test_without_constant(self, f13, elliptic):
        report = lang_weil_check(elliptic, f13)
        assert report.within is None
        assert report.deviation <= 2.0

    def test_surfaces_rejected(self, f7):
        V = AffineVariety.from_formula(parse_node(LINE), dimension=2)
        with pytest.raises(ValueError, match="curves"):
            lang_weil_check(V, f7)
