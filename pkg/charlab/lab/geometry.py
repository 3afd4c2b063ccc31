"""Point enumeration on affine varieties and containment in hyperplanes and multiplicative cosets."""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import BudgetExceeded
from ..core.field import FieldDescriptor, FieldElement
from ..dsl.ast import And, BoolConst, DefinableFormula, Eq, PolyExpr, apply_linear_form, apply_monomial
from ..dsl.evaluator import polynomial_roots

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**8
# points per vectorized block in prime-field scans
_GRID_BLOCK = 2**20

Point = Tuple[FieldElement, ...]


@dataclass(frozen=True)
class AffineVariety:
    """Common zeros of equations in x1..xn; parameter slots follow the n coordinates."""

    equations: Tuple[PolyExpr, ...]
    ambient_dim: int
    param_arity: int = 0
    dimension: Optional[int] = None

    def __post_init__(self) -> None:
        arity = self.ambient_dim + self.param_arity
        for eq in self.equations:
            if eq.arity != arity:
                raise ValueError(
                    f"Equation arity {eq.arity} does not match ambient {self.ambient_dim} + {self.param_arity}"
                )

    @classmethod
    def from_formula(cls, formula: DefinableFormula, dimension: Optional[int] = None) -> "AffineVariety":
        """Variety of a formula that is a conjunction of equations."""
        equations = formula.equations()
        if equations is None:
            raise ValueError("Only conjunctions of equations define an affine variety")
        return cls(tuple(equations), formula.arity, 0, dimension)

    @classmethod
    def affine_space(cls, n: int) -> "AffineVariety":
        return cls((), n)

    def as_formula(self) -> DefinableFormula:
        if not self.equations:
            return DefinableFormula(BoolConst(True), self.ambient_dim)
        atoms = tuple(Eq(eq) for eq in self.equations)
        return DefinableFormula(atoms[0] if len(atoms) == 1 else And(atoms), self.ambient_dim)

    def contains(
        self, desc: FieldDescriptor, point: Sequence[FieldElement], params: Sequence[FieldElement] = ()
    ) -> bool:
        full = tuple(point) + tuple(params)
        return all(eq.evaluate(desc, full).is_zero() for eq in self.equations)


@dataclass(frozen=True)
class PointSet:
    """F_q-rational points, sorted by coordinate encodings."""

    points: Tuple[Point, ...]
    desc: FieldDescriptor = field(compare=False)
    dim: int = 0

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Point]:
        return iter(self.points)

    @property
    def nonzero_part(self) -> "PointSet":
        """The points with every coordinate nonzero (C' in the notation of the hypothesis checks)."""
        return PointSet(tuple(pt for pt in self.points if not any(x.is_zero() for x in pt)), self.desc, self.dim)

    @property
    def is_zero_degenerate(self) -> bool:
        return len(self.nonzero_part) == 0

    def as_array(self) -> np.ndarray:
        """Coordinate encodings as an (N, dim) int64 array."""
        return np.array([[self.desc.encode(x) for x in pt] for pt in self.points], dtype=np.int64).reshape(
            len(self.points), self.dim
        )


def _sort_points(desc: FieldDescriptor, points: List[Point]) -> Tuple[Point, ...]:
    return tuple(sorted(points, key=lambda pt: tuple(desc.encode(x) for x in pt)))


def _scan_prime(V: AffineVariety, p: int, params: Sequence[int]) -> List[Point]:
    n = V.ambient_dim
    inner = max(1, min(n, int(math.log(_GRID_BLOCK) / math.log(p))))
    grid = np.indices((p,) * inner).reshape(inner, -1)
    size = grid.shape[1]
    found: List[Point] = []
    for prefix in itertools.product(range(p), repeat=n - inner):
        coords = [np.full(size, v, dtype=np.int64) for v in prefix] + list(grid)
        coords += [np.full(size, v, dtype=np.int64) for v in params]
        mask = np.ones(size, dtype=bool)
        for eq in V.equations:
            mask &= eq.evaluate_array(p, coords) == 0
        for column in grid[:, mask].T:
            found.append(tuple(FieldElement((v,)) for v in prefix) + tuple(FieldElement((int(v),)) for v in column))
    return found


def _scan_extension(V: AffineVariety, desc: FieldDescriptor, params: Point) -> List[Point]:
    elements = list(desc.elements())
    return [pt for pt in itertools.product(elements, repeat=V.ambient_dim) if V.contains(desc, pt, params)]


def _scan_fibers(V: AffineVariety, desc: FieldDescriptor, params: Point) -> List[Point]:
    last = V.ambient_dim - 1
    solving = [eq for eq in V.equations if eq.degree_in(last) > 0]
    elements = list(desc.elements())
    found: List[Point] = []
    for prefix in itertools.product(elements, repeat=last):
        candidates: Optional[List[FieldElement]] = None
        for eq in solving:
            coeffs = eq.univariate(desc, last, prefix + (desc.zero,) + params)
            if any(not c.is_zero() for c in coeffs):
                candidates = polynomial_roots(desc, coeffs)
                break
        for x in elements if candidates is None else candidates:
            pt = prefix + (x,)
            if V.contains(desc, pt, params):
                found.append(pt)
    return found


def enumerate_points(
    V: AffineVariety, desc: FieldDescriptor, params: Sequence[FieldElement] = (), budget: int = DEFAULT_BUDGET
) -> PointSet:
    """All F_q-points of V at the given parameters.

    Scans F_q^n when q^n fits the budget, otherwise solves the last coordinate fiber by fiber.

    Raises:
        BudgetExceeded: neither strategy fits the budget
    """
    params = tuple(params)
    if len(params) != V.param_arity:
        raise ValueError(f"Variety expects {V.param_arity} parameters, got {len(params)}")
    n = V.ambient_dim
    candidates = desc.q**n
    if candidates <= budget:
        if desc.e == 1:
            raw = _scan_prime(V, desc.p, [x.coeffs[0] for x in params])
        else:
            raw = _scan_extension(V, desc, params)
    elif any(eq.degree_in(n - 1) > 0 for eq in V.equations) and desc.q ** (n - 1) <= budget:
        logger.debug("Fiberwise enumeration over F_%s (%d prefixes)", desc.label, desc.q ** (n - 1))
        raw = _scan_fibers(V, desc, params)
    else:
        raise BudgetExceeded(f"{candidates} candidates over F_{desc.label} exceed the budget {budget}")
    points = _sort_points(desc, raw)
    _verify(V, desc, points, params)
    return PointSet(points, desc, n)


def _verify(V: AffineVariety, desc: FieldDescriptor, points: Sequence[Point], params: Point) -> None:
    if not points or not V.equations:
        return
    if desc.e == 1:
        p = desc.p
        arr = np.array([[x.coeffs[0] for x in pt] for pt in points], dtype=np.int64)
        coords = list(arr.T) + [np.full(len(points), x.coeffs[0], dtype=np.int64) for x in params]
        for eq in V.equations:
            if np.any(eq.evaluate_array(p, coords)):
                raise AssertionError("Enumerated point violates a defining equation")
        return
    for pt in points:
        if not V.contains(desc, pt, params):
            raise AssertionError(f"Enumerated point {pt} violates a defining equation")


# containment


@dataclass(frozen=True)
class ContainmentWitness:
    """sum s_i x_i = value (hyperplane) or prod x_i^{s_i} = value (coset) on every point."""

    mode: str
    vector: Tuple[int, ...]
    value: FieldElement


def height_vectors(n: int, m: int) -> Iterator[Tuple[int, ...]]:
    """Nonzero integer vectors with entries in [-m, m] and positive first nonzero entry, by height."""
    for height in range(1, m + 1):
        for vec in itertools.product(range(-height, height + 1), repeat=n):
            if max(abs(v) for v in vec) != height:
                continue
            first = next(v for v in vec if v)
            if first > 0:
                yield vec


def containment_search(pts: PointSet, m: int, mode: str = "hyperplane") -> Optional[ContainmentWitness]:
    """Search for a rational hyperplane or multiplicative coset of height <= m containing every point.

    Args:
        pts: Nonempty point set
        m: Height bound on the integer vector
        mode: "hyperplane" or "coset"; coset mode needs all coordinates nonzero

    Returns:
        The first witness in height order, or None
    """
    if mode not in ("hyperplane", "coset"):
        raise ValueError(f"Unknown containment mode '{mode}'")
    if not pts.points:
        raise ValueError("Containment search needs a nonempty point set")
    if mode == "coset":
        if any(x.is_zero() for pt in pts for x in pt):
            raise ValueError("Coset containment needs all coordinates nonzero")
        return _coset_search(pts, m)
    return _hyperplane_search(pts, m)


def _hyperplane_search(pts: PointSet, m: int) -> Optional[ContainmentWitness]:
    desc = pts.desc
    first = pts.points[0]
    if desc.e == 1:
        arr = pts.as_array()
        for s in height_vectors(pts.dim, m):
            values = arr @ np.array(s, dtype=np.int64) % desc.p
            if np.all(values == values[0]):
                return ContainmentWitness("hyperplane", s, FieldElement((int(values[0]),)))
        return None
    for s in height_vectors(pts.dim, m):
        value = apply_linear_form(desc, s, first)
        if all(apply_linear_form(desc, s, pt) == value for pt in pts.points[1:]):
            return ContainmentWitness("hyperplane", s, value)
    return None


def _coset_search(pts: PointSet, m: int) -> Optional[ContainmentWitness]:
    desc = pts.desc
    order = desc.q - 1
    logs = np.array([[desc.dlog(x) for x in pt] for pt in pts.points], dtype=np.int64)
    for t in height_vectors(pts.dim, m):
        values = logs @ np.array(t, dtype=np.int64) % order
        if np.all(values == values[0]):
            return ContainmentWitness("coset", t, apply_monomial(desc, t, pts.points[0]))
    return None


def fixed_vector_holds(pts: PointSet, vector: Sequence[int], mode: str) -> bool:
    """True when all points share the value of the given linear form (or monomial)."""
    if not pts.points:
        return True
    desc = pts.desc
    if mode == "hyperplane":
        first = apply_linear_form(desc, vector, pts.points[0])
        return all(apply_linear_form(desc, vector, pt) == first for pt in pts.points)
    first = apply_monomial(desc, vector, pts.points[0])
    return all(apply_monomial(desc, vector, pt) == first for pt in pts.points)


@dataclass(frozen=True)
class LangWeilReport:
    q: int
    count: int
    deviation: float
    within: Optional[bool] = None


def lang_weil_check(
    V: AffineVariety, desc: FieldDescriptor, constant: Optional[float] = None, budget: int = DEFAULT_BUDGET
) -> LangWeilReport:
    """Point count of a curve and its deviation |count - q| / sqrt(q)."""
    if V.dimension not in (None, 1):
        raise ValueError("Lang-Weil check applies to curves")
    count = len(enumerate_points(V, desc, budget=budget))
    deviation = abs(count - desc.q) / math.sqrt(desc.q)
    within = None if constant is None else deviation <= constant
    return LangWeilReport(desc.q, count, deviation, within)
