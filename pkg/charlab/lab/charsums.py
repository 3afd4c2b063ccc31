"""Character sums over varieties, the Weil-bound scan, the axiom-(4) inequality and the density probe."""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

from ..core.characters import (
    AdditiveCharacter,
    MultiplicativeCharacter,
    angles_to_complex,
    chi_eval,
    psi_eval,
    resolve_chi,
    resolve_psi,
)
from ..core.errors import ArityMismatch, HasConstantTerm, NotRealValued
from ..core.field import DEFAULT_DLOG_CAP, FieldDescriptor, make_field
from ..dsl.ast import IntegralLinearMap, IntegralMultiplicativeMap, LaurentPoly, PolyExpr
from ..dsl.evaluator import laurent_exact, split_laurent_monomials
from .geometry import (
    DEFAULT_BUDGET,
    AffineVariety,
    ContainmentWitness,
    Point,
    PointSet,
    containment_search,
    enumerate_points,
    fixed_vector_holds,
)
from .runner import map_fields

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CharSumReport:
    q: int
    sum: complex
    point_count: int
    psi_constant: bool
    chi_constant: bool
    excluded: bool = False

    @property
    def abs(self) -> float:
        return abs(self.sum)

    @property
    def normalized(self) -> float:
        return self.abs / math.sqrt(self.q)

    @property
    def flags(self) -> str:
        names = [n for n, on in (("psi_constant", self.psi_constant), ("chi_constant", self.chi_constant)) if on]
        return "|".join(names)

    def as_row(self) -> Dict[str, object]:
        return {
            "q": self.q,
            "re": self.sum.real,
            "im": self.sum.imag,
            "abs": self.abs,
            "normalized": self.normalized,
            "flags": self.flags,
            "pass": not self.excluded,
        }


def char_sum(
    C: AffineVariety,
    g: PolyExpr,
    h: PolyExpr,
    psi: AdditiveCharacter,
    chi: MultiplicativeCharacter,
    desc: FieldDescriptor,
    params: Sequence = (),
    budget: int = DEFAULT_BUDGET,
) -> CharSumReport:
    """Sum of Psi(g(x)) chi(h(x)) over the points of C with all coordinates nonzero.

    Args:
        C: Variety in n coordinates
        g: Additive argument, arity n
        h: Multiplicative argument, arity n
        psi: Additive character
        chi: Multiplicative character
        desc: Field

    Returns:
        CharSumReport with constancy flags over the points summed
    """
    for poly in (g, h):
        if poly.arity != C.ambient_dim:
            raise ArityMismatch(f"Sum argument of arity {poly.arity} on a variety in {C.ambient_dim} variables")
    points = enumerate_points(C, desc, params, budget).nonzero_part.points
    terms: List[Tuple[Fraction, int]] = []
    psi_angles = set()
    chi_values = set()
    for pt in points:
        a = psi_eval(desc, psi, g.evaluate(desc, pt))
        c = chi_eval(desc, chi, h.evaluate(desc, pt))
        psi_angles.add(a)
        chi_values.add(c)
        if c.angle is not None:
            terms.append((a.fraction + c.angle.fraction, 1))
    total = angles_to_complex(terms)
    return CharSumReport(desc.q, total, len(points), len(psi_angles) <= 1, len(chi_values) <= 1)


@dataclass
class WeilScanResult:
    reports: List[CharSumReport] = field(default_factory=list)
    skipped: List[int] = field(default_factory=list)

    @property
    def max_normalized(self) -> float:
        included = [r.normalized for r in self.reports if not r.excluded]
        return max(included, default=0.0)


def _scan_one(
    size: Tuple[int, int],
    C: AffineVariety,
    g: PolyExpr,
    h: PolyExpr,
    psi_rule: str,
    chi_rule: str,
    order_floor: int,
    budget: int,
    dlog_cap: int,
) -> Optional[CharSumReport]:
    p, e = size
    desc = make_field(p, e, dlog_cap=dlog_cap)
    chi = resolve_chi(desc, chi_rule, order_floor)
    if chi is None:
        return None
    report = char_sum(C, g, h, resolve_psi(desc, psi_rule), chi, desc, budget=budget)
    excluded = report.point_count == 0 or report.psi_constant or report.chi_constant
    if excluded:
        logger.debug("Excluding q=%d from the Weil scan (degenerate on its points)", desc.q)
        return CharSumReport(report.q, report.sum, report.point_count, report.psi_constant, report.chi_constant, True)
    return report


def weil_scan(
    C: AffineVariety,
    g: PolyExpr,
    h: PolyExpr,
    primes: Sequence[int],
    psi_rule: str = "standard",
    chi_rule: str = "generator",
    order_floor: int = 1,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    dlog_cap: int = DEFAULT_DLOG_CAP,
    extension: int = 1,
) -> WeilScanResult:
    """char_sum at every prime (or prime power p^extension) with the characters named by the rules.

    Fields without a character for chi_rule are skipped. Fields where either factor is constant on the
    points are reported but excluded from max_normalized.
    """
    sizes = [(p, extension) for p in primes]
    work = partial(
        _scan_one,
        C=C,
        g=g,
        h=h,
        psi_rule=psi_rule,
        chi_rule=chi_rule,
        order_floor=order_floor,
        budget=budget,
        dlog_cap=dlog_cap,
    )
    result = WeilScanResult()
    for (p, e), report in zip(sizes, map_fields(work, sizes, workers)):
        if report is None:
            result.skipped.append(p**e)
        else:
            result.reports.append(report)
    logger.info("Weil scan over %d fields: max normalized %.6f", len(result.reports), result.max_normalized)
    return result


# axiom (4)


@dataclass(frozen=True)
class TermHypothesis:
    """Conditions (+) and (x) for one Laurent term."""

    coefficient: Fraction
    plus_part: Tuple[int, ...]
    times_part: Tuple[int, ...]
    plus_holds: bool
    times_holds: bool

    @property
    def holds(self) -> bool:
        return self.plus_holds or self.times_holds


@dataclass(frozen=True)
class Axiom4Report:
    q: int
    point_count: int
    sup_value: float
    average: float
    rhs_bound: float
    s: float
    terms: Tuple[TermHypothesis, ...]
    height: int
    hyperplane_witness: Optional[ContainmentWitness]
    coset_witness: Optional[ContainmentWitness]
    passed: bool

    @property
    def hypothesis_holds(self) -> bool:
        return self.point_count > 0 and all(t.holds for t in self.terms)

    def as_row(self) -> Dict[str, object]:
        return {
            "q": self.q,
            "points": self.point_count,
            "sup": self.sup_value,
            "average": self.average,
            "rhs": self.rhs_bound,
            "hypothesis": self.hypothesis_holds,
            "pass": self.passed,
        }


def torus_image(
    desc: FieldDescriptor, psi: AdditiveCharacter, chi: MultiplicativeCharacter, point: Point
) -> Tuple[List[Fraction], List[Fraction]]:
    """Angles of Psi and chi at every coordinate of a point with nonzero coordinates."""
    ys = [psi_eval(desc, psi, x).fraction for x in point]
    zs = []
    for x in point:
        value = chi_eval(desc, chi, x)
        assert value.angle is not None
        zs.append(value.angle.fraction)
    return ys, zs


def axiom4_check(
    C: AffineVariety,
    h: LaurentPoly,
    desc: FieldDescriptor,
    psi: AdditiveCharacter,
    chi: MultiplicativeCharacter,
    k_suite: float = 1.0,
    budget: int = DEFAULT_BUDGET,
) -> Axiom4Report:
    """Finite-field form of axiom (4): sup over C' of Re h(Psi(x), chi(x)) against -s sqrt(q)/|C'|.

    Raises:
        NotRealValued: h is not real-valued on the torus
        HasConstantTerm: h has a constant term
    """
    split = split_laurent_monomials(h)
    if not split.real_on_torus:
        raise NotRealValued("Laurent polynomial is not real-valued on the torus")
    if h.has_constant_term:
        raise HasConstantTerm("Laurent polynomial has a constant term")
    if h.n != C.ambient_dim:
        raise ArityMismatch(f"Laurent block size {h.n} does not match the ambient dimension {C.ambient_dim}")
    points = enumerate_points(C, desc, budget=budget)
    c_prime = points.nonzero_part
    terms = []
    for coeff, mono in split.terms:
        plus_holds = not mono.plus_trivial and not fixed_vector_holds(points, mono.plus_part, "hyperplane")
        times_holds = not mono.times_trivial and not fixed_vector_holds(c_prime, mono.times_part, "coset")
        terms.append(TermHypothesis(coeff, mono.plus_part, mono.times_part, plus_holds, times_holds))
    height = h.degree
    hyperplane = containment_search(points, height, "hyperplane") if len(points) else None
    coset = containment_search(c_prime, height, "coset") if len(c_prime) else None

    values = []
    for pt in c_prime:
        ys, zs = torus_image(desc, psi, chi, pt)
        values.append(laurent_exact(h, ys, zs).to_complex().real)
    s = float(sum(abs(c) for c, _ in split.terms)) * k_suite
    count = len(c_prime)
    sup_value = max(values) if values else -math.inf
    average = math.fsum(values) / count if count else 0.0
    rhs = -s * math.sqrt(desc.q) / count if count else -math.inf
    passed = bool(values) and sup_value >= rhs
    return Axiom4Report(
        desc.q, count, sup_value, average, rhs, s, tuple(terms), height, hyperplane, coset, passed
    )


# property (*)


@dataclass(frozen=True)
class DiagonalSpec:
    curve: AffineVariety
    alpha: IntegralLinearMap
    beta: IntegralMultiplicativeMap

    def __post_init__(self) -> None:
        n = self.curve.ambient_dim
        if self.alpha.inputs != n or self.beta.inputs != n:
            raise ArityMismatch(f"Diagonal maps must take {n} inputs")


@dataclass(frozen=True)
class DensityReport:
    q: int
    grid_res: int
    cells_hit: int
    cells_total: int
    hyperplane_witness: Optional[ContainmentWitness]
    coset_witness: Optional[ContainmentWitness]

    @property
    def coverage_fraction(self) -> float:
        return self.cells_hit / self.cells_total

    @property
    def precheck_passed(self) -> bool:
        return self.hyperplane_witness is None and self.coset_witness is None

    def as_row(self) -> Dict[str, object]:
        return {
            "q": self.q,
            "grid_res": self.grid_res,
            "cells_hit": self.cells_hit,
            "cells_total": self.cells_total,
            "coverage": self.coverage_fraction,
            "precheck": self.precheck_passed,
        }


def density_probe(
    spec: DiagonalSpec,
    desc: FieldDescriptor,
    psi: AdditiveCharacter,
    chi: MultiplicativeCharacter,
    grid_res: int,
    height: int = 1,
    budget: int = DEFAULT_BUDGET,
) -> DensityReport:
    """Count grid cells of T^{k+l} hit by (Psi(alpha(x)), chi(beta(x))) for x in C'.

    The containment precheck on alpha(C') and beta(C') is reported, not enforced.
    """
    if grid_res < 1:
        raise ValueError("grid_res must be >= 1")
    c_prime = enumerate_points(spec.curve, desc, budget=budget).nonzero_part
    k, l_dim = spec.alpha.outputs, spec.beta.outputs
    alpha_pts = []
    beta_pts = []
    cells = set()
    for pt in c_prime:
        a = spec.alpha.apply(desc, pt)
        b = spec.beta.apply(desc, pt)
        alpha_pts.append(a)
        beta_pts.append(b)
        cell = []
        for x in a:
            angle = psi_eval(desc, psi, x)
            cell.append(angle.num * grid_res // angle.den)
        for x in b:
            value = chi_eval(desc, chi, x)
            assert value.angle is not None
            cell.append(value.angle.num * grid_res // value.angle.den)
        cells.add(tuple(cell))
    hyperplane = coset = None
    if alpha_pts:
        hyperplane = containment_search(_distinct(desc, alpha_pts, k), height)
        coset = containment_search(_distinct(desc, beta_pts, l_dim), height, "coset")
    return DensityReport(desc.q, grid_res, len(cells), grid_res ** (k + l_dim), hyperplane, coset)


def _distinct(desc: FieldDescriptor, points: List[Point], dim: int) -> PointSet:
    unique = sorted(set(points), key=lambda pt: tuple(desc.encode(x) for x in pt))
    return PointSet(tuple(unique), desc, dim)
