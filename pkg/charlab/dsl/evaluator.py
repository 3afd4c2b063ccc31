"""Evaluation of formulas, predicates, theta sums and kappa functions over a finite field."""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.characters import (
    AdditiveCharacter,
    CyclotomicValue,
    MultiplicativeCharacter,
    chi_eval,
    psi_eval,
)
from ..core.errors import ArityMismatch, BudgetExceeded, CapExceeded, FiberBoundExceeded, UnresolvedReference
from ..core.field import FieldDescriptor, FieldElement
from .ast import (
    Abs,
    And,
    BinOp,
    BoolConst,
    Chi,
    Conj,
    Const,
    ConstComponent,
    DefinableFormula,
    Eq,
    ExistsEq,
    FieldTerm,
    FormulaNode,
    ImagUnit,
    Indicator,
    IntegralLinearMap,
    IntegralMultiplicativeMap,
    KappaRef,
    KappaSpec,
    LaurentPoly,
    MapRow,
    MonomialSplit,
    Not,
    PolyTerm,
    PredicateExpr,
    PredicateNode,
    Program,
    Psi,
    ThetaRef,
    ThetaSpec,
    apply_linear_form,
    apply_monomial,
)

logger = logging.getLogger(__name__)

DEFAULT_SCAN_CAP = 2**20
# cells of a broadcast (t, point) block in vectorized scans
_SCAN_BLOCK = 2**22
_GRID_BLOCK = 2**20

Point = Tuple[FieldElement, ...]


def _check_scan(desc: FieldDescriptor, scan_cap: int) -> None:
    if desc.q > scan_cap:
        raise CapExceeded(f"Existential scan over F_{desc.label} exceeds the scan cap {scan_cap}")


def _horner(desc: FieldDescriptor, coeffs: Sequence[FieldElement], x: FieldElement) -> FieldElement:
    total = desc.zero
    for c in reversed(coeffs):
        total = desc.add(desc.mul(total, x), c)
    return total


def polynomial_roots(desc: FieldDescriptor, coeffs: Sequence[FieldElement]) -> List[FieldElement]:
    """Distinct roots in F_q of sum coeffs[i] X^i, found by scanning; every element for the zero polynomial."""
    if desc.e == 1:
        p = desc.p
        ints = [c.coeffs[0] for c in coeffs]
        xs = np.arange(p, dtype=np.int64)
        acc = np.zeros(p, dtype=np.int64)
        for c in reversed(ints):
            acc = (acc * xs + c) % p
        return [FieldElement((int(x),)) for x in np.nonzero(acc == 0)[0]]
    return [x for x in desc.elements() if _horner(desc, coeffs, x).is_zero()]


def has_root(desc: FieldDescriptor, coeffs: Sequence[FieldElement]) -> bool:
    if desc.e == 1:
        return bool(polynomial_roots(desc, coeffs))
    return any(_horner(desc, coeffs, x).is_zero() for x in desc.elements())


# formulas


def formula_mask(p: int, node: FormulaNode, coords: Sequence[np.ndarray]) -> np.ndarray:
    """Truth values of a formula over F_p at many points; coords holds one 1-D array per variable."""
    arrays = [np.asarray(c, dtype=np.int64) % p for c in coords]
    size = len(arrays[0]) if arrays else 1
    if isinstance(node, Eq):
        values = node.poly.evaluate_array(p, arrays)
        return np.broadcast_to(values == 0, (size,)).copy()
    if isinstance(node, ExistsEq):
        found = np.zeros(size, dtype=bool)
        block = max(1, _SCAN_BLOCK // max(size, 1))
        widened = [a[None, :] for a in arrays]
        for start in range(0, p, block):
            ts = np.arange(start, min(p, start + block), dtype=np.int64)[:, None]
            values = node.poly.evaluate_array(p, widened + [ts])
            found |= np.broadcast_to(values == 0, (len(ts), size)).any(axis=0)
            if found.all():
                break
        return found
    if isinstance(node, BoolConst):
        return np.full(size, node.value, dtype=bool)
    if isinstance(node, Not):
        return ~formula_mask(p, node.child, arrays)
    if isinstance(node, And):
        result = np.ones(size, dtype=bool)
        for child in node.children:
            result &= formula_mask(p, child, arrays)
        return result
    result = np.zeros(size, dtype=bool)
    for child in node.children:
        result |= formula_mask(p, child, arrays)
    return result


def _holds(desc: FieldDescriptor, node: FormulaNode, point: Point, scan_cap: int) -> bool:
    if isinstance(node, Eq):
        return node.poly.evaluate(desc, point).is_zero()
    if isinstance(node, ExistsEq):
        _check_scan(desc, scan_cap)
        coeffs = node.poly.univariate(desc, len(point), point + (desc.zero,))
        return has_root(desc, coeffs)
    if isinstance(node, BoolConst):
        return node.value
    if isinstance(node, Not):
        return not _holds(desc, node.child, point, scan_cap)
    if isinstance(node, And):
        return all(_holds(desc, c, point, scan_cap) for c in node.children)
    return any(_holds(desc, c, point, scan_cap) for c in node.children)


def _uses_exists(node: FormulaNode) -> bool:
    return any(isinstance(a, ExistsEq) for a in DefinableFormula(node, 1).atoms())


def formula_holds(desc: FieldDescriptor, node: FormulaNode, point: Point, scan_cap: int = DEFAULT_SCAN_CAP) -> bool:
    if desc.e == 1:
        if _uses_exists(node):
            _check_scan(desc, scan_cap)
        coords = [np.array([x.coeffs[0]], dtype=np.int64) for x in point]
        return bool(formula_mask(desc.p, node, coords)[0])
    return _holds(desc, node, tuple(point), scan_cap)


def eval_formula(
    desc: FieldDescriptor, formula: DefinableFormula, point: Sequence[FieldElement], scan_cap: int = DEFAULT_SCAN_CAP
) -> bool:
    """Truth value of a definable formula at a point; existential atoms scan the whole field."""
    if len(point) != formula.arity:
        raise ArityMismatch(f"Formula of arity {formula.arity} evaluated at {len(point)} values")
    return formula_holds(desc, formula.root, tuple(point), scan_cap)


def formula_points(
    desc: FieldDescriptor,
    formula: DefinableFormula,
    params: Sequence[FieldElement] = (),
    scan_cap: int = DEFAULT_SCAN_CAP,
    budget: Optional[int] = None,
) -> List[Point]:
    """Points of F_q^free satisfying the formula with its trailing variables fixed to params.

    Points come in lexicographic encoding order.

    Raises:
        BudgetExceeded: q^free exceeds the budget
    """
    params = tuple(params)
    free = formula.arity - len(params)
    if free < 1:
        raise ArityMismatch(f"Formula of arity {formula.arity} has no free variables beside {len(params)} parameters")
    total = desc.q**free
    if budget is not None and total > budget:
        raise BudgetExceeded(f"{total} candidates over F_{desc.label} exceed the budget {budget}")
    if _uses_exists(formula.root):
        _check_scan(desc, scan_cap)
    if desc.e != 1:
        return [
            point
            for point in itertools.product(list(desc.elements()), repeat=free)
            if _holds(desc, formula.root, point + params, scan_cap)
        ]
    p = desc.p
    inner = max(1, min(free, int(math.log(_GRID_BLOCK) / math.log(p))))
    grid = np.indices((p,) * inner).reshape(inner, -1)
    size = grid.shape[1]
    fixed = [np.full(size, x.coeffs[0], dtype=np.int64) for x in params]
    points: List[Point] = []
    for prefix in itertools.product(range(p), repeat=free - inner):
        coords = [np.full(size, v, dtype=np.int64) for v in prefix] + list(grid) + fixed
        mask = formula_mask(p, formula.root, coords)
        head = tuple(FieldElement((v,)) for v in prefix)
        points.extend(head + tuple(FieldElement((int(v),)) for v in column) for column in grid[:, mask].T)
    return points


# theta and kappa


def constant_element(desc: FieldDescriptor, value: Fraction) -> Optional[FieldElement]:
    """Image of a rational constant, or None when its denominator vanishes mod p."""
    if value.denominator % desc.p == 0:
        return None
    return desc.div(desc.element(value.numerator), desc.element(value.denominator))


def theta_fiber(desc: FieldDescriptor, spec: ThetaSpec, params: Sequence[FieldElement]) -> List[Point]:
    """The finite fiber of the theta formula over the parameters, sorted by encoding.

    Raises:
        FiberBoundExceeded: the fiber is larger than the declared bound
    """
    if len(params) != spec.arity:
        raise ArityMismatch(f"Theta of arity {spec.arity} evaluated at {len(params)} parameters")
    params = tuple(params)
    fiber = set()
    bound = spec.effective_bound
    for block in spec.blocks:
        choices: List[List[FieldElement]] = []
        for comp in block:
            if isinstance(comp, ConstComponent):
                value = constant_element(desc, comp.value)
                choices.append([] if value is None else [value])
            else:
                coeffs = comp.poly.univariate(desc, spec.arity, params + (desc.zero,))
                roots = polynomial_roots(desc, coeffs)
                if len(roots) > bound:
                    raise FiberBoundExceeded(f"Theta fiber component has {len(roots)} roots, bound {bound}")
                choices.append(roots)
        fiber.update(itertools.product(*choices))
        if len(fiber) > bound:
            raise FiberBoundExceeded(f"Theta fiber has more than {bound} points")
    return sorted(fiber, key=lambda z: tuple(desc.encode(c) for c in z))


def theta_exact(
    desc: FieldDescriptor,
    spec: ThetaSpec,
    params: Sequence[FieldElement],
    psi: AdditiveCharacter,
    chi: MultiplicativeCharacter,
) -> CyclotomicValue:
    total = CyclotomicValue()
    for z in theta_fiber(desc, spec, params):
        additive = psi_eval(desc, psi, apply_linear_form(desc, spec.g, z))
        multiplicative = chi_eval(desc, chi, apply_monomial(desc, spec.h, z))
        total = total + CyclotomicValue.root(additive) * CyclotomicValue.from_character(multiplicative)
    return total


def kappa_value(desc: FieldDescriptor, spec: KappaSpec, params: Sequence[FieldElement]) -> FieldElement:
    """Common value of Q on the roots of P(params, y); zero without roots or with disagreeing values."""
    if len(params) != spec.arity:
        raise ArityMismatch(f"Kappa of arity {spec.arity} evaluated at {len(params)} parameters")
    params = tuple(params)
    coeffs = spec.p_poly.univariate(desc, spec.arity, params + (desc.zero,))
    roots = polynomial_roots(desc, coeffs)
    if not roots:
        return desc.zero
    values = {spec.q_poly.evaluate(desc, params + (d,)) for d in roots}
    if len(values) != 1:
        return desc.zero
    return values.pop()


# predicates


class PredicateEvaluator:
    """Evaluates predicate expressions for one field and one pair of characters.

    References to theta, kappa, linmap and multmap declarations resolve through program.
    """

    def __init__(
        self,
        desc: FieldDescriptor,
        psi: AdditiveCharacter,
        chi: MultiplicativeCharacter,
        program: Optional[Program] = None,
        scan_cap: int = DEFAULT_SCAN_CAP,
    ) -> None:
        self.desc = desc
        self.psi = psi
        self.chi = chi
        self.program = program or Program()
        self.scan_cap = scan_cap
        self._theta_cache: Dict[Tuple[str, Point], CyclotomicValue] = {}

    def _lookup(self, name: str, kind: str):  # type: ignore[no-untyped-def]
        decl = self.program.get(name, kind)
        if decl is None:
            raise UnresolvedReference(f"No {kind} declaration named '{name}'")
        return decl.node

    def field_value(self, term: FieldTerm, point: Point, map_kind: str) -> FieldElement:
        desc = self.desc
        if isinstance(term, PolyTerm):
            return term.poly.evaluate(desc, point)
        if isinstance(term, KappaRef):
            spec = self._lookup(term.name, "kappa")
            args = tuple(a.evaluate(desc, point) for a in term.args)
            return kappa_value(desc, spec, args)
        assert isinstance(term, MapRow)
        node = self._lookup(term.name, map_kind)
        column = node.column(term.index - 1)
        if isinstance(node, IntegralLinearMap):
            return apply_linear_form(desc, column, point)
        assert isinstance(node, IntegralMultiplicativeMap)
        return apply_monomial(desc, column, point)

    def theta(self, ref: ThetaRef, point: Point) -> CyclotomicValue:
        args = tuple(a.evaluate(self.desc, point) for a in ref.args)
        key = (ref.name, args)
        if key not in self._theta_cache:
            spec = self._lookup(ref.name, "theta")
            self._theta_cache[key] = theta_exact(self.desc, spec, args, self.psi, self.chi)
        return self._theta_cache[key]

    def exact(self, node: PredicateNode, point: Point) -> CyclotomicValue:
        """Exact value; modulus nodes have no exact form and raise ValueError."""
        desc = self.desc
        if isinstance(node, Const):
            return CyclotomicValue.constant(node.value)
        if isinstance(node, ImagUnit):
            return CyclotomicValue.root(Fraction(1, 4))
        if isinstance(node, Psi):
            return CyclotomicValue.root(psi_eval(desc, self.psi, self.field_value(node.arg, point, "linmap")))
        if isinstance(node, Chi):
            value = chi_eval(desc, self.chi, self.field_value(node.arg, point, "multmap"))
            return CyclotomicValue.from_character(value)
        if isinstance(node, Indicator):
            return CyclotomicValue.constant(1 if formula_holds(desc, node.formula, point, self.scan_cap) else 0)
        if isinstance(node, ThetaRef):
            return self.theta(node, point)
        if isinstance(node, Conj):
            return self.exact(node.child, point).conjugate()
        if isinstance(node, Abs):
            raise ValueError("abs() has no exact cyclotomic value")
        left = self.exact(node.left, point)
        right = self.exact(node.right, point)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        return left * right

    def numeric(self, node: PredicateNode, point: Point) -> complex:
        if isinstance(node, Abs):
            return complex(abs(self.numeric(node.child, point)))
        if isinstance(node, Conj):
            return self.numeric(node.child, point).conjugate()
        if isinstance(node, BinOp):
            left = self.numeric(node.left, point)
            right = self.numeric(node.right, point)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            return left * right
        return self.exact(node, point).to_complex()

    def evaluate(self, pred: PredicateExpr, point: Sequence[FieldElement]) -> complex:
        if len(point) != pred.arity:
            raise ArityMismatch(f"Predicate of arity {pred.arity} evaluated at {len(point)} values")
        return self.numeric(pred.root, tuple(point))


def is_exact(pred: PredicateExpr) -> bool:
    """True when the predicate has an exact cyclotomic value (no abs nodes)."""
    return not any(isinstance(node, Abs) for node in pred.walk())


def eval_predicate(
    desc: FieldDescriptor,
    pred: PredicateExpr,
    point: Sequence[FieldElement],
    psi: AdditiveCharacter,
    chi: MultiplicativeCharacter,
    program: Optional[Program] = None,
    scan_cap: int = DEFAULT_SCAN_CAP,
) -> complex:
    """Complex value of a predicate expression at a point."""
    return PredicateEvaluator(desc, psi, chi, program, scan_cap).evaluate(pred, point)


def predicate_bound(pred: PredicateExpr, program: Optional[Program] = None) -> Fraction:
    """Syntactic bound on |value|: characters and indicators by 1, theta references by their fiber bound."""
    program = program or Program()

    def bound(node: PredicateNode) -> Fraction:
        if isinstance(node, Const):
            return abs(node.value)
        if isinstance(node, ThetaRef):
            decl = program.get(node.name, "theta")
            if decl is None:
                raise UnresolvedReference(f"No theta declaration named '{node.name}'")
            return Fraction(decl.node.effective_bound)  # type: ignore[union-attr]
        if isinstance(node, (Conj, Abs)):
            return bound(node.child)
        if isinstance(node, BinOp):
            if node.op == "*":
                return bound(node.left) * bound(node.right)
            return bound(node.left) + bound(node.right)
        return Fraction(1)

    return bound(pred.root)


# Laurent polynomials on the torus


@dataclass(frozen=True)
class LaurentSplit:
    terms: Tuple[Tuple[Fraction, MonomialSplit], ...]
    real_on_torus: bool


def split_laurent_monomials(h: LaurentPoly) -> LaurentSplit:
    """One (coefficient, additive part, multiplicative part) entry per term, plus the real-valuedness test."""
    return LaurentSplit(tuple(h.split()), h.is_real_on_torus)


def laurent_exact(h: LaurentPoly, y_angles: Sequence[Fraction], z_angles: Sequence[Fraction]) -> CyclotomicValue:
    """h evaluated at Y_j = e^{2 pi i y_j}, Z_j = e^{2 pi i z_j}."""
    if len(y_angles) != h.n or len(z_angles) != h.n:
        raise ArityMismatch(f"Laurent polynomial in {h.n}+{h.n} variables evaluated at the wrong arity")
    angles = tuple(y_angles) + tuple(z_angles)
    total = CyclotomicValue()
    for exp, coeff in h.terms:
        angle = sum((Fraction(v) * a for v, a in zip(exp, angles)), Fraction(0))
        total = total + CyclotomicValue.root(angle % 1).scale(coeff)
    return total
