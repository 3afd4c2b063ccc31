"""Counting measure of definable families, definable integration, Fubini and character case decomposition."""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Dict, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.characters import (
    AdditiveCharacter,
    CyclotomicValue,
    MultiplicativeCharacter,
    character_order,
    chi_eval,
    psi_eval,
    resolve_chi,
    resolve_psi,
)
from ..core.errors import ArityMismatch, InconsistentDimension, OrderTooLarge
from ..core.field import DEFAULT_DLOG_CAP, FieldDescriptor, FieldElement, make_field
from ..dsl.ast import (
    Abs,
    And,
    BinOp,
    BoolConst,
    Chi,
    Conj,
    DefinableFormula,
    Eq,
    ExistsEq,
    FieldTerm,
    FormulaNode,
    IntegralLinearMap,
    IntegralMultiplicativeMap,
    MapRow,
    Not,
    Or,
    PolyExpr,
    PolyTerm,
    PredicateExpr,
    PredicateNode,
    Program,
    Psi,
)
from ..dsl.evaluator import DEFAULT_SCAN_CAP, PredicateEvaluator, formula_points, is_exact, predicate_bound
from .geometry import DEFAULT_BUDGET, Point
from .runner import map_fields

logger = logging.getLogger(__name__)

MIN_FIT_FIELDS = 4
DIMENSION_SPREAD = 0.4
MAX_MU_DENOMINATOR = 64
DEFAULT_MAX_ORDER = 12

Value = Union[CyclotomicValue, complex]


def _field_params(desc: FieldDescriptor, params: Sequence[int]) -> Tuple[FieldElement, ...]:
    return tuple(desc.element(v) for v in params)


def _larger_half(items: Sequence[Tuple[int, float]]) -> List[Tuple[int, float]]:
    ordered = sorted(items)
    return ordered[len(ordered) // 2 :]


# counting measure


@dataclass(frozen=True)
class SizeEstimate:
    """|phi(F_q)| ~ mu q^d with error C q^(d - 1/2)."""

    d: int
    mu: Fraction
    C: float
    residuals: Tuple[Tuple[int, float], ...] = ()
    counts: Tuple[Tuple[int, int], ...] = ()
    mu_raw: float = 0.0

    @property
    def degenerate(self) -> bool:
        return self.mu == 0

    def as_dict(self) -> Dict[str, object]:
        return {
            "counts": [list(c) for c in self.counts],
            "d": self.d,
            "mu_num": self.mu.numerator,
            "mu_den": self.mu.denominator,
            "mu_raw": self.mu_raw,
            "C": self.C,
            "residuals": [list(r) for r in self.residuals],
        }


def _count_one(
    size: Tuple[int, int],
    formula: DefinableFormula,
    params: Tuple[int, ...],
    budget: int,
    scan_cap: int,
    dlog_cap: int,
) -> Tuple[int, int]:
    p, e = size
    desc = make_field(p, e, dlog_cap=dlog_cap)
    count = len(formula_points(desc, formula, _field_params(desc, params), scan_cap, budget))
    logger.debug("F_%s: %d points", desc.label, count)
    return desc.q, count


def count_points(
    formula: DefinableFormula,
    primes: Sequence[int],
    params: Sequence[int] = (),
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    scan_cap: int = DEFAULT_SCAN_CAP,
    dlog_cap: int = DEFAULT_DLOG_CAP,
    extension: int = 1,
) -> List[Tuple[int, int]]:
    """(q, |phi(F_q, params)|) for every prime, with the trailing variables fixed to params."""
    func = partial(
        _count_one,
        formula=formula,
        params=tuple(params),
        budget=budget,
        scan_cap=scan_cap,
        dlog_cap=dlog_cap,
    )
    return map_fields(func, [(p, extension) for p in primes], workers)


def _simplest_rational(raw: float, tolerance: float) -> Fraction:
    """Smallest-denominator rational within tolerance of raw, falling back to the nearest one."""
    for den in range(1, MAX_MU_DENOMINATOR + 1):
        num = round(raw * den)
        if num > 0 and abs(num / den - raw) <= tolerance:
            return Fraction(num, den)
    return Fraction(raw).limit_denominator(MAX_MU_DENOMINATOR)


def fit_counts(counts: Sequence[Tuple[int, int]], free: Optional[int] = None) -> SizeEstimate:
    """Dimension, multiplicity and error constant from per-field point counts.

    Raises:
        InconsistentDimension: log(count)/log(q) over the larger fields spreads by more than 0.4
    """
    if len(counts) < MIN_FIT_FIELDS:
        raise ValueError(f"Fitting needs at least {MIN_FIT_FIELDS} fields, got {len(counts)}")
    counts = tuple(sorted(counts))
    if all(c == 0 for _, c in counts):
        return SizeEstimate(0, Fraction(0), 0.0, tuple((q, 0.0) for q, _ in counts), counts, 0.0)

    tail = [(q, c) for q, c in _larger_half(counts) if c > 0] or [(q, c) for q, c in counts if c > 0]
    slopes = [math.log(c) / math.log(q) for q, c in tail]
    spread = max(slopes) - min(slopes)
    if spread > DIMENSION_SPREAD:
        raise InconsistentDimension(
            f"log(count)/log(q) ranges over [{min(slopes):.3f}, {max(slopes):.3f}] on the larger fields"
        )
    d = int(round(float(np.median(slopes))))
    if free is not None:
        d = min(d, free)

    ratios = [c / q**d for q, c in tail]
    mu_raw = float(np.median(ratios))
    tolerance = 1 / math.sqrt(float(np.median([q for q, _ in tail])))
    mu = _simplest_rational(mu_raw, tolerance)

    residuals = tuple((q, float(abs(Fraction(c) - mu * q**d)) / q ** (d - 0.5)) for q, c in counts)
    C = max(r for _, r in residuals)
    logger.info("Fitted d=%d mu=%s C=%.4f over %d fields", d, mu, C, len(counts))
    return SizeEstimate(d, mu, C, residuals, counts, mu_raw)


def count_and_fit(
    formula: DefinableFormula,
    primes: Sequence[int],
    params: Sequence[int] = (),
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    scan_cap: int = DEFAULT_SCAN_CAP,
    dlog_cap: int = DEFAULT_DLOG_CAP,
    extension: int = 1,
) -> SizeEstimate:
    """Count the family at every prime and fit |phi| ~ mu q^d.

    Args:
        formula: Family phi(x, a); the last len(params) variables are parameters
        primes: At least four primes
        params: Integer parameter values, read in each field

    Returns:
        SizeEstimate; an empty family gives d = 0, mu = 0, C = 0
    """
    if len(primes) < MIN_FIT_FIELDS:
        raise ValueError(f"count_and_fit needs at least {MIN_FIT_FIELDS} primes, got {len(primes)}")
    free = formula.arity - len(params)
    counts = count_points(formula, primes, params, budget, workers, scan_cap, dlog_cap, extension)
    return fit_counts(counts, free)


# definable integration


def _accumulate(values: Sequence[Value]) -> Value:
    """Sum of exact values term by term, or a compensated complex sum."""
    if values and isinstance(values[0], complex):
        return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))  # type: ignore
    grouped: Dict[Fraction, Fraction] = defaultdict(Fraction)
    for value in values:
        for angle, coeff in value.terms.items():  # type: ignore[union-attr]
            grouped[angle] += coeff
    return CyclotomicValue(grouped)


def _mean(total: Value, n: int) -> Value:
    if isinstance(total, CyclotomicValue):
        return total.scale(Fraction(1, n))
    return total / n


def _as_complex(value: Value) -> complex:
    return value.to_complex() if isinstance(value, CyclotomicValue) else complex(value)


def _point_values(
    ev: PredicateEvaluator, pred: PredicateExpr, points: Sequence[Point], params: Point
) -> List[Value]:
    if is_exact(pred):
        return [ev.exact(pred.root, pt + params) for pt in points]
    return [ev.numeric(pred.root, pt + params) for pt in points]


@dataclass(frozen=True)
class IntegralValue:
    """Average of the predicate over the size points of B in F_q."""

    q: int
    value: complex
    size: int
    exact: Optional[CyclotomicValue] = None

    @property
    def rational(self) -> Optional[Fraction]:
        return None if self.exact is None else self.exact.rational()


@dataclass
class IntegralReport:
    values: List[IntegralValue] = field(default_factory=list)
    skipped: List[int] = field(default_factory=list)
    bound: Fraction = Fraction(1)

    @property
    def tail_max(self) -> float:
        tail = _larger_half([(v.q, abs(v.value)) for v in self.values])
        return max((m for _, m in tail), default=0.0)

    @property
    def slope(self) -> Optional[float]:
        """Least-squares slope of log|f_q| against log q, over the fields with f_q != 0."""
        pairs = [(v.q, abs(v.value)) for v in self.values if abs(v.value) > 1e-12]
        if len(pairs) < 2 or len({q for q, _ in pairs}) < 2:
            return None
        qs, ms = zip(*pairs)
        return float(np.polyfit(np.log(qs), np.log(ms), 1)[0])

    @property
    def within_bound(self) -> bool:
        return all(abs(v.value) <= float(self.bound) + 1e-9 for v in self.values)

    def as_dict(self) -> Dict[str, object]:
        return {
            "values": [[v.q, v.value.real, v.value.imag] for v in self.values],
            "sizes": [[v.q, v.size] for v in self.values],
            "skipped": list(self.skipped),
            "bound": str(self.bound),
            "tail_max": self.tail_max,
            "slope": self.slope,
        }


def average_over(
    pred: PredicateExpr,
    domain: DefinableFormula,
    desc: FieldDescriptor,
    psi: AdditiveCharacter,
    chi: MultiplicativeCharacter,
    params: Sequence[FieldElement] = (),
    program: Optional[Program] = None,
    budget: int = DEFAULT_BUDGET,
    scan_cap: int = DEFAULT_SCAN_CAP,
) -> IntegralValue:
    """Average of pred(x, params) over the x in domain(F_q, params); 0 on an empty domain."""
    if pred.arity != domain.arity:
        raise ArityMismatch(f"Predicate of arity {pred.arity} integrated over a domain of arity {domain.arity}")
    params = tuple(params)
    points = formula_points(desc, domain, params, scan_cap, budget)
    if not points:
        return IntegralValue(desc.q, 0j, 0, CyclotomicValue() if is_exact(pred) else None)
    ev = PredicateEvaluator(desc, psi, chi, program, scan_cap)
    mean = _mean(_accumulate(_point_values(ev, pred, points, params)), len(points))
    exact = mean if isinstance(mean, CyclotomicValue) else None
    return IntegralValue(desc.q, _as_complex(mean), len(points), exact)


def _integrate_one(
    size: Tuple[int, int],
    pred: PredicateExpr,
    domain: DefinableFormula,
    params: Tuple[int, ...],
    psi_rule: str,
    chi_rule: str,
    order_floor: int,
    program: Optional[Program],
    budget: int,
    scan_cap: int,
    dlog_cap: int,
) -> Optional[IntegralValue]:
    p, e = size
    desc = make_field(p, e, dlog_cap=dlog_cap)
    chi = resolve_chi(desc, chi_rule, order_floor)
    if chi is None:
        return None
    psi = resolve_psi(desc, psi_rule)
    return average_over(pred, domain, desc, psi, chi, _field_params(desc, params), program, budget, scan_cap)


def integrate_predicate(
    pred: PredicateExpr,
    domain: DefinableFormula,
    primes: Sequence[int],
    params: Sequence[int] = (),
    psi_rule: str = "standard",
    chi_rule: str = "generator",
    order_floor: int = 1,
    program: Optional[Program] = None,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    scan_cap: int = DEFAULT_SCAN_CAP,
    dlog_cap: int = DEFAULT_DLOG_CAP,
    extension: int = 1,
) -> IntegralReport:
    """Per-field averages f_q of pred over domain, with trend statistics.

    Fields where the character rule has no character of the requested kind are skipped.
    Averages are exact unless the predicate takes a modulus.
    """
    func = partial(
        _integrate_one,
        pred=pred,
        domain=domain,
        params=tuple(params),
        psi_rule=psi_rule,
        chi_rule=chi_rule,
        order_floor=order_floor,
        program=program,
        budget=budget,
        scan_cap=scan_cap,
        dlog_cap=dlog_cap,
    )
    sizes = [(p, extension) for p in primes]
    report = IntegralReport(bound=predicate_bound(pred, program))
    for (p, e), value in zip(sizes, map_fields(func, sizes, workers)):
        if value is None:
            report.skipped.append(p**e)
        else:
            report.values.append(value)
    logger.info("Integrated over %d fields (%d skipped)", len(report.values), len(report.skipped))
    return report


# Fubini


@dataclass(frozen=True)
class FubiniReport:
    q: int
    lhs: complex
    rhs: complex
    fiber_sizes: Tuple[int, ...]

    @property
    def delta(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def hypothesis_holds(self) -> bool:
        """All nonempty fibers have the same size."""
        return len(set(self.fiber_sizes)) <= 1

    def as_dict(self) -> Dict[str, object]:
        return {
            "q": self.q,
            "lhs": [self.lhs.real, self.lhs.imag],
            "rhs": [self.rhs.real, self.rhs.imag],
            "delta": self.delta,
            "hypothesis": self.hypothesis_holds,
        }


def fubini_check(
    pred: PredicateExpr,
    domain: DefinableFormula,
    split: int,
    desc: FieldDescriptor,
    psi: AdditiveCharacter,
    chi: MultiplicativeCharacter,
    params: Sequence[FieldElement] = (),
    program: Optional[Program] = None,
    budget: int = DEFAULT_BUDGET,
    scan_cap: int = DEFAULT_SCAN_CAP,
) -> FubiniReport:
    """Direct average over B against the iterated average over the projection and its fibers.

    The first split free coordinates are the inner variables x1; the remaining free coordinates x2
    index the fibers B^c = {x1 : (x1, c) in B}.
    """
    params = tuple(params)
    free = domain.arity - len(params)
    if not 0 < split < free:
        raise ValueError(f"Split {split} must leave inner and outer coordinates among {free} free variables")
    if pred.arity != domain.arity:
        raise ArityMismatch(f"Predicate of arity {pred.arity} integrated over a domain of arity {domain.arity}")
    points = formula_points(desc, domain, params, scan_cap, budget)
    if not points:
        return FubiniReport(desc.q, 0j, 0j, ())
    ev = PredicateEvaluator(desc, psi, chi, program, scan_cap)
    values = _point_values(ev, pred, points, params)

    fibers: Dict[Point, List[Value]] = defaultdict(list)
    for pt, value in zip(points, values):
        fibers[pt[split:]].append(value)
    lhs = _mean(_accumulate(values), len(points))
    inner = [_mean(_accumulate(vals), len(vals)) for vals in fibers.values()]
    rhs = _mean(_accumulate(inner), len(inner))
    sizes = tuple(len(vals) for vals in fibers.values())
    return FubiniReport(desc.q, _as_complex(lhs), _as_complex(rhs), sizes)


# case decomposition


def _lift_formula(node: FormulaNode, arity: int, new_arity: int) -> FormulaNode:
    """Re-embed a formula in more variables; existential variables stay last."""
    if isinstance(node, Eq):
        return Eq(node.poly.with_arity(new_arity))
    if isinstance(node, ExistsEq):
        terms = {exp[:arity] + (0,) * (new_arity - arity) + (exp[arity],): c for exp, c in node.poly.terms}
        return ExistsEq(PolyExpr.from_terms(terms, new_arity + 1))
    if isinstance(node, Not):
        return Not(_lift_formula(node.child, arity, new_arity))
    if isinstance(node, And):
        return And(tuple(_lift_formula(c, arity, new_arity) for c in node.children))
    if isinstance(node, Or):
        return Or(tuple(_lift_formula(c, arity, new_arity) for c in node.children))
    return node


def _monomial(arity: int, powers: Dict[int, int]) -> PolyExpr:
    exp = [0] * arity
    for index, k in powers.items():
        exp[index] += k
    return PolyExpr.from_terms({tuple(exp): 1}, arity)


def _term_fraction(term: FieldTerm, program: Program, arity: int) -> Tuple[PolyExpr, PolyExpr]:
    """Numerator and denominator polynomials of a character argument."""
    if isinstance(term, PolyTerm):
        return term.poly, PolyExpr.constant(1, arity)
    if isinstance(term, MapRow):
        decl = program.get(term.name)
        node = None if decl is None else decl.node
        column = node.column(term.index - 1) if node is not None else None  # type: ignore[union-attr]
        if isinstance(node, IntegralMultiplicativeMap):
            num = _monomial(arity, {i: k for i, k in enumerate(column) if k > 0})
            den = _monomial(arity, {i: -k for i, k in enumerate(column) if k < 0})
            return num, den
        if isinstance(node, IntegralLinearMap):
            linear = PolyExpr.from_terms(
                {tuple(1 if j == i else 0 for j in range(arity)): k for i, k in enumerate(column) if k}, arity
            )
            return linear, PolyExpr.constant(1, arity)
    raise ValueError("Case decomposition needs polynomial or integral-map character arguments")


@dataclass(frozen=True)
class DecompositionCell:
    """Points of B on which every character occurrence takes the values in key.

    formula has the variables of B followed by one slot per occurrence (and the twist for additive
    cells); representatives fill those slots.
    """

    key: Tuple[Hashable, ...]
    points: Tuple[Point, ...]
    formula: DefinableFormula
    representatives: Tuple[FieldElement, ...]
    matches: bool

    def key_text(self) -> str:
        return ",".join(str(v) for v in self.key)


@dataclass(frozen=True)
class DecompositionReport:
    q: int
    kind: str
    order: int
    cells: Tuple[DecompositionCell, ...]
    direct_average: complex
    reassembled_average: complex
    partition_ok: bool

    @property
    def delta(self) -> float:
        return abs(self.direct_average - self.reassembled_average)

    @property
    def all_match(self) -> bool:
        return self.partition_ok and all(c.matches for c in self.cells)

    def as_dict(self) -> Dict[str, object]:
        return {
            "q": self.q,
            "kind": self.kind,
            "order": self.order,
            "cells": [{"key": c.key_text(), "size": len(c.points), "matches": c.matches} for c in self.cells],
            "direct": [self.direct_average.real, self.direct_average.imag],
            "reassembled": [self.reassembled_average.real, self.reassembled_average.imag],
            "delta": self.delta,
            "partition_ok": self.partition_ok,
        }


def _substituted(
    ev: PredicateEvaluator, node: PredicateNode, point: Point, fixed: Dict[int, CyclotomicValue], exact: bool
) -> Value:
    """Value of node with the character occurrences in fixed replaced by constants."""
    if id(node) in fixed:
        return fixed[id(node)] if exact else fixed[id(node)].to_complex()
    if isinstance(node, BinOp):
        left = _substituted(ev, node.left, point, fixed, exact)
        right = _substituted(ev, node.right, point, fixed, exact)
        if node.op == "+":
            return left + right  # type: ignore[operator]
        if node.op == "-":
            return left - right  # type: ignore[operator]
        return left * right  # type: ignore[operator]
    if isinstance(node, Conj):
        return _substituted(ev, node.child, point, fixed, exact).conjugate()
    if isinstance(node, Abs):
        return complex(abs(_substituted(ev, node.child, point, fixed, False)))  # type: ignore[arg-type]
    return ev.exact(node, point) if exact else ev.exact(node, point).to_complex()


def _occurrences(pred: PredicateExpr, kind: str) -> List[Union[Chi, Psi]]:
    wanted = Chi if kind == "multiplicative" else Psi
    seen: Dict[int, Union[Chi, Psi]] = {}
    for node in pred.walk():
        if isinstance(node, wanted) and id(node) not in seen:
            seen[id(node)] = node
    return list(seen.values())


def _multiplicative_condition(
    num: PolyExpr, den: PolyExpr, zero: bool, slot: int, order: int, arity: int
) -> FormulaNode:
    """chi(num/den) = 0, or num/den in a * (F_q^x)^order with a in the given slot."""
    lifted_num = num.with_arity(arity)
    lifted_den = den.with_arity(arity)
    if zero:
        return Eq(lifted_num * lifted_den)
    outer = arity + 1
    witness = _monomial(outer, {slot: 1, arity: order}) * den.with_arity(outer) - num.with_arity(outer)
    return And((ExistsEq(witness), Not(Eq(lifted_num * lifted_den))))


def _additive_condition(arg: PolyExpr, slot: int, twist_slot: int, p: int, arity: int) -> FormulaNode:
    """Tr(c arg) = Tr(c a): c (arg - a) is y^p - y for some y."""
    outer = arity + 1
    artin_schreier = _monomial(outer, {arity: p}) - _monomial(outer, {arity: 1})
    shift = _monomial(outer, {twist_slot: 1}) * arg.with_arity(outer) - _monomial(outer, {twist_slot: 1, slot: 1})
    return ExistsEq(artin_schreier - shift)


def case_decompose(
    pred: PredicateExpr,
    domain: DefinableFormula,
    desc: FieldDescriptor,
    psi: AdditiveCharacter,
    chi: MultiplicativeCharacter,
    params: Sequence[FieldElement] = (),
    program: Optional[Program] = None,
    kind: str = "multiplicative",
    max_order: int = DEFAULT_MAX_ORDER,
    budget: int = DEFAULT_BUDGET,
    scan_cap: int = DEFAULT_SCAN_CAP,
) -> DecompositionReport:
    """Partition B by the character values at each occurrence and describe every cell by a ring formula.

    Multiplicative cells use power-residue conditions exists t (a t^r = h) with r the order of chi;
    additive cells use trace-kernel conditions exists t (t^p - t = c (g - a)). Each ring formula is
    enumerated and compared set-exactly with its cell, and the average is rebuilt from the constant
    character values on each cell.

    Raises:
        OrderTooLarge: chi has order above max_order (multiplicative kind)
    """
    if kind not in ("multiplicative", "additive"):
        raise ValueError(f"Unknown decomposition kind '{kind}'")
    if pred.arity != domain.arity:
        raise ArityMismatch(f"Predicate of arity {pred.arity} decomposed over a domain of arity {domain.arity}")
    program = program or Program()
    params = tuple(params)
    order = character_order(desc, chi) if kind == "multiplicative" else desc.p
    if kind == "multiplicative" and order > max_order:
        raise OrderTooLarge(f"Character of order {order} exceeds the decomposition bound {max_order}")

    arity = domain.arity
    occurrences = _occurrences(pred, kind)
    fractions = [_term_fraction(node.arg, program, arity) for node in occurrences]
    slots = len(occurrences) + (1 if kind == "additive" else 0)
    cell_arity = arity + slots

    ev = PredicateEvaluator(desc, psi, chi, program, scan_cap)
    points = formula_points(desc, domain, params, scan_cap, budget)
    grouped: Dict[Tuple[Hashable, ...], List[Point]] = {}
    arguments: Dict[Tuple[Hashable, ...], Tuple[FieldElement, ...]] = {}
    for pt in points:
        full = pt + params
        if kind == "multiplicative":
            args = tuple(ev.field_value(node.arg, full, "multmap") for node in occurrences)
            key: Tuple[Hashable, ...] = tuple(chi_eval(desc, chi, a) for a in args)
        else:
            args = tuple(ev.field_value(node.arg, full, "linmap") for node in occurrences)
            key = tuple(psi_eval(desc, psi, a) for a in args)
        grouped.setdefault(key, []).append(pt)
        arguments.setdefault(key, args)

    base = _lift_formula(domain.root, arity, cell_arity)
    cells = []
    for key, cell_points in grouped.items():
        conditions: List[FormulaNode] = [base]
        for j, (num, den) in enumerate(fractions):
            if kind == "multiplicative":
                zero = key[j].is_zero  # type: ignore[attr-defined]
                conditions.append(_multiplicative_condition(num, den, zero, arity + j, order, cell_arity))
            else:
                conditions.append(_additive_condition(num, arity + j, cell_arity - 1, desc.p, cell_arity))
        reps = arguments[key] + ((psi.twist,) if kind == "additive" else ())
        formula = DefinableFormula(And(tuple(conditions)) if len(conditions) > 1 else base, cell_arity)
        described = formula_points(desc, formula, params + reps, scan_cap, budget)
        matches = set(described) == set(cell_points)
        if not matches:
            logger.warning("Cell %s over F_%s differs from its ring formula", key, desc.label)
        cells.append(DecompositionCell(key, tuple(cell_points), formula, reps, matches))

    covered = [pt for cell in cells for pt in cell.points]
    partition_ok = len(covered) == len(points) and set(covered) == set(points)

    exact = is_exact(pred)
    direct = _accumulate(_point_values(ev, pred, points, params))
    pieces: List[Value] = []
    for cell in cells:
        if kind == "multiplicative":
            constants = [CyclotomicValue.from_character(v) for v in cell.key]  # type: ignore[arg-type]
        else:
            constants = [CyclotomicValue.root(v) for v in cell.key]  # type: ignore[arg-type]
        fixed = {id(node): value for node, value in zip(occurrences, constants)}
        pieces.extend(_substituted(ev, pred.root, pt + params, fixed, exact) for pt in cell.points)
    reassembled = _accumulate(pieces)
    n = max(len(points), 1)
    logger.debug("F_%s: %d %s cells over %d points", desc.label, len(cells), kind, len(points))
    return DecompositionReport(
        desc.q,
        kind,
        order,
        tuple(cells),
        _as_complex(_mean(direct, n)) if points else 0j,
        _as_complex(_mean(reassembled, n)) if points else 0j,
        partition_ok,
    )


def trace_coset_check(
    desc: FieldDescriptor, psi: AdditiveCharacter, scan_cap: int = DEFAULT_SCAN_CAP
) -> DecompositionReport:
    """Level sets of psi on F_q against the cosets a + c^-1 ker(Tr) described by y^p - y = c (x - a)."""
    x = PolyTerm(PolyExpr.variable(0, 1))
    pred = PredicateExpr(Psi(x), 1)
    domain = DefinableFormula(BoolConst(True), 1)
    return case_decompose(pred, domain, desc, psi, MultiplicativeCharacter(0), kind="additive", scan_cap=scan_cap)


def coset_size(desc: FieldDescriptor, psi: AdditiveCharacter) -> int:
    """Size of every level set of a nontrivial additive character."""
    return desc.q if psi.is_trivial() else desc.q // desc.p
