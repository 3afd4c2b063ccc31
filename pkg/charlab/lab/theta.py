"""Theta sums over finite fibers, chi_sym root sums, kappa functions and basic predicates."""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from ..core.characters import AdditiveCharacter, CyclotomicValue, MultiplicativeCharacter, chi_eval
from ..core.errors import InvalidPadding
from ..core.field import FieldDescriptor, FieldElement
from ..dsl.ast import (
    ConstComponent,
    DefinableFormula,
    KappaSpec,
    ThetaSpec,
)
from ..dsl.evaluator import (
    DEFAULT_SCAN_CAP,
    formula_holds,
    kappa_value,
    polynomial_roots,
    theta_exact,
)

logger = logging.getLogger(__name__)


def theta_eval(
    spec: ThetaSpec,
    params: Sequence[FieldElement],
    desc: FieldDescriptor,
    psi: AdditiveCharacter,
    chi: MultiplicativeCharacter,
) -> complex:
    """Sum of Psi(g.z) chi(z^h) over the fiber of spec at params; 0 on an empty fiber."""
    return theta_exact(desc, spec, params, psi, chi).to_complex()


def kappa_eval(spec: KappaSpec, params: Sequence[FieldElement], desc: FieldDescriptor) -> FieldElement:
    return kappa_value(desc, spec, params)


def root_multiplicity(desc: FieldDescriptor, coeffs: Sequence[FieldElement], root: FieldElement) -> int:
    """Multiplicity of root in sum coeffs[i] X^i, by repeated synthetic division."""
    current = list(coeffs)
    count = 0
    while len(current) > 1:
        # divide by (X - root); coefficients low degree first
        quotient = [desc.zero] * (len(current) - 1)
        carry = desc.zero
        for i in range(len(current) - 1, 0, -1):
            carry = desc.add(current[i], desc.mul(carry, root))
            quotient[i - 1] = carry
        remainder = desc.add(current[0], desc.mul(carry, root))
        if not remainder.is_zero():
            break
        count += 1
        current = quotient
    return count


def chi_sym_exact(
    n: int, coeffs: Sequence[FieldElement], desc: FieldDescriptor, chi: MultiplicativeCharacter
) -> CyclotomicValue:
    if len(coeffs) != n:
        raise ValueError(f"chi_sym of degree {n} needs {n} coefficients, got {len(coeffs)}")
    # x^n + a_1 x^{n-1} + ... + a_n, stored low degree first
    poly = list(reversed(coeffs)) + [desc.one]
    total = CyclotomicValue()
    for root in polynomial_roots(desc, poly):
        mult = root_multiplicity(desc, poly, root)
        total = total + CyclotomicValue.from_character(chi_eval(desc, chi, root)).scale(mult)
    return total


def chi_sym(n: int, coeffs: Sequence[FieldElement], desc: FieldDescriptor, chi: MultiplicativeCharacter) -> complex:
    """Sum of chi over the roots in F_q of the monic polynomial with the given coefficients, with multiplicity."""
    return chi_sym_exact(n, coeffs, desc, chi).to_complex()


# closure algebra


@dataclass(frozen=True)
class SumPadding:
    """Constant tuples that embed two theta fibers disjointly into one."""

    q1: Tuple[Fraction, ...]
    q2: Tuple[Fraction, ...]
    r1: Fraction
    r2: Fraction
    s1: Fraction
    s2: Fraction

    def valid_mod(self, p: int) -> bool:
        """True when every constant reduces mod p and s1, s2 stay distinct."""
        values = self.q1 + self.q2 + (self.r1, self.r2, self.s1, self.s2)
        if any(v.denominator % p == 0 for v in values):
            return False
        return (self.s1 - self.s2).numerator % p != 0


def _monomial_value(vector: Sequence[Fraction], exponents: Sequence[int]) -> Fraction:
    total = Fraction(1)
    for v, k in zip(vector, exponents):
        if k:
            if v == 0:
                return Fraction(0)
            total *= Fraction(v) ** k
    return total


def _linear_value(vector: Sequence[Fraction], coeffs: Sequence[int]) -> Fraction:
    return sum((Fraction(v) * c for v, c in zip(vector, coeffs)), Fraction(0))


def check_padding(s1: ThetaSpec, s2: ThetaSpec, padding: SumPadding) -> None:
    """Raises InvalidPadding unless g(q_i) = -r_i, h(q_i) s_i = 1 for both specs and s1 != s2."""
    if len(padding.q1) != s1.dim or len(padding.q2) != s2.dim:
        raise InvalidPadding(f"Padding tuples must have lengths {s1.dim} and {s2.dim}")
    sides = ((s1, padding.q1, padding.r1, padding.s1, 1), (s2, padding.q2, padding.r2, padding.s2, 2))
    for spec, q, r, s, label in sides:
        if _linear_value(q, spec.g) != -r:
            raise InvalidPadding(f"g{label}(q{label}) != -r{label}")
        if _monomial_value(q, spec.h) * s != 1:
            raise InvalidPadding(f"h{label}(q{label}) * s{label} != 1")
    if padding.s1 == padding.s2:
        raise InvalidPadding("s1 and s2 must differ")


def default_padding(s1: ThetaSpec, s2: ThetaSpec, search: int = 4) -> SumPadding:
    """A small valid padding, searching constant tuples with entries in 1..search."""
    candidates = list(itertools.product(range(1, search + 1), repeat=max(s1.dim, s2.dim)))
    for v1 in candidates:
        q1 = tuple(Fraction(x) for x in v1[: s1.dim])
        m1 = _monomial_value(q1, s1.h)
        for v2 in candidates:
            q2 = tuple(Fraction(x) for x in v2[: s2.dim])
            m2 = _monomial_value(q2, s2.h)
            if not m1 or not m2 or m1 == m2:
                continue
            return SumPadding(q1, q2, -_linear_value(q1, s1.g), -_linear_value(q2, s2.g), 1 / m1, 1 / m2)
    raise InvalidPadding("No padding with distinct s1, s2 exists for these exponent vectors")


def _constants(values: Sequence[Fraction]) -> Tuple[ConstComponent, ...]:
    return tuple(ConstComponent(Fraction(v)) for v in values)


def theta_combine(
    kind: str, s1: ThetaSpec, s2: Optional[ThetaSpec] = None, padding: Optional[SumPadding] = None
) -> ThetaSpec:
    """Theta spec for the pointwise product, sum or complex conjugate of theta sums.

    Args:
        kind: "product", "sum" or "conjugate"
        s1: First spec
        s2: Second spec, required for product and sum
        padding: Constant tuples for sum

    Raises:
        InvalidPadding: sum padding violates its constraints
    """
    if kind == "conjugate":
        return ThetaSpec(s1.arity, s1.blocks, tuple(-v for v in s1.g), tuple(-v for v in s1.h), s1.bound)
    if kind not in ("product", "sum"):
        raise ValueError(f"Unknown combination '{kind}'")
    if s2 is None:
        raise ValueError(f"{kind} needs two theta specs")
    if s1.arity != s2.arity:
        raise ValueError(f"Theta specs have different parameter arities {s1.arity} and {s2.arity}")
    if kind == "product":
        blocks = tuple(b1 + b2 for b1 in s1.blocks for b2 in s2.blocks)
        bound = s1.effective_bound * s2.effective_bound
        return ThetaSpec(s1.arity, blocks, s1.g + s2.g, s1.h + s2.h, bound)
    if padding is None:
        raise InvalidPadding("sum needs padding tuples")
    check_padding(s1, s2, padding)
    first = tuple(b + _constants(padding.q2 + (padding.r2, padding.s2)) for b in s1.blocks)
    second = tuple(_constants(padding.q1) + b + _constants((padding.r1, padding.s1)) for b in s2.blocks)
    g = s1.g + s2.g + (1, 0)
    h = s1.h + s2.h + (0, 1)
    return ThetaSpec(s1.arity, first + second, g, h, s1.effective_bound + s2.effective_bound)


# basic predicates


@dataclass(frozen=True)
class PredicatePiece:
    """lam * theta + i * lam_imag * theta_imag on the points of cell."""

    cell: DefinableFormula
    lam: Fraction
    theta: ThetaSpec
    lam_imag: Fraction
    theta_imag: ThetaSpec


@dataclass(frozen=True)
class BasicPredicate:
    pieces: Tuple[PredicatePiece, ...]

    @property
    def arity(self) -> int:
        return self.pieces[0].cell.arity

    def cell_index(
        self, desc: FieldDescriptor, params: Sequence[FieldElement], scan_cap: int = DEFAULT_SCAN_CAP
    ) -> int:
        point = tuple(params)
        hits = [i for i, piece in enumerate(self.pieces) if formula_holds(desc, piece.cell.root, point, scan_cap)]
        if len(hits) != 1:
            raise ValueError(f"Parameters lie in {len(hits)} cells; cells must partition the parameter space")
        return hits[0]

    def exact(
        self,
        desc: FieldDescriptor,
        params: Sequence[FieldElement],
        psi: AdditiveCharacter,
        chi: MultiplicativeCharacter,
    ) -> CyclotomicValue:
        piece = self.pieces[self.cell_index(desc, params)]
        real = theta_exact(desc, piece.theta, params, psi, chi).scale(piece.lam)
        imag = theta_exact(desc, piece.theta_imag, params, psi, chi).scale(piece.lam_imag)
        return real + CyclotomicValue.root(Fraction(1, 4)) * imag

    def evaluate(
        self,
        desc: FieldDescriptor,
        params: Sequence[FieldElement],
        psi: AdditiveCharacter,
        chi: MultiplicativeCharacter,
    ) -> complex:
        return self.exact(desc, params, psi, chi).to_complex()

    def conjugate(self) -> "BasicPredicate":
        return BasicPredicate(
            tuple(
                PredicatePiece(
                    p.cell,
                    p.lam,
                    theta_combine("conjugate", p.theta),
                    -p.lam_imag,
                    theta_combine("conjugate", p.theta_imag),
                )
                for p in self.pieces
            )
        )

    def check_partition(self, desc: FieldDescriptor, scan_cap: int = DEFAULT_SCAN_CAP) -> List[int]:
        """Cell index of every parameter tuple of F_q^arity, raising ValueError on overlaps or gaps."""
        elements = list(desc.elements())
        return [self.cell_index(desc, params, scan_cap) for params in itertools.product(elements, repeat=self.arity)]
