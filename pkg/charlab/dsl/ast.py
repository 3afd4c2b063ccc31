"""AST node types for the charlab definition language (.cdl)."""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import ArityMismatch
from ..core.field import FieldDescriptor, FieldElement

Exponent = Tuple[int, ...]
Number = Union[int, Fraction]

# polynomial algebra over dicts {exponent: coefficient}


def poly_add(a: Mapping[Exponent, Number], b: Mapping[Exponent, Number]) -> Dict[Exponent, Number]:
    out: Dict[Exponent, Number] = dict(a)
    for exp, coeff in b.items():
        total = out.get(exp, 0) + coeff
        if total:
            out[exp] = total
        else:
            out.pop(exp, None)
    return out


def poly_scale(a: Mapping[Exponent, Number], factor: Number) -> Dict[Exponent, Number]:
    if not factor:
        return {}
    return {exp: coeff * factor for exp, coeff in a.items()}


def poly_mul(a: Mapping[Exponent, Number], b: Mapping[Exponent, Number]) -> Dict[Exponent, Number]:
    out: Dict[Exponent, Number] = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            exp = tuple(x + y for x, y in zip(e1, e2))
            total = out.get(exp, 0) + c1 * c2
            if total:
                out[exp] = total
            else:
                out.pop(exp, None)
    return out


def poly_pow(a: Mapping[Exponent, Number], n: int, arity: int) -> Dict[Exponent, Number]:
    result: Dict[Exponent, Number] = {(0,) * arity: 1}
    base = dict(a)
    while n:
        if n & 1:
            result = poly_mul(result, base)
        base = poly_mul(base, base)
        n >>= 1
    return result


def _powmod_array(values: np.ndarray, exponent: int, p: int) -> np.ndarray:
    result = np.ones_like(values)
    base = values % p
    while exponent:
        if exponent & 1:
            result = result * base % p
        base = base * base % p
        exponent >>= 1
    return result


@dataclass(frozen=True)
class PolyExpr:
    """Integer polynomial; terms sorted by descending exponent vector, no zero coefficients."""

    terms: Tuple[Tuple[Exponent, int], ...]
    arity: int

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise ArityMismatch(f"Polynomial arity must be >= 1, got {self.arity}")
        for exp, coeff in self.terms:
            if len(exp) != self.arity:
                raise ArityMismatch(f"Exponent {exp} does not match arity {self.arity}")
            if coeff == 0:
                raise ValueError("Zero coefficients are not stored")

    @classmethod
    def from_terms(cls, terms: Mapping[Exponent, Number], arity: int) -> "PolyExpr":
        cleaned = []
        for exp, coeff in terms.items():
            if Fraction(coeff).denominator != 1:
                raise ValueError(f"Polynomial coefficient {coeff} is not an integer")
            if coeff:
                cleaned.append((tuple(exp), int(coeff)))
        return cls(tuple(sorted(cleaned, reverse=True)), arity)

    @classmethod
    def constant(cls, value: int, arity: int) -> "PolyExpr":
        return cls.from_terms({(0,) * arity: value}, arity)

    @classmethod
    def variable(cls, index: int, arity: int) -> "PolyExpr":
        return cls.from_terms({tuple(1 if i == index else 0 for i in range(arity)): 1}, arity)

    def as_dict(self) -> Dict[Exponent, int]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(exp) for exp, _ in self.terms)

    def constant_term(self) -> int:
        return self.as_dict().get((0,) * self.arity, 0)

    def degree_in(self, var: int) -> int:
        return max((exp[var] for exp, _ in self.terms), default=0)

    def total_degree(self) -> int:
        return max((sum(exp) for exp, _ in self.terms), default=0)

    def used_variables(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.arity) if any(exp[i] for exp, _ in self.terms))

    def __add__(self, other: "PolyExpr") -> "PolyExpr":
        return PolyExpr.from_terms(poly_add(self.as_dict(), other.as_dict()), self.arity)

    def __neg__(self) -> "PolyExpr":
        return PolyExpr.from_terms(poly_scale(self.as_dict(), -1), self.arity)

    def __sub__(self, other: "PolyExpr") -> "PolyExpr":
        return self + (-other)

    def __mul__(self, other: "PolyExpr") -> "PolyExpr":
        return PolyExpr.from_terms(poly_mul(self.as_dict(), other.as_dict()), self.arity)

    def scale(self, factor: int) -> "PolyExpr":
        return PolyExpr.from_terms(poly_scale(self.as_dict(), factor), self.arity)

    def with_arity(self, arity: int, offset: int = 0) -> "PolyExpr":
        """Re-embed into arity variables, shifting every variable index by offset."""
        if offset + self.arity > arity:
            raise ArityMismatch(f"Cannot embed arity {self.arity} at offset {offset} into {arity}")
        terms = {}
        for exp, coeff in self.terms:
            new = [0] * arity
            new[offset : offset + self.arity] = exp
            terms[tuple(new)] = coeff
        return PolyExpr.from_terms(terms, arity)

    def evaluate(self, desc: FieldDescriptor, point: Sequence[FieldElement]) -> FieldElement:
        if len(point) != self.arity:
            raise ArityMismatch(f"Polynomial of arity {self.arity} evaluated at {len(point)} values")
        if desc.e == 1:
            return FieldElement((self.evaluate_mod(desc.p, [x.coeffs[0] for x in point]),))
        total = desc.zero
        powers: Dict[Tuple[int, int], FieldElement] = {}
        for exp, coeff in self.terms:
            term = desc.element(coeff)
            for i, k in enumerate(exp):
                if k:
                    key = (i, k)
                    if key not in powers:
                        powers[key] = desc.pow(point[i], k)
                    term = desc.mul(term, powers[key])
            total = desc.add(total, term)
        return total

    def evaluate_mod(self, p: int, values: Sequence[int]) -> int:
        """Evaluate over the prime field F_p on integer representatives."""
        total = 0
        for exp, coeff in self.terms:
            term = coeff
            for v, k in zip(values, exp):
                if k:
                    term = term * pow(v, k, p) % p
            total += term
        return total % p

    def evaluate_array(self, p: int, values: Sequence[Union[int, np.ndarray]]) -> np.ndarray:
        """Vectorized evaluation over F_p; array arguments broadcast together."""
        arrays = [np.asarray(v, dtype=np.int64) % p for v in values]
        shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
        total = np.zeros(shape, dtype=np.int64)
        for exp, coeff in self.terms:
            term = np.full(shape, coeff % p, dtype=np.int64)
            for arr, k in zip(arrays, exp):
                if k:
                    term = term * _powmod_array(arr, k, p) % p
            total = (total + term) % p
        return total

    def univariate(self, desc: FieldDescriptor, var: int, point: Sequence[FieldElement]) -> List[FieldElement]:
        """Coefficients (low degree first) in variable var after substituting the other coordinates."""
        degree = self.degree_in(var)
        coeffs = [desc.zero] * (degree + 1)
        for exp, coeff in self.terms:
            term = desc.element(coeff)
            for i, k in enumerate(exp):
                if k and i != var:
                    term = desc.mul(term, desc.pow(point[i], k))
            coeffs[exp[var]] = desc.add(coeffs[exp[var]], term)
        return coeffs


@dataclass(frozen=True)
class IntegralLinearMap:
    """y_j = sum_i a_{i,j} x_i; rows are inputs, columns outputs."""

    matrix: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.matrix or not self.matrix[0]:
            raise ArityMismatch("Linear map dimensions must be positive")
        if len({len(row) for row in self.matrix}) != 1:
            raise ArityMismatch("Linear map rows have different lengths")

    @property
    def inputs(self) -> int:
        return len(self.matrix)

    @property
    def outputs(self) -> int:
        return len(self.matrix[0])

    def column(self, j: int) -> Tuple[int, ...]:
        return tuple(row[j] for row in self.matrix)

    def apply(self, desc: FieldDescriptor, point: Sequence[FieldElement]) -> Tuple[FieldElement, ...]:
        return tuple(apply_linear_form(desc, self.column(j), point) for j in range(self.outputs))


@dataclass(frozen=True)
class IntegralMultiplicativeMap:
    """y_j = prod_i x_i^{a_{i,j}}; zero when a coordinate with nonzero exponent vanishes."""

    matrix: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.matrix or not self.matrix[0]:
            raise ArityMismatch("Multiplicative map dimensions must be positive")
        if len({len(row) for row in self.matrix}) != 1:
            raise ArityMismatch("Multiplicative map rows have different lengths")

    @property
    def inputs(self) -> int:
        return len(self.matrix)

    @property
    def outputs(self) -> int:
        return len(self.matrix[0])

    def column(self, j: int) -> Tuple[int, ...]:
        return tuple(row[j] for row in self.matrix)

    def apply(self, desc: FieldDescriptor, point: Sequence[FieldElement]) -> Tuple[FieldElement, ...]:
        return tuple(apply_monomial(desc, self.column(j), point) for j in range(self.outputs))


def apply_linear_form(desc: FieldDescriptor, coeffs: Sequence[int], point: Sequence[FieldElement]) -> FieldElement:
    total = desc.zero
    for a, x in zip(coeffs, point):
        if a:
            total = desc.add(total, desc.scale(x, a))
    return total


def apply_monomial(desc: FieldDescriptor, exponents: Sequence[int], point: Sequence[FieldElement]) -> FieldElement:
    total = desc.one
    for t, x in zip(exponents, point):
        if t:
            if x.is_zero():
                return desc.zero
            total = desc.mul(total, desc.pow(x, t))
    return total


@dataclass(frozen=True)
class MonomialSplit:
    """Additive part on the Y block and multiplicative part on the Z block of one Laurent term."""

    plus_part: Exponent
    times_part: Exponent

    @property
    def plus_trivial(self) -> bool:
        return not any(self.plus_part)

    @property
    def times_trivial(self) -> bool:
        return not any(self.times_part)


@dataclass(frozen=True)
class LaurentPoly:
    """Laurent polynomial in Y1..Yn, Z1..Zn with rational coefficients."""

    terms: Tuple[Tuple[Exponent, Fraction], ...]
    n: int

    @classmethod
    def from_terms(cls, terms: Mapping[Exponent, Number], n: int) -> "LaurentPoly":
        cleaned = []
        for exp, coeff in terms.items():
            if len(exp) != 2 * n:
                raise ArityMismatch(f"Laurent exponent {exp} does not match block size {n}")
            if coeff:
                cleaned.append((tuple(exp), Fraction(coeff)))
        return cls(tuple(sorted(cleaned, reverse=True)), n)

    def as_dict(self) -> Dict[Exponent, Fraction]:
        return dict(self.terms)

    @property
    def has_constant_term(self) -> bool:
        return (0,) * (2 * self.n) in self.as_dict()

    @property
    def is_real_on_torus(self) -> bool:
        coeffs = self.as_dict()
        return all(coeffs.get(tuple(-v for v in exp)) == c for exp, c in coeffs.items())

    @property
    def degree(self) -> int:
        """Largest absolute exponent entry."""
        return max((abs(v) for exp, _ in self.terms for v in exp), default=0)

    def split(self) -> List[Tuple[Fraction, MonomialSplit]]:
        return [(c, MonomialSplit(exp[: self.n], exp[self.n :])) for exp, c in self.terms]


# definable formulas: boolean combinations of polynomial and existential atoms


@dataclass(frozen=True)
class Eq:
    """Atom poly = 0."""

    poly: PolyExpr


@dataclass(frozen=True)
class ExistsEq:
    """Atom exists t poly(x, t) = 0; t is the last variable of poly."""

    poly: PolyExpr


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Not:
    child: "FormulaNode"


@dataclass(frozen=True)
class And:
    children: Tuple["FormulaNode", ...]


@dataclass(frozen=True)
class Or:
    children: Tuple["FormulaNode", ...]


FormulaNode = Union[Eq, ExistsEq, BoolConst, Not, And, Or]


@dataclass(frozen=True)
class DefinableFormula:
    root: FormulaNode
    arity: int

    def atoms(self) -> Iterator[Union[Eq, ExistsEq]]:
        stack: List[FormulaNode] = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, (Eq, ExistsEq)):
                yield node
            elif isinstance(node, Not):
                stack.append(node.child)
            elif isinstance(node, (And, Or)):
                stack.extend(reversed(node.children))

    def equations(self) -> Optional[Tuple[PolyExpr, ...]]:
        """Equations of a pure conjunction of Eq atoms, or None for any other shape."""
        node = self.root
        if isinstance(node, Eq):
            return (node.poly,)
        if isinstance(node, BoolConst) and node.value:
            return ()
        if isinstance(node, And) and all(isinstance(c, Eq) for c in node.children):
            return tuple(c.poly for c in node.children)  # type: ignore[union-attr]
        return None


# predicate expressions


@dataclass(frozen=True)
class PolyTerm:
    poly: PolyExpr


@dataclass(frozen=True)
class KappaRef:
    name: str
    args: Tuple[PolyExpr, ...]


@dataclass(frozen=True)
class MapRow:
    """Output column of a named linmap (inside psi) or multmap (inside chi), 1-based."""

    name: str
    index: int


FieldTerm = Union[PolyTerm, KappaRef, MapRow]


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class ImagUnit:
    pass


@dataclass(frozen=True)
class Psi:
    arg: FieldTerm


@dataclass(frozen=True)
class Chi:
    arg: FieldTerm


@dataclass(frozen=True)
class Indicator:
    formula: FormulaNode


@dataclass(frozen=True)
class ThetaRef:
    name: str
    args: Tuple[PolyExpr, ...]


@dataclass(frozen=True)
class Conj:
    child: "PredicateNode"


@dataclass(frozen=True)
class Abs:
    child: "PredicateNode"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "PredicateNode"
    right: "PredicateNode"


PredicateNode = Union[Const, ImagUnit, Psi, Chi, Indicator, ThetaRef, Conj, Abs, BinOp]


@dataclass(frozen=True)
class PredicateExpr:
    root: PredicateNode
    arity: int

    def walk(self) -> Iterator[PredicateNode]:
        stack: List[PredicateNode] = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if isinstance(node, BinOp):
                stack.extend((node.right, node.left))
            elif isinstance(node, (Conj, Abs)):
                stack.append(node.child)


# theta and kappa


@dataclass(frozen=True)
class RootComponent:
    """All roots in z of poly(params, z); z is the last variable."""

    poly: PolyExpr


@dataclass(frozen=True)
class ConstComponent:
    value: Fraction


Component = Union[RootComponent, ConstComponent]
Block = Tuple[Component, ...]


@dataclass(frozen=True)
class ThetaSpec:
    """Finite character sum over the fiber of a union of product blocks.

    arity is the parameter count, every block has dim components, and g, h hold the additive
    coefficients and multiplicative exponents on the fiber coordinates.
    """

    arity: int
    blocks: Tuple[Block, ...]
    g: Tuple[int, ...]
    h: Tuple[int, ...]
    bound: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.blocks:
            raise ArityMismatch("Theta fiber needs at least one block")
        if any(len(b) != self.dim for b in self.blocks):
            raise ArityMismatch("Theta blocks have different dimensions")
        if len(self.g) != self.dim or len(self.h) != self.dim:
            raise ArityMismatch(f"Theta g and h must have length {self.dim}")
        for block in self.blocks:
            for comp in block:
                if isinstance(comp, RootComponent):
                    if comp.poly.arity != self.arity + 1:
                        raise ArityMismatch(f"Root polynomial must have arity {self.arity + 1}")
                    if comp.poly.degree_in(self.arity) == 0:
                        raise ArityMismatch("Root polynomial must involve z")

    @property
    def dim(self) -> int:
        return len(self.blocks[0])

    @property
    def automatic_bound(self) -> int:
        total = 0
        for block in self.blocks:
            size = 1
            for comp in block:
                if isinstance(comp, RootComponent):
                    size *= comp.poly.degree_in(self.arity)
            total += size
        return total

    @property
    def effective_bound(self) -> int:
        return self.bound if self.bound is not None else self.automatic_bound

    def as_formula(self) -> DefinableFormula:
        """Fiber membership as a formula in (params, z_1..z_dim)."""
        arity = self.arity + self.dim
        disjuncts: List[FormulaNode] = []
        for block in self.blocks:
            conjuncts: List[FormulaNode] = []
            for j, comp in enumerate(block):
                z_index = self.arity + j
                if isinstance(comp, RootComponent):
                    terms = {}
                    for exp, coeff in comp.poly.terms:
                        new = list(exp[: self.arity]) + [0] * self.dim
                        new[z_index] = exp[self.arity]
                        terms[tuple(new)] = coeff
                    conjuncts.append(Eq(PolyExpr.from_terms(terms, arity)))
                else:
                    value = comp.value
                    z = PolyExpr.variable(z_index, arity).scale(value.denominator)
                    conjuncts.append(Eq(z - PolyExpr.constant(value.numerator, arity)))
            disjuncts.append(conjuncts[0] if len(conjuncts) == 1 else And(tuple(conjuncts)))
        root = disjuncts[0] if len(disjuncts) == 1 else Or(tuple(disjuncts))
        return DefinableFormula(root, arity)


@dataclass(frozen=True)
class KappaSpec:
    """kappa_{P,Q}; P and Q have arity params + 1 with y last."""

    arity: int
    p_poly: PolyExpr
    q_poly: PolyExpr

    def __post_init__(self) -> None:
        for poly in (self.p_poly, self.q_poly):
            if poly.arity != self.arity + 1:
                raise ArityMismatch(f"Kappa polynomials must have arity {self.arity + 1}")
        if self.p_poly.degree_in(self.arity) == 0:
            raise ArityMismatch("Kappa P must be non-constant in y")


# witness specs


@dataclass(frozen=True)
class RationalPoly:
    """Univariate polynomial with rational coefficients, low degree first."""

    coeffs: Tuple[Fraction, ...]

    @classmethod
    def from_terms(cls, terms: Mapping[Exponent, Number]) -> "RationalPoly":
        degree = max((e[0] for e in terms), default=0)
        coeffs = [Fraction(0)] * (degree + 1)
        for exp, c in terms.items():
            coeffs[exp[0]] += Fraction(c)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        return cls(tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def denominators(self) -> Tuple[int, ...]:
        return tuple(c.denominator for c in self.coeffs)

    def evaluate_mod(self, p: int, x: int) -> int:
        total = 0
        for c in reversed(self.coeffs):
            total = (total * x + c.numerator * pow(c.denominator, -1, p)) % p
        return total


@dataclass(frozen=True)
class Target:
    poly: RationalPoly
    angle: Fraction


@dataclass(frozen=True)
class UnityConstraint:
    """Root-of-unity constraint: exponent congruent to f mod R, optionally chi(lambda) = target."""

    modulus: int
    residue: Optional[int] = None
    lam: Optional[RationalPoly] = None
    target: Optional[Fraction] = None


@dataclass(frozen=True)
class WitnessSpec:
    min_poly: RationalPoly
    mult_targets: Tuple[Target, ...]
    add_targets: Tuple[Target, ...] = ()
    tolerance: Fraction = Fraction(1, 20)
    unity: UnityConstraint = field(default_factory=lambda: UnityConstraint(1, 1))
    min_order: int = 1
    prime_low: Optional[int] = None
    prime_high: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0 < self.tolerance <= 1:
            raise ValueError(f"Tolerance must lie in (0, 1], got {self.tolerance}")
        if self.unity.modulus < 1:
            raise ValueError("Root-of-unity modulus R must be >= 1")
        if self.unity.residue is not None and not 1 <= self.unity.residue <= self.unity.modulus:
            raise ValueError(f"Residue f must satisfy 1 <= f <= R, got {self.unity.residue}")
        if self.prime_low is not None and self.prime_high is not None and self.prime_low > self.prime_high:
            raise ValueError("Prime range bounds out of order")


Node = Union[
    PolyExpr,
    LaurentPoly,
    DefinableFormula,
    IntegralLinearMap,
    IntegralMultiplicativeMap,
    PredicateExpr,
    ThetaSpec,
    KappaSpec,
    WitnessSpec,
]

DECLARATION_KINDS = ("poly", "laurent", "formula", "linmap", "multmap", "predicate", "theta", "kappa", "witness")


@dataclass(frozen=True)
class Declaration:
    kind: str
    name: Optional[str]
    arity: int
    node: Node
    line: int = field(default=0, compare=False)


@dataclass
class Program:
    """Parsed .cdl source: declarations in order, looked up by name."""

    declarations: List[Declaration] = field(default_factory=list)

    def get(self, name: str, kind: Optional[str] = None) -> Optional[Declaration]:
        for decl in self.declarations:
            if decl.name == name and (kind is None or decl.kind == kind):
                return decl
        return None

    def first(self, kind: str) -> Optional[Declaration]:
        for decl in self.declarations:
            if decl.kind == kind:
                return decl
        return None

    def of_kind(self, kind: str) -> List[Declaration]:
        return [d for d in self.declarations if d.kind == kind]

    def thetas(self) -> Dict[str, ThetaSpec]:
        return {d.name: d.node for d in self.declarations if d.kind == "theta" and d.name}  # type: ignore[misc]

    def kappas(self) -> Dict[str, KappaSpec]:
        return {d.name: d.node for d in self.declarations if d.kind == "kappa" and d.name}  # type: ignore[misc]
