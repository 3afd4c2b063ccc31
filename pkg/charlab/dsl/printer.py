"""Canonical printing of .cdl declarations; parse_source(print_program(p)) == p."""

from fractions import Fraction
from typing import List, Optional, Sequence

from .ast import (
    Abs,
    And,
    BinOp,
    Block,
    BoolConst,
    Chi,
    Conj,
    Const,
    ConstComponent,
    Declaration,
    DefinableFormula,
    Eq,
    ExistsEq,
    FieldTerm,
    FormulaNode,
    ImagUnit,
    Indicator,
    IntegralLinearMap,
    IntegralMultiplicativeMap,
    KappaSpec,
    LaurentPoly,
    MapRow,
    Node,
    Not,
    Or,
    PolyExpr,
    PolyTerm,
    PredicateExpr,
    PredicateNode,
    Program,
    Psi,
    RationalPoly,
    RootComponent,
    ThetaRef,
    ThetaSpec,
    WitnessSpec,
)

PRECEDENCE = {"+": 1, "-": 1, "*": 2}


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _monomial(exp: Sequence[int], names: Sequence[str], sep: str = "*") -> str:
    parts = []
    for name, k in zip(names, exp):
        if k == 1:
            parts.append(name)
        elif k:
            parts.append(f"{name}^{k}")
    return sep.join(parts)


def _join_signed(pieces: List[str]) -> str:
    """pieces carry a leading '-' when negative; join them as a sum."""
    if not pieces:
        return "0"
    out = pieces[0]
    for piece in pieces[1:]:
        if piece.startswith("-"):
            out += " - " + piece[1:]
        else:
            out += " + " + piece
    return out


def variable_names(arity: int, extra: Optional[str] = None) -> List[str]:
    names = [f"x{i + 1}" for i in range(arity)]
    if extra:
        names[-1] = extra
    return names


def format_poly(poly: PolyExpr, extra: Optional[str] = None) -> str:
    """Terms in stored order, x1..xn with the last variable renamed to extra when given."""
    names = variable_names(poly.arity, extra)
    pieces = []
    for exp, coeff in poly.terms:
        mono = _monomial(exp, names)
        magnitude = abs(coeff)
        if not mono:
            body = str(magnitude)
        elif magnitude == 1:
            body = mono
        else:
            body = f"{magnitude}*{mono}"
        pieces.append(("-" if coeff < 0 else "") + body)
    return _join_signed(pieces)


def format_laurent(h: LaurentPoly) -> str:
    names = [f"Y{i + 1}" for i in range(h.n)] + [f"Z{i + 1}" for i in range(h.n)]
    pieces = []
    for exp, coeff in h.terms:
        mono = _monomial(exp, names, sep=" ")
        magnitude = abs(coeff)
        if magnitude.denominator != 1:
            scalar = f"({format_rational(magnitude)})"
        else:
            scalar = str(magnitude.numerator)
        if not mono:
            body = scalar
        elif magnitude == 1:
            body = mono
        else:
            body = f"{scalar} {mono}"
        pieces.append(("-" if coeff < 0 else "") + body)
    return _join_signed(pieces)


def format_rational_poly(poly: RationalPoly) -> str:
    pieces = []
    for degree in range(poly.degree, -1, -1):
        coeff = poly.coeffs[degree]
        if coeff == 0 and poly.degree > 0:
            continue
        mono = "" if degree == 0 else ("X" if degree == 1 else f"X^{degree}")
        magnitude = abs(coeff)
        if not mono:
            body = format_rational(magnitude)
        elif magnitude == 1:
            body = mono
        else:
            body = f"{format_rational(magnitude)}*{mono}"
        pieces.append(("-" if coeff < 0 else "") + body)
    return _join_signed(pieces)


def format_matrix(matrix: Sequence[Sequence[int]]) -> str:
    return "[" + ", ".join(format_vector(row) for row in matrix) + "]"


def format_vector(values: Sequence[int]) -> str:
    return "[" + ", ".join(str(v) for v in values) + "]"


# formulas


def _formula_level(node: FormulaNode) -> int:
    if isinstance(node, Or):
        return 1
    if isinstance(node, And):
        return 2
    return 3


def format_formula(node: FormulaNode, arity: int) -> str:
    if isinstance(node, Eq):
        return f"{format_poly(node.poly)} = 0"
    if isinstance(node, ExistsEq):
        return f"exists t ({format_poly(node.poly, extra='t')} = 0)"
    if isinstance(node, BoolConst):
        return "true" if node.value else "false"
    if isinstance(node, Not):
        if isinstance(node.child, Eq):
            return f"{format_poly(node.child.poly)} != 0"
        inner = format_formula(node.child, arity)
        if _formula_level(node.child) < 3:
            inner = f"({inner})"
        return f"not {inner}"
    level = _formula_level(node)
    keyword = " or " if isinstance(node, Or) else " and "
    parts = []
    for child in node.children:
        text = format_formula(child, arity)
        if _formula_level(child) <= level:
            text = f"({text})"
        parts.append(text)
    return keyword.join(parts)


# predicates


def format_field_term(term: FieldTerm) -> str:
    if isinstance(term, PolyTerm):
        return format_poly(term.poly)
    if isinstance(term, MapRow):
        return f"@{term.name}[{term.index}]"
    return f"@{term.name}({', '.join(format_poly(a) for a in term.args)})"


def format_predicate(node: PredicateNode, arity: int) -> str:
    if isinstance(node, Const):
        return format_rational(node.value)
    if isinstance(node, ImagUnit):
        return "i"
    if isinstance(node, Psi):
        return f"psi({format_field_term(node.arg)})"
    if isinstance(node, Chi):
        return f"chi({format_field_term(node.arg)})"
    if isinstance(node, Indicator):
        return f"ind[{format_formula(node.formula, arity)}]"
    if isinstance(node, ThetaRef):
        return f"@{node.name}({', '.join(format_poly(a) for a in node.args)})"
    if isinstance(node, Conj):
        return f"conj({format_predicate(node.child, arity)})"
    if isinstance(node, Abs):
        return f"abs({format_predicate(node.child, arity)})"
    prec = PRECEDENCE[node.op]
    left = format_predicate(node.left, arity)
    if isinstance(node.left, BinOp) and PRECEDENCE[node.left.op] < prec:
        left = f"({left})"
    right = format_predicate(node.right, arity)
    if isinstance(node.right, BinOp) and PRECEDENCE[node.right.op] <= prec:
        right = f"({right})"
    return f"{left} {node.op} {right}"


# theta, kappa, witness


def _format_block(block: Block) -> str:
    parts = []
    for comp in block:
        if isinstance(comp, RootComponent):
            parts.append(f"root {format_poly(comp.poly, extra='z')}")
        else:
            assert isinstance(comp, ConstComponent)
            parts.append(f"const {format_rational(comp.value)}")
    return "{" + ", ".join(parts) + "}"


def format_theta(spec: ThetaSpec) -> str:
    text = "fiber " + " | ".join(_format_block(b) for b in spec.blocks)
    text += f" g {format_vector(spec.g)} h {format_vector(spec.h)}"
    if spec.bound is not None:
        text += f" bound {spec.bound}"
    return text


def format_kappa(spec: KappaSpec) -> str:
    return f"{format_poly(spec.p_poly, extra='y')} -> {format_poly(spec.q_poly, extra='y')}"


def format_witness(spec: WitnessSpec) -> str:
    lines = [f"minpoly {format_rational_poly(spec.min_poly)}"]
    for target in spec.mult_targets:
        lines.append(f"mult {format_rational_poly(target.poly)} -> {format_rational(target.angle)}")
    for target in spec.add_targets:
        lines.append(f"add {format_rational_poly(target.poly)} -> {format_rational(target.angle)}")
    lines.append(f"tolerance {format_rational(spec.tolerance)}")
    unity = f"unity {spec.unity.modulus}"
    if spec.unity.residue is not None:
        unity += f" f {spec.unity.residue}"
    if spec.unity.lam is not None:
        unity += f" lambda {format_rational_poly(spec.unity.lam)}"
    if spec.unity.target is not None:
        unity += f" target {format_rational(spec.unity.target)}"
    lines.append(unity)
    lines.append(f"order {spec.min_order}")
    if spec.prime_low is not None and spec.prime_high is not None:
        lines.append(f"primes {spec.prime_low}..{spec.prime_high}")
    return "\n  ".join(lines)


def format_node(node: Node) -> str:
    if isinstance(node, PolyExpr):
        return format_poly(node)
    if isinstance(node, LaurentPoly):
        return format_laurent(node)
    if isinstance(node, DefinableFormula):
        return format_formula(node.root, node.arity)
    if isinstance(node, (IntegralLinearMap, IntegralMultiplicativeMap)):
        return format_matrix(node.matrix)
    if isinstance(node, PredicateExpr):
        return format_predicate(node.root, node.arity)
    if isinstance(node, ThetaSpec):
        return format_theta(node)
    if isinstance(node, KappaSpec):
        return format_kappa(node)
    if isinstance(node, WitnessSpec):
        return format_witness(node)
    raise TypeError(f"Cannot print {type(node).__name__}")


def format_declaration(decl: Declaration) -> str:
    head = decl.kind if decl.name is None else f"{decl.kind} {decl.name}"
    return f"{head} {decl.arity}: {format_node(decl.node)}"


def print_program(program: Program) -> str:
    return "\n".join(format_declaration(d) for d in program.declarations) + "\n"
