"""Recursive-descent parser for .cdl sources."""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from ..core.errors import ArityMismatch, CdlSyntaxError, UnresolvedReference
from .ast import (
    DECLARATION_KINDS,
    Abs,
    And,
    BinOp,
    Block,
    BoolConst,
    Chi,
    Component,
    Conj,
    Const,
    ConstComponent,
    Declaration,
    DefinableFormula,
    Eq,
    Exponent,
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
    Node,
    Not,
    Number,
    Or,
    PolyExpr,
    PolyTerm,
    PredicateExpr,
    PredicateNode,
    Program,
    Psi,
    RationalPoly,
    RootComponent,
    Target,
    ThetaRef,
    ThetaSpec,
    UnityConstraint,
    WitnessSpec,
    poly_add,
    poly_mul,
    poly_pow,
    poly_scale,
)
from .lexer import Token, tokenize

logger = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 64

FORMULA_KEYWORDS = {"and", "or", "not", "true", "false", "exists"}
PREDICATE_KEYWORDS = {"psi", "chi", "ind", "conj", "abs", "i"}

Terms = Dict[Exponent, Number]


@dataclass
class AlgebraContext:
    """How an algebraic expression maps names to variable slots and which shortcuts it allows."""

    resolve: Callable[[str], Optional[int]]
    size: int
    negative_exponents: bool = False
    implicit_mult: bool = False
    division: bool = False


def indexed_names(prefix: str, count: int, offset: int = 0) -> Callable[[str], Optional[int]]:
    """Resolver for prefix1..prefixN; out-of-range indices raise ArityMismatch."""
    pattern = re.compile(rf"^{prefix}(\d+)$")

    def resolve(name: str) -> Optional[int]:
        match = pattern.match(name)
        if not match:
            return None
        index = int(match.group(1))
        if not 1 <= index <= count:
            raise ArityMismatch(f"Variable {name} outside declared arity {count}")
        return offset + index - 1

    return resolve


def with_extra(base: Callable[[str], Optional[int]], name: str, slot: int) -> Callable[[str], Optional[int]]:
    def resolve(candidate: str) -> Optional[int]:
        if candidate == name:
            return slot
        return base(candidate)

    return resolve


def combine(*resolvers: Callable[[str], Optional[int]]) -> Callable[[str], Optional[int]]:
    def resolve(name: str) -> Optional[int]:
        for r in resolvers:
            slot = r(name)
            if slot is not None:
                return slot
        return None

    return resolve


class Parser:
    """Parser over a token list; one instance per source."""

    def __init__(self, source: str, max_depth: int = DEFAULT_MAX_DEPTH) -> None:
        self.tokens = tokenize(source)
        self.pos = 0
        self.max_depth = max_depth
        self.depth = 0

    # token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def lookahead(self, k: int) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, message: str, expected: Tuple[str, ...] = ()) -> CdlSyntaxError:
        tok = self.tok
        found = tok.text or "end of input"
        return CdlSyntaxError(f"{message}, found {found!r}", tok.line, tok.column, expected)

    def expect_op(self, text: str) -> Token:
        if not self.tok.is_op(text):
            raise self.error(f"expected '{text}'", (text,))
        return self.advance()

    def expect_word(self, text: str) -> Token:
        if not self.tok.is_word(text):
            raise self.error(f"expected '{text}'", (text,))
        return self.advance()

    def expect_int(self) -> int:
        if self.tok.kind != "INT":
            raise self.error("expected an integer", ("INT",))
        return int(self.advance().text)

    def signed_int(self) -> int:
        sign = 1
        if self.tok.is_op("-"):
            self.advance()
            sign = -1
        return sign * self.expect_int()

    def rational(self) -> Fraction:
        value = Fraction(self.signed_int())
        if self.tok.is_op("/"):
            self.advance()
            den = self.expect_int()
            if den == 0:
                raise self.error("zero denominator")
            value /= den
        return value

    def enter(self) -> None:
        self.depth += 1
        if self.depth > self.max_depth:
            raise self.error(f"nesting deeper than {self.max_depth}")

    def leave(self) -> None:
        self.depth -= 1

    def at_declaration(self) -> bool:
        tok = self.tok
        if tok.kind != "IDENT" or tok.text not in DECLARATION_KINDS:
            return False
        nxt = self.lookahead(1)
        if nxt.kind == "INT":
            return self.lookahead(2).is_op(":")
        return nxt.kind == "IDENT" and self.lookahead(2).kind == "INT" and self.lookahead(3).is_op(":")

    def at_end_of_body(self) -> bool:
        return self.tok.kind == "EOF" or self.at_declaration()

    # program

    def parse_program(self) -> Program:
        program = Program()
        names = set()
        if self.tok.kind == "EOF":
            raise self.error("empty program", DECLARATION_KINDS)
        while self.tok.kind != "EOF":
            decl = self.parse_declaration()
            if decl.name is not None:
                if decl.name in names:
                    raise CdlSyntaxError(f"duplicate declaration '{decl.name}'", decl.line, 1)
                names.add(decl.name)
            program.declarations.append(decl)
        resolve_references(program)
        return program

    def parse_declaration(self) -> Declaration:
        if not self.at_declaration():
            raise self.error("expected a declaration", DECLARATION_KINDS)
        kind_tok = self.advance()
        name = None
        if self.tok.kind == "IDENT":
            name = self.advance().text
        arity = self.expect_int()
        self.expect_op(":")
        body = getattr(self, f"body_{kind_tok.text}")
        node = body(arity)
        if not self.at_end_of_body():
            raise self.error("unexpected token after declaration body", ("end of declaration",))
        return Declaration(kind_tok.text, name, arity, node, kind_tok.line)

    # algebraic expressions over a dict representation

    def algebra(self, ctx: AlgebraContext) -> Terms:
        self.enter()
        negate = False
        if self.tok.is_op("-") or self.tok.is_op("+"):
            negate = self.advance().text == "-"
        result = self.alg_term(ctx)
        if negate:
            result = poly_scale(result, -1)
        while self.tok.is_op("+") or self.tok.is_op("-"):
            op = self.advance().text
            term = self.alg_term(ctx)
            result = poly_add(result, term if op == "+" else poly_scale(term, -1))
        self.leave()
        return result

    def starts_primary(self, ctx: AlgebraContext) -> bool:
        tok = self.tok
        if tok.kind == "INT" or tok.is_op("("):
            return True
        return tok.kind == "IDENT" and ctx.resolve(tok.text) is not None

    def alg_term(self, ctx: AlgebraContext) -> Terms:
        result = self.alg_factor(ctx)
        while True:
            if self.tok.is_op("*"):
                self.advance()
                result = poly_mul(result, self.alg_factor(ctx))
            elif self.tok.is_op("/") and ctx.division:
                self.advance()
                divisor = self.alg_factor(ctx)
                constant = divisor.get((0,) * ctx.size) if len(divisor) == 1 else None
                if not constant:
                    raise self.error("division only by nonzero constants")
                result = poly_scale(result, Fraction(1) / Fraction(constant))
            elif ctx.implicit_mult and self.starts_primary(ctx):
                result = poly_mul(result, self.alg_factor(ctx))
            else:
                return result

    def alg_factor(self, ctx: AlgebraContext) -> Terms:
        base = self.alg_primary(ctx)
        if not self.tok.is_op("^"):
            return base
        self.advance()
        negative = False
        if self.tok.is_op("-"):
            if not ctx.negative_exponents:
                raise self.error("negative exponents are not allowed here", ("INT",))
            self.advance()
            negative = True
        exponent = self.expect_int()
        if not negative:
            return poly_pow(base, exponent, ctx.size)
        if len(base) != 1:
            raise self.error("negative exponents apply to monomials only")
        (exp, coeff), = base.items()
        inverse = {tuple(-e for e in exp): Fraction(1) / Fraction(coeff)}
        return poly_pow(inverse, exponent, ctx.size)

    def alg_primary(self, ctx: AlgebraContext) -> Terms:
        tok = self.tok
        if tok.kind == "INT":
            self.advance()
            return {(0,) * ctx.size: int(tok.text)} if int(tok.text) else {}
        if tok.is_op("("):
            self.advance()
            inner = self.algebra(ctx)
            self.expect_op(")")
            return inner
        if tok.kind == "IDENT":
            slot = ctx.resolve(tok.text)
            if slot is not None:
                self.advance()
                return {tuple(1 if i == slot else 0 for i in range(ctx.size)): 1}
        raise self.error("expected a term", ("INT", "variable", "("))

    def poly(self, arity: int, extra: Optional[str] = None) -> PolyExpr:
        size = arity + (1 if extra else 0)
        resolve = indexed_names("x", arity)
        if extra:
            resolve = with_extra(resolve, extra, arity)
        terms = self.algebra(AlgebraContext(resolve, size))
        return self.to_poly(terms, size)

    def to_poly(self, terms: Terms, size: int) -> PolyExpr:
        for coeff in terms.values():
            if Fraction(coeff).denominator != 1:
                raise self.error("polynomial coefficients must be integers")
        return PolyExpr.from_terms(terms, size)

    def univariate(self) -> RationalPoly:
        ctx = AlgebraContext(lambda name: 0 if name == "X" else None, 1, division=True)
        return RationalPoly.from_terms(self.algebra(ctx))

    def int_list(self) -> Tuple[int, ...]:
        self.expect_op("[")
        values = []
        if not self.tok.is_op("]"):
            values.append(self.signed_int())
            while self.tok.is_op(","):
                self.advance()
                values.append(self.signed_int())
        self.expect_op("]")
        return tuple(values)

    # declaration bodies

    def body_poly(self, arity: int) -> PolyExpr:
        return self.poly(arity)

    def body_laurent(self, n: int) -> LaurentPoly:
        resolve = combine(indexed_names("Y", n), indexed_names("Z", n, offset=n))
        ctx = AlgebraContext(resolve, 2 * n, negative_exponents=True, implicit_mult=True, division=True)
        return LaurentPoly.from_terms(self.algebra(ctx), n)

    def body_linmap(self, inputs: int) -> IntegralLinearMap:
        return IntegralLinearMap(self.matrix(inputs))

    def body_multmap(self, inputs: int) -> IntegralMultiplicativeMap:
        return IntegralMultiplicativeMap(self.matrix(inputs))

    def matrix(self, inputs: int) -> Tuple[Tuple[int, ...], ...]:
        self.expect_op("[")
        rows = [self.int_list()]
        while self.tok.is_op(","):
            self.advance()
            rows.append(self.int_list())
        self.expect_op("]")
        if len(rows) != inputs:
            raise ArityMismatch(f"Map declared with {inputs} inputs has {len(rows)} rows")
        return tuple(rows)

    def body_formula(self, arity: int) -> DefinableFormula:
        return DefinableFormula(self.formula(arity), arity)

    def formula(self, arity: int) -> FormulaNode:
        self.enter()
        children = [self.formula_and(arity)]
        while self.tok.is_word("or"):
            self.advance()
            children.append(self.formula_and(arity))
        self.leave()
        return children[0] if len(children) == 1 else Or(tuple(children))

    def formula_and(self, arity: int) -> FormulaNode:
        children = [self.formula_not(arity)]
        while self.tok.is_word("and"):
            self.advance()
            children.append(self.formula_not(arity))
        return children[0] if len(children) == 1 else And(tuple(children))

    def formula_not(self, arity: int) -> FormulaNode:
        if self.tok.is_word("not"):
            self.advance()
            self.enter()
            child = self.formula_not(arity)
            self.leave()
            return Not(child)
        return self.formula_primary(arity)

    def formula_primary(self, arity: int) -> FormulaNode:
        tok = self.tok
        if tok.is_word("true") or tok.is_word("false"):
            self.advance()
            return BoolConst(tok.text == "true")
        if tok.is_word("exists"):
            self.advance()
            if self.tok.kind != "IDENT" or self.tok.text in FORMULA_KEYWORDS:
                raise self.error("expected a bound variable name", ("IDENT",))
            bound = self.advance().text
            self.expect_op("(")
            lhs = self.poly(arity, extra=bound)
            self.expect_op("=")
            rhs = self.poly(arity, extra=bound)
            self.expect_op(")")
            poly = lhs - rhs
            if poly.degree_in(arity) == 0:
                raise self.error(f"exists-atom does not involve {bound}")
            return ExistsEq(poly)
        if tok.is_op("("):
            saved = self.pos, self.depth
            try:
                self.advance()
                inner = self.formula(arity)
                self.expect_op(")")
                if not (self.tok.is_op("=") or self.tok.is_op("!=") or self.tok.is_op("^") or self.tok.is_op("*")):
                    return inner
            except CdlSyntaxError:
                pass
            self.pos, self.depth = saved
        return self.formula_atom(arity)

    def formula_atom(self, arity: int) -> FormulaNode:
        lhs = self.poly(arity)
        if self.tok.is_op("="):
            self.advance()
            return Eq(lhs - self.poly(arity))
        if self.tok.is_op("!="):
            self.advance()
            return Not(Eq(lhs - self.poly(arity)))
        raise self.error("expected '=' or '!='", ("=", "!="))

    def body_predicate(self, arity: int) -> PredicateExpr:
        return PredicateExpr(self.predicate(arity), arity)

    def predicate(self, arity: int) -> PredicateNode:
        self.enter()
        node = self.pred_term(arity)
        while self.tok.is_op("+") or self.tok.is_op("-"):
            op = self.advance().text
            node = BinOp(op, node, self.pred_term(arity))
        self.leave()
        return node

    def pred_term(self, arity: int) -> PredicateNode:
        node = self.pred_unary(arity)
        while self.tok.is_op("*"):
            self.advance()
            node = BinOp("*", node, self.pred_unary(arity))
        return node

    def pred_unary(self, arity: int) -> PredicateNode:
        if self.tok.is_op("-"):
            if self.lookahead(1).kind == "INT":
                return Const(self.rational())
            self.advance()
            self.enter()
            operand = self.pred_unary(arity)
            self.leave()
            return BinOp("*", Const(Fraction(-1)), operand)
        return self.pred_primary(arity)

    def pred_primary(self, arity: int) -> PredicateNode:
        tok = self.tok
        if tok.kind == "INT":
            return Const(self.rational())
        if tok.is_word("i"):
            self.advance()
            return ImagUnit()
        if tok.is_word("psi") or tok.is_word("chi"):
            self.advance()
            self.expect_op("(")
            arg = self.field_term(arity)
            self.expect_op(")")
            return Psi(arg) if tok.text == "psi" else Chi(arg)
        if tok.is_word("ind"):
            self.advance()
            self.expect_op("[")
            formula = self.formula(arity)
            self.expect_op("]")
            return Indicator(formula)
        if tok.is_word("conj") or tok.is_word("abs"):
            self.advance()
            self.expect_op("(")
            inner = self.predicate(arity)
            self.expect_op(")")
            return Conj(inner) if tok.text == "conj" else Abs(inner)
        if tok.is_op("@"):
            self.advance()
            name = self.reference_name()
            return ThetaRef(name, self.poly_args(arity))
        if tok.is_op("("):
            self.advance()
            inner = self.predicate(arity)
            self.expect_op(")")
            return inner
        raise self.error("expected a predicate term", ("INT", "i", "psi", "chi", "ind", "conj", "abs", "@", "("))

    def reference_name(self) -> str:
        if self.tok.kind != "IDENT":
            raise self.error("expected a declaration name", ("IDENT",))
        return self.advance().text

    def poly_args(self, arity: int) -> Tuple[PolyExpr, ...]:
        self.expect_op("(")
        args = []
        if not self.tok.is_op(")"):
            args.append(self.poly(arity))
            while self.tok.is_op(","):
                self.advance()
                args.append(self.poly(arity))
        self.expect_op(")")
        return tuple(args)

    def field_term(self, arity: int) -> FieldTerm:
        if self.tok.is_op("@"):
            self.advance()
            name = self.reference_name()
            if self.tok.is_op("["):
                self.advance()
                index = self.expect_int()
                self.expect_op("]")
                return MapRow(name, index)
            return KappaRef(name, self.poly_args(arity))
        return PolyTerm(self.poly(arity))

    def body_theta(self, arity: int) -> ThetaSpec:
        self.expect_word("fiber")
        blocks = [self.theta_block(arity)]
        while self.tok.is_op("|"):
            self.advance()
            blocks.append(self.theta_block(arity))
        self.expect_word("g")
        g = self.int_list()
        self.expect_word("h")
        h = self.int_list()
        bound = None
        if self.tok.is_word("bound"):
            self.advance()
            bound = self.expect_int()
        return ThetaSpec(arity, tuple(blocks), g, h, bound)

    def theta_block(self, arity: int) -> Block:
        self.expect_op("{")
        components = [self.theta_component(arity)]
        while self.tok.is_op(","):
            self.advance()
            components.append(self.theta_component(arity))
        self.expect_op("}")
        return tuple(components)

    def theta_component(self, arity: int) -> Component:
        if self.tok.is_word("root"):
            self.advance()
            return RootComponent(self.poly(arity, extra="z"))
        if self.tok.is_word("const"):
            self.advance()
            return ConstComponent(self.rational())
        raise self.error("expected a fiber component", ("root", "const"))

    def body_kappa(self, arity: int) -> KappaSpec:
        p_poly = self.poly(arity, extra="y")
        self.expect_op("->")
        q_poly = self.poly(arity, extra="y")
        return KappaSpec(arity, p_poly, q_poly)

    def body_witness(self, degree: int) -> WitnessSpec:
        min_poly: Optional[RationalPoly] = None
        mult: List[Target] = []
        add: List[Target] = []
        options: Dict[str, object] = {}
        while not self.at_end_of_body():
            word = self.tok
            if word.is_word("minpoly"):
                self.advance()
                min_poly = self.univariate()
            elif word.is_word("mult") or word.is_word("add"):
                self.advance()
                poly = self.univariate()
                self.expect_op("->")
                (mult if word.text == "mult" else add).append(Target(poly, self.rational()))
            elif word.is_word("tolerance"):
                self.advance()
                options["tolerance"] = self.rational()
            elif word.is_word("unity"):
                self.advance()
                options["unity"] = self.unity_constraint()
            elif word.is_word("order"):
                self.advance()
                options["min_order"] = self.expect_int()
            elif word.is_word("primes"):
                self.advance()
                options["prime_low"] = self.expect_int()
                self.expect_op("..")
                options["prime_high"] = self.expect_int()
            else:
                raise self.error(
                    "expected a witness clause", ("minpoly", "mult", "add", "tolerance", "unity", "order", "primes")
                )
        if min_poly is None:
            raise self.error("witness needs a minpoly clause", ("minpoly",))
        if min_poly.degree != degree:
            raise ArityMismatch(f"Witness declared degree {degree} but minpoly has degree {min_poly.degree}")
        try:
            return WitnessSpec(min_poly, tuple(mult), tuple(add), **options)  # type: ignore[arg-type]
        except ValueError as e:
            raise self.error(str(e))

    def unity_constraint(self) -> UnityConstraint:
        modulus = self.expect_int()
        residue = lam = target = None
        if self.tok.is_word("f"):
            self.advance()
            residue = self.expect_int()
        if self.tok.is_word("lambda"):
            self.advance()
            lam = self.univariate()
        if self.tok.is_word("target"):
            self.advance()
            target = self.rational()
        return UnityConstraint(modulus, residue, lam, target)


def resolve_references(program: Program) -> None:
    """Check that every @reference names a declaration of the right kind and shape."""
    for decl in program.declarations:
        if isinstance(decl.node, PredicateExpr):
            _resolve_predicate(program, decl.node.root, decl.arity)


def _resolve_field_term(program: Program, term: FieldTerm, arity: int, map_kind: str) -> None:
    if isinstance(term, KappaRef):
        target = program.get(term.name, "kappa")
        if target is None:
            raise UnresolvedReference(f"No kappa declaration named '{term.name}'")
        if target.arity != len(term.args):
            raise ArityMismatch(f"kappa '{term.name}' takes {target.arity} arguments, got {len(term.args)}")
    elif isinstance(term, MapRow):
        target = program.get(term.name, map_kind)
        if target is None:
            raise UnresolvedReference(f"No {map_kind} declaration named '{term.name}'")
        node = target.node
        assert isinstance(node, (IntegralLinearMap, IntegralMultiplicativeMap))
        if node.inputs != arity:
            raise ArityMismatch(f"{map_kind} '{term.name}' has {node.inputs} inputs, predicate arity is {arity}")
        if not 1 <= term.index <= node.outputs:
            raise ArityMismatch(f"{map_kind} '{term.name}' has no output {term.index}")


def _resolve_predicate(program: Program, node: PredicateNode, arity: int) -> None:
    if isinstance(node, Psi):
        _resolve_field_term(program, node.arg, arity, "linmap")
    elif isinstance(node, Chi):
        _resolve_field_term(program, node.arg, arity, "multmap")
    elif isinstance(node, ThetaRef):
        target = program.get(node.name, "theta")
        if target is None:
            raise UnresolvedReference(f"No theta declaration named '{node.name}'")
        if target.arity != len(node.args):
            raise ArityMismatch(f"theta '{node.name}' takes {target.arity} arguments, got {len(node.args)}")
    elif isinstance(node, BinOp):
        _resolve_predicate(program, node.left, arity)
        _resolve_predicate(program, node.right, arity)
    elif isinstance(node, (Conj, Abs)):
        _resolve_predicate(program, node.child, arity)


def parse_source(text: str, max_depth: int = DEFAULT_MAX_DEPTH) -> Program:
    """Parse a .cdl source into a Program with resolved references."""
    return Parser(text, max_depth).parse_program()


def parse_node(text: str, max_depth: int = DEFAULT_MAX_DEPTH) -> Node:
    """Parse a source holding a single declaration and return its AST node."""
    program = parse_source(text, max_depth)
    if len(program.declarations) != 1:
        raise CdlSyntaxError(f"expected one declaration, found {len(program.declarations)}", 1, 1)
    return program.declarations[0].node


def parse_file(path: str, max_depth: int = DEFAULT_MAX_DEPTH) -> Program:
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    logger.debug("Parsing %s", path)
    return parse_source(text, max_depth)
