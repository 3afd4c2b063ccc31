"""Unit tests for the .cdl lexer, parser and printer."""

from fractions import Fraction

import pytest

from charlab.core.errors import ArityMismatch, CdlSyntaxError, UnresolvedReference
from charlab.dsl.ast import (
    And,
    BinOp,
    Chi,
    ConstComponent,
    Eq,
    ExistsEq,
    IntegralLinearMap,
    KappaRef,
    LaurentPoly,
    Not,
    Or,
    PolyExpr,
    Psi,
    RootComponent,
    ThetaSpec,
    WitnessSpec,
)
from charlab.dsl.lexer import tokenize
from charlab.dsl.parser import parse_file, parse_node, parse_source
from charlab.dsl.printer import format_declaration, format_node, print_program

RICH_SOURCE = """
# every declaration kind
poly p 2 : 3*x1^2*x2 - x2 + 7
laurent h 1 : Y1 Z1 + Y1^-1 Z1^-1 + (1/2) Z1^2 + (1/2) Z1^-2
formula phi 2 : (x1 = 0 or x2 = 1) and not (x1*x2 = 2)
linmap a 2 : [[1, 2], [0, -1]]
multmap b 2 : [[1, 0], [-2, 1]]
kappa k 1 : y^2 - x1 -> y + 1
theta t 1 : fiber {root z^2 - x1, const 1/2} | {const 0, root z - 1} g [1, 0] h [0, 2] bound 3
predicate f 1 : conj(psi(@k(x1))) * abs(chi(x1) - 1) + 2*i - 1/3 + @t(x1)
predicate m 2 : psi(@a[1]) * chi(@b[2])
witness w 1 : minpoly X - 3 mult X -> 1/2 add X -> 1/4 tolerance 1/10 unity 3 f 2 lambda X + 1 target 1/3 order 2
"""


class TestLexer:
    """Test tokenization."""

    def test_operators_and_comments(self):
        tokens = tokenize("x1->y # ignored\n2..3")
        assert [(t.kind, t.text) for t in tokens] == [
            ("IDENT", "x1"),
            ("OP", "->"),
            ("IDENT", "y"),
            ("INT", "2"),
            ("OP", ".."),
            ("INT", "3"),
            ("EOF", ""),
        ]
        assert tokens[3].line == 2
        assert tokens[3].column == 1

    def test_unexpected_character(self):
        with pytest.raises(CdlSyntaxError) as exc_info:
            tokenize("poly p 1 : x1 $")
        assert exc_info.value.line == 1
        assert exc_info.value.column == 15


class TestParser:
    """Test parsing of each declaration kind."""

    def test_poly(self):
        node = parse_node("poly p 2 : (x1 + x2)^2")
        assert isinstance(node, PolyExpr)
        assert node.as_dict() == {(2, 0): 1, (1, 1): 2, (0, 2): 1}

    def test_formula_not_equal(self):
        node = parse_node("formula f 1 : x1 != 0")
        assert node.root == Not(Eq(PolyExpr.variable(0, 1)))

    def test_exists_atom(self):
        node = parse_node("formula f 1 : exists t (t^2 = x1)")
        assert isinstance(node.root, ExistsEq)
        assert node.root.poly.arity == 2
        assert node.root.poly.degree_in(1) == 2

    def test_parenthesized_formula(self):
        node = parse_node("formula f 2 : (x1 = 0 or x2 = 1) and not (x1 = x2)")
        assert isinstance(node.root, And)
        assert isinstance(node.root.children[0], Or)
        assert isinstance(node.root.children[1], Not)

    def test_laurent(self):
        node = parse_node("laurent h 2 : Y1 Z2 + Y1^-1 Z2^-1")
        assert isinstance(node, LaurentPoly)
        assert node.as_dict() == {(1, 0, 0, 1): 1, (-1, 0, 0, -1): 1}
        assert node.is_real_on_torus
        assert not node.has_constant_term

    def test_linmap(self):
        node = parse_node("linmap a 2 : [[1, 2, 3], [0, -1, 1]]")
        assert isinstance(node, IntegralLinearMap)
        assert node.inputs == 2 and node.outputs == 3
        assert node.column(1) == (2, -1)

    def test_predicate_structure(self, gauss_program):
        node = gauss_program.get("f").node
        assert isinstance(node.root, BinOp)
        assert isinstance(node.root.left, Psi) and isinstance(node.root.right, Chi)

    def test_kappa_reference(self):
        program = parse_source("kappa k 1 : y^2 - x1 -> y\npredicate f 1 : psi(@k(x1))")
        assert isinstance(program.get("f").node.root.arg, KappaRef)

    def test_theta(self):
        node = parse_node("theta t 1 : fiber {root z^2 - x1, const 1/2} | {const 0, root z} g [1, 0] h [0, 1]")
        assert isinstance(node, ThetaSpec)
        assert node.dim == 2
        assert isinstance(node.blocks[0][0], RootComponent)
        assert node.blocks[0][1] == ConstComponent(Fraction(1, 2))
        assert node.automatic_bound == 3

    def test_witness(self, sqrt2_program):
        node = sqrt2_program.get("sqrt2").node
        assert isinstance(node, WitnessSpec)
        assert node.min_poly.coeffs == (-2, 0, 1)
        assert [t.angle for t in node.mult_targets] == [Fraction(1, 3), Fraction(1, 5)]
        assert node.unity.modulus == 2 and node.unity.residue == 1
        assert node.min_order == 50
        assert (node.prime_low, node.prime_high) == (3, 1000000)

    def test_declarations_keep_line_numbers(self):
        program = parse_source("\n\npoly g 1 : x1\npoly h 1 : x1")
        assert [d.line for d in program.declarations] == [3, 4]

    def test_anonymous_declaration(self):
        program = parse_source("poly 1 : x1")
        assert program.declarations[0].name is None


class TestParserErrors:
    """Test rejected sources."""

    def test_empty_program(self):
        with pytest.raises(CdlSyntaxError, match="empty program"):
            parse_source("# nothing\n")

    def test_variable_outside_arity(self):
        with pytest.raises(ArityMismatch):
            parse_source("poly p 1 : x2")

    def test_dangling_operator(self):
        with pytest.raises(CdlSyntaxError, match="expected one of"):
            parse_source("poly p 1 : x1 +")

    def test_duplicate_names(self):
        with pytest.raises(CdlSyntaxError, match="duplicate"):
            parse_source("poly g 1 : x1\npoly g 1 : x1^2")

    def test_map_rows_must_match_inputs(self):
        with pytest.raises(ArityMismatch):
            parse_source("linmap a 2 : [[1, 0]]")

    def test_unresolved_theta(self):
        with pytest.raises(UnresolvedReference):
            parse_source("predicate f 1 : @nope(x1)")

    def test_map_output_out_of_range(self):
        with pytest.raises(ArityMismatch):
            parse_source("linmap a 1 : [[1]]\npredicate f 1 : psi(@a[2])")

    def test_witness_degree(self):
        with pytest.raises(ArityMismatch):
            parse_source("witness w 3 : minpoly X^2 - 2")

    def test_witness_needs_minpoly(self):
        with pytest.raises(CdlSyntaxError, match="minpoly"):
            parse_source("witness w 1 : tolerance 1/2")

    def test_nesting_depth(self):
        with pytest.raises(CdlSyntaxError, match="nesting deeper"):
            parse_source("poly p 1 : ((((x1))))", max_depth=3)

    def test_syntax_error_position(self):
        with pytest.raises(CdlSyntaxError) as exc_info:
            parse_source("poly p 1 : x1\nformula f 1 : x1 +")
        assert exc_info.value.line == 2
        assert "=" in exc_info.value.expected or "INT" in exc_info.value.expected

    def test_exists_must_use_bound_variable(self):
        with pytest.raises(CdlSyntaxError):
            parse_source("formula f 1 : exists t (x1 = 0)")


class TestPrinter:
    """Test canonical printing."""

    def test_declaration_form(self, gauss_program):
        assert format_declaration(gauss_program.get("g")) == "poly g 1: x1"
        assert format_declaration(gauss_program.get("units")) == "formula units 1: x1 != 0"

    def test_poly_order(self):
        assert format_node(parse_node("poly p 2 : x2^2 - x1^3 - x1")) == "-x1^3 - x1 + x2^2"

    def test_round_trip_rich_source(self):
        program = parse_source(RICH_SOURCE)
        assert parse_source(print_program(program)) == program

    @pytest.mark.parametrize("name", ["gauss", "elliptic", "squares", "sqrt2", "theta"])
    def test_round_trip_definition_files(self, definitions_dir, name):
        program = parse_file(str(definitions_dir / f"{name}.cdl"))
        printed = print_program(program)
        assert parse_source(printed) == program
        assert print_program(parse_source(printed)) == printed
