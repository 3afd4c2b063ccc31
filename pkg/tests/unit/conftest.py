"""Pytest configuration and fixtures for unit tests."""

from pathlib import Path

import pytest

from charlab.core.characters import AdditiveCharacter, MultiplicativeCharacter, standard_character
from charlab.core.field import FieldDescriptor, make_field
from charlab.dsl.ast import Program
from charlab.dsl.parser import parse_file

DEFINITIONS = Path(__file__).resolve().parents[2] / "definitions"


@pytest.fixture
def f7() -> FieldDescriptor:
    """The prime field F_7, generator 3."""
    return make_field(7)


@pytest.fixture
def f9() -> FieldDescriptor:
    """F_9 = F_3[X]/(X^2 + 1), generator 1 + X."""
    return make_field(3, 2)


@pytest.fixture
def f8() -> FieldDescriptor:
    """F_8 = F_2[X]/(X^3 + X^2 + 1)."""
    return make_field(2, 3)


@pytest.fixture
def f13() -> FieldDescriptor:
    return make_field(13)


@pytest.fixture
def psi7(f7) -> AdditiveCharacter:
    return standard_character(f7)


@pytest.fixture
def chi7() -> MultiplicativeCharacter:
    return MultiplicativeCharacter(1)


@pytest.fixture
def definitions_dir() -> Path:
    return DEFINITIONS


@pytest.fixture
def gauss_program() -> Program:
    return parse_file(str(DEFINITIONS / "gauss.cdl"))


@pytest.fixture
def elliptic_program() -> Program:
    return parse_file(str(DEFINITIONS / "elliptic.cdl"))


@pytest.fixture
def squares_program() -> Program:
    return parse_file(str(DEFINITIONS / "squares.cdl"))


@pytest.fixture
def theta_program() -> Program:
    return parse_file(str(DEFINITIONS / "theta.cdl"))


@pytest.fixture
def sqrt2_program() -> Program:
    return parse_file(str(DEFINITIONS / "sqrt2.cdl"))
