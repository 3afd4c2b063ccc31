"""Finite-field substrate: fields, characters, primes and errors."""

from .characters import (
    AdditiveCharacter,
    CharacterValue,
    CyclotomicValue,
    MultiplicativeCharacter,
    RationalAngle,
    character_order,
    characters_of_order,
    chi_eval,
    psi_eval,
    resolve_chi,
    resolve_psi,
)
from .field import FieldDescriptor, FieldElement, discrete_log, field_arith, make_field, trace

__all__ = [
    "AdditiveCharacter",
    "CharacterValue",
    "CyclotomicValue",
    "FieldDescriptor",
    "FieldElement",
    "MultiplicativeCharacter",
    "RationalAngle",
    "character_order",
    "characters_of_order",
    "chi_eval",
    "discrete_log",
    "field_arith",
    "make_field",
    "psi_eval",
    "resolve_chi",
    "resolve_psi",
    "trace",
]
