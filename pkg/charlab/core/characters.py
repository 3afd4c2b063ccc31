"""Additive and multiplicative characters of finite fields with exact rational-angle values."""

import cmath
import math
import re
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from .field import FieldDescriptor, FieldElement

Rational = Union[int, Fraction]


@dataclass(frozen=True, order=False)
class RationalAngle:
    """The point e^{2 pi i num/den} of the unit circle, with 0 <= num < den and gcd(num, den) = 1."""

    num: int
    den: int

    def __post_init__(self) -> None:
        if self.den <= 0 or not 0 <= self.num < self.den or math.gcd(self.num, self.den) != 1:
            raise ValueError(f"Angle {self.num}/{self.den} is not reduced into [0, 1)")

    @classmethod
    def of(cls, value: Rational) -> "RationalAngle":
        frac = Fraction(value) % 1
        return cls(frac.numerator, frac.denominator)

    @classmethod
    def zero(cls) -> "RationalAngle":
        return cls(0, 1)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    @property
    def order(self) -> int:
        """Multiplicative order of the root of unity."""
        return self.den

    def __add__(self, other: "RationalAngle") -> "RationalAngle":
        return RationalAngle.of(self.fraction + other.fraction)

    def __sub__(self, other: "RationalAngle") -> "RationalAngle":
        return RationalAngle.of(self.fraction - other.fraction)

    def __neg__(self) -> "RationalAngle":
        return RationalAngle.of(-self.fraction)

    def times(self, n: int) -> "RationalAngle":
        return RationalAngle.of(self.fraction * n)

    def to_complex(self) -> complex:
        return cmath.exp(2j * math.pi * self.num / self.den)

    def __float__(self) -> float:
        return self.num / self.den

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


@dataclass(frozen=True)
class CharacterValue:
    """Either the distinguished zero value chi(0) or a point of the circle."""

    angle: Optional[RationalAngle]

    @classmethod
    def zero(cls) -> "CharacterValue":
        return cls(None)

    @classmethod
    def of(cls, value: Rational) -> "CharacterValue":
        return cls(RationalAngle.of(value))

    @property
    def is_zero(self) -> bool:
        return self.angle is None

    def __mul__(self, other: "CharacterValue") -> "CharacterValue":
        if self.angle is None or other.angle is None:
            return CharacterValue(None)
        return CharacterValue(self.angle + other.angle)

    def to_complex(self) -> complex:
        return 0j if self.angle is None else self.angle.to_complex()

    def __str__(self) -> str:
        return "Zero" if self.angle is None else str(self.angle)


@dataclass(frozen=True)
class AdditiveCharacter:
    """Psi_c(x) = exp(2 pi i Tr(c x) / p); c = 1 is standard, c = 0 trivial."""

    twist: FieldElement

    def is_trivial(self) -> bool:
        return self.twist.is_zero()


@dataclass(frozen=True)
class MultiplicativeCharacter:
    """chi_k sends the field generator to exp(2 pi i k / (q-1)); k = 0 is trivial."""

    index: int


def psi_eval(desc: FieldDescriptor, psi: AdditiveCharacter, x: FieldElement) -> RationalAngle:
    """Angle Tr(c x)/p of the additive character at x."""
    if desc.e == 1:
        value = psi.twist.coeffs[0] * x.coeffs[0]
    else:
        value = desc.trace(desc.mul(psi.twist, x))
    return RationalAngle.of(Fraction(value % desc.p, desc.p))


def chi_eval(desc: FieldDescriptor, chi: MultiplicativeCharacter, x: FieldElement) -> CharacterValue:
    """Value of the multiplicative character at x, Zero at x = 0."""
    if x.is_zero():
        return CharacterValue.zero()
    n = desc.q - 1
    return CharacterValue.of(Fraction(chi.index * desc.dlog(x) % n, n))


def character_order(desc: FieldDescriptor, chi: MultiplicativeCharacter) -> int:
    n = desc.q - 1
    return n // math.gcd(chi.index % n, n)


def characters_of_order(
    desc: FieldDescriptor, r_min: int = 2, r_max: Optional[int] = None
) -> List[MultiplicativeCharacter]:
    """All multiplicative characters whose order lies in [r_min, r_max], by ascending index."""
    n = desc.q - 1
    upper = n if r_max is None else r_max
    found = []
    for k in range(n):
        order = n // math.gcd(k, n)
        if r_min <= order <= upper:
            found.append(MultiplicativeCharacter(k))
    return found


def standard_character(desc: FieldDescriptor) -> AdditiveCharacter:
    return AdditiveCharacter(desc.one)


def generator_character(desc: FieldDescriptor) -> MultiplicativeCharacter:
    return MultiplicativeCharacter(1)


def angles_to_complex(angles: Iterable[Tuple[Fraction, Rational]]) -> complex:
    """Sum coefficient * e^{2 pi i angle}, adding terms grouped by angle in sorted order."""
    grouped: Dict[Fraction, Fraction] = defaultdict(Fraction)
    for angle, coeff in angles:
        grouped[Fraction(angle) % 1] += Fraction(coeff)
    re_parts = []
    im_parts = []
    for angle in sorted(grouped):
        coeff = grouped[angle]
        if not coeff:
            continue
        theta = 2 * math.pi * float(angle)
        re_parts.append(float(coeff) * math.cos(theta))
        im_parts.append(float(coeff) * math.sin(theta))
    return complex(math.fsum(re_parts), math.fsum(im_parts))


class CyclotomicValue:
    """Exact formal sum of rational multiples of roots of unity.

    Keys are angles in [0, 1); the value 1 is {0: 1}. Conversion to a complex number happens once,
    through angles_to_complex.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Fraction, Fraction]] = None) -> None:
        self.terms: Dict[Fraction, Fraction] = {}
        for angle, coeff in (terms or {}).items():
            if coeff:
                key = Fraction(angle) % 1
                total = self.terms.get(key, Fraction(0)) + Fraction(coeff)
                if total:
                    self.terms[key] = total
                else:
                    self.terms.pop(key, None)

    @classmethod
    def constant(cls, value: Rational) -> "CyclotomicValue":
        return cls({Fraction(0): Fraction(value)})

    @classmethod
    def root(cls, angle: Union[RationalAngle, Fraction]) -> "CyclotomicValue":
        frac = angle.fraction if isinstance(angle, RationalAngle) else angle
        return cls({frac: Fraction(1)})

    @classmethod
    def from_character(cls, value: CharacterValue) -> "CyclotomicValue":
        return cls() if value.angle is None else cls.root(value.angle)

    def __add__(self, other: "CyclotomicValue") -> "CyclotomicValue":
        merged = dict(self.terms)
        for angle, coeff in other.terms.items():
            merged[angle] = merged.get(angle, Fraction(0)) + coeff
        return CyclotomicValue(merged)

    def __neg__(self) -> "CyclotomicValue":
        return CyclotomicValue({a: -c for a, c in self.terms.items()})

    def __sub__(self, other: "CyclotomicValue") -> "CyclotomicValue":
        return self + (-other)

    def __mul__(self, other: "CyclotomicValue") -> "CyclotomicValue":
        product: Dict[Fraction, Fraction] = defaultdict(Fraction)
        for a1, c1 in self.terms.items():
            for a2, c2 in other.terms.items():
                product[(a1 + a2) % 1] += c1 * c2
        return CyclotomicValue(product)

    def scale(self, factor: Rational) -> "CyclotomicValue":
        return CyclotomicValue({a: c * factor for a, c in self.terms.items()})

    def conjugate(self) -> "CyclotomicValue":
        return CyclotomicValue({-a: c for a, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def rational(self) -> Optional[Fraction]:
        """The value as a rational number when it only has an angle-zero part."""
        if not self.terms:
            return Fraction(0)
        if set(self.terms) == {Fraction(0)}:
            return self.terms[Fraction(0)]
        return None

    def to_complex(self) -> complex:
        return angles_to_complex(self.terms.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CyclotomicValue):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        return f"CyclotomicValue({dict(sorted(self.terms.items()))})"


_PSI_RULE = re.compile(r"^(standard|trivial|c=(-?\d+))$")
_CHI_RULE = re.compile(r"^(generator|trivial|quadratic|k=(-?\d+)|order=(\d+))$")


def validate_psi_rule(rule: str) -> str:
    if not _PSI_RULE.match(rule.strip()):
        raise ValueError(f"Invalid additive character rule '{rule}'")
    return rule.strip()


def validate_chi_rule(rule: str) -> str:
    if not _CHI_RULE.match(rule.strip()):
        raise ValueError(f"Invalid multiplicative character rule '{rule}'")
    return rule.strip()


def resolve_psi(desc: FieldDescriptor, rule: str) -> AdditiveCharacter:
    """Additive character named by a rule: standard, trivial or c=<int>."""
    match = _PSI_RULE.match(validate_psi_rule(rule))
    assert match is not None
    if match.group(1) == "standard":
        return standard_character(desc)
    if match.group(1) == "trivial":
        return AdditiveCharacter(desc.zero)
    return AdditiveCharacter(desc.element(int(match.group(2))))


def resolve_chi(desc: FieldDescriptor, rule: str, order_floor: int = 1) -> Optional[MultiplicativeCharacter]:
    """Multiplicative character named by a rule, or None when the field has no such character.

    Rules are generator, trivial, quadratic, k=<int> and order=<r> (smallest index of that order).
    Characters of order below order_floor resolve to None.
    """
    match = _CHI_RULE.match(validate_chi_rule(rule))
    assert match is not None
    n = desc.q - 1
    kind = match.group(1)
    chi: Optional[MultiplicativeCharacter]
    if kind == "generator":
        chi = MultiplicativeCharacter(1 % n if n > 1 else 0)
    elif kind == "trivial":
        chi = MultiplicativeCharacter(0)
    elif kind == "quadratic":
        chi = MultiplicativeCharacter(n // 2) if n % 2 == 0 else None
    elif match.group(2) is not None:
        chi = MultiplicativeCharacter(int(match.group(2)) % n)
    else:
        r = int(match.group(3))
        chi = MultiplicativeCharacter(n // r) if r >= 1 and n % r == 0 else None
    if chi is not None and character_order(desc, chi) < order_floor:
        return None
    return chi
