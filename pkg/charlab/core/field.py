"""Finite fields F_{p^e}: exact arithmetic, trace, generator discovery and discrete logarithms."""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from sympy import Poly, factorint, isprime, symbols

from .errors import CapExceeded, DivisionByZero, NotIrreducible, NotPrime, ZeroArgument

logger = logging.getLogger(__name__)

DEFAULT_DLOG_CAP = 2**22

_X = symbols("X")


@dataclass(frozen=True)
class FieldElement:
    """Element of F_{p^e} as coefficients of 1, X, ..., X^{e-1}, each reduced mod p."""

    coeffs: Tuple[int, ...]

    def is_zero(self) -> bool:
        return not any(self.coeffs)


def _poly_trim(a: List[int]) -> List[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_divmod(a: List[int], b: List[int], p: int) -> Tuple[List[int], List[int]]:
    """Divide polynomials over F_p, coefficients low degree first."""
    a = _poly_trim([c % p for c in a])
    b = _poly_trim([c % p for c in b])
    if not b:
        raise DivisionByZero("Polynomial division by zero")
    inv_lead = pow(b[-1], -1, p)
    quot = [0] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        factor = a[-1] * inv_lead % p
        quot[shift] = factor
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - factor * bc) % p
        _poly_trim(a)
    return _poly_trim(quot), a


def _poly_sub_mul(a: List[int], q: List[int], b: List[int], p: int) -> List[int]:
    """Return a - q*b over F_p."""
    size = max(len(a), len(q) + len(b) - 1 if q and b else 0)
    out = list(a) + [0] * (size - len(a))
    for i, qc in enumerate(q):
        for j, bc in enumerate(b):
            out[i + j] = (out[i + j] - qc * bc) % p
    return _poly_trim([c % p for c in out])


def is_irreducible_mod_p(coeffs: Sequence[int], p: int) -> bool:
    """Irreducibility of a polynomial over F_p, coefficients low degree first."""
    if len(coeffs) < 2 or coeffs[-1] % p == 0:
        return False
    if len(coeffs) == 2:
        return True
    return bool(Poly(list(reversed([c % p for c in coeffs])), _X, modulus=p).is_irreducible)


def smallest_irreducible(p: int, e: int) -> Tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree e, compared low degree first."""
    if e == 1:
        return (0, 1)
    for low in itertools.product(range(p), repeat=e):
        candidate = tuple(low) + (1,)
        if low[0] == 0:
            continue
        if is_irreducible_mod_p(candidate, p):
            return candidate
    raise NotIrreducible(f"No irreducible polynomial of degree {e} over F_{p}")  # pragma: no cover


class FieldDescriptor:
    """A concrete finite field F_{p^e} with generator and discrete-log machinery.

    Instances are immutable after construction. Use make_field to build one.
    """

    def __init__(self, p: int, e: int, modulus: Tuple[int, ...], build_table: bool) -> None:
        self.p = p
        self.e = e
        self.modulus = modulus
        self.q = p**e
        self.order_factors: Dict[int, int] = factorint(self.q - 1) if self.q > 2 else {}
        self.zero = FieldElement((0,) * e)
        self.one = FieldElement((1,) + (0,) * (e - 1))
        self._basis_traces = self._compute_basis_traces()
        self.generator = self._find_generator()
        self._exp_table: Optional[List[int]] = None
        self._log_table: Optional[List[int]] = None
        if build_table:
            self._build_tables()

    def __repr__(self) -> str:
        return f"FieldDescriptor(p={self.p}, e={self.e}, modulus={self.modulus})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldDescriptor):
            return NotImplemented
        return (self.p, self.e, self.modulus) == (other.p, other.e, other.modulus)

    def __hash__(self) -> int:
        return hash((self.p, self.e, self.modulus))

    @property
    def has_table(self) -> bool:
        return self._log_table is not None

    @property
    def label(self) -> str:
        return str(self.p) if self.e == 1 else f"{self.p}^{self.e}"

    # construction helpers

    def element(self, value: int) -> FieldElement:
        """Image of an integer in the prime subfield."""
        return FieldElement((value % self.p,) + (0,) * (self.e - 1))

    def from_coeffs(self, coeffs: Sequence[int]) -> FieldElement:
        coeffs = [c % self.p for c in coeffs]
        if len(coeffs) > self.e:
            return self._reduce(coeffs)
        return FieldElement(tuple(coeffs) + (0,) * (self.e - len(coeffs)))

    def encode(self, x: FieldElement) -> int:
        """Canonical integer encoding sum c_i p^i."""
        if self.e == 1:
            return x.coeffs[0]
        code = 0
        for c in reversed(x.coeffs):
            code = code * self.p + c
        return code

    def decode(self, code: int) -> FieldElement:
        if self.e == 1:
            return FieldElement((code % self.p,))
        coeffs = []
        for _ in range(self.e):
            code, c = divmod(code, self.p)
            coeffs.append(c)
        return FieldElement(tuple(coeffs))

    def elements(self) -> Iterator[FieldElement]:
        """All elements, in encoding order."""
        for code in range(self.q):
            yield self.decode(code)

    def nonzero_elements(self) -> Iterator[FieldElement]:
        for code in range(1, self.q):
            yield self.decode(code)

    def format(self, x: FieldElement) -> str:
        """Readable form: the integer for prime fields, a polynomial in X otherwise."""
        if self.e == 1:
            return str(x.coeffs[0])
        terms = []
        for i in range(self.e - 1, -1, -1):
            c = x.coeffs[i]
            if not c:
                continue
            mono = "" if i == 0 else ("X" if i == 1 else f"X^{i}")
            if not mono:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            else:
                terms.append(f"{c}*{mono}")
        return "+".join(terms) if terms else "0"

    # arithmetic

    def add(self, a: FieldElement, b: FieldElement) -> FieldElement:
        p = self.p
        return FieldElement(tuple((x + y) % p for x, y in zip(a.coeffs, b.coeffs)))

    def sub(self, a: FieldElement, b: FieldElement) -> FieldElement:
        p = self.p
        return FieldElement(tuple((x - y) % p for x, y in zip(a.coeffs, b.coeffs)))

    def neg(self, a: FieldElement) -> FieldElement:
        p = self.p
        return FieldElement(tuple(-x % p for x in a.coeffs))

    def mul(self, a: FieldElement, b: FieldElement) -> FieldElement:
        if self.e == 1:
            return FieldElement((a.coeffs[0] * b.coeffs[0] % self.p,))
        prod = [0] * (2 * self.e - 1)
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    prod[i + j] += x * y
        return self._reduce(prod)

    def scale(self, a: FieldElement, n: int) -> FieldElement:
        p = self.p
        return FieldElement(tuple(x * n % p for x in a.coeffs))

    def _reduce(self, prod: List[int]) -> FieldElement:
        p, e, m = self.p, self.e, self.modulus
        prod = list(prod)
        for k in range(len(prod) - 1, e - 1, -1):
            c = prod[k] % p
            if c:
                for i in range(e):
                    prod[k - e + i] -= c * m[i]
            prod[k] = 0
        return FieldElement(tuple(c % p for c in prod[:e]) + (0,) * max(0, e - len(prod)))

    def inv(self, a: FieldElement) -> FieldElement:
        if a.is_zero():
            raise DivisionByZero("Inverse of zero is undefined")
        if self.e == 1:
            return FieldElement((pow(a.coeffs[0], self.p - 2, self.p),))
        # extended Euclid on (modulus, a)
        p = self.p
        r0, r1 = list(self.modulus), _poly_trim(list(a.coeffs))
        s0: List[int] = []
        s1 = [1]
        while len(r1) > 1:
            quot, rem = _poly_divmod(r0, r1, p)
            r0, r1 = r1, rem
            s0, s1 = s1, _poly_sub_mul(s0, quot, s1, p)
        scale = pow(r1[0], -1, p)
        return self.from_coeffs([c * scale for c in s1])

    def div(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return self.mul(a, self.inv(b))

    def pow(self, a: FieldElement, n: int) -> FieldElement:
        if n < 0:
            return self.pow(self.inv(a), -n)
        if self.e == 1:
            if n == 0:
                return self.one
            return FieldElement((pow(a.coeffs[0], n, self.p),))
        result = self.one
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def arith(self, op: str, *operands: FieldElement, exponent: int = 0) -> FieldElement:
        """Dispatch one of add, sub, mul, inv, pow, neg by name."""
        if op == "add":
            return self.add(*operands)
        if op == "sub":
            return self.sub(*operands)
        if op == "mul":
            return self.mul(*operands)
        if op == "inv":
            return self.inv(*operands)
        if op == "neg":
            return self.neg(*operands)
        if op == "pow":
            return self.pow(operands[0], exponent)
        raise ValueError(f"Unknown field operation '{op}'")

    # trace and logarithms

    def _compute_basis_traces(self) -> Tuple[int, ...]:
        if self.e == 1:
            return (1,)
        traces = []
        for i in range(self.e):
            x = FieldElement(tuple(1 if j == i else 0 for j in range(self.e)))
            total = self.zero
            power = x
            for _ in range(self.e):
                total = self.add(total, power)
                power = self.pow(power, self.p)
            traces.append(total.coeffs[0])
        return tuple(traces)

    def trace(self, x: FieldElement) -> int:
        """Absolute trace to F_p, linear in the coefficients."""
        if self.e == 1:
            return x.coeffs[0]
        return sum(c * t for c, t in zip(x.coeffs, self._basis_traces)) % self.p

    def multiplicative_order(self, x: FieldElement) -> int:
        if x.is_zero():
            raise ZeroArgument("Zero has no multiplicative order")
        order = self.q - 1
        for ell, mult in self.order_factors.items():
            for _ in range(mult):
                if self.pow(x, order // ell) == self.one:
                    order //= ell
                else:
                    break
        return order

    def _find_generator(self) -> FieldElement:
        for code in range(1, self.q):
            candidate = self.decode(code)
            if all(self.pow(candidate, (self.q - 1) // ell) != self.one for ell in self.order_factors):
                return candidate
        raise NotIrreducible(f"Modulus {self.modulus} does not define a field")

    def _build_tables(self) -> None:
        n = self.q - 1
        logger.debug("Building discrete-log table for F_%s (%d entries)", self.label, n)
        exp_table = [0] * n
        log_table = [-1] * self.q
        current = self.one
        for k in range(n):
            code = self.encode(current)
            exp_table[k] = code
            log_table[code] = k
            current = self.mul(current, self.generator)
        self._exp_table = exp_table
        self._log_table = log_table

    def dlog(self, x: FieldElement) -> int:
        """Discrete logarithm base the generator, in [0, q-2]."""
        if x.is_zero():
            raise ZeroArgument("Discrete logarithm of zero is undefined")
        if self._log_table is not None:
            return self._log_table[self.encode(x)]
        return self._baby_step_giant_step(x)

    def _baby_step_giant_step(self, x: FieldElement) -> int:
        n = self.q - 1
        m = math.isqrt(n) + 1
        baby: Dict[int, int] = {}
        current = self.one
        for j in range(m):
            baby.setdefault(self.encode(current), j)
            current = self.mul(current, self.generator)
        giant = self.inv(self.pow(self.generator, m))
        gamma = x
        for i in range(m + 1):
            j = baby.get(self.encode(gamma))
            if j is not None:
                return (i * m + j) % n
            gamma = self.mul(gamma, giant)
        raise ZeroArgument(f"No discrete logarithm found for {x}")  # pragma: no cover

    def exp(self, k: int) -> FieldElement:
        """generator^k."""
        if self._exp_table is not None:
            return self.decode(self._exp_table[k % (self.q - 1)])
        return self.pow(self.generator, k % (self.q - 1))

    @property
    def log_table(self) -> Optional[List[int]]:
        """Discrete logs indexed by encoding (-1 at zero), when the table was built."""
        return self._log_table


def make_field(
    p: int,
    e: int = 1,
    modulus: Optional[Sequence[int]] = None,
    *,
    table: Optional[bool] = None,
    dlog_cap: int = DEFAULT_DLOG_CAP,
) -> FieldDescriptor:
    """Build the field F_{p^e}.

    Args:
        p: Characteristic
        e: Extension degree
        modulus: Optional monic modulus, coefficients low degree first (length e+1)
        table: Build the discrete-log table; None builds it when q <= dlog_cap
        dlog_cap: Largest q with a full table

    Returns:
        FieldDescriptor

    Raises:
        NotPrime: p is not prime
        NotIrreducible: the supplied modulus is reducible
        CapExceeded: a table was requested above the cap
    """
    if p < 2 or not isprime(p):
        raise NotPrime(f"{p} is not prime")
    if e < 1:
        raise ValueError(f"Extension degree must be >= 1, got {e}")
    q = p**e
    if table and q > dlog_cap:
        raise CapExceeded(f"q={q} exceeds the discrete-log table cap {dlog_cap}")
    if modulus is None:
        mod = smallest_irreducible(p, e)
    else:
        mod = tuple(int(c) % p for c in modulus)
        if len(mod) != e + 1 or mod[-1] != 1:
            raise NotIrreducible(f"Modulus must be monic of degree {e}: {tuple(modulus)}")
        if not is_irreducible_mod_p(mod, p):
            raise NotIrreducible(f"Modulus {tuple(modulus)} is reducible mod {p}")
    build = q <= dlog_cap if table is None else table
    return FieldDescriptor(p, e, mod, build)


def field_arith(desc: FieldDescriptor, op: str, *operands: FieldElement, exponent: int = 0) -> FieldElement:
    """Functional form of the field operations."""
    return desc.arith(op, *operands, exponent=exponent)


def trace(desc: FieldDescriptor, x: FieldElement) -> int:
    return desc.trace(x)


def discrete_log(desc: FieldDescriptor, x: FieldElement) -> int:
    return desc.dlog(x)
