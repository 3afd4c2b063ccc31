"""Exception hierarchy for charlab."""

from typing import Iterable, Optional, Sequence, Tuple


class CharlabError(ValueError):
    """Base class for every error raised by charlab."""


class NotPrime(CharlabError):
    """The characteristic is not a prime number."""


class NotIrreducible(CharlabError):
    """A user-supplied modulus is reducible over the prime field."""


class CapExceeded(CharlabError):
    """A configured size cap would be exceeded."""


class DivisionByZero(CharlabError, ZeroDivisionError):
    """Inverse of the zero element was requested."""


class ZeroArgument(CharlabError):
    """Discrete logarithm of zero was requested."""


class CdlSyntaxError(CharlabError):
    """Syntax error in a .cdl source, with position and the set of expected tokens."""

    def __init__(self, message: str, line: int, column: int, expected: Iterable[str] = ()) -> None:
        self.line = line
        self.column = column
        self.expected: Tuple[str, ...] = tuple(sorted(set(expected)))
        detail = f"{line}:{column}: {message}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class ArityMismatch(CharlabError):
    """Declared arity and actual variable use disagree."""


class UnresolvedReference(CharlabError):
    """A reference names no declaration of the required kind."""


class BudgetExceeded(CharlabError):
    """An enumeration would exceed the candidate budget."""


class NotRealValued(CharlabError):
    """A Laurent polynomial is not real-valued on the torus."""


class HasConstantTerm(CharlabError):
    """A Laurent polynomial has a nonzero constant term."""


class FiberBoundExceeded(CharlabError):
    """A theta fiber is larger than its declared bound."""


class InvalidPadding(CharlabError):
    """Padding tuples for a theta sum violate the construction constraints."""


class InconsistentDimension(CharlabError):
    """Per-prime dimension estimates disagree too much to fit a single dimension."""


class OrderTooLarge(CharlabError):
    """A character order exceeds the decomposition bound."""


class IndependencePrecheckFailed(CharlabError):
    """An angle tuple satisfies a small integer relation."""

    def __init__(self, relation: Sequence[int]) -> None:
        self.relation = tuple(relation)
        super().__init__(f"Angles satisfy the integer relation {self.relation}")


class NoPrimesFound(CharlabError):
    """No prime in the scanned range satisfied the filters."""


class AssertionMismatch(CharlabError):
    """A report value deviates from its expectation."""

    def __init__(self, message: str, key: Optional[str] = None) -> None:
        self.key = key
        super().__init__(message)
