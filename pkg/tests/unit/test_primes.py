"""Unit tests for prime and field-size lists."""

import pytest

from charlab.core.errors import CharlabError, NotPrime
from charlab.core.primes import parse_field_sizes, parse_primes, prime_range


class TestParsePrimes:
    """Test prime list expansion."""

    def test_range(self):
        assert parse_primes("5..20") == [5, 7, 11, 13, 17, 19]

    def test_mixed_and_deduplicated(self):
        assert parse_primes("11, 3..7,7") == [3, 5, 7, 11]

    def test_explicit_composite(self):
        with pytest.raises(NotPrime):
            parse_primes("5,9")

    def test_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            parse_primes("5,9")
        assert issubclass(NotPrime, CharlabError)

    def test_reversed_range(self):
        with pytest.raises(ValueError, match="out of order"):
            parse_primes("20..5")

    def test_empty_range(self):
        assert parse_primes("24..28") == []


class TestFieldSizes:
    """Test p^e lists."""

    def test_parse(self):
        assert parse_field_sizes("3^2, 2^3,7") == [(3, 2), (2, 3), (7, 1)]

    def test_non_prime_base(self):
        with pytest.raises(NotPrime):
            parse_field_sizes("4^2")

    def test_zero_degree(self):
        with pytest.raises(ValueError, match="Extension degree"):
            parse_field_sizes("3^0")


def test_prime_range_inclusive():
    assert prime_range(2, 13) == [2, 3, 5, 7, 11, 13]
