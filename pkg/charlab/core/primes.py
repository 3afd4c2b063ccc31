"""Prime lists and field-size lists as written on the command line and in presets."""

from typing import List, Tuple

from sympy import isprime, sieve

from .errors import NotPrime


def parse_primes(text: str) -> List[int]:
    """Expand "5..199", "5,7,11" or a mix of both into a sorted list of primes.

    Ranges are inclusive and expand through the sieve; explicit entries must be prime.
    """
    primes = set()
    for chunk in text.replace(" ", "").split(","):
        if not chunk:
            continue
        if ".." in chunk:
            low_text, high_text = chunk.split("..", 1)
            low, high = int(low_text), int(high_text)
            if low > high:
                raise ValueError(f"Prime range bounds out of order: {chunk}")
            primes.update(sieve.primerange(low, high + 1))
        else:
            value = int(chunk)
            if not isprime(value):
                raise NotPrime(f"{value} is not prime")
            primes.add(value)
    return sorted(primes)


def parse_field_sizes(text: str) -> List[Tuple[int, int]]:
    """Parse "3^2,2^3,7" into (p, e) pairs, keeping the given order."""
    sizes = []
    for chunk in text.replace(" ", "").split(","):
        if not chunk:
            continue
        if "^" in chunk:
            p_text, e_text = chunk.split("^", 1)
            p, e = int(p_text), int(e_text)
        else:
            p, e = int(chunk), 1
        if not isprime(p):
            raise NotPrime(f"{p} is not prime")
        if e < 1:
            raise ValueError(f"Extension degree must be >= 1 in '{chunk}'")
        sizes.append((p, e))
    return sizes


def prime_range(low: int, high: int) -> List[int]:
    """Primes in [low, high]."""
    return list(sieve.primerange(low, high + 1))
