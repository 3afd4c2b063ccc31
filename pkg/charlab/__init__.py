"""charlab: character sums, definable sets and equidistribution experiments over finite fields."""

__version__ = "0.1.0"
