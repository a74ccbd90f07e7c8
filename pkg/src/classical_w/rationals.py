"""Exact rational scalars and parsing helpers.

Every coefficient in this package is a fractions.Fraction; floats are never
used in the core.
"""

from fractions import Fraction

Rat = Fraction

ZERO = Rat(0)
ONE = Rat(1)


def rat(x) -> Rat:
    """Coerce an int, string like "-3/7", or Fraction to an exact rational."""
    if isinstance(x, Rat):
        return x
    if isinstance(x, int):
        return Rat(x)
    if isinstance(x, str):
        return Rat(x)
    raise TypeError(f"cannot build exact rational from {x!r} of type {type(x).__name__}")


def rat_str(x: Rat) -> str:
    """Render a rational as "p" or "p/q" (used in JSON and golden files)."""
    return str(Rat(x))
