"""Exact-number helpers shared by the solvers and the file formats."""

from __future__ import annotations

import math
from decimal import Decimal
from fractions import Fraction
from numbers import Rational

# Absolute tolerance used wherever a comparison might see float input.
TOL = Fraction(1, 10**9)


def as_fraction(x) -> Fraction:
    """Convert ints, decimal strings, "p/q" strings, Decimals and floats to Fraction.

    Floats go through their shortest repr, so ``0.1`` becomes ``1/10`` rather
    than the binary expansion; this keeps ``0.1 + 0.2 <= 0.3`` true for demands.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, Decimal):
        if not x.is_finite():
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if s.lower() in {"nan", "inf", "+inf", "-inf", "infinity", "-infinity"}:
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(s)
    # numpy scalars and friends
    if hasattr(x, "item"):
        return as_fraction(x.item())
    raise TypeError(f"cannot interpret {x!r} as a number")


def fraction_str(x: Fraction) -> str:
    """Exact text form: a plain decimal when it terminates, otherwise ``p/q``."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{x.numerator}/{x.denominator}"
    digits = max(twos, fives)
    scaled = x * 10**digits
    sign = "-" if scaled < 0 else ""
    q = abs(scaled.numerator)
    whole, frac = divmod(q, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def floor_div(a: Fraction, b: Fraction) -> int:
    return math.floor(Fraction(a) / Fraction(b))
