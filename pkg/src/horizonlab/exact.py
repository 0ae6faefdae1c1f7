"""Scalar helpers that keep rational inputs exact and fall back to floats
otherwise. ints are promoted to Fraction so division never silently turns an
exact computation into a float one."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

from .errors import BranchPointError, NonFiniteCoefficient

Number = Union[int, float, Fraction]


def as_exact(x: Number) -> Number:
    """Promote int to Fraction; leave Fraction and float alone."""
    if isinstance(x, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(x, int):
        return Fraction(x)
    return x


def is_exact(x: Number) -> bool:
    return isinstance(x, (int, Fraction))


def check_finite(x: Number) -> Number:
    if isinstance(x, float) and not math.isfinite(x):
        raise NonFiniteCoefficient("non-finite coefficient %r" % x)
    return x


def exact_div(a: Number, b: Number) -> Number:
    if is_exact(a) and is_exact(b):
        return Fraction(a) / Fraction(b)
    return a / b


def _int_nth_root(n: int, k: int):
    """Exact k-th root of a nonnegative int, or None."""
    if n < 0:
        return None
    r = round(n ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def exact_root(x: Number, k: int) -> Number:
    """k-th root; exact Fraction when x is a perfect rational power."""
    if is_exact(x):
        fr = Fraction(x)
        if fr < 0:
            raise BranchPointError("negative base for even/fractional root")
        num = _int_nth_root(fr.numerator, k)
        den = _int_nth_root(fr.denominator, k)
        if num is not None and den is not None:
            return Fraction(num, den)
        return float(fr) ** (1.0 / k)
    if x < 0:
        raise BranchPointError("negative base for even/fractional root")
    return x ** (1.0 / k)


def exact_pow(base: Number, p: Union[int, Fraction]) -> Number:
    """base**p on the principal real branch, exact where possible.

    Integer p is exact for rational base; p = r/s goes through an exact s-th
    root when the base is a perfect power, float otherwise. Negative base
    with fractional p raises, never returns complex.
    """
    p = Fraction(p)
    if p.denominator == 1:
        n = p.numerator
        if is_exact(base):
            if base == 0 and n < 0:
                raise ZeroDivisionError("0 raised to a negative power")
            return Fraction(base) ** n
        return check_finite(float(base) ** n)
    b = base
    if isinstance(b, float) and b < 0 or (is_exact(b) and b < 0):
        raise BranchPointError("negative base for fractional power")
    root = exact_root(b, p.denominator)
    if is_exact(root):
        return Fraction(root) ** p.numerator
    return check_finite(float(root) ** p.numerator)


def exact_exp(x: Number) -> Number:
    if is_exact(x) and x == 0:
        return Fraction(1)
    return check_finite(math.exp(float(x)))


def exact_sqrt(x: Number) -> Number:
    return exact_pow(x, Fraction(1, 2))
