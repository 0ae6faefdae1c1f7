"""Truncated power series in the offset from a fixed expansion point.

This is the computational substrate for every near-horizon expansion: the
coefficient sequences of the metric, dilaton flow rate, scalaron and momentum
live in these objects. Coefficients are plain numbers; ints are promoted to
Fraction so that rational inputs stay exact all the way through the
recurrences (the golden tests rely on this), and any float input degrades the
whole computation to floats in the usual way.

Series are immutable and all operations are pure, so values can be shared
across threads without locking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

from .errors import BasePointMismatch, NotInvertible, SeriesError
from .exact import Number, as_exact, check_finite, exact_div, exact_exp, exact_pow


@dataclass(frozen=True)
class Series:
    """coeffs[k] multiplies x**k where x = variable - base_point.

    Invariants: len(coeffs) == order + 1; every coefficient is finite.
    Binary operations demand equal base points and truncate to the shorter
    order.
    """

    base_point: Number
    coeffs: tuple

    def __post_init__(self):
        if not self.coeffs:
            raise SeriesError("a series needs at least the constant term")
        object.__setattr__(self, "base_point", as_exact(self.base_point))
        object.__setattr__(
            self, "coeffs", tuple(check_finite(as_exact(c)) for c in self.coeffs)
        )

    # -- construction ------------------------------------------------------

    @classmethod
    def constant(cls, value: Number, base_point: Number, order: int) -> "Series":
        return cls(base_point, (value,) + (0,) * order)

    @classmethod
    def zero(cls, base_point: Number, order: int) -> "Series":
        return cls.constant(0, base_point, order)

    @classmethod
    def variable(cls, base_point: Number, order: int) -> "Series":
        """The expansion variable itself: base_point + x."""
        if order == 0:
            return cls(base_point, (base_point,))
        return cls(base_point, (base_point, 1) + (0,) * (order - 1))

    # -- basic structure ----------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def truncate(self, order: int) -> "Series":
        if order >= self.order:
            return self
        return Series(self.base_point, self.coeffs[: order + 1])

    def pad(self, order: int) -> "Series":
        if order <= self.order:
            return self.truncate(order)
        return Series(self.base_point, self.coeffs + (0,) * (order - self.order))

    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            if other.base_point != self.base_point:
                raise BasePointMismatch(
                    "base points differ: %r vs %r"
                    % (self.base_point, other.base_point)
                )
            return other
        return Series.constant(other, self.base_point, self.order)

    # -- ring operations ----------------------------------------------------

    def __add__(self, other) -> "Series":
        o = self._coerce(other)
        n = min(self.order, o.order)
        return Series(
            self.base_point, tuple(a + b for a, b in zip(self.coeffs, o.coeffs))[: n + 1]
        )

    __radd__ = __add__

    def __neg__(self) -> "Series":
        return Series(self.base_point, tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> "Series":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Series":
        return (-self) + other

    def __mul__(self, other) -> "Series":
        if not isinstance(other, Series):
            return Series(self.base_point, tuple(as_exact(other) * c for c in self.coeffs))
        o = self._coerce(other)
        n = min(self.order, o.order)
        out = []
        for k in range(n + 1):
            acc = 0
            for i in range(k + 1):
                ai = self.coeffs[i] if i <= self.order else 0
                bj = o.coeffs[k - i] if k - i <= o.order else 0
                acc += ai * bj
            out.append(acc)
        return Series(self.base_point, tuple(out))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Series":
        if isinstance(other, Series):
            return self * other.recip()
        return Series(self.base_point, tuple(exact_div(c, as_exact(other)) for c in self.coeffs))

    # -- inverses and composition-free transcendentals ----------------------

    def pow(self, p: Union[int, Fraction]) -> "Series":
        """Principal-branch power through the truncation order.

        Positive integer powers work for any series; other exponents need a
        nonzero (and, for fractional p, positive) constant term.
        """
        p = Fraction(p)
        if p == 0:
            return Series.constant(1, self.base_point, self.order)
        if p.denominator == 1 and p > 0:
            result = Series.constant(1, self.base_point, self.order)
            base, e = self, p.numerator
            while e:
                if e & 1:
                    result = result * base
                base = base * base
                e >>= 1
            return result
        a0 = self.coeffs[0]
        if a0 == 0:
            raise NotInvertible("series not invertible at base point")
        if p.denominator != 1 and (a0 < 0):
            raise NotInvertible("negative constant term under a fractional power")
        b0 = exact_pow(a0, p)
        out = [b0]
        n_max = self.order
        for n in range(1, n_max + 1):
            acc = 0
            for j in range(n):
                a_idx = n - j
                acc += (p * a_idx - j) * self.coeffs[a_idx] * out[j]
            out.append(exact_div(acc, n * a0))
        return Series(self.base_point, tuple(out))

    def recip(self) -> "Series":
        return self.pow(-1)

    def sqrt(self) -> "Series":
        return self.pow(Fraction(1, 2))

    def exp(self) -> "Series":
        b0 = exact_exp(self.coeffs[0])
        out = [b0]
        for n in range(1, self.order + 1):
            acc = 0
            for j in range(n):
                acc += (n - j) * self.coeffs[n - j] * out[j]
            out.append(exact_div(acc, n))
        return Series(self.base_point, tuple(out))

    # -- calculus ------------------------------------------------------------

    def differentiate(self) -> "Series":
        if self.order == 0:
            return Series.zero(self.base_point, 0)
        return Series(
            self.base_point,
            tuple((k + 1) * c for k, c in enumerate(self.coeffs[1:])),
        )

    def integrate(self, const: Number = 0) -> "Series":
        return Series(
            self.base_point,
            (const,) + tuple(exact_div(c, k + 1) for k, c in enumerate(self.coeffs)),
        )

    # -- offset shifts (multiplication/division by x) ------------------------

    def divide_by_offset(self) -> "Series":
        """Series / x; requires a vanishing constant term."""
        if self.coeffs[0] != 0:
            raise SeriesError("constant term must vanish to divide by the offset")
        if self.order == 0:
            return Series.zero(self.base_point, 0)
        return Series(self.base_point, self.coeffs[1:])

    def multiply_by_offset(self) -> "Series":
        return Series(self.base_point, (0,) + self.coeffs)

    # -- evaluation -----------------------------------------------------------

    def eval_offset(self, x: Number) -> Number:
        """Horner evaluation at offset x from the base point."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval(self, point: Number) -> Number:
        return self.eval_offset(point - self.base_point)

    def tail_bound(self, x: Number) -> float:
        """Magnitude of the last retained term, a crude truncation estimate."""
        return abs(float(self.coeffs[-1])) * abs(float(x)) ** self.order


# -- spec-surface function aliases -------------------------------------------


def mul(a: Series, b: Series) -> Series:
    return a * b


def add(a: Series, b: Series) -> Series:
    return a + b


def recip(a: Series) -> Series:
    return a.recip()


def sqrt_series(a: Series) -> Series:
    return a.sqrt()


def pow_rational(a: Series, p: Union[int, Fraction]) -> Series:
    return a.pow(p)


def exp_series(a: Series) -> Series:
    return a.exp()


def differentiate(a: Series) -> Series:
    return a.differentiate()


def integrate(a: Series, const: Number = 0) -> Series:
    return a.integrate(const)


def radius_estimate(a: Series, window: int = 8) -> float:
    """Ratio-test guess at the convergence radius from the trailing
    coefficients. Advisory only; the expansions are known to converge in some
    neighbourhood but no radius is guaranteed."""
    picks = [
        (n, abs(float(c)))
        for n, c in enumerate(a.coeffs)
        if n >= 2 and c != 0
    ][-window:]
    if not picks:
        return math.inf
    rates = sorted(mag ** (1.0 / n) for n, mag in picks)
    mid = rates[len(rates) // 2]
    if mid == 0.0:
        return math.inf
    return 1.0 / mid
