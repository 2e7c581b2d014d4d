"""Precision plumbing shared by all modules.

Real/complex arithmetic is carried by mpmath (``mpf``/``mpc``) at a
configurable binary precision.  Exact combinatorial constants are carried
by ``fractions.Fraction``.  Helpers here convert between the two worlds
and provide a compensated accumulator for long alternating sums.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from fractions import Fraction

from mpmath import mp, mpc, mpf, workprec

DEFAULT_PRECISION_BITS = 128

# extra working bits used inside closed-form sums before rounding back
GUARD_BITS = 32


class NumericError(ArithmeticError):
    """Base class for numeric failures raised by this package."""


class DivergenceError(NumericError):
    """A series or closed form was evaluated at a divergent parameter point."""


class GammaPoleError(NumericError):
    """A gamma factor was requested at a non-positive integer argument."""


class ConvergenceError(NumericError):
    """An infinite series does not converge for the given arguments."""


class PoleCollisionError(NumericError):
    """An evaluation point collided with a pole of the target function."""


class IllConditionedError(NumericError):
    """A linear solve used for coefficient separation is ill-conditioned."""


@contextmanager
def precision(bits: int):
    """Run a block at ``bits`` of mpmath working precision."""
    if bits < 53:
        raise ValueError(f"precision must be at least 53 bits, got {bits}")
    with workprec(bits):
        yield


def tolerance(bits: int | None = None, margin_bits: int = 24) -> mpf:
    """Default comparison tolerance 2**-(bits - margin_bits)."""
    if bits is None:
        bits = mp.prec
    return mpf(2) ** (margin_bits - bits)


def to_mpf(x) -> mpf:
    """Coerce ints, floats, Fractions and decimal strings to mpf losslessly."""
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, str):
        return mpf(x)
    return mpf(x)


def to_mpc(z) -> mpc:
    """Coerce any complex-like value (including Fractions) to mpc."""
    if isinstance(z, mpc):
        return z
    if isinstance(z, (tuple, list)) and len(z) == 2:
        return mpc(to_mpf(z[0]), to_mpf(z[1]))
    if isinstance(z, complex):
        return mpc(z.real, z.imag)
    return mpc(to_mpf(z))


def frac_to_mpf(q: Fraction) -> mpf:
    return mpf(q.numerator) / q.denominator


def binom(n: int, k: int) -> int:
    if k < 0:
        return 0
    return math.comb(n, k)


class CompensatedSum:
    """Neumaier compensated accumulator for mpf or float values.

    Adding values in a fixed order yields a reproducible, nearly
    error-free sum; partial accumulators merge associatively enough for
    ordered block reductions.
    """

    __slots__ = ("s", "c")

    def __init__(self, zero=0.0):
        self.s = zero
        self.c = zero * 0

    def add(self, x) -> None:
        t = self.s + x
        if abs(self.s) >= abs(x):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t

    def merge(self, other: "CompensatedSum") -> None:
        self.add(other.s)
        self.c += other.c

    def value(self):
        return self.s + self.c


class ComplexCompensatedSum:
    """Componentwise Neumaier accumulator for complex values."""

    __slots__ = ("re", "im")

    def __init__(self, zero=mpf(0)):
        self.re = CompensatedSum(zero)
        self.im = CompensatedSum(zero)

    def add(self, z) -> None:
        self.re.add(z.real)
        self.im.add(z.imag)

    def merge(self, other: "ComplexCompensatedSum") -> None:
        self.re.merge(other.re)
        self.im.merge(other.im)

    def value(self) -> mpc:
        return mpc(self.re.value(), self.im.value())


def nstr_repr(x, digits: int | None = None) -> str:
    """Deterministic decimal rendering of mpf/mpc/float for reports."""
    import mpmath

    if digits is None:
        digits = max(17, mp.dps)
    if isinstance(x, (mpc, complex)):
        return mpmath.nstr(mpc(x), digits, strip_zeros=True)
    return mpmath.nstr(mpf(x), digits, strip_zeros=True)
