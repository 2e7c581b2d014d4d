"""Exact combinatorial constants and extended-precision special functions.

Implements the incomplete beta function with integer parameters, its
regularized companion ``beta0``, the Gauss hypergeometric series, the
radial hypergeometric pair ``P-hat``/``Q-hat`` used to build elliptic
expansions of harmonic forms on the upper half-plane, and the exact
rational coefficient tables attached to them.

Everything evaluates at the ambient mpmath precision; exact quantities
are returned as ``fractions.Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpc, mpf, pi, workprec

from .numeric import (
    GUARD_BITS,
    ConvergenceError,
    DivergenceError,
    GammaPoleError,
    binom,
    to_mpc,
    to_mpf,
)

__all__ = [
    "cal_C",
    "script_C_principal",
    "beta0",
    "incomplete_beta",
    "gauss_2f1",
    "euler_transform_check",
    "fay_P_radial",
    "fay_Q_radial",
    "fay_Q_radial_reg",
    "RationalOverPi",
    "a_const",
    "e_coeff",
    "d_coeff",
    "sgn_star",
    "gamma_exact",
    "beta_closed_coefficients",
]


def sgn_star(n: int) -> int:
    """Half-integer sign convention: +1 for n >= 0, -1 for n < 0."""
    return 1 if n >= 0 else -1


def cal_C(a: int, b: int) -> Fraction:
    """Finite alternating sum C_{a,b} = sum_{0<=j<=a-1, j != -b} binom(a-1,j)(-1)^j/(j+b)."""
    if a < 1:
        raise ValueError(f"a must be a positive integer, got {a}")
    total = Fraction(0)
    for j in range(a):
        if j == -b:
            continue
        total += Fraction(binom(a - 1, j) * (-1) ** j, j + b)
    return total


def script_C_principal(k: int, n: int) -> Fraction:
    """Principal-part constant (-n-1)!(2k-2)!/(2k-2-n)! for negative index n."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if n > -1:
        raise ValueError(f"n must be <= -1, got {n}")
    import math

    return Fraction(
        math.factorial(-n - 1) * math.factorial(2 * k - 2),
        math.factorial(2 * k - 2 - n),
    )


def gamma_exact(x):
    """Gamma with exact factorial evaluation at positive integers.

    Raises GammaPoleError at non-positive integer arguments.
    """
    import math

    xm = to_mpf(x) if not isinstance(x, (int, Fraction)) else x
    if isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1):
        xi = int(x)
        if xi <= 0:
            raise GammaPoleError(f"gamma pole at non-positive integer {xi}")
        return mpf(math.factorial(xi - 1))
    xm = to_mpf(x)
    if xm == mp.floor(xm):
        xi = int(xm)
        if xi <= 0:
            raise GammaPoleError(f"gamma pole at non-positive integer {xi}")
        return mpf(math.factorial(xi - 1))
    return mp.gamma(xm)


def beta_closed_coefficients(a: int, b: int):
    """Exact coefficient data of the closed form of beta0(Z; a, b).

    Returns ``(C, terms, log_coef)`` where ``terms`` is a list of
    ``(exponent, coefficient)`` pairs such that

        beta0(Z; a, b) = sum coeff * (1-Z)**exponent  +  log_coef * log(1-Z)

    and ``C`` is the constant with beta = beta0 + C.
    """
    if a < 1:
        raise ValueError(f"a must be a positive integer, got {a}")
    C = Fraction(0)
    terms = []
    for j in range(a):
        if j == -b:
            continue
        C += Fraction(binom(a - 1, j) * (-1) ** j, j + b)
        terms.append((j + b, Fraction(binom(a - 1, j) * (-1) ** (j + 1), j + b)))
    log_coef = Fraction(0)
    if 1 - a <= b <= 0:
        log_coef = Fraction(binom(a - 1, -b) * (-1) ** (b + 1))
    return C, terms, log_coef


def _beta_power_series(Z, a: int, b: int):
    """beta(Z; a, b) as the integral's power series around Z = 0.

    sum_{i>=0} binom(b-1, i) (-1)^i Z^(a+i)/(a+i); numerically stable for
    small Z where the (1-Z)-closed form cancels catastrophically.
    """
    Z = to_mpf(Z)
    eps = mpf(2) ** (-(mp.prec + 8))
    acc = mp.zero
    coef = mpf(1)
    zpow = Z**a
    i = 0
    while True:
        term = coef * zpow / (a + i)
        acc += term
        if i > 2 and abs(term) <= eps * abs(acc):
            break
        if i > 4 * mp.prec + 100:
            raise ConvergenceError("beta power series did not converge")
        coef = coef * (i + 1 - b) / (i + 1)
        zpow *= Z
        i += 1
    return acc


def beta0(Z, a: int, b: int):
    """Regularized incomplete beta: the closed finite sum plus log term.

    beta0(Z; a, b) = sum_{0<=j<=a-1, j!=-b} binom(a-1,j) (-1)^(j+1)/(j+b) (1-Z)^(j+b)
                     + [1-a <= b <= 0] binom(a-1,-b) (-1)^(b+1) log(1-Z)

    Valid for 0 <= Z <= 1 with the divergent Z = 1 combinations rejected.
    """
    if a < 1:
        raise ValueError(f"a must be a positive integer, got {a}")
    Z = to_mpf(Z)
    if Z < 0 or Z > 1:
        raise ValueError(f"Z must lie in [0, 1], got {Z}")
    C, terms, log_coef = beta_closed_coefficients(a, b)
    if Z == 1:
        if b > 0:
            return mp.zero
        raise DivergenceError(
            f"beta0(1; {a}, {b}) diverges (logarithmic or negative-power blowup)"
        )
    with workprec(mp.prec + GUARD_BITS):
        if Z < mpf("0.5"):
            # (1-Z)-sum cancels to O(Z^a); regroup through the power series
            out = _beta_power_series(Z, a, b) - to_mpf(C)
        else:
            u = 1 - Z
            out = mp.zero
            for e, coef in terms:
                out += to_mpf(coef) * u**e
            if log_coef:
                out += to_mpf(log_coef) * mp.log(u)
    return +out


def incomplete_beta(Z, a: int, b: int):
    """Incomplete beta integral int_0^Z t^(a-1) (1-t)^(b-1) dt, a >= 1 integer, b integer.

    Z = 1 is permitted only for b > 0, where the value is the complete
    beta function B(a, b) = C_{a,b}.
    """
    if a < 1:
        raise ValueError(f"a must be a positive integer, got {a}")
    Z = to_mpf(Z)
    if Z < 0 or Z > 1:
        raise ValueError(f"Z must lie in [0, 1], got {Z}")
    if Z == 1:
        if b > 0:
            return to_mpf(cal_C(a, b))
        raise DivergenceError(f"beta(1; {a}, {b}) diverges for b <= 0")
    with workprec(mp.prec + GUARD_BITS):
        if Z < mpf("0.5"):
            out = _beta_power_series(Z, a, b)
        else:
            out = beta0(Z, a, b) + to_mpf(cal_C(a, b))
    return +out


def _is_nonpositive_int(x) -> bool:
    xm = to_mpf(x)
    return xm <= 0 and xm == mp.floor(xm)


def gauss_2f1(a, b, c, Z):
    """Gauss hypergeometric series 2F1(a, b; c; Z) by term recurrence.

    Terminates exactly when a or b is a non-positive integer; otherwise
    requires |Z| < 1.  Raises GammaPoleError if the Pochhammer denominator
    vanishes before termination, ConvergenceError when |Z| >= 1 for a
    non-terminating series.
    """
    a = to_mpf(a)
    b = to_mpf(b)
    c = to_mpf(c)
    Z = to_mpc(Z)

    n_stop = None
    stops = [int(-x) for x in (a, b) if _is_nonpositive_int(x)]
    if stops:
        n_stop = min(stops)
    if n_stop is None and abs(Z) >= 1:
        raise ConvergenceError(f"2F1 series diverges at |Z| = {abs(Z)} >= 1")

    with workprec(mp.prec + GUARD_BITS):
        eps = mpf(2) ** (-mp.prec)
        term = mpc(1)
        acc = mpc(1)
        below = 0
        j = 0
        while True:
            if n_stop is not None and j >= n_stop:
                break
            denom = c + j
            if denom == 0:
                raise GammaPoleError(
                    f"2F1 Pochhammer pole: c = {c} hit zero denominator at term {j + 1}"
                )
            term = term * (a + j) * (b + j) / denom / (j + 1) * Z
            acc += term
            j += 1
            if n_stop is None:
                # three consecutive small terms guard alternating-series flukes
                if abs(term) < eps * abs(acc):
                    below += 1
                    if below >= 3:
                        break
                else:
                    below = 0
                if j > 64 * mp.prec + 1000:
                    raise ConvergenceError("2F1 series converged too slowly")
    return +acc


def euler_transform_check(a, b, c, Z):
    """Residual |2F1(a,b;c;Z) - (1-Z)^(c-a-b) 2F1(c-a,c-b;c;Z)|."""
    a = to_mpf(a)
    b = to_mpf(b)
    c = to_mpf(c)
    Z = to_mpf(Z)
    lhs = gauss_2f1(a, b, c, Z)
    rhs = (1 - Z) ** (c - a - b) * gauss_2f1(c - a, c - b, c, Z)
    return abs(lhs - rhs)


def fay_P_radial(s, kappa: int, n: int, r):
    """Radial function r^|n| (1-r^2)^s 2F1(s - sg*kappa, s + sg*kappa + |n|; 1+|n|; r^2).

    ``sg`` is the half-integer sign of n.  Regular at r = 0.
    """
    r = to_mpf(r)
    if r < 0 or r >= 1:
        raise ValueError(f"r must lie in [0, 1), got {r}")
    s = to_mpf(s)
    sg = sgn_star(n)
    if r == 0:
        return mpf(1) if n == 0 else mp.zero
    hyp = gauss_2f1(s - sg * kappa, s + sg * kappa + abs(n), 1 + abs(n), r**2)
    return r ** abs(n) * (1 - r**2) ** s * hyp.real


def fay_Q_radial(s, kappa: int, n: int, r):
    """Radial companion with gamma prefactor, singular as r -> 0.

    -Gamma(s - sg k) Gamma(s + sg k + |n|) / (4 pi Gamma(2s)) *
    r^(-|n|) (1-r^2)^s 2F1(s + sg k, s - sg k - |n|; 2s; 1 - r^2)
    """
    r = to_mpf(r)
    if r <= 0 or r >= 1:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    s_in = s
    s = to_mpf(s)
    sg = sgn_star(n)
    if isinstance(s_in, int):
        g1 = gamma_exact(int(s_in) - sg * kappa)
        g2 = gamma_exact(int(s_in) + sg * kappa + abs(n))
        g3 = gamma_exact(2 * int(s_in))
    else:
        for arg in (s - sg * kappa, s + sg * kappa + abs(n), 2 * s):
            if _is_nonpositive_int(arg):
                raise GammaPoleError(f"gamma pole at {arg} in Q-hat prefactor")
        g1 = mp.gamma(s - sg * kappa)
        g2 = mp.gamma(s + sg * kappa + abs(n))
        g3 = mp.gamma(2 * s)
    pref = -g1 * g2 / (4 * pi * g3)
    hyp = gauss_2f1(s + sg * kappa, s - sg * kappa - abs(n), 2 * s, 1 - r**2)
    return pref * r ** (-abs(n)) * (1 - r**2) ** s * hyp.real


def fay_Q_radial_reg(kappa: int, n: int, r):
    """Gamma-regularized value of Q-hat at s = kappa for kappa >= 1, n >= 0.

    Realizes lim_{s->kappa} Q-hat / Gamma(s - kappa): the divergent gamma
    factor is cancelled exactly before evaluation.
    """
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    r = to_mpf(r)
    if r <= 0 or r >= 1:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    pref = -gamma_exact(2 * kappa + n) / (4 * pi * gamma_exact(2 * kappa))
    hyp = gauss_2f1(2 * kappa, -n, 2 * kappa, 1 - r**2)
    return pref * r ** (-n) * (1 - r**2) ** kappa * hyp.real


@dataclass(frozen=True)
class RationalOverPi:
    """An exact rational multiple of 1/pi, kept symbolic until evaluation."""

    rational: Fraction

    def to_mpf(self) -> mpf:
        return to_mpf(self.rational) / pi

    def __mul__(self, other: Fraction) -> "RationalOverPi":
        return RationalOverPi(self.rational * other)

    __rmul__ = __mul__


def a_const(kappa: int, n: int) -> RationalOverPi:
    """Normalization a_{kappa,n} = (-4)^(kappa-1)/pi * (n! or a rising factorial).

    For n < 0 the rising-factorial branch Gamma(1-2k-n)/Gamma(1-2k) is a
    finite rational only for kappa <= 0; other kappa raise GammaPoleError.
    """
    import math

    base = Fraction(-4) ** (kappa - 1)
    if n >= 0:
        return RationalOverPi(base * math.factorial(n))
    if kappa > 0:
        raise GammaPoleError(
            f"a_const gamma ratio undefined for kappa = {kappa} > 0 with n = {n} < 0"
        )
    rising = 1
    for j in range(-n):
        rising *= 1 - 2 * kappa + j
    return RationalOverPi(base * rising)


def _as_fraction(s) -> Fraction:
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    raise TypeError(f"exact coefficient tables need integer or Fraction s, got {type(s)}")


def e_coeff(s, kappa: int, n: int) -> Fraction:
    """Raising coefficient for the P-hat ladder: n if n >= 1, else (s+k)(s-k-1)/(1+|n|)."""
    s = _as_fraction(s)
    if n >= 1:
        return Fraction(n)
    return (s + kappa) * (s - kappa - 1) / (1 + abs(n))


def d_coeff(s, kappa: int, n: int) -> Fraction:
    """Raising coefficient for the Q-hat ladder: -(s+k)(s-k-1) if n >= 1, else -1."""
    s = _as_fraction(s)
    if n >= 1:
        return -(s + kappa) * (s - kappa - 1)
    return Fraction(-1)
