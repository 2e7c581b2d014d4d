"""Numerical differential operators and their closed-form counterparts.

Finite-difference realizations of the antilinear first-order operator
xi, the (2k-1)-fold normalized z-derivative, the hyperbolic Laplacian,
and the Maass raising/lowering operators, all on complex-valued fields
over the upper half-plane.  Central 4th-order stencils with Richardson
extrapolation; high z-derivatives use convolved first-order stencils.

The closed forms of the operator images of single expansion terms are
implemented with exact rational prefactors and act as the oracle pair
for the finite-difference path (and vice versa).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from mpmath import mp, mpc, mpf, pi

from .numeric import to_mpc, to_mpf
from .series import psi_summand
from .special import cal_C, script_C_principal

__all__ = [
    "FieldSample",
    "StencilParams",
    "apply_xi",
    "apply_D",
    "apply_laplacian",
    "apply_raise",
    "apply_lower",
    "apply_raise_power",
    "xi_phi_closed",
    "D_phi_closed",
    "D_power_closed",
    "radial_K_hat",
    "radial_L_hat",
    "radial_derivative",
]

# central stencils: 4th-order for single derivatives, 2nd-order two-point
# for the convolved high-order z-derivatives (smaller support, Richardson
# recovers the accuracy)
_D1 = ((-2, Fraction(1, 12)), (-1, Fraction(-8, 12)), (1, Fraction(8, 12)), (2, Fraction(-1, 12)))
_D1_SHORT = ((-1, Fraction(-1, 2)), (1, Fraction(1, 2)))
_D2 = (
    (-2, Fraction(-1, 12)),
    (-1, Fraction(16, 12)),
    (0, Fraction(-30, 12)),
    (1, Fraction(16, 12)),
    (2, Fraction(-1, 12)),
)
_BASE_ORDER = 4


@dataclass
class FieldSample:
    """A complex field with a declared modular weight.

    ``eval_many`` (points -> values), when provided, lets stencil code
    batch its lattice queries; evaluators must be safe for concurrent
    invocation if they parallelize internally.
    """

    evaluator: Callable
    weight: int
    eval_many: Callable | None = None

    def sample(self, points):
        if self.eval_many is not None:
            return list(self.eval_many(points))
        return [self.evaluator(p) for p in points]


@dataclass
class StencilParams:
    """Step size and extrapolation depth for finite differences.

    ``h = None`` picks 2^levels * 2^(-prec/(q+order+1)) for a q-th
    derivative with an order-``order`` base stencil at ``bits`` of working
    precision (ambient mpmath precision by default): the smallest
    extrapolation level then sits near the rounding/truncation balance
    point.  ``span_limit`` caps the total lattice excursion so wide
    high-order stencils stay on the scale on which the fields here are
    smooth; callers probing near a singularity should lower it.
    """

    h: mpf | float | None = None
    richardson_levels: int = 2
    bits: int | None = None
    span_limit: float = 0.7

    def step(self, q: int, order: int = 4) -> mpf:
        if self.h is not None:
            h = to_mpf(self.h)
            if h <= 0:
                raise ValueError("stencil step must be positive")
            return h
        bits = self.bits if self.bits is not None else mp.prec
        return mpf(2) ** (self.richardson_levels - mpf(bits) / (q + order + 1))


def _as_field(F, weight: int | None = None) -> FieldSample:
    if isinstance(F, FieldSample):
        return F
    if weight is None:
        raise TypeError("plain callables need an explicit weight")
    return FieldSample(F, weight)


def _conv_1d(stencil_a, stencil_b):
    out: dict = {}
    for oa, wa in stencil_a.items():
        for ob, wb in stencil_b.items():
            key = (oa[0] + ob[0], oa[1] + ob[1])
            out[key] = out.get(key, mpc(0)) + wa * wb
    return out


def _dz_weights(q: int, conjugate: bool = False):
    """Offset -> weight map of the q-fold composed dz (or dzbar) stencil.

    Offsets are integer lattice steps (sx, sy); weights carry no 1/h
    powers (divide by h**q after the dot product).  Single derivatives
    use the 4th-order stencil; compositions use the two-point one to
    keep the lattice support a diamond of manageable size.  Returns the
    weights together with the stencil's base error order.
    """
    base = _D1 if q == 1 else _D1_SHORT
    order = 4 if q == 1 else 2
    one = {}
    iy = mpc(0, 1) if conjugate else mpc(0, -1)  # dzbar = (dx + i dy)/2, dz = (dx - i dy)/2
    for o, w in base:
        one[(o, 0)] = one.get((o, 0), mpc(0)) + to_mpf(w) / 2
    for o, w in base:
        one[(0, o)] = one.get((0, o), mpc(0)) + iy * to_mpf(w) / 2
    out = one
    for _ in range(q - 1):
        out = _conv_1d(out, one)
    return out, order


def _apply_weights(field: FieldSample, z, weights, h, power: int):
    pts = []
    keys = sorted(weights.keys())
    for sx, sy in keys:
        pts.append(z + sx * h + mpc(0, 1) * sy * h)
    vals = field.sample(pts)
    acc = mpc(0)
    for (key, v) in zip(keys, vals):
        acc += weights[key] * v
    return acc / h**power


def _richardson(values, base_order: int = _BASE_ORDER):
    """Extrapolate values at steps h, h/2, ... assuming even error orders."""
    table = list(values)
    order = base_order
    while len(table) > 1:
        fac = mpf(2) ** order
        table = [
            (fac * table[i + 1] - table[i]) / (fac - 1) for i in range(len(table) - 1)
        ]
        order += 2
    return table[0]


def _stencil_derivative(
    field: FieldSample, z, weights, power: int, stencil: StencilParams, base_order: int = _BASE_ORDER
):
    h0 = stencil.step(power, base_order)
    # the widest lattice point must stay inside the upper half-plane and
    # within the configured excursion budget
    max_off = max(max(abs(sx), abs(sy)) for sx, sy in weights)
    h0 = min(h0, to_mpc(z).imag / (2 * max_off), to_mpf(stencil.span_limit) / (2 * max_off))
    vals = [
        _apply_weights(field, z, weights, h0 / 2**lvl, power)
        for lvl in range(stencil.richardson_levels + 1)
    ]
    return _richardson(vals, base_order)


def _d1x(field, z, stencil):
    w = {(o, 0): to_mpf(c) for o, c in _D1}
    return _stencil_derivative(field, z, w, 1, stencil)


def _d1y(field, z, stencil):
    w = {(0, o): to_mpf(c) for o, c in _D1}
    return _stencil_derivative(field, z, w, 1, stencil)


def apply_xi(F, kappa: int, z, stencil: StencilParams | None = None) -> mpc:
    """xi_{2 kappa} F = 2i y^(2 kappa) conj(dF/dzbar) by central differences."""
    field = _as_field(F, 2 * kappa)
    stencil = stencil or StencilParams()
    z = to_mpc(z)
    weights, order = _dz_weights(1, conjugate=True)
    dzbar = _stencil_derivative(field, z, weights, 1, stencil, order)
    return 2 * mpc(0, 1) * z.imag ** (2 * kappa) * mp.conj(dzbar)


def apply_D(F, k: int, z, stencil: StencilParams | None = None) -> mpc:
    """D^(2k-1) F = ((1/(2 pi i)) d/dz)^(2k-1) F via convolved stencils."""
    field = _as_field(F, 2 - 2 * k)
    stencil = stencil or StencilParams()
    z = to_mpc(z)
    q = 2 * k - 1
    weights, order = _dz_weights(q)
    dzq = _stencil_derivative(field, z, weights, q, stencil, order)
    return dzq / (2 * pi * mpc(0, 1)) ** q


def apply_laplacian(F, kappa: int, z, stencil: StencilParams | None = None) -> mpc:
    """Weight-2kappa hyperbolic Laplacian -y^2 (dxx + dyy) + 2 i kappa y (dx + i dy)."""
    field = _as_field(F, 2 * kappa)
    stencil = stencil or StencilParams()
    z = to_mpc(z)
    wxx = {(o, 0): to_mpf(c) for o, c in _D2}
    wyy = {(0, o): to_mpf(c) for o, c in _D2}
    fxx = _stencil_derivative(field, z, wxx, 2, stencil)
    fyy = _stencil_derivative(field, z, wyy, 2, stencil)
    fx = _d1x(field, z, stencil)
    fy = _d1y(field, z, stencil)
    y = z.imag
    return -(y**2) * (fxx + fyy) + 2 * mpc(0, 1) * kappa * y * (fx + mpc(0, 1) * fy)


def apply_raise(F, weight: int, z, stencil: StencilParams | None = None) -> mpc:
    """Maass raising operator R_w = 2i d/dz + w/y at declared weight w."""
    field = _as_field(F, weight)
    stencil = stencil or StencilParams()
    z = to_mpc(z)
    weights, order = _dz_weights(1)
    dz = _stencil_derivative(field, z, weights, 1, stencil, order)
    return 2 * mpc(0, 1) * dz + weight / z.imag * field.sample([z])[0]


def apply_lower(F, z, stencil: StencilParams | None = None, weight: int = 0) -> mpc:
    """Maass lowering operator L = -2i y^2 d/dzbar (weight-independent)."""
    field = _as_field(F, weight)
    stencil = stencil or StencilParams()
    z = to_mpc(z)
    weights, order = _dz_weights(1, conjugate=True)
    dzbar = _stencil_derivative(field, z, weights, 1, stencil, order)
    return -2 * mpc(0, 1) * z.imag ** 2 * dzbar


def apply_raise_power(F, weight: int, times: int, z, stencil: StencilParams | None = None) -> mpc:
    """Iterated raising R_{w+2(times-1)} o ... o R_w, nesting stencils."""
    field = _as_field(F, weight)
    stencil = stencil or StencilParams()
    if times == 0:
        return field.sample([to_mpc(z)])[0]
    inner_weight = weight + 2 * (times - 1)
    inner = FieldSample(
        lambda w_: apply_raise_power(field, weight, times - 1, w_, stencil),
        inner_weight,
    )
    return apply_raise(inner, inner_weight, z, stencil)


def xi_phi_closed(k: int, n: int, base, z) -> mpc:
    """Closed-form xi image of the index-n negative-weight seed.

    (4 eta)^(2k-1) times the meromorphic seed of index -n-1; scaling the
    input by a complex constant scales this image by its conjugate.
    """
    base = to_mpc(base)
    eta = base.imag
    return (4 * eta) ** (2 * k - 1) * psi_summand(k, -n - 1, base, z)


def _b_coefficient_phi(k: int, n: int) -> Fraction:
    """Exact derivative coefficient of the index-n seed, by index range."""
    if 0 <= n <= 2 * k - 2:
        return Fraction(-math.factorial(2 * k - 2))
    if n < 0:
        ratio = Fraction(math.factorial(-n + 2 * k - 2), math.factorial(-n - 1))
        return -ratio * script_C_principal(k, n)
    ratio = Fraction(math.factorial(n), math.factorial(n + 1 - 2 * k))
    return ratio * cal_C(2 * k - 1, -n)


def D_phi_closed(k: int, n: int, base, z) -> mpc:
    """Closed-form (2k-1)-fold derivative image of the index-n seed.

    Every index range reduces to the same constant -(2k-2)!, assembled
    here from the range-specific coefficient and the constant term of the
    incomplete beta factor.
    """
    base = to_mpc(base)
    eta = base.imag
    b = _b_coefficient_phi(k, n)
    return (eta / pi) ** (2 * k - 1) * to_mpf(b) * psi_summand(k, n + 1 - 2 * k, base, z)


def D_power_closed(k: int, m: int, base, z) -> mpc:
    """Closed-form D image of the pure-power term (z - conj(base))^(2k-2) X^m.

    Zero in the gap range 0 <= m <= 2k-2; otherwise a factorial ratio
    times the meromorphic seed of index m+1-2k.
    """
    base = to_mpc(base)
    if 0 <= m <= 2 * k - 2:
        return mpc(0)
    eta = base.imag
    if m < 0:
        b = -Fraction(math.factorial(-m + 2 * k - 2), math.factorial(-m - 1))
    else:
        b = Fraction(math.factorial(m), math.factorial(m + 1 - 2 * k))
    return (eta / pi) ** (2 * k - 1) * to_mpf(b) * psi_summand(k, m + 1 - 2 * k, base, z)


def radial_derivative(f, r, stencil: StencilParams | None = None):
    """f'(r) by the central 4th-order stencil with Richardson extrapolation."""
    stencil = stencil or StencilParams()
    r = to_mpf(r)
    h0 = stencil.step(1)
    vals = []
    for lvl in range(stencil.richardson_levels + 1):
        h = h0 / 2**lvl
        vals.append(sum(to_mpf(c) * f(r + o * h) for o, c in _D1) / h)
    return _richardson(vals)


def radial_K_hat(kappa: int, n: int, f, r, stencil: StencilParams | None = None):
    """Radial raising operator (1-r^2)/2 d/dr + (n (1-r^2)/(2r) - kappa r)."""
    r = to_mpf(r)
    if not 0 < r < 1:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    fp = radial_derivative(f, r, stencil)
    return (1 - r**2) / 2 * fp + (n * (1 - r**2) / (2 * r) - kappa * r) * f(r)


def radial_L_hat(kappa: int, n: int, f, r, stencil: StencilParams | None = None):
    """Radial lowering operator (1-r^2)/2 d/dr - (n (1-r^2)/(2r) - kappa r)."""
    r = to_mpf(r)
    if not 0 < r < 1:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    fp = radial_derivative(f, r, stencil)
    return (1 - r**2) / 2 * fp - (n * (1 - r**2) / (2 * r) - kappa * r) * f(r)
