"""Truncated elliptic Poincare series of weights 2k and 2-2k.

The weight-2k family sums the meromorphic seed
``(z - conj(base))^(-2k) X_base(z)^n`` over SL2(Z); the weight-(2-2k)
family sums ``(z - conj(base))^(2k-2) beta(1 - r^2; 2k-1, -n) X_base(z)^n``.
Sums run over one representative per {M, -M} pair (see
``geometry.enumerate_sl2``) and are doubled, which is exact at even
weight.

Evaluation at 53 bits streams through the float64 kernels; higher
precisions run an mpmath loop over the same enumeration with compensated
accumulation, so results are bit-reproducible for fixed parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from mpmath import mp, mpc, mpf

from . import _kernels
from .geometry import (
    UnimodularMatrix,
    bottom_row_table,
    enumerate_sl2,
    require_upper_half,
    stabilizer_order,
)
from .numeric import (
    ComplexCompensatedSum,
    PoleCollisionError,
    precision,
    to_mpc,
)
from .special import beta0, cal_C, incomplete_beta, script_C_principal

__all__ = [
    "SeriesKind",
    "SeriesSpec",
    "TruncationParams",
    "EvalResult",
    "slash",
    "psi_summand",
    "phi_summand",
    "eval_psi",
    "eval_p",
    "eval_series",
    "eval_series_matrices",
    "principal_part_P",
    "principal_part_Psi",
    "set_threads",
]

set_threads = _kernels.set_threads


class SeriesKind(Enum):
    PSI = "psi"  # weight 2k, meromorphic
    P = "p"  # weight 2-2k, polar harmonic


@dataclass(frozen=True)
class SeriesSpec:
    """One member of either family: weight parameter k >= 2, index n, base point."""

    k: int
    n: int
    base: mpc
    kind: SeriesKind

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        object.__setattr__(self, "base", require_upper_half(self.base))

    @property
    def weight(self) -> int:
        return 2 * self.k if self.kind is SeriesKind.PSI else 2 - 2 * self.k


@dataclass
class TruncationParams:
    """Box truncation of the SL2(Z) sum and the working precision.

    ``tail_estimate`` is informational: evaluations report their own tail
    through EvalResult and leave this field untouched.
    """

    n_cd: int = 120
    n_t: int = 120
    precision_bits: int = 53
    tail_estimate: float | None = None

    def __post_init__(self):
        if self.n_cd < 1 or self.n_t < 0:
            raise ValueError("need n_cd >= 1 and n_t >= 0")
        if self.precision_bits < 53:
            raise ValueError("precision_bits must be >= 53")


@dataclass(frozen=True)
class EvalResult:
    """Value of a truncated sum with its empirical tail indicator.

    ``tail_estimate`` combines the magnitude of the outermost
    (c, d)-shell's contribution with an integrated estimate of the
    |t| = n_t boundary terms; it is an honest convergence indicator, not
    a proven bound.  ``min_pole_distance`` is the smallest |Mz - base|
    met during summation.
    """

    value: mpc
    tail_estimate: mpf
    min_pole_distance: mpf


def slash(f, weight: int, M: UnimodularMatrix, z) -> mpc:
    """Weight-``weight`` slash action: (cz+d)^(-weight) f(Mz)."""
    z = require_upper_half(z)
    j = M.c * z + M.d
    return j ** (-weight) * f((M.a * z + M.b) / j)


def psi_summand(k: int, n: int, base, z) -> mpc:
    """Meromorphic seed (z - conj(base))^(-2k) X_base(z)^n."""
    base = require_upper_half(base)
    z = require_upper_half(z)
    X = (z - base) / (z - mp.conj(base))
    if X == 0 and n < 0:
        raise PoleCollisionError(f"psi summand pole of order {-n} at z = base = {base}")
    return (z - mp.conj(base)) ** (-2 * k) * X**n


def phi_summand(k: int, n: int, base, z) -> mpc:
    """Polar harmonic seed (z - conj(base))^(2k-2) beta(1-r^2; 2k-1, -n) X^n.

    At z = base the n > 0 value is taken to be 0 (the X^n zero wins by
    convention); n <= 0 is a genuine singularity there.
    """
    base = require_upper_half(base)
    z = require_upper_half(z)
    X = (z - base) / (z - mp.conj(base))
    if X == 0:
        if n > 0:
            return mpc(0)
        raise PoleCollisionError(f"phi summand singular at z = base = {base}")
    Z = 4 * base.imag * z.imag / abs(z - mp.conj(base)) ** 2  # equals 1 - |X|^2
    return (z - mp.conj(base)) ** (2 * k - 2) * incomplete_beta(Z, 2 * k - 1, -n) * X**n


def _phi_slash_term(k: int, n: int, base: mpc, z: mpc, M: UnimodularMatrix) -> mpc:
    zb = mp.conj(base)
    lam = (M.a - M.c * zb) * z + (M.b - M.d * zb)
    nu = (M.a - M.c * base) * z + (M.b - M.d * base)
    Z = 4 * base.imag * z.imag / abs(lam) ** 2
    return lam ** (2 * k - 2) * incomplete_beta(Z, 2 * k - 1, -n) * (nu / lam) ** n


def _psi_slash_term(k: int, n: int, base: mpc, z: mpc, M: UnimodularMatrix) -> mpc:
    zb = mp.conj(base)
    lam = (M.a - M.c * zb) * z + (M.b - M.d * zb)
    nu = (M.a - M.c * base) * z + (M.b - M.d * base)
    return lam ** (-2 * k) * (nu / lam) ** n


def _pole_tolerance(bits: int) -> mpf:
    return mpf(2) ** (-(bits // 4))


def eval_series_matrices(spec: SeriesSpec, z, matrices, check_poles: bool = True) -> mpc:
    """Sum the slashed seed over an explicit matrix iterable (not doubled).

    Runs at the ambient mpmath precision in the iterable's order; used for
    re-indexing identities and as the reference path in tests.
    """
    z = require_upper_half(z)
    term = _psi_slash_term if spec.kind is SeriesKind.PSI else _phi_slash_term
    acc = ComplexCompensatedSum(mpf(0))
    tol = _pole_tolerance(mp.prec)
    for M in matrices:
        w = M.c * z + M.d
        nu = (M.a - M.c * spec.base) * z + (M.b - M.d * spec.base)
        if check_poles and abs(nu) / abs(w) < tol:
            raise PoleCollisionError(
                f"orbit point {M.entries()} z collides with base {spec.base}"
            )
        acc.add(term(spec.k, spec.n, spec.base, z, M))
    return acc.value()


def _eval_mpmath(spec: SeriesSpec, zs, trunc: TruncationParams) -> list[EvalResult]:
    rows, shell = bottom_row_table(trunc.n_cd)
    term = _psi_slash_term if spec.kind is SeriesKind.PSI else _phi_slash_term
    out = []
    with precision(trunc.precision_bits):
        base = to_mpc(spec.base)
        tol = _pole_tolerance(trunc.precision_bits)
        for zq in zs:
            z = require_upper_half(zq)
            acc = ComplexCompensatedSum(mpf(0))
            tail = ComplexCompensatedSum(mpf(0))
            edge = mpf(0)
            min_pd = mpf("inf")
            for (c, d, a0, b0), in_shell in zip(rows.tolist(), shell.tolist()):
                row = ComplexCompensatedSum(mpf(0))
                w = c * z + d
                aw = abs(w)
                for t in range(-trunc.n_t, trunc.n_t + 1):
                    M = UnimodularMatrix(a0 + t * c, b0 + t * d, c, d)
                    nu = (M.a - M.c * base) * z + (M.b - M.d * base)
                    pd = abs(nu) / aw
                    if pd < min_pd:
                        min_pd = pd
                    val = term(spec.k, spec.n, base, z, M)
                    row.add(val)
                    if abs(t) == trunc.n_t:
                        edge += abs(val)
                acc.merge(row)
                if in_shell:
                    tail.merge(row)
            if min_pd < tol:
                raise PoleCollisionError(
                    f"evaluation point {z} within {min_pd} of a pole orbit of {base}"
                )
            t_tail = edge * trunc.n_t / (2 * spec.k - 1) if trunc.n_t > 0 else mpf(0)
            out.append(
                EvalResult(2 * acc.value(), 2 * (abs(tail.value()) + t_tail), min_pd)
            )
    return out


def eval_series(spec: SeriesSpec, zs, trunc: TruncationParams) -> list[EvalResult]:
    """Evaluate the truncated series at each point of ``zs``.

    53-bit requests stream through the float64 kernels (parallel over
    points, deterministic per point); higher precisions use the mpmath
    loop.  Raises PoleCollisionError if any orbit point falls within
    2^(-precision/4) of the base.
    """
    if trunc.precision_bits > 53:
        return _eval_mpmath(spec, zs, trunc)
    rows, shell = bottom_row_table(trunc.n_cd)
    zf = [complex(require_upper_half(z)) for z in zs]
    vals, tails, min_pd = _kernels.eval_float64(
        rows,
        shell,
        trunc.n_t,
        zf,
        complex(spec.base),
        spec.k,
        spec.n,
        spec.kind is SeriesKind.P,
    )
    tol = float(_pole_tolerance(53))
    out = []
    for v, t, pd in zip(vals, tails, min_pd):
        if pd < tol:
            raise PoleCollisionError(
                f"evaluation point within {pd} of a pole orbit of {spec.base}"
            )
        out.append(EvalResult(mpc(v.real, v.imag), mpf(t), mpf(pd)))
    return out


def eval_psi(k: int, n: int, base, z, trunc: TruncationParams | None = None) -> EvalResult:
    """Truncated weight-2k meromorphic series at a single point."""
    trunc = trunc or TruncationParams()
    spec = SeriesSpec(k, n, to_mpc(base), SeriesKind.PSI)
    return eval_series(spec, [z], trunc)[0]


def eval_p(k: int, n: int, base, z, trunc: TruncationParams | None = None) -> EvalResult:
    """Truncated weight-(2-2k) polar harmonic series at a single point."""
    trunc = trunc or TruncationParams()
    spec = SeriesSpec(k, n, to_mpc(base), SeriesKind.P)
    return eval_series(spec, [z], trunc)[0]


def principal_part_P(k: int, n: int, base, z) -> mpc:
    """Growth of the weight-(2-2k) series at its base point.

    2*omega * (z - conj(base))^(2k-2) X^n times beta0 (n > 2k-2),
    beta (0 <= n <= 2k-2), or the principal constant (n < 0).
    """
    base = require_upper_half(base)
    z = require_upper_half(z)
    omega = stabilizer_order(base)
    X = (z - base) / (z - mp.conj(base))
    Z = 4 * base.imag * z.imag / abs(z - mp.conj(base)) ** 2
    pref = 2 * omega * (z - mp.conj(base)) ** (2 * k - 2) * X**n
    if n < 0:
        from .numeric import to_mpf

        return pref * to_mpf(script_C_principal(k, n))
    if n <= 2 * k - 2:
        return pref * incomplete_beta(Z, 2 * k - 1, -n)
    return pref * beta0(Z, 2 * k - 1, -n)


def principal_part_Psi(k: int, n: int, base, z) -> mpc:
    """Growth of the weight-2k series at its base: 2*omega * psi summand (n < 0)."""
    if n >= 0:
        raise ValueError(f"the weight-2k series is regular at its base for n = {n} >= 0")
    base = require_upper_half(base)
    omega = stabilizer_order(base)
    return 2 * omega * psi_summand(k, n, base, z)
