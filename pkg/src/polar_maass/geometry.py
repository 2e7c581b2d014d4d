"""Upper half-plane geometry and the modular group.

Moebius action of SL2(Z), elliptic coordinates around a base point,
hyperbolic distance, reduction to the standard fundamental domain,
stabilizer orders at elliptic points, and deterministic bounded
enumeration of SL2(Z) modulo +-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from mpmath import mp, mpc, mpf

from .numeric import to_mpc, to_mpf

__all__ = [
    "UnimodularMatrix",
    "IDENTITY",
    "T",
    "S",
    "require_upper_half",
    "moebius_apply",
    "elliptic_X",
    "elliptic_inverse",
    "hyperbolic_distance",
    "r_theta",
    "reduce_to_fundamental_domain",
    "stabilizer_order",
    "enumerate_sl2",
    "bottom_row_table",
]


@dataclass(frozen=True)
class UnimodularMatrix:
    """Integer 2x2 matrix (a b; c d) with determinant 1."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"matrix {(self.a, self.b, self.c, self.d)} has det != 1")

    def __mul__(self, other: "UnimodularMatrix") -> "UnimodularMatrix":
        return UnimodularMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "UnimodularMatrix":
        return UnimodularMatrix(self.d, -self.b, -self.c, self.a)

    def neg(self) -> "UnimodularMatrix":
        # -M has the same Moebius action; det stays 1
        return UnimodularMatrix(-self.a, -self.b, -self.c, -self.d)

    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)


IDENTITY = UnimodularMatrix(1, 0, 0, 1)
T = UnimodularMatrix(1, 1, 0, 1)
S = UnimodularMatrix(0, -1, 1, 0)


def require_upper_half(z) -> mpc:
    """Coerce to mpc and demand strictly positive imaginary part."""
    zc = to_mpc(z)
    if not zc.imag > 0:
        raise ValueError(f"point {zc} is not in the upper half-plane")
    return zc


def moebius_apply(M: UnimodularMatrix, z) -> mpc:
    """Apply (az+b)/(cz+d); maps the upper half-plane to itself."""
    z = require_upper_half(z)
    return (M.a * z + M.b) / (M.c * z + M.d)


def elliptic_X(rho, z) -> mpc:
    """Disk coordinate X_rho(z) = (z - rho)/(z - conj(rho)), |X| < 1 on H."""
    rho = require_upper_half(rho)
    z = require_upper_half(z)
    return (z - rho) / (z - mp.conj(rho))


def elliptic_inverse(rho, w) -> mpc:
    """Inverse of the disk coordinate: the z with X_rho(z) = w, |w| < 1."""
    rho = require_upper_half(rho)
    w = to_mpc(w)
    if abs(w) >= 1:
        raise ValueError(f"|w| must be < 1, got {abs(w)}")
    return (rho - mp.conj(rho) * w) / (1 - w)


def hyperbolic_distance(z, rho) -> mpf:
    """d(z, rho) with cosh d = 1 + |z - rho|^2 / (2 y eta)."""
    z = require_upper_half(z)
    rho = require_upper_half(rho)
    u = 1 + abs(z - rho) ** 2 / (2 * z.imag * rho.imag)
    return mp.acosh(u)


def r_theta(rho, z) -> tuple[mpf, mpf]:
    """Polar form of the disk coordinate: X_rho(z) = r e^{i theta}.

    theta lies in (-pi, pi]; at z = rho both r and theta are 0 by
    convention.
    """
    X = elliptic_X(rho, z)
    r = abs(X)
    if r == 0:
        return mp.zero, mp.zero
    theta = mp.arg(X)
    if theta <= -mp.pi:
        theta += 2 * mp.pi
    return r, theta


def reduce_to_fundamental_domain(z) -> tuple[mpc, UnimodularMatrix]:
    """Translate/invert into the standard fundamental domain |x| <= 1/2, |z| >= 1.

    Returns (z*, M) with M z = z*.
    """
    z = require_upper_half(z)
    M = IDENTITY
    zc = z
    for _ in range(10_000):
        shift = int(mp.floor(zc.real + mpf("0.5")))
        if shift != 0:
            Tm = UnimodularMatrix(1, -shift, 0, 1)
            M = Tm * M
            zc = zc - shift
        if abs(zc) < 1:
            M = S * M
            zc = -1 / zc
        else:
            break
    else:
        raise RuntimeError("fundamental domain reduction did not terminate")
    # recompute at full precision from the exact matrix
    zc = moebius_apply(M, z)
    return zc, M


_CORNER = None


def _corner() -> mpc:
    global _CORNER
    _CORNER = mpc(mpf(1) / 2, mp.sqrt(3) / 2)
    return _CORNER


def stabilizer_order(z) -> int:
    """Order of the stabilizer in PSL2(Z): 2 at i-orbit, 3 at corner orbit, else 1."""
    z = require_upper_half(z)
    zstar, _ = reduce_to_fundamental_domain(z)
    tol = mpf(2) ** (-(mp.prec // 2))
    if abs(zstar - mpc(0, 1)) < tol:
        return 2
    corner = _corner()
    if abs(zstar - corner) < tol or abs(zstar - (corner - 1)) < tol:
        return 3
    return 1


def _bottom_rows(n_cd: int) -> list[tuple[int, int, int, int]]:
    """Rows (c, d, a0, b0): coprime bottom rows with the canonical top-row seed.

    One representative per {M, -M} pair: c = 0 keeps only d = 1, otherwise
    1 <= c <= n_cd with |d| <= n_cd.  The seed (a0, b0) is the solution of
    a0*d - b0*c = 1 with 0 <= a0 < c (a0 = 1, b0 = 0 for the c = 0 row).
    """
    rows = [(0, 1, 1, 0)]
    for c in range(1, n_cd + 1):
        for d in range(-n_cd, n_cd + 1):
            if math.gcd(c, d) != 1:
                continue
            a0 = pow(d, -1, c) if c > 1 else 0
            b0 = (a0 * d - 1) // c
            rows.append((c, d, a0, b0))
    return rows


@lru_cache(maxsize=32)
def bottom_row_table(n_cd: int):
    """Cached numpy table of bottom rows, plus the outer-shell mask.

    Returns ``(rows, shell)`` where ``rows`` is an int64 array of
    (c, d, a0, b0) in lexicographic (c, d) order and ``shell`` flags the
    rows with max(c, |d|) == n_cd, whose total contribution serves as the
    truncation-tail estimate.
    """
    import numpy as np

    if n_cd < 1:
        raise ValueError(f"n_cd must be >= 1, got {n_cd}")
    rows = np.array(_bottom_rows(n_cd), dtype=np.int64)
    shell = (np.maximum(rows[:, 0], np.abs(rows[:, 1])) == n_cd)
    return rows, shell


def enumerate_sl2(n_cd: int, n_t: int = 0):
    """Yield one representative of each {M, -M} pair in a deterministic box.

    Bottom rows (c, d) run over the coprime half-box of ``bottom_row_table``;
    for each, top rows are (a0 + t c, b0 + t d) for |t| <= n_t.  Even-weight
    sums over SL2(Z) are recovered by doubling each representative's
    contribution.
    """
    if n_cd < 1:
        raise ValueError(f"n_cd must be >= 1, got {n_cd}")
    if n_t < 0:
        raise ValueError(f"n_t must be >= 0, got {n_t}")
    for c, d, a0, b0 in _bottom_rows(n_cd):
        for t in range(-n_t, n_t + 1):
            yield UnimodularMatrix(a0 + t * c, b0 + t * d, c, d)
