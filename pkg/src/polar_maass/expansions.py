"""Elliptic-expansion coefficient extraction and evaluation.

A weight-w form F around rho in H is written F = (z - conj(rho))^(-w) G
with G a series in the disk coordinate X_rho; the meromorphic part of G
collects pure powers X^n, the non-meromorphic part carries incomplete
beta radial factors.  Fourier quadrature of G on circles |X| = r
recovers the angular modes with spectral accuracy; two radii separate
the meromorphic and non-meromorphic coefficients of each mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from mpmath import mp, mpc, mpf

from .geometry import elliptic_inverse, enumerate_sl2, hyperbolic_distance, moebius_apply, require_upper_half
from .numeric import IllConditionedError, to_mpc, to_mpf
from .operators import FieldSample
from .special import beta0, incomplete_beta

__all__ = [
    "ExtractionParams",
    "EllipticExpansion",
    "fourier_modes",
    "separate_parts",
    "extract_expansion",
    "elliptic_eval",
    "safe_radius",
]

JSON_SCHEMA_VERSION = 1


@dataclass
class ExtractionParams:
    """Quadrature configuration for coefficient extraction."""

    r1: float = 0.2
    r2: float = 0.35
    m_quad: int = 64
    n_k: int | None = None  # upper index of the beta-basis window, default 2k-2
    cond_limit: float = 1e6
    noise_factor: float = 10.0  # drop coefficients below noise_factor * residual

    def __post_init__(self):
        if not 0 < self.r1 < 1 or not 0 < self.r2 < 1:
            raise ValueError("sampling radii must lie in (0, 1)")
        if self.r1 == self.r2:
            raise ValueError("separation needs two distinct radii")
        if self.m_quad < 4:
            raise ValueError("m_quad too small")


@dataclass
class EllipticExpansion:
    """Extracted expansion data around ``rho`` at modular weight ``weight``.

    ``residual`` is the worst reconstruction error on the sampling
    circles; coefficient maps only keep entries above the quadrature
    noise floor.
    """

    rho: mpc
    weight: int
    c_plus: dict
    c_minus: dict
    n_range: tuple[int, int]
    n_k: int
    radius_used: float
    residual: float
    params: dict = field(default_factory=dict)

    def cplus(self, n: int) -> mpc:
        return self.c_plus.get(n, mpc(0))

    def cminus(self, n: int) -> mpc:
        return self.c_minus.get(n, mpc(0))

    def to_json(self) -> str:
        def cmap(d):
            return [[n, float(v.real), float(v.imag)] for n, v in sorted(d.items())]

        payload = {
            "schema": JSON_SCHEMA_VERSION,
            "rho": [float(self.rho.real), float(self.rho.imag)],
            "weight": self.weight,
            "c_plus": cmap(self.c_plus),
            "c_minus": cmap(self.c_minus),
            "n_range": list(self.n_range),
            "n_k": self.n_k,
            "radius_used": self.radius_used,
            "residual": self.residual,
            "params": self.params,
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EllipticExpansion":
        data = json.loads(text)
        return cls(
            rho=mpc(*data["rho"]),
            weight=data["weight"],
            c_plus={int(n): mpc(re, im) for n, re, im in data["c_plus"]},
            c_minus={int(n): mpc(re, im) for n, re, im in data["c_minus"]},
            n_range=tuple(data["n_range"]),
            n_k=data["n_k"],
            radius_used=data["radius_used"],
            residual=data["residual"],
            params=data.get("params", {}),
        )


def _weight_k(weight: int) -> int:
    """The k with weight = 2k (positive) or weight = 2-2k (non-positive)."""
    if weight > 0:
        if weight % 2:
            raise ValueError(f"weight must be even, got {weight}")
        return weight // 2
    if (2 - weight) % 2:
        raise ValueError(f"weight must be even, got {weight}")
    return (2 - weight) // 2


def _circle_samples(field: FieldSample, rho: mpc, r, m_quad: int):
    """Sample points, raw values, and prefactor-normalized values on |X| = r."""
    r = to_mpf(r)
    thetas = [2 * mp.pi * j / m_quad for j in range(m_quad)]
    pts = [elliptic_inverse(rho, r * mp.expjpi(2 * mpf(j) / m_quad)) for j in range(m_quad)]
    vals = field.sample(pts)
    G = [v * (p - mp.conj(rho)) ** field.weight for v, p in zip(vals, pts)]
    return thetas, pts, vals, G


def _modes_from_samples(thetas, G, m_quad: int, n_range) -> dict:
    out = {}
    for n in n_range:
        acc = mpc(0)
        for th, g in zip(thetas, G):
            acc += g * mp.expj(-n * th)
        out[n] = acc / m_quad
    return out


def fourier_modes(field: FieldSample, rho, r, m_quad: int, n_range) -> dict:
    """Angular modes A_n(r) of the prefactor-normalized samples on |X| = r.

    A_n(r) = (1/M) sum_j G(theta_j) e^(-i n theta_j); trapezoidal on the
    circle, hence spectrally accurate for smooth G.
    """
    rho = require_upper_half(rho)
    thetas, _, _, G = _circle_samples(field, rho, r, m_quad)
    return _modes_from_samples(thetas, G, m_quad, n_range)


def _beta_basis(n: int, n_k: int, k: int, r):
    """Radial basis factor attached to the non-meromorphic coefficient of mode n."""
    Z = 1 - to_mpf(r) ** 2
    if 0 <= n <= n_k:
        return incomplete_beta(Z, 2 * k - 1, -n)
    return beta0(Z, 2 * k - 1, -n)


def separate_parts(modes_r1, modes_r2, r1, r2, k: int, n: int, n_k: int, cond_limit: float = 1e6):
    """Solve the 2x2 system A_n(r_i)/r_i^n = c_plus + c_minus * B_n(r_i).

    Raises IllConditionedError when the two radial factors are too close
    to separate the parts reliably.
    """
    r1 = to_mpf(r1)
    r2 = to_mpf(r2)
    B1 = _beta_basis(n, n_k, k, r1)
    B2 = _beta_basis(n, n_k, k, r2)
    v1 = modes_r1[n] / r1**n
    v2 = modes_r2[n] / r2**n
    det = B2 - B1
    # guard against radii whose radial factors nearly coincide; small but
    # relatively well-separated factors are fine at high precision
    scale = max(abs(B1), abs(B2), mpf(1) / cond_limit**2)
    if abs(det) * cond_limit < scale:
        raise IllConditionedError(
            f"mode {n}: radial factors {B1} and {B2} too close (cond > {cond_limit})"
        )
    c_minus = (v2 - v1) / det
    c_plus = v1 - c_minus * B1
    return c_plus, c_minus


def extract_expansion(
    F: FieldSample,
    rho,
    weight: int,
    n_range,
    params: ExtractionParams | None = None,
) -> EllipticExpansion:
    """Extract expansion coefficients of ``F`` around ``rho``.

    Positive weight (meromorphic input): a single radius suffices and the
    non-meromorphic map stays empty.  Non-positive weight: modes at two
    radii are separated per mode.  The returned residual is the worst
    reconstruction error on the sampling circles.
    """
    params = params or ExtractionParams()
    rho = require_upper_half(rho)
    k = _weight_k(weight)
    n_list = sorted(n_range)
    n_k = params.n_k if params.n_k is not None else 2 * k - 2

    meromorphic = weight > 0
    thetas1, pts1, vals1, G1 = _circle_samples(F, rho, params.r1, params.m_quad)
    modes1 = _modes_from_samples(thetas1, G1, params.m_quad, n_list)
    circles = [(pts1, vals1)]
    c_plus: dict = {}
    c_minus: dict = {}
    if meromorphic:
        for n in n_list:
            c_plus[n] = modes1[n] / to_mpf(params.r1) ** n
    else:
        thetas2, pts2, vals2, G2 = _circle_samples(F, rho, params.r2, params.m_quad)
        modes2 = _modes_from_samples(thetas2, G2, params.m_quad, n_list)
        circles.append((pts2, vals2))
        for n in n_list:
            cp, cm = separate_parts(
                modes1, modes2, params.r1, params.r2, k, n, n_k, params.cond_limit
            )
            c_plus[n] = cp
            c_minus[n] = cm

    exp = EllipticExpansion(
        rho=rho,
        weight=weight,
        c_plus=c_plus,
        c_minus=c_minus,
        n_range=(n_list[0], n_list[-1]),
        n_k=n_k,
        radius_used=float(params.r1),
        residual=0.0,
        params={
            "r1": float(params.r1),
            "r2": float(params.r2),
            "m_quad": params.m_quad,
        },
    )

    # round-trip residual on the already-sampled circles
    worst = mpf(0)
    for pts, sampled in circles:
        for p, v in zip(pts, sampled):
            err = abs(elliptic_eval(exp, p) - v)
            if err > worst:
                worst = err
    exp.residual = float(worst)

    floor = params.noise_factor * exp.residual
    exp.c_plus = {n: v for n, v in c_plus.items() if abs(v) > floor}
    exp.c_minus = {n: v for n, v in c_minus.items() if abs(v) > floor}
    return exp


def elliptic_eval(exp: EllipticExpansion, z) -> mpc:
    """Evaluate the truncated expansion at z inside its validity disk."""
    z = require_upper_half(z)
    rho = exp.rho
    k = _weight_k(exp.weight)
    X = (z - rho) / (z - mp.conj(rho))
    r = abs(X)
    G = mpc(0)
    for n, c in exp.c_plus.items():
        G += c * X**n
    for n, c in exp.c_minus.items():
        G += c * _beta_basis(n, exp.n_k, k, r) * X**n
    return G * (z - mp.conj(rho)) ** (-exp.weight)


def safe_radius(rho, base, n_box: int = 10) -> mpf:
    """Smallest |X_rho| distance from rho to the orbit of ``base``.

    Scans the enumeration box of size ``n_box``; translates landing on
    rho itself (expansion centered at a pole) are ignored.  Sampling
    circles for extraction around rho must stay strictly inside this
    radius.
    """
    rho = require_upper_half(rho)
    base = require_upper_half(base)
    best = mpf(1)
    for M in enumerate_sl2(n_box, n_box):
        w = moebius_apply(M, base)
        d = hyperbolic_distance(rho, w)
        r = mp.tanh(d / 2)
        if r < mpf("1e-12"):
            continue
        if r < best:
            best = r
    return best
