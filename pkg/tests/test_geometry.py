"""Geometry tests: Moebius action, elliptic coordinates, reduction, enumeration."""

import math

import pytest
from mpmath import mp, mpc, mpf, workprec

from polar_maass.geometry import (
    IDENTITY,
    S,
    T,
    UnimodularMatrix,
    elliptic_X,
    elliptic_inverse,
    enumerate_sl2,
    hyperbolic_distance,
    moebius_apply,
    r_theta,
    reduce_to_fundamental_domain,
    require_upper_half,
    stabilizer_order,
)
from conftest import rand_point


class TestMoebius:
    def test_identity(self, prec128):
        z = mpc("0.3", "1.4")
        assert moebius_apply(IDENTITY, z) == z

    def test_inversion_fixes_i(self, prec128):
        assert abs(moebius_apply(S, mpc(0, 1)) - mpc(0, 1)) < mpf("1e-35")

    def test_translation(self, prec128):
        z = mpc("0.3", "1.4")
        assert abs(moebius_apply(T, z) - (z + 1)) < mpf("1e-35")

    def test_det_validation(self):
        with pytest.raises(ValueError):
            UnimodularMatrix(1, 1, 1, 1)

    def test_upper_half_validation(self):
        with pytest.raises(ValueError):
            require_upper_half(mpc(1, -2))
        with pytest.raises(ValueError):
            require_upper_half(0.5)


class TestEllipticCoordinates:
    def test_X_at_center(self, prec128):
        rho = mpc("0.2", "1.1")
        assert elliptic_X(rho, rho) == 0

    def test_X_frozen(self, prec128):
        assert abs(elliptic_X(mpc(0, 1), mpc(0, 2)) - mpf(1) / 3) < mpf("1e-35")

    def test_X_inside_disk(self, prec128, rng):
        for _ in range(50):
            assert abs(elliptic_X(rand_point(rng), rand_point(rng))) < 1

    def test_inverse_frozen(self, prec128):
        assert abs(elliptic_inverse(mpc(0, 1), mpf(1) / 3) - mpc(0, 2)) < mpf("1e-35")

    def test_inverse_rejects_outside(self, prec128):
        with pytest.raises(ValueError):
            elliptic_inverse(mpc(0, 1), mpc(1, 1))

    def test_round_trip(self, prec128, rng):
        for _ in range(100):
            rho = rand_point(rng)
            z = rand_point(rng)
            w = elliptic_X(rho, z)
            assert abs(elliptic_inverse(rho, w) - z) < mpf("1e-30")

    def test_r_matches_distance(self, prec128, rng):
        for _ in range(100):
            rho = rand_point(rng)
            z = rand_point(rng)
            r, theta = r_theta(rho, z)
            assert abs(r - mp.tanh(hyperbolic_distance(z, rho) / 2)) < mpf("1e-25")
            X = elliptic_X(rho, z)
            assert abs(r * mp.expj(theta) - X) < mpf("1e-30")

    def test_r_theta_at_center(self, prec128):
        rho = mpc("0.2", "1.1")
        assert r_theta(rho, rho) == (0, 0)

    def test_r_theta_frozen(self, prec128):
        r, theta = r_theta(mpc(0, 1), mpc(0, 2))
        assert abs(r - mpf(1) / 3) < mpf("1e-35")
        assert abs(theta) < mpf("1e-35")


class TestDistance:
    def test_zero(self, prec128):
        z = mpc("0.3", "0.9")
        assert hyperbolic_distance(z, z) == 0

    def test_frozen_log2(self, prec128):
        assert abs(hyperbolic_distance(mpc(0, 1), mpc(0, 2)) - mp.log(2)) < mpf("1e-35")

    def test_symmetry(self, prec128, rng):
        z, w = rand_point(rng), rand_point(rng)
        assert abs(hyperbolic_distance(z, w) - hyperbolic_distance(w, z)) < mpf("1e-35")

    def test_moebius_invariance(self, prec128, rng):
        from polar_maass.verify import _rand_sl2

        for _ in range(50):
            z, w = rand_point(rng), rand_point(rng)
            M = _rand_sl2(rng)
            d1 = hyperbolic_distance(moebius_apply(M, z), moebius_apply(M, w))
            assert abs(d1 - hyperbolic_distance(z, w)) < mpf("1e-25")

    def test_r_invariance_under_stabilizer(self, prec128):
        # S fixes i; the order-3 element TS fixes the corner
        i = mpc(0, 1)
        corner = mpc(mpf(1) / 2, mp.sqrt(3) / 2)
        z = mpc("0.31", "1.7")
        r1, _ = r_theta(i, z)
        r2, _ = r_theta(i, moebius_apply(S, z))
        assert abs(r1 - r2) < mpf("1e-30")
        TS = T * S
        assert abs(moebius_apply(TS, corner) - corner) < mpf("1e-30")
        r1, _ = r_theta(corner, z)
        r2, _ = r_theta(corner, moebius_apply(TS, z))
        assert abs(r1 - r2) < mpf("1e-30")


def _brute_stabilizer_order(z, bound=2):
    seen = set()
    count = 0
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            for c in range(-bound, bound + 1):
                for d in range(-bound, bound + 1):
                    if a * d - b * c != 1:
                        continue
                    key = (a, b, c, d) if (c, d) > (0, 0) or (c == 0 and d > 0) else (-a, -b, -c, -d)
                    if key in seen:
                        continue
                    seen.add(key)
                    M = UnimodularMatrix(a, b, c, d)
                    if abs(moebius_apply(M, z) - z) < mpf("1e-20"):
                        count += 1
    return count


class TestReductionAndStabilizers:
    def test_translation_reduction(self, prec128):
        zstar, M = reduce_to_fundamental_domain(mpc(5, 1))
        assert M.entries() == (1, -5, 0, 1)
        assert abs(zstar - mpc(0, 1)) < mpf("1e-35")

    def test_inversion_reduction(self, prec128):
        zstar, M = reduce_to_fundamental_domain(mpc(0, mpf("0.5")))
        assert abs(zstar - mpc(0, 2)) < mpf("1e-35")

    def test_idempotent(self, prec128, rng):
        for _ in range(20):
            z = rand_point(rng)
            zstar, M = reduce_to_fundamental_domain(z)
            assert abs(moebius_apply(M, z) - zstar) < mpf("1e-30")
            z2, M2 = reduce_to_fundamental_domain(zstar)
            assert abs(z2 - zstar) < mpf("1e-30")
            assert abs(zstar.real) <= mpf("0.5") + mpf("1e-30")
            assert abs(zstar) >= 1 - mpf("1e-30")

    def test_stabilizer_orders(self, prec128):
        i = mpc(0, 1)
        corner = mpc(mpf(1) / 2, mp.sqrt(3) / 2)
        generic = mpc("0.1", "1.3")
        assert stabilizer_order(i) == _brute_stabilizer_order(i) == 2
        assert stabilizer_order(corner) == _brute_stabilizer_order(corner) == 3
        assert stabilizer_order(generic) == _brute_stabilizer_order(generic) == 1

    def test_stabilizer_of_translate(self, prec128):
        assert stabilizer_order(mpc(5, 1)) == 2  # translate of i
        assert stabilizer_order(mpc("0.25", "0.97")) == 1


class TestEnumeration:
    def test_smallest_box_frozen(self):
        got = {M.entries() for M in enumerate_sl2(1, 0)}
        assert got == {(1, 0, 0, 1), (0, -1, 1, 0), (0, -1, 1, 1), (0, -1, 1, -1)}

    def test_determinant_invariant(self):
        for M in enumerate_sl2(4, 2):
            a, b, c, d = M.entries()
            assert a * d - b * c == 1

    def test_determinism(self):
        run1 = [M.entries() for M in enumerate_sl2(5, 3)]
        run2 = [M.entries() for M in enumerate_sl2(5, 3)]
        assert run1 == run2

    def test_one_representative_per_pair(self):
        seen = set()
        for M in enumerate_sl2(6, 3):
            e = M.entries()
            neg = tuple(-x for x in e)
            assert e not in seen and neg not in seen
            seen.add(e)

    @pytest.mark.parametrize("n_cd,n_t", [(2, 2), (3, 2), (4, 3)])
    def test_matches_brute_force_box(self, n_cd, n_t):
        # independent scan: all det-1 matrices with this bottom-row half-box
        # whose top row lies within n_t translate steps of the seed
        expected = set()
        for c in range(0, n_cd + 1):
            d_range = [1] if c == 0 else range(-n_cd, n_cd + 1)
            for d in d_range:
                if math.gcd(c, d) != 1:
                    continue
                if c == 0:
                    for a, bb in [(1, t) for t in range(-n_t, n_t + 1)]:
                        expected.add((a, bb, 0, 1))
                    continue
                wide = 3 * n_t * max(c, abs(d), 1) + 5
                for a in range(-wide, wide + 1):
                    if (a * d - 1) % c != 0:
                        continue
                    bb = (a * d - 1) // c
                    a0 = pow(d, -1, c) if c > 1 else 0
                    t = (a - a0) // c
                    if abs(t) <= n_t:
                        expected.add((a, bb, c, d))
        got = {M.entries() for M in enumerate_sl2(n_cd, n_t)}
        assert got == expected
