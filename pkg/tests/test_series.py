"""Truncated-series tests: summands, slash action, evaluation backends,
re-indexing invariance, principal parts, and convergence behavior."""

import pytest
from mpmath import mp, mpc, mpf, workprec

from polar_maass.geometry import T, UnimodularMatrix, enumerate_sl2
from polar_maass.numeric import PoleCollisionError
from polar_maass.series import (
    EvalResult,
    SeriesKind,
    SeriesSpec,
    TruncationParams,
    eval_p,
    eval_psi,
    eval_series,
    eval_series_matrices,
    phi_summand,
    principal_part_P,
    principal_part_Psi,
    psi_summand,
    slash,
)
from conftest import rand_point

Z2 = mpc("-0.23", "0.97")
ZS = mpc("0.41", "0.87")


class TestSummands:
    def test_psi_frozen(self, prec128):
        assert abs(psi_summand(2, 1, mpc(0, 1), mpc(0, 2)) - mpf(1) / 243) < mpf("1e-35")

    def test_psi_at_base_index_zero(self, prec128):
        base = mpc("0.3", "1.2")
        expect = (2 * mpc(0, 1) * base.imag) ** (-4)
        assert abs(psi_summand(2, 0, base, base) - expect) < mpf("1e-35")

    def test_psi_vanishes_at_base_positive_index(self, prec128):
        base = mpc("0.3", "1.2")
        assert psi_summand(2, 2, base, base) == 0

    def test_psi_pole_at_base(self, prec128):
        base = mpc("0.3", "1.2")
        with pytest.raises(PoleCollisionError):
            psi_summand(2, -1, base, base)

    def test_phi_frozen(self, prec128):
        # (3i)^2 * beta(8/9; 3, 1) * 3 with beta(8/9;3,1) = (8/9)^3/3
        got = phi_summand(2, -1, mpc(0, 1), mpc(0, 2))
        assert abs(got + mpf(512) / 81) < mpf("1e-35")

    def test_phi_at_base(self, prec128):
        base = mpc("0.3", "1.2")
        assert phi_summand(2, 3, base, base) == 0
        with pytest.raises(PoleCollisionError):
            phi_summand(2, -1, base, base)
        with pytest.raises(PoleCollisionError):
            phi_summand(2, 0, base, base)

    def test_phi_matches_radial_representation(self, prec128, rng):
        # the beta closed form equals the radial-Q assembly with its
        # exact normalization constant
        from polar_maass.geometry import r_theta
        from polar_maass.special import a_const, fay_Q_radial
        from conftest import rand_pair_with_r

        for k in (2, 3):
            for n in (-2, -1, 0, 1, 3):
                z, zz = rand_pair_with_r(rng)
                r, th = r_theta(zz, z)
                phi1 = phi_summand(k, n, zz, z)
                phi2 = (
                    zz.imag ** (k - 1)
                    * z.imag ** (k - 1)
                    / a_const(1 - k, n).to_mpf()
                    * ((z - mp.conj(zz)) / (zz - mp.conj(z))) ** (k - 1)
                    * fay_Q_radial(k, 1 - k, n, r)
                    * mp.expj(n * th)
                )
                assert abs(phi1 - phi2) / abs(phi1) < mpf("1e-25"), (k, n)


class TestSlash:
    def test_identity(self, prec128):
        f = lambda z: z**2 + 1 / z
        M = UnimodularMatrix(1, 0, 0, 1)
        assert abs(slash(f, 4, M, ZS) - f(ZS)) < mpf("1e-35")

    def test_weight_zero(self, prec128):
        f = lambda z: z**3
        M = UnimodularMatrix(2, 1, 1, 1)
        Mz = (2 * ZS + 1) / (ZS + 1)
        assert abs(slash(f, 0, M, ZS) - f(Mz)) < mpf("1e-33")

    def test_cocycle(self, prec128):
        f = lambda z: mp.expj(2 * mp.pi * z)
        M1 = UnimodularMatrix(2, 1, 1, 1)
        M2 = UnimodularMatrix(1, -2, 0, 1)
        inner = lambda z: slash(f, 4, M1, z)
        lhs = slash(inner, 4, M2, ZS)
        rhs = slash(f, 4, M1 * M2, ZS)
        assert abs(lhs - rhs) / abs(rhs) < mpf("1e-30")


class TestEvaluation:
    def test_backends_agree(self, prec128):
        trunc_fast = TruncationParams(n_cd=6, n_t=6, precision_bits=53)
        trunc_ref = TruncationParams(n_cd=6, n_t=6, precision_bits=128)
        for kind in (SeriesKind.PSI, SeriesKind.P):
            for n in (-2, -1, 0, 1):
                spec = SeriesSpec(2, n, Z2, kind)
                fast = eval_series(spec, [ZS], trunc_fast)[0]
                ref = eval_series(spec, [ZS], trunc_ref)[0]
                assert abs(fast.value - ref.value) / abs(ref.value) < mpf("1e-12")
                assert abs(fast.tail_estimate - ref.tail_estimate) < mpf("1e-8")

    def test_numpy_fallback_agrees_with_kernel(self):
        import numpy as np

        from polar_maass import _kernels
        from polar_maass.geometry import bottom_row_table

        rows, shell = bottom_row_table(5)
        zs = [complex(0.41, 0.87), complex(-0.1, 1.2)]
        for k, n, is_phi in [(2, -1, True), (2, 0, True), (3, 1, False), (2, -2, False)]:
            C, exps, coefs, log_coef = _kernels.beta_float_tables(k, n)
            a = _kernels._eval_kernel(
                rows, shell, 5, np.array(zs, dtype=np.complex128),
                complex(-0.23, 0.97), k, n, is_phi, C, exps, coefs, log_coef,
            )
            b = _kernels._eval_numpy(
                rows, shell, 5, zs, complex(-0.23, 0.97), k, n, is_phi,
                C, exps, coefs, log_coef,
            )
            for x, y in zip(a[0], b[0]):
                assert abs(x - y) <= 1e-13 * max(1.0, abs(y))
            assert abs(a[1][0] - b[1][0]) <= 1e-10
            assert abs(a[2][0] - b[2][0]) <= 1e-12

    def test_deterministic_reruns(self):
        trunc = TruncationParams(n_cd=15, n_t=15, precision_bits=53)
        spec = SeriesSpec(2, -1, Z2, SeriesKind.P)
        a = eval_series(spec, [ZS], trunc)[0]
        b = eval_series(spec, [ZS], trunc)[0]
        assert a.value == b.value and a.tail_estimate == b.tail_estimate

    def test_pole_collision(self, prec128):
        trunc = TruncationParams(n_cd=4, n_t=4, precision_bits=53)
        spec = SeriesSpec(2, -1, Z2, SeriesKind.PSI)
        with pytest.raises(PoleCollisionError):
            eval_series(spec, [Z2], trunc)

    def test_reindexing_invariance(self, prec128):
        # shifting the enumeration box by T on the right equals evaluating
        # at Tz (the T-cocycle is trivial), exactly as finite sums
        trunc_bits = 128
        with workprec(trunc_bits):
            box = list(enumerate_sl2(4, 3))
            shifted = [M * T for M in box]
            for kind, n in [(SeriesKind.PSI, -1), (SeriesKind.P, 1)]:
                spec = SeriesSpec(2, n, Z2, kind)
                lhs = eval_series_matrices(spec, ZS + 1, box)
                rhs = eval_series_matrices(spec, ZS, shifted)
                assert abs(lhs - rhs) / abs(rhs) < mpf("1e-30")

    def test_modularity_improves_with_truncation(self):
        # |F(Sz) - (cz+d)^w F(z)| is a truncation artifact and must shrink
        from polar_maass.geometry import S, moebius_apply

        spec = SeriesSpec(2, -1, mpc("0.13", "1.21"), SeriesKind.P)
        w = 2 - 2 * 2
        defects = []
        for N in (10, 20, 40):
            trunc = TruncationParams(n_cd=N, n_t=N, precision_bits=53)
            z = ZS
            Sz = moebius_apply(S, z)
            FSz = eval_series(spec, [Sz], trunc)[0].value
            Fz = eval_series(spec, [z], trunc)[0].value
            defects.append(abs(FSz - z**w * Fz))
        assert defects[2] < defects[0]

    def test_cauchy_convergence(self):
        spec = SeriesSpec(2, 0, mpc(0, 1), SeriesKind.PSI)
        vals = []
        for N in (10, 20, 40, 80):
            trunc = TruncationParams(n_cd=N, n_t=N, precision_bits=53)
            vals.append(eval_series(spec, [ZS], trunc)[0].value)
        diffs = [abs(vals[i + 1] - vals[i]) for i in range(3)]
        assert diffs[2] < diffs[0]

    def test_cusp_form_decay(self):
        # index >= 0 gives a cusp form; in weight 4 the cusp space is
        # trivial, so the value is pure truncation tail at any height
        spec = SeriesSpec(2, 0, mpc(0, 1), SeriesKind.PSI)
        trunc = TruncationParams(n_cd=40, n_t=40, precision_bits=53)
        for z in (mpc("0.3", "1.0"), mpc("0.3", "10.0")):
            res = eval_series(spec, [z], trunc)[0]
            assert abs(res.value) <= 10 * res.tail_estimate
            assert abs(res.value) < mpf("1e-3")

    def test_parity_vanishing_quick(self):
        # at base i only indices congruent to k-1 mod 2 survive
        trunc = TruncationParams(n_cd=30, n_t=30, precision_bits=53)
        for n in (0, 2):
            spec = SeriesSpec(2, n, mpc(0, 1), SeriesKind.P)
            res = eval_series(spec, [ZS], trunc)[0]
            assert abs(res.value) <= 10 * res.tail_estimate, (n, res)

    def test_boundedness_at_infinity(self):
        # negative weight series stays bounded high in the strip: values
        # stabilize to the constant Fourier term instead of growing; the
        # translation range must dominate the height for the one-row
        # lattice sums to have converged
        spec = SeriesSpec(2, -1, mpc("0.13", "1.21"), SeriesKind.P)
        trunc = TruncationParams(n_cd=20, n_t=800, precision_bits=53)
        vals = [
            eval_series(spec, [mpc("0.2", y)], trunc)[0].value
            for y in ("6.0", "20.0", "60.0")
        ]
        spread = max(abs(v - vals[0]) for v in vals)
        assert spread < mpf("0.05") * abs(vals[0])
        assert all(abs(v) < 1000 for v in vals)


class TestPrincipalParts:
    def test_psi_principal_part(self, prec128):
        z = Z2 + mpc("0.01", "0.015")
        # omega = 1 at a generic point
        expect = 2 * psi_summand(2, -1, Z2, z)
        assert abs(principal_part_Psi(2, -1, Z2, z) - expect) < mpf("1e-30")
        # omega = 2 at i
        zi = mpc(0, 1) + mpc("0.01", "0.015")
        expect = 4 * psi_summand(2, -1, mpc(0, 1), zi)
        assert abs(principal_part_Psi(2, -1, mpc(0, 1), zi) - expect) < mpf("1e-30")

    def test_psi_principal_part_rejects_regular(self, prec128):
        with pytest.raises(ValueError):
            principal_part_Psi(2, 0, Z2, ZS)

    def test_P_middle_case_is_summand(self, prec128):
        z = Z2 + mpc("0.02", "0.01")
        for n in (0, 1, 2):
            expect = 2 * phi_summand(2, n, Z2, z)
            assert abs(principal_part_P(2, n, Z2, z) - expect) / abs(expect) < mpf("1e-28")

    def test_P_negative_case_constant(self, prec128):
        from polar_maass.numeric import to_mpf
        from polar_maass.special import script_C_principal

        z = Z2 + mpc("0.02", "0.01")
        X = (z - Z2) / (z - mp.conj(Z2))
        expect = 2 * to_mpf(script_C_principal(2, -1)) * (z - mp.conj(Z2)) ** 2 * X**-1
        assert abs(principal_part_P(2, -1, Z2, z) - expect) / abs(expect) < mpf("1e-30")

    def test_subtraction_bounded_near_base(self):
        # eval - principal part stays bounded while both blow up
        trunc = TruncationParams(n_cd=25, n_t=25, precision_bits=53)
        base = mpc("0.13", "1.21")
        spec = SeriesSpec(2, -1, base, SeriesKind.P)
        remainders = []
        raws = []
        for eps in ("0.08", "0.04", "0.02"):
            z = base + mpf(eps) * mp.expjpi(mpf("0.3"))
            val = eval_series(spec, [z], trunc)[0].value
            pp = principal_part_P(2, -1, base, z)
            raws.append(abs(val))
            remainders.append(abs(val - pp))
        assert raws[2] > raws[0]  # the series itself blows up
        assert remainders[2] < 5 * max(remainders[0], 1)

    def test_psi_subtraction_bounded_near_base(self):
        trunc = TruncationParams(n_cd=25, n_t=25, precision_bits=53)
        base = mpc("0.13", "1.21")
        spec = SeriesSpec(2, -1, base, SeriesKind.PSI)
        remainders = []
        for eps in ("0.08", "0.02"):
            z = base + mpf(eps) * mp.expjpi(mpf("0.3"))
            val = eval_series(spec, [z], trunc)[0].value
            remainders.append(abs(val - principal_part_Psi(2, -1, base, z)))
        assert remainders[1] < 5 * max(remainders[0], 1)
