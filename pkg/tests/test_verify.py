"""Verification-suite tests: registry discipline, determinism, small-scale
end-to-end checks of every suite."""

import json

import pytest
from mpmath import mp, mpc, mpf

from polar_maass.expansions import ExtractionParams
from polar_maass.geometry import T, moebius_apply
from polar_maass.series import TruncationParams
from polar_maass.verify import (
    IDENTITY_REGISTRY,
    CheckReport,
    check_duality,
    check_identity_suite,
    check_operator_theorem,
    convergence_study,
    duality_suite,
    reports_to_csv,
    reports_to_json_lines,
)

Z1 = mpc("0.11", "1.31")
Z2 = mpc("-0.23", "0.97")
SMALL = TruncationParams(n_cd=30, n_t=30, precision_bits=53)


class TestIdentitySuite:
    def test_all_pass(self):
        reports = check_identity_suite(seed=1, count=10)
        assert reports
        bad = [r for r in reports if not r.passed]
        assert not bad, [(r.check_id, r.parameters) for r in bad]

    def test_report_count_scales(self):
        r1 = check_identity_suite(seed=3, count=2)
        r2 = check_identity_suite(seed=3, count=4)
        assert len(r2) == 2 * len(r1)

    def test_registry_covers_all_ids(self):
        reports = check_identity_suite(seed=2, count=3)
        assert {r.check_id for r in reports} <= set(IDENTITY_REGISTRY)

    def test_unknown_id_rejected(self):
        from polar_maass.verify import _make_report

        with pytest.raises(KeyError):
            _make_report("no-such-check", {}, 1, 1, 1e-3)

    def test_deterministic_bytes(self):
        a = reports_to_json_lines(check_identity_suite(seed=9, count=4))
        b = reports_to_json_lines(check_identity_suite(seed=9, count=4))
        assert a == b

    def test_seed_changes_draws(self):
        a = reports_to_json_lines(check_identity_suite(seed=1, count=4))
        b = reports_to_json_lines(check_identity_suite(seed=2, count=4))
        assert a != b

    def test_exact_rational_checks_have_zero_error(self):
        reports = check_identity_suite(seed=5, count=5)
        consts = [r for r in reports if r.check_id == "principal-constant"]
        assert consts
        assert all(r.abs_err == 0 for r in consts)


class TestReportSerialization:
    def test_canonical_json_drops_runtime(self):
        rep = check_identity_suite(seed=1, count=1)[0]
        full = rep.to_dict(canonical=False)
        canon = rep.to_dict(canonical=True)
        assert "runtime_ms" in full and "runtime_ms" not in canon

    def test_csv_header_and_rows(self):
        reports = check_identity_suite(seed=1, count=1)
        text = reports_to_csv(reports)
        lines = text.splitlines()
        assert lines[0] == "check_id,passed,rel_err,tolerance,runtime_ms"
        assert len(lines) == len(reports) + 1

    def test_near_zero_uses_absolute_mode(self):
        from polar_maass.verify import _make_report

        rep = _make_report("series-value", {}, mpc(1e-9), mpc(5e-8), 1e-3)
        assert rep.passed  # rhs below tolerance, absolute error tiny
        rep2 = _make_report("series-value", {}, mpc(1.0), mpc(5e-8), 1e-3)
        assert not rep2.passed


class TestOperatorSuite:
    def test_small_scale_passes(self):
        reports = check_operator_theorem(
            2, -1, mpc("0.13", "1.21"), [mpc("0.41", "0.87")], SMALL, tol=5e-3
        )
        assert len(reports) == 2
        assert {r.check_id for r in reports} == {"operator-xi-series", "operator-D-series"}
        assert all(r.passed for r in reports), [(r.check_id, r.rel_err) for r in reports]
        assert all(r.tail_estimate is not None for r in reports)

    def test_parity_point_absolute_mode(self):
        # even index at base i: both sides vanish, compared absolutely
        reports = check_operator_theorem(
            2, 0, mpc(0, 1), [mpc("0.41", "0.87")], SMALL, tol=5e-2
        )
        xi_rep = [r for r in reports if r.check_id == "operator-xi-series"][0]
        assert abs(xi_rep.rhs) < 5e-2
        assert xi_rep.passed


class TestDuality:
    def test_single_pair(self):
        rep = check_duality(2, 0, 0, Z1, Z2, TruncationParams(40, 40, 53), tol=1e-3)
        assert rep.check_id == "coefficient-duality"
        assert rep.passed, rep.rel_err
        assert rep.rel_err < 1e-3

    def test_grid_reuses_extractions(self):
        reports = duality_suite(
            2, [0, 1], [0, 1], Z1, Z2, TruncationParams(30, 30, 53), tol=5e-3
        )
        assert len(reports) == 4
        assert all(r.passed for r in reports), [(r.parameters, r.rel_err) for r in reports]

    def test_swapped_roles(self):
        # the relation transposes under (m, n), (z1, z2) exchange
        t = TruncationParams(30, 30, 53)
        a = check_duality(2, 1, 0, Z1, Z2, t, tol=5e-3)
        b = check_duality(2, 0, 1, Z2, Z1, t, tol=5e-3)
        assert a.passed and b.passed

    def test_equivalent_points_smoke(self):
        # one base an SL2(Z) translate of the other: the pole sits at the
        # expansion center, whose delta term lives at a negative mode and
        # leaves the compared coefficients intact
        z2t = moebius_apply(T, Z2)
        rep = check_duality(2, 0, 0, z2t, Z2, TruncationParams(30, 30, 53), tol=5e-3)
        assert rep.passed, rep.rel_err

    def test_explicit_radii_respected(self):
        quad = ExtractionParams(r1=0.05, r2=0.09, m_quad=64, noise_factor=0.0)
        rep = check_duality(2, 0, 0, Z1, Z2, TruncationParams(30, 30, 53), quad, tol=5e-3)
        assert rep.parameters["r1"] == 0.05
        assert rep.passed


class TestConvergence:
    def test_series_rows(self):
        rows = convergence_study(
            "psi",
            {"k": 2, "n": -1, "base": Z2, "z": mpc("0.41", "0.87")},
            [10, 20, 40],
        )
        assert [r[0] for r in rows] == [10, 20, 40]
        assert rows[2][2] < rows[0][2]  # tail estimate shrinks

    def test_duality_rel_err_decreases(self):
        rows = convergence_study(
            "duality",
            {"k": 2, "m": 0, "n": 0, "z1": Z1, "z2": Z2},
            [20, 60],
        )
        assert rows[1][1] < max(rows[0][1], 1e-4) * 2

    def test_single_row(self):
        rows = convergence_study(
            "p",
            {"k": 2, "n": 1, "base": Z2, "z": mpc("0.41", "0.87")},
            [15],
        )
        assert len(rows) == 1

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            convergence_study("psi", {"k": 2, "n": 0, "base": Z2, "z": Z1}, [40, 20])
