"""Tests for the identity suite: each verifier on its own, then the driver.

The suite is itself a test harness, so most cases here pin its *shape*:
which rows appear, how pass/fail is encoded, that fault injection actually
trips the curvature-sensitive checks, and that the two dual-evaluation
records carry both numbers.  Independent oracles that live at test level
(a bracketed root for the curvature, parity quadratures for the residual)
are here too so the suite's own evaluations never certify themselves.
"""
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from conftest import PARAM_GRID, SMALL_GRID
from rdblowup.core import ConfigurationError, Params
from rdblowup.hermite import (
    DEFAULT_ORDER,
    Weight,
    gauss_quadrature,
    hermite_norm_sq,
    hermite_weighted,
    inner_product,
)
from rdblowup.identities import (
    DEFAULT_GRID,
    _dual_evaluation_rows,
    _faulted_constants,
    run_all,
    verify_diagonalization,
    verify_formal_analysis,
    verify_null_mode,
    verify_projections,
    verify_residual_projection,
    verify_semigroup,
)
from rdblowup.profile import b_selection_residual, constants, residual_leading
from rdblowup.spectral import diagonal_weights


def by_id(rows):
    return {r.id: r for r in rows}


class TestFormalAnalysis:
    def test_symmetric_point_all_four_tight(self):
        rows = verify_formal_analysis(Params(3, 3, 1.0))
        assert [r.id for r in rows] == [
            "base-ode-residual",
            "correction-origin-values",
            "degree-one-determinant",
            "curvature-selection",
        ]
        for r in rows:
            assert r.passed
            assert r.rel_err < 1e-10

    def test_passes_across_grid(self):
        for prm in PARAM_GRID:
            assert all(r.passed for r in verify_formal_analysis(prm))

    def test_determinant_negative_everywhere(self):
        for prm in PARAM_GRID:
            det = by_id(verify_formal_analysis(prm))["degree-one-determinant"]
            assert det.lhs < 0.0
            assert det.passed

    @given(
        st.floats(1.5, 4.0),
        st.floats(1.5, 4.0),
        st.floats(0.3, 3.0),
    )
    @settings(max_examples=25, deadline=None)
    def test_determinant_negative_between_grid_points(self, p, q, mu):
        det = by_id(verify_formal_analysis(Params(p, q, mu)))["degree-one-determinant"]
        assert det.lhs < 0.0
        assert det.rel_err <= det.tol

    def test_curvature_root_bracketed_oracle(self):
        # independent root-finding route: the defect changes sign around the
        # closed curvature and its bracketed root lands on it
        for prm in SMALL_GRID:
            c = constants(prm)
            root = brentq(
                lambda b: b_selection_residual(b, prm), 0.5 * c.b, 2.0 * c.b, xtol=1e-16
            )
            assert abs(root - c.b) / c.b < 1e-10

    def test_curvature_fault_has_visible_magnitude(self):
        for prm in SMALL_GRID:
            c = constants(prm)
            for factor in (1.01, 0.99):
                row = by_id(verify_formal_analysis(prm, b_override=factor * c.b))[
                    "curvature-selection"
                ]
                assert not row.passed
                assert abs(row.lhs) > 1e-4


class TestDiagonalization:
    def test_truncation_cap(self):
        with pytest.raises(ConfigurationError):
            verify_diagonalization(Params(3, 3, 1.0), 22)

    def test_passes_small_grid(self):
        for prm in SMALL_GRID:
            assert all(r.passed for r in verify_diagonalization(prm, 10))

    def test_ladder_to_twenty(self):
        row = by_id(verify_diagonalization(Params(3, 3, 2.0), 20))["eigenvalue-ladder"]
        assert row.passed
        assert row.abs_err <= 1e-8

    def test_unit_top_eigenvalue_exact(self):
        row = by_id(verify_diagonalization(Params(2, 5, 0.5), 4))["unit-top-eigenvalue"]
        assert row.lhs == 1.0
        assert row.abs_err == 0.0

    def test_decoupling_row_only_at_equal_diffusivities(self):
        with_row = by_id(verify_diagonalization(Params(2, 5, 1.0), 8))
        without = by_id(verify_diagonalization(Params(2, 5, 0.5), 8))
        assert "equal-diffusivity-decoupling" in with_row
        assert with_row["equal-diffusivity-decoupling"].passed
        assert "equal-diffusivity-decoupling" not in without

    def test_defective_slots_do_not_poison_residual_check(self):
        # (3,3,2) carries Jordan structure; the symbolic residual check
        # passes because it reads the recorded defect and skips those slots
        rows = by_id(verify_diagonalization(Params(3, 3, 2.0), 10))
        assert rows["eigen-equation-residual"].passed
        assert "excluded" in rows["eigen-equation-residual"].claim


class TestProjections:
    def test_passes_small_grid(self):
        for prm in SMALL_GRID:
            assert all(r.passed for r in verify_projections(prm, 10))

    def test_diagonal_weight_frozen_value(self):
        # q / (Gamma (2pq+p+q)) at p=q=3: Gamma = 2^{-1/2}, denominator 24
        for mu in (0.5, 1.0, 2.0):
            assert diagonal_weights(Params(3, 3, mu))[0] == pytest.approx(
                0.1767766952966369, abs=1e-15
            )

    def test_round_trip_seed_determinism(self):
        a = by_id(verify_projections(Params(3, 3, 2.0), 10, seed=7))["amplitude-round-trip"]
        b = by_id(verify_projections(Params(3, 3, 2.0), 10, seed=7))["amplitude-round-trip"]
        c = by_id(verify_projections(Params(3, 3, 2.0), 10, seed=8))["amplitude-round-trip"]
        assert a.lhs == b.lhs
        assert a.lhs != c.lhs


class TestNullMode:
    def test_minus_two_at_standard_points(self):
        for prm in (Params(3, 3, 1.0), Params(3, 3, 2.0), Params(2, 5, 0.5)):
            row = verify_null_mode(prm, 10)
            assert row.passed
            assert abs(row.lhs - (-2.0)) < 1e-10

    def test_minus_two_across_grid(self):
        for prm in PARAM_GRID:
            assert verify_null_mode(prm, 6).passed

    def test_truncation_guard(self):
        with pytest.raises(ConfigurationError):
            verify_null_mode(Params(3, 3, 1.0), 2)

    def test_fault_scales_the_value(self):
        prm = Params(3, 3, 2.0)
        row = verify_null_mode(prm, 6, c_override=_faulted_constants(prm))
        assert not row.passed
        assert row.lhs == pytest.approx(-2.02, abs=1e-6)

    def test_degree_four_slot_closed_form(self):
        for prm in SMALL_GRID:
            rows = by_id(_dual_evaluation_rows(prm, 6))
            slot = rows["quadratic-pair-degree-four-slot"]
            assert slot.passed
            assert not slot.informational


class TestResidualProjection:
    def test_zero_at_selected_curvature(self):
        for prm in SMALL_GRID:
            row = verify_residual_projection(prm, 6)
            assert row.passed
            assert abs(row.lhs) < 1e-9

    def test_fault_breaks_the_zero(self):
        prm = Params(2, 5, 0.5)
        row = verify_residual_projection(prm, 6, c_override=_faulted_constants(prm))
        assert not row.passed
        assert abs(row.lhs) > 1e-6

    def test_odd_slots_vanish_by_parity(self):
        prm = Params(2, 5, 0.5)
        c = constants(prm)
        qu = gauss_quadrature(1.0, DEFAULT_ORDER)
        for m in (1, 3):
            coef = inner_product(
                lambda y: residual_leading(y, c, prm)[0],
                hermite_weighted(m, 1.0),
                Weight(1.0),
                qu,
            ) / hermite_norm_sq(m, 1.0)
            assert abs(coef) < 1e-12

    def test_extrapolation_row_discriminates(self):
        for prm in SMALL_GRID:
            rows = by_id(_dual_evaluation_rows(prm, 6))
            assert rows["leading-residual-extrapolation"].passed
            alt = rows["leading-residual-alternate-constants"]
            assert alt.informational
            assert not alt.passed
            assert alt.rel_err > 1e-3


class TestSemigroupChecks:
    def test_rows_pass_with_violation_encoding(self):
        rows = verify_semigroup(Params(3, 3, 2.0), 10)
        assert [r.id for r in rows] == [
            "kernel-contraction",
            "far-mode-decay-rate",
            "far-mode-weighted-bound",
        ]
        for r in rows:
            assert r.passed
            assert r.abs_err == 0.0
            assert r.tol == 0.0
            assert r.lhs <= r.rhs

    def test_contraction_strictly_inside_bound(self):
        row = by_id(verify_semigroup(Params(3, 3, 1.0), 10))["kernel-contraction"]
        assert row.lhs < 1.0 + 1e-8


class TestRunAll:
    @pytest.fixture(scope="class")
    def small_report(self, tmp_path_factory):
        path = tmp_path_factory.mktemp("reports") / "identities.json"
        rep = run_all(SMALL_GRID, path)
        return rep, path

    def test_report_shape(self, small_report):
        rep, path = small_report
        assert rep["all_passed"]
        assert rep["n_fail"] == 0
        assert rep["n_checks"] + rep["n_informational"] == len(rep["checks"])
        assert rep["seed"] == 20260822
        assert not rep["fault_injected"]
        on_disk = json.loads(path.read_text())
        assert on_disk == rep
        for ch in rep["checks"]:
            assert set(ch) >= {
                "id", "claim", "lhs", "rhs", "abs_err", "rel_err",
                "tol", "passed", "oracle", "informational", "params",
            }

    def test_report_bytes_deterministic(self, small_report, tmp_path):
        _, path = small_report
        again = tmp_path / "again.json"
        run_all(SMALL_GRID, again)
        assert again.read_bytes() == path.read_bytes()

    def test_informational_rows_do_not_gate(self, small_report):
        rep, _ = small_report
        info_fails = [
            ch for ch in rep["checks"] if ch["informational"] and not ch["passed"]
        ]
        assert info_fails  # the alternate evaluations are expected to differ
        assert rep["all_passed"]

    def test_dual_evaluations_present_with_both_numbers(self, small_report):
        rep, _ = small_report
        prod = [ch for ch in rep["checks"] if ch["id"] == "quadratic-pair-production-evaluation"]
        alt = [ch for ch in rep["checks"] if ch["id"] == "quadratic-pair-alternate-evaluation"]
        assert len(prod) == len(SMALL_GRID)
        assert len(alt) == len(SMALL_GRID)
        for ch in prod:
            assert ch["lhs"] == pytest.approx(-2.0, abs=1e-10)
            assert "eigen-equation residual" in ch["claim"]
        for ch in alt:
            assert abs(ch["lhs"] - (-2.0)) > 0.5
            assert "eigen-equation residual" in ch["claim"]

    def test_empty_grid(self, tmp_path):
        rep = run_all([], tmp_path / "empty.json")
        assert rep["checks"] == []
        assert rep["n_checks"] == 0
        assert rep["all_passed"]

    def test_fault_injection_fails_curvature_sensitive_checks(self):
        rep = run_all([Params(3, 3, 2.0)], inject_b_fault=True)
        assert not rep["all_passed"]
        assert rep["fault_injected"]
        failed = {ch["id"] for ch in rep["checks"] if not ch["passed"] and not ch["informational"]}
        assert failed == {
            "curvature-selection",
            "null-direction-pairing",
            "leading-residual-null-projection",
        }

    def test_kernel_checks_once_per_diffusivity(self):
        rep = run_all([Params(3, 3, 2.0), Params(2, 2, 2.0), Params(2, 2, 0.5)])
        kernel_rows = [ch for ch in rep["checks"] if ch["id"] == "kernel-contraction"]
        assert len(kernel_rows) == 2  # mu = 2.0 ran once, mu = 0.5 once

    def test_default_grid_is_the_27_points(self):
        assert len(DEFAULT_GRID) == 27
        assert len({(prm.p, prm.q, prm.mu) for prm in DEFAULT_GRID}) == 27
