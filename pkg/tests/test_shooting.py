"""Tests for the trapping search and the blowup-parameter stability scan."""
import json
import math

import numpy as np
import pytest

from rdblowup.core import ConfigurationError, Params
from rdblowup.dynamics import SolverConfig
from rdblowup.profile import constants
from rdblowup.shooting import (
    NoCaptureError,
    ShotResult,
    boundary_points,
    exit_transversality,
    find_trapped,
    flow_map,
    make_perturbation,
    stability_scan,
    trap_report_to_file,
    winding_number,
)
from rdblowup.spectral import projection_table

PARAMS = Params(3.0, 3.0, 2.0)
CONST = constants(PARAMS)
TABLE = projection_table(4, PARAMS)

CFG_SHORT = SolverConfig(
    s0=20.0, s_end=24.0, ds=0.05, y_max=40.0, n_grid=512,
    K=4.0, A=20.0, M_trunc=4, quad_order=80, mode="deviation",
)
CFG_DEEP = SolverConfig(
    s0=20.0, s_end=28.0, ds=0.05, y_max=44.0, n_grid=512,
    K=4.0, A=20.0, M_trunc=4, quad_order=80, mode="deviation",
)


@pytest.fixture(scope="module")
def trapped():
    return find_trapped(CFG_DEEP, CONST, PARAMS, TABLE)


class TestWindingNumber:
    def test_enclosing_loop(self):
        sq = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
        assert winding_number(sq) == 1
        assert winding_number(sq[::-1]) == -1

    def test_non_enclosing_loop(self):
        sq = [(2, 1), (3, 1), (3, 2), (2, 2)]
        assert winding_number(sq) == 0

    def test_origin_hit(self):
        with pytest.raises(ConfigurationError):
            winding_number([(1, 0), (0, 0), (0, 1)])

    def test_too_short(self):
        with pytest.raises(ConfigurationError):
            winding_number([(1, 0), (0, 1)])


class TestBoundaryPoints:
    def test_count_and_corners(self):
        rect = (-2.0, 2.0, -1.0, 1.0)
        pts = boundary_points(rect)
        assert len(pts) == 16
        for corner in [(-2, -1), (2, -1), (2, 1), (-2, 1)]:
            assert corner in [(p[0], p[1]) for p in pts]

    def test_counterclockwise(self):
        pts = boundary_points((-1.0, 1.0, -1.0, 1.0))
        area2 = sum(
            pts[i][0] * pts[(i + 1) % 16][1] - pts[(i + 1) % 16][0] * pts[i][1]
            for i in range(16)
        )
        assert area2 > 0


class TestFlowMap:
    def test_seed_box_precondition(self):
        with pytest.raises(ConfigurationError):
            flow_map(2.5, 0.0, CFG_SHORT, CONST, PARAMS, TABLE)
        with pytest.raises(ConfigurationError):
            flow_map(0.0, -3.0, CFG_SHORT, CONST, PARAMS, TABLE)

    @pytest.mark.parametrize("d0", [2.0, -2.0])
    def test_boundary_seed_exits_immediately(self, d0):
        # the seed map saturates theta_0 at |d0| = 2, so the shot exits at
        # s0 with the seed's sign
        shot = flow_map(d0, 0.0, CFG_SHORT, CONST, PARAMS, TABLE, keep_trajectory=False)
        assert shot.exit_s == CFG_SHORT.s0
        assert shot.exit_clause == "theta_0"
        assert math.copysign(1.0, shot.end_theta[0]) == math.copysign(1.0, d0)
        assert not shot.anomalous

    def test_even_seed_keeps_theta1_zero(self):
        params = Params(3.0, 3.0, 1.0)
        c1 = constants(params)
        table = projection_table(4, params)
        shot = flow_map(0.0, 0.0, CFG_SHORT, c1, params, table)
        worst = max(abs(s.modes.theta[1]) for s in shot.trajectory.samples)
        assert worst <= 1e-10

    def test_exit_map_sign_pattern_odd(self):
        # seeds on the box boundary exit through the seed map itself, which
        # is linear, so negating the seed flips both exit signs
        params = Params(3.0, 3.0, 1.0)
        c1 = constants(params)
        table = projection_table(4, params)
        for d0, d1 in [(2.0, 0.3), (2.0, -1.0), (1.5, 2.0)]:
            a = flow_map(d0, d1, CFG_SHORT, c1, params, table, keep_trajectory=False)
            b = flow_map(-d0, -d1, CFG_SHORT, c1, params, table, keep_trajectory=False)
            assert math.copysign(1.0, a.end_theta[0]) == -math.copysign(1.0, b.end_theta[0])
            assert math.copysign(1.0, a.end_theta[1]) == -math.copysign(1.0, b.end_theta[1])

    def test_exit_transversality(self, trapped):
        # just off the trapped seed the saturated coefficient crosses its
        # bound moving outward
        shot = flow_map(trapped.d0 + 0.01, 0.0, CFG_DEEP, CONST, PARAMS, TABLE)
        assert shot.exit_clause == "theta_0"
        assert exit_transversality(shot) > 0.0
        shot = flow_map(trapped.d0 - 0.01, 0.0, CFG_DEEP, CONST, PARAMS, TABLE)
        assert exit_transversality(shot) > 0.0

    def test_transversality_needs_trajectory(self):
        shot = ShotResult(0.0, 0.0, 21.0, "theta_0", (0.1, 0.0), trajectory=None)
        with pytest.raises(ConfigurationError):
            exit_transversality(shot)

    def test_anomalous_classification(self):
        inside = ShotResult(0.0, 0.0, 24.0, None, (0.0, 0.0))
        assert not inside.anomalous and inside.reached_horizon
        unstable = ShotResult(0.0, 0.0, 21.0, "theta_1", (0.0, 0.1))
        assert not unstable.anomalous
        weird = ShotResult(0.0, 0.0, 21.0, "outer_sup_L", (0.0, 0.0))
        assert weird.anomalous
        aborted = ShotResult(0.0, 0.0, 21.0, "solver_abort", (0.0, 0.0))
        assert aborted.anomalous


class TestFindTrapped:
    def test_top_winding_and_capture(self, trapped):
        assert trapped.top_winding in (1, -1)
        assert trapped.d1 == 0.0
        assert abs(trapped.d0) < 1.0

    def test_certificate_in_set_to_horizon(self, trapped):
        cert = trapped.certificate
        assert all(s.shrink.in_set for s in cert.samples)
        assert cert.samples[-1].s >= CFG_DEEP.s_end - 1e-9
        worst_t1 = max(abs(s.modes.theta[1]) for s in cert.samples)
        assert worst_t1 <= 1e-10

    def test_geometric_shrink(self, trapped):
        widths = [lv.rect[1] - lv.rect[0] for lv in trapped.levels[1:]]
        for a, b in zip(widths, widths[1:]):
            assert a / b >= 1.5

    def test_monotone_capture_depth(self, trapped):
        depths = [lv.retained_exit_s for lv in trapped.levels[1:]]
        assert all(b >= a - 1e-9 for a, b in zip(depths, depths[1:]))
        assert depths[-1] >= CFG_DEEP.s_end - 1e-9

    def test_level_windings_nonzero(self, trapped):
        assert all(lv.winding in (1, -1) for lv in trapped.levels)

    def test_level_budget_exhaustion(self):
        with pytest.raises(NoCaptureError):
            find_trapped(CFG_DEEP, CONST, PARAMS, TABLE, max_levels=3)

    def test_report_json(self, trapped, tmp_path):
        path = tmp_path / "trap.json"
        trap_report_to_file(trapped, str(path))
        doc = json.loads(path.read_text())
        assert doc["samples_in_set"] is True
        assert doc["top_winding"] in (1, -1)
        assert doc["params"] == {"p": 3.0, "q": 3.0, "mu": 2.0}
        assert len(doc["levels"]) == len(trapped.levels)
        first = doc["levels"][0]
        assert len(first["shots"]) == 16
        assert all(not sh["anomalous"] for sh in first["shots"])
        deep = doc["levels"][-1]["shots"][-1]
        assert deep["exit_clause"] is None


class TestPerturbations:
    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            make_perturbation("triangle", 1e-3)

    @pytest.mark.parametrize("kind", ["gaussian-even", "gaussian-skew"])
    def test_unit_sup_norm(self, kind):
        pert = make_perturbation(kind, 1e-3)
        z = np.linspace(-60.0, 60.0, 24001)
        assert abs(np.max(np.abs(pert.shape_u(z))) - 1.0) < 1e-6
        assert abs(np.max(np.abs(pert.shape_v(z))) - 1.0) < 1e-6

    def test_zero(self):
        pert = make_perturbation("zero", 123.0)
        assert pert.eps == 0.0
        z = np.linspace(-5, 5, 11)
        assert np.all(pert.shape_u(z) == 0.0)


@pytest.fixture(scope="module")
def fits(trapped):
    perts = [
        make_perturbation("zero", 0.0),
        make_perturbation("gaussian-even", 1e-3),
        make_perturbation("gaussian-skew", 1e-3),
    ]
    return stability_scan(trapped.certificate, perts, CFG_DEEP, CONST, PARAMS, TABLE)


class TestStabilityScan:
    def test_zero_perturbation_recovers_hat(self, fits):
        zero = fits[0]
        assert zero.trapped
        assert zero.tau == 0.0 and zero.alpha == 0.0
        assert zero.rounds == 1
        assert zero.parameter_shift() == 0.0
        assert zero.fitted_T == zero.T_hat and zero.fitted_a == zero.a_hat

    def test_even_perturbation_keeps_center(self, fits):
        even = fits[1]
        assert even.trapped
        assert even.alpha == 0.0  # parity keeps a = a_hat
        assert abs(even.tau) < 1e-2

    def test_skew_perturbation_trapped(self, fits):
        skew = fits[2]
        assert skew.trapped
        assert abs(skew.tau) < 1e-2 and abs(skew.alpha) < 1e-2

    def test_winding_reported(self, fits):
        assert all(f.top_winding in (1, -1) for f in fits)

    def test_taualpha_consistency(self, fits):
        # fitted absolutes agree with (tau, alpha) to the ulp floor of T_hat
        for f in fits:
            ulp_floor = 4.0 * np.spacing(f.T_hat) * math.exp(f.sigma0)
            assert abs((f.fitted_T - f.T_hat) * math.exp(f.sigma0) - f.tau) <= ulp_floor
            ulp_floor_a = 4.0 * np.spacing(1.0) * math.exp(f.sigma0 / 2.0)
            assert (
                abs((f.fitted_a - f.a_hat) * math.exp(f.sigma0 / 2.0) - f.alpha)
                <= ulp_floor_a
            )

    def test_shift_reconstruction(self, fits):
        for f in fits:
            expect = abs(f.tau) * math.exp(-f.sigma0) + abs(f.alpha) * math.exp(
                -f.sigma0 / 2.0
            )
            assert f.parameter_shift() == expect

    def test_missing_sigma0_sample(self, trapped):
        with pytest.raises(ConfigurationError):
            stability_scan(
                trapped.certificate,
                [make_perturbation("zero", 0.0)],
                CFG_DEEP,
                CONST,
                PARAMS,
                TABLE,
                sigma0=21.0314,
            )

    def test_json_round_trip(self, fits, tmp_path):
        from rdblowup.shooting import stability_report_to_file

        path = tmp_path / "fits.json"
        stability_report_to_file(fits, str(path))
        doc = json.loads(path.read_text())
        assert len(doc) == len(fits)
        assert doc[0]["label"] == "zero"
        assert doc[0]["trapped"] is True
