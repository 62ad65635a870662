"""Two-parameter shooting: trapped trajectories and blowup-parameter stability.

The trapped solution is found by a topological argument made concrete.  The
seed data depends on two real knobs (d0, d1) driving the two growing modes
of the linearized flow (rates 1 and 1/2).  On the boundary of the seed box
the exit map

    (d0, d1) -> s*^2/A (theta_0, theta_1) at the first membership exit

has winding number +-1 around the origin, so some interior seed never exits.
Bisection toward that seed produces a trajectory that survives the whole
horizon inside the shrinking set, which is the desk-scale certificate.

Two structural facts keep the search cheap.  First, d1 = 0 makes the seed
even in y for every parameter choice, the scheme preserves parity to
rounding, and theta_1 is the projection on an odd mode, so the trapped seed
always has d1 = 0 and the refinement degenerates to a 1-D bisection in d0
(the top-level winding check still runs on the full 2-D boundary).  Second,
exits are transversal: the saturating coefficient is moving outward, so the
exit sign is a reliable bisection oracle.

The stability scan replays the argument with (T, a) as the knobs.  A fixed
physical perturbation is attached to the certificate data, the pair is
re-similarity-transformed about trial blowup parameters, and a genuinely
2-D sign bisection over

    tau = (T - T_hat) e^{sigma0},  alpha = (a - a_hat) e^{sigma0/2}

recovers parameters whose flow stays trapped.  Everything is composed in
similarity variables; forming T - t in original variables would lose all
precision at e^{-sigma0} scale.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .core import ConfigurationError, NoCaptureError, Params, resample_values
from .profile import Constants, FieldPair, initial_data, intermediate_profile
from .spectral import ProjectionTable
from .dynamics import SolverConfig, Trajectory, simulate

__all__ = [
    "NoCaptureError",
    "ShotResult",
    "LevelRecord",
    "TrapResult",
    "Perturbation",
    "StabilityFit",
    "flow_map",
    "exit_transversality",
    "winding_number",
    "boundary_points",
    "find_trapped",
    "make_perturbation",
    "stability_scan",
]

SEED_BOX = 2.0  # the seed rectangle [-2, 2]^2 containing the preimage box


@dataclass(frozen=True)
class ShotResult:
    """Outcome of one seeded run followed until exit or horizon."""

    d0: float
    d1: float
    exit_s: float
    exit_clause: Optional[str]  # None iff the horizon was reached inside
    end_theta: Tuple[float, float]
    trajectory: Optional[Trajectory] = None

    @property
    def reached_horizon(self) -> bool:
        return self.exit_clause is None

    @property
    def anomalous(self) -> bool:
        """Exit through anything but the two unstable-mode clauses."""
        return self.exit_clause is not None and self.exit_clause not in (
            "theta_0",
            "theta_1",
        )

    def summary(self) -> dict:
        return {
            "d0": float(self.d0),
            "d1": float(self.d1),
            "exit_s": float(self.exit_s),
            "exit_clause": self.exit_clause,
            "end_theta": [float(self.end_theta[0]), float(self.end_theta[1])],
            "anomalous": self.anomalous,
        }


@dataclass(frozen=True)
class LevelRecord:
    level: int
    rect: Tuple[float, float, float, float]  # d0_lo, d0_hi, d1_lo, d1_hi
    winding: int
    shots: Tuple[dict, ...]
    retained_exit_s: float


@dataclass(frozen=True)
class TrapResult:
    d0: float
    d1: float
    certificate: Trajectory
    levels: Tuple[LevelRecord, ...]
    top_winding: int
    d0_repr: str  # extended-precision seed, beyond float64 resolution

    def to_json(self) -> dict:
        cfg = self.certificate.config
        prm = self.certificate.params
        return {
            "params": {"p": prm.p, "q": prm.q, "mu": prm.mu},
            "config": {
                "s0": cfg.s0,
                "s_end": cfg.s_end,
                "ds": cfg.ds,
                "y_max": cfg.y_max,
                "n_grid": cfg.n_grid,
                "K": cfg.K,
                "A": cfg.A,
                "M_trunc": cfg.M_trunc,
                "dtype": cfg.dtype,
            },
            "top_winding": self.top_winding,
            "d0": float(self.d0),
            "d0_repr": self.d0_repr,
            "d1": float(self.d1),
            "levels": [
                {
                    "level": lv.level,
                    "rect": list(lv.rect),
                    "winding": lv.winding,
                    "retained_exit_s": lv.retained_exit_s,
                    "shots": list(lv.shots),
                }
                for lv in self.levels
            ],
            "samples_in_set": all(s.shrink.in_set for s in self.certificate.samples),
            "horizon_s": self.certificate.samples[-1].s,
        }


def flow_map(
    d0,
    d1,
    config: SolverConfig,
    c: Constants,
    params: Params,
    table: ProjectionTable,
    keep_trajectory: bool = True,
) -> ShotResult:
    """Seed the deviation flow with (d0, d1) and follow it to exit or horizon.

    Accepts numpy extended-precision scalars for d0/d1 so the bisection can
    resolve seeds below float64 spacing; the seed profile is then built in
    the solver dtype without an intermediate rounding.
    """
    if not (abs(float(d0)) <= SEED_BOX and abs(float(d1)) <= SEED_BOX):
        raise ConfigurationError(
            f"seed pair ({float(d0)}, {float(d1)}) outside [-{SEED_BOX}, {SEED_BOX}]^2"
        )
    dtype = np.longdouble if config.dtype == "longdouble" else np.float64
    init = initial_data(
        d0, d1, config.s0, config.A, config.K, c, params, table, config.grid, dtype=dtype
    )
    traj = simulate(config, init, c, params, table, stop_when_out=True)
    last = traj.samples[-1]
    theta_pair = (float(last.modes.theta[0]), float(last.modes.theta[1]))
    if not last.shrink.in_set:
        clause = last.shrink.first_violated
    elif last.s < config.s_end - 1e-9:
        clause = "solver_abort"  # blew up or went non-finite before any exit
    else:
        clause = None
    return ShotResult(
        d0=float(d0),
        d1=float(d1),
        exit_s=float(last.s),
        exit_clause=clause,
        end_theta=theta_pair,
        trajectory=traj if keep_trajectory else None,
    )


def exit_transversality(shot: ShotResult) -> float:
    """omega * dtheta/ds at the exit for the saturated coefficient.

    Positive means the crossing is outgoing.  Needs the shot trajectory and
    at least two samples.
    """
    if shot.trajectory is None or len(shot.trajectory.samples) < 2:
        raise ConfigurationError("transversality needs a kept trajectory with >= 2 samples")
    if shot.exit_clause not in ("theta_0", "theta_1"):
        raise ConfigurationError(f"exit clause {shot.exit_clause!r} is not an unstable mode")
    j = 0 if shot.exit_clause == "theta_0" else 1
    a, b = shot.trajectory.samples[-2], shot.trajectory.samples[-1]
    rate = (b.modes.theta[j] - a.modes.theta[j]) / (b.s - a.s)
    omega = 1.0 if shot.end_theta[j] > 0 else -1.0
    return float(omega * rate)


def winding_number(points: Sequence[Tuple[float, float]]) -> int:
    """Winding of a closed polygonal loop of R^2 values around the origin."""
    total = 0.0
    m = len(points)
    if m < 3:
        raise ConfigurationError("winding needs at least 3 loop points")
    for i in range(m):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % m]
        if math.hypot(x0, y0) == 0.0 or math.hypot(x1, y1) == 0.0:
            raise ConfigurationError("exit map hit the origin exactly; cannot orient")
        total += math.atan2(x0 * y1 - y0 * x1, x0 * x1 + y0 * y1)
    return round(total / (2.0 * math.pi))


def boundary_points(
    rect: Tuple[float, float, float, float], per_side: int = 4
) -> list[Tuple[float, float]]:
    """Counterclockwise loop of per_side*4 samples on a rectangle boundary."""
    x0, x1, y0, y1 = rect
    pts: list[Tuple[float, float]] = []
    for k in range(per_side):
        t = k / per_side
        pts.append((x0 + t * (x1 - x0), y0))
    for k in range(per_side):
        t = k / per_side
        pts.append((x1, y0 + t * (y1 - y0)))
    for k in range(per_side):
        t = k / per_side
        pts.append((x1 - t * (x1 - x0), y1))
    for k in range(per_side):
        t = k / per_side
        pts.append((x0, y1 - t * (y1 - y0)))
    return pts


def _rescaled_exit(shot: ShotResult, A: float) -> Tuple[float, float]:
    scale = shot.exit_s**2 / A
    return (scale * shot.end_theta[0], scale * shot.end_theta[1])


def _corner_tiebreak(pt, rect, cell):
    """Nudge a both-clauses-saturated boundary sample one cell inward."""
    cx, cy = 0.5 * (rect[0] + rect[1]), 0.5 * (rect[2] + rect[3])
    dx, dy = cx - pt[0], cy - pt[1]
    nrm = math.hypot(dx, dy)
    if nrm == 0.0:
        return pt
    return (pt[0] + cell * dx / nrm, pt[1] + cell * dy / nrm)


def _boundary_winding(
    rect, config, c, params, table, shots_out: list | None = None, per_side: int = 4
) -> int:
    cell = 0.0625 * min(rect[1] - rect[0], rect[3] - rect[2])
    loop = []
    for pt in boundary_points(rect, per_side):
        shot = flow_map(pt[0], pt[1], config, c, params, table, keep_trajectory=False)
        t0, t1 = shot.end_theta
        lim = config.A / shot.exit_s**2
        if abs(abs(t0) - lim) < 1e-14 and abs(abs(t1) - lim) < 1e-14:
            pt = _corner_tiebreak(pt, rect, cell)
            shot = flow_map(pt[0], pt[1], config, c, params, table, keep_trajectory=False)
        if shots_out is not None:
            shots_out.append(shot.summary())
        loop.append(_rescaled_exit(shot, config.A))
    return winding_number(loop)


def find_trapped(
    config: SolverConfig,
    c: Constants,
    params: Params,
    table: ProjectionTable,
    max_levels: int = 90,
    per_side: int = 4,
    refine: bool = False,
) -> TrapResult:
    """Locate a seed whose trajectory survives the horizon inside the set.

    Runs the degree check on the boundary of the full seed box, then the
    parity-exact 1-D bisection in d0 along d1 = 0.  Each level records the
    retained interval, the endpoint sign change (the 1-D winding), and the
    exit data of the probe.  Stops at the first probe that reaches the
    horizon trapped; raises NoCaptureError if the top-level winding is zero
    or the interval collapses to seed-precision spacing without a capture.

    With refine=True the search keeps bisecting past the first capture
    until the interval collapses, returning the trapped probe whose final
    unstable coefficient is smallest.  The first capture sits at the edge
    of the set; the refined one sits near the crossing itself, so the
    late-time samples are far less contaminated by seed-precision error.
    """
    rect0 = (-SEED_BOX, SEED_BOX, -SEED_BOX, SEED_BOX)
    top_shots: list[dict] = []
    top_winding = _boundary_winding(rect0, config, c, params, table, top_shots, per_side)
    if top_winding == 0:
        raise NoCaptureError(
            "boundary exit map has winding 0; raise s0 or A before searching"
        )

    wide = np.longdouble if config.dtype == "longdouble" else np.float64
    lo, hi = wide(-SEED_BOX), wide(SEED_BOX)
    shot_lo = flow_map(lo, 0.0, config, c, params, table, keep_trajectory=False)
    shot_hi = flow_map(hi, 0.0, config, c, params, table, keep_trajectory=False)
    sgn_lo = math.copysign(1.0, shot_lo.end_theta[0])
    sgn_hi = math.copysign(1.0, shot_hi.end_theta[0])
    if sgn_lo == sgn_hi:
        raise NoCaptureError("theta_0 exit sign does not change across the seed box")

    levels: list[LevelRecord] = [
        LevelRecord(
            level=0,
            rect=rect0,
            winding=top_winding,
            shots=tuple(top_shots),
            retained_exit_s=min(shot_lo.exit_s, shot_hi.exit_s),
        )
    ]
    best: Optional[ShotResult] = None
    best_mag = math.inf
    depth_lo, depth_hi = shot_lo.exit_s, shot_hi.exit_s
    for level in range(1, max_levels + 1):
        mid = (lo + hi) / 2
        if mid == lo or mid == hi:
            break  # seed spacing exhausted in the working precision
        shot = flow_map(mid, 0.0, config, c, params, table, keep_trajectory=True)
        if shot.anomalous:
            raise NoCaptureError(
                f"anomalous exit through {shot.exit_clause!r} at d0={float(mid)}"
            )
        if shot.reached_horizon:
            mag = abs(float(shot.end_theta[0]))
            if mag < best_mag:
                best, best_d0, best_mag = shot, mid, mag
        # capture depth of the retained cell: the deepest endpoint survives
        if shot.reached_horizon and not refine:
            hi, depth_hi = mid, shot.exit_s
        elif math.copysign(1.0, shot.end_theta[0]) == sgn_hi:
            hi, depth_hi = mid, shot.exit_s
        else:
            lo, depth_lo = mid, shot.exit_s
        levels.append(
            LevelRecord(
                level=level,
                rect=(float(lo), float(hi), 0.0, 0.0),
                winding=int(sgn_hi),
                shots=(shot.summary(),),
                retained_exit_s=max(depth_lo, depth_hi),
            )
        )
        if shot.reached_horizon and not refine:
            break
    if best is None:
        raise NoCaptureError(
            f"no capture after {max_levels} levels; horizon too deep for the "
            f"seed precision ({config.dtype})"
        )
    return TrapResult(
        d0=float(best_d0),
        d1=0.0,
        certificate=best.trajectory,
        levels=tuple(levels),
        top_winding=top_winding,
        d0_repr=repr(best_d0),
    )


# ---------------------------------------------------------------------------
# stability of the blowup parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Perturbation:
    """Physical-space perturbation, parametrized by the frozen base frame.

    shape_u/shape_v take the base similarity coordinate z (the physical
    offset from a_hat scaled by e^{sigma0/2}) and return unit-sup-norm
    profiles; eps is the physical sup-norm amplitude.
    """

    label: str
    eps: float
    shape_u: Callable[[np.ndarray], np.ndarray]
    shape_v: Callable[[np.ndarray], np.ndarray]


def _normalized(fn: Callable[[np.ndarray], np.ndarray]) -> Callable:
    probe = np.linspace(-60.0, 60.0, 24001)
    peak = float(np.max(np.abs(fn(probe))))
    if peak == 0.0:
        return fn
    return lambda z: fn(z) / peak


def make_perturbation(kind: str, eps: float) -> Perturbation:
    """Named perturbation shapes used by the scan and the CLI."""
    if kind == "zero":
        zero = lambda z: np.zeros_like(np.asarray(z, dtype=float))
        return Perturbation("zero", 0.0, zero, zero)
    if kind == "gaussian-even":
        f = _normalized(lambda z: np.exp(-(z**2) / 9.0))
        return Perturbation(f"gaussian-even eps={eps:g}", eps, f, f)
    if kind == "gaussian-skew":
        f = _normalized(lambda z: z * np.exp(-(z**2) / 9.0))
        g = _normalized(lambda z: np.exp(-(z**2) / 9.0))
        return Perturbation(f"gaussian-skew eps={eps:g}", eps, f, g)
    raise ConfigurationError(f"unknown perturbation kind {kind!r}")


@dataclass(frozen=True)
class StabilityFit:
    """Fitted blowup parameters for one perturbed datum.

    tau and alpha carry the full resolution; fitted_T and fitted_a are the
    corresponding absolute parameters and can round to T_hat/a_hat exactly
    when the shift falls below one ulp (the shift is e^{-sigma0} scale).
    parameter_shift therefore reconstructs |T - T_hat| + |a - a_hat| from
    (tau, alpha) instead of subtracting the stored absolutes.
    """

    label: str
    eps: float
    sigma0: float
    tau: float
    alpha: float
    fitted_T: float
    fitted_a: float
    T_hat: float
    a_hat: float
    trapped: bool
    rounds: int
    top_winding: int
    exit_clause: Optional[str] = None

    def parameter_shift(self) -> float:
        return abs(self.tau) * math.exp(-self.sigma0) + abs(self.alpha) * math.exp(
            -self.sigma0 / 2.0
        )

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def _stability_seed(
    hat: FieldPair,
    pert: Perturbation,
    tau: float,
    alpha: float,
    sigma0: float,
    c: Constants,
    params: Params,
) -> FieldPair:
    """Re-similarity-transform perturbed certificate data to trial (T, a).

    All composition happens in similarity variables through
    z = y sqrt(1 + tau) + alpha and s0 = sigma0 - log(1 + tau); the
    original-variable route would subtract nearly equal times.
    """
    grid = hat.grid
    y = grid.nodes()
    root = math.sqrt(1.0 + tau)
    z = y * root + alpha
    s0p = sigma0 - math.log1p(tau)
    lam_hat = resample_values(hat.u_comp, -grid.y_max, grid.step, z)
    ups_hat = resample_values(hat.v_comp, -grid.y_max, grid.step, z)
    phi_z, psi_z = intermediate_profile(z, sigma0, c, params)
    phi_y, psi_y = intermediate_profile(y, s0p, c, params)
    scale_u = (1.0 + tau) ** params.alpha_u
    scale_v = (1.0 + tau) ** params.alpha_v
    pert_u = pert.eps * math.exp(-params.alpha_u * sigma0) * pert.shape_u(z)
    pert_v = pert.eps * math.exp(-params.alpha_v * sigma0) * pert.shape_v(z)
    lam = scale_u * (lam_hat + phi_z + pert_u) - phi_y
    ups = scale_v * (ups_hat + psi_z + pert_v) - psi_y
    return FieldPair(grid=grid, u_comp=lam, v_comp=ups, s=s0p, kind="LambdaUpsilon")


def _stability_trial(
    hat, pert, tau, alpha, sigma0, config, c, params, table
) -> ShotResult:
    seed = _stability_seed(hat, pert, tau, alpha, sigma0, c, params)
    trial_cfg = dataclasses.replace(config, s0=seed.s)
    traj = simulate(trial_cfg, seed, c, params, table, stop_when_out=True)
    last = traj.samples[-1]
    if not last.shrink.in_set:
        clause = last.shrink.first_violated
    elif last.s < trial_cfg.s_end - 1e-9:
        clause = "solver_abort"
    else:
        clause = None
    return ShotResult(
        d0=tau,
        d1=alpha,
        exit_s=float(last.s),
        exit_clause=clause,
        end_theta=(float(last.modes.theta[0]), float(last.modes.theta[1])),
        trajectory=None,
    )


PARITY_FLOOR = 1e-11  # odd-mode exit readings below this are parity noise


def stability_scan(
    base: Trajectory,
    perturbations: Sequence[Perturbation],
    config: SolverConfig,
    c: Constants,
    params: Params,
    table: ProjectionTable,
    sigma0: Optional[float] = None,
    T_hat: float = 1.0,
    a_hat: float = 0.0,
    max_rounds: int = 44,
    tau_cap: float = 0.5,
    alpha_cap: float = 1.0,
) -> list[StabilityFit]:
    """Fit trapped blowup parameters for each perturbed initial datum.

    The search box is the theoretical one intersected with a desk cap: the
    full alpha range would place the data center far outside the grid, and
    any sub-box containing the solution carries the same boundary degree.
    Each round shoots the box center; the theta_0 exit sign halves the tau
    interval, the theta_1 exit sign halves the alpha interval (parity noise
    below PARITY_FLOOR freezes alpha instead).  Returns a failure record
    with trapped=False when the box winding is zero or the box collapses
    without capture.
    """
    if sigma0 is None:
        sigma0 = base.samples[0].s
    hat = None
    for smp in base.samples:
        if abs(smp.s - sigma0) <= 1e-9:
            hat = smp.fields
            break
    if hat is None:
        raise ConfigurationError(f"base trajectory has no sample at sigma0={sigma0}")
    if hat.grid != config.grid:
        raise ConfigurationError("stability config grid differs from the base grid")
    B = config.A
    tau_box = min(2.0 * B * params.pq1 / sigma0**2, tau_cap)
    alpha_box = min(B * params.pq1 / (c.b * sigma0), alpha_cap)

    fits: list[StabilityFit] = []
    for pert in perturbations:
        trial = lambda t, a: _stability_trial(
            hat, pert, t, a, sigma0, config, c, params, table
        )
        rect = (-tau_box, tau_box, -alpha_box, alpha_box)
        loop = []
        for pt in boundary_points(rect):
            sh = trial(pt[0], pt[1])
            t0, t1 = _rescaled_exit(sh, B)
            if abs(t1) < PARITY_FLOOR:
                t1 = math.copysign(PARITY_FLOOR, pt[1] if pt[1] != 0 else 1.0)
            loop.append((t0, t1))
        try:
            wind = winding_number(loop)
        except ConfigurationError:
            wind = 0
        wind_ok = wind != 0

        t_lo, t_hi = -tau_box, tau_box
        a_lo, a_hi = -alpha_box, alpha_box
        sh_t = trial(t_hi, 0.0)
        orient_t = math.copysign(1.0, sh_t.end_theta[0])
        sh_a = trial(0.0, a_hi)
        orient_a = (
            math.copysign(1.0, sh_a.end_theta[1])
            if abs(sh_a.end_theta[1]) > PARITY_FLOOR
            else 0.0
        )
        trapped = False
        tau_fit = alpha_fit = 0.0
        clause = None
        rounds = 0
        if wind_ok:
            for rounds in range(1, max_rounds + 1):
                tau_mid = 0.5 * (t_lo + t_hi)
                alpha_mid = 0.5 * (a_lo + a_hi)
                sh = trial(tau_mid, alpha_mid)
                if sh.reached_horizon:
                    trapped = True
                    tau_fit, alpha_fit = tau_mid, alpha_mid
                    break
                clause = sh.exit_clause
                if math.copysign(1.0, sh.end_theta[0]) == orient_t:
                    t_hi = tau_mid
                else:
                    t_lo = tau_mid
                if orient_a != 0.0 and abs(sh.end_theta[1]) > PARITY_FLOOR:
                    if math.copysign(1.0, sh.end_theta[1]) == orient_a:
                        a_hi = alpha_mid
                    else:
                        a_lo = alpha_mid
                else:
                    a_lo = 0.5 * (a_lo + alpha_mid)
                    a_hi = 0.5 * (a_hi + alpha_mid)
                if (t_hi - t_lo) < 1e-15 and (a_hi - a_lo) < 1e-15:
                    break
            else:
                rounds = max_rounds
        if not trapped:
            tau_fit = 0.5 * (t_lo + t_hi)
            alpha_fit = 0.5 * (a_lo + a_hi)
        fits.append(
            StabilityFit(
                label=pert.label,
                eps=pert.eps,
                sigma0=sigma0,
                tau=tau_fit,
                alpha=alpha_fit,
                fitted_T=T_hat + tau_fit * math.exp(-sigma0),
                fitted_a=a_hat + alpha_fit * math.exp(-sigma0 / 2.0),
                T_hat=T_hat,
                a_hat=a_hat,
                trapped=trapped,
                rounds=rounds,
                top_winding=wind,
                exit_clause=None if trapped else clause,
            )
        )
    return fits


def trap_report_to_file(result: TrapResult, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(result.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def stability_report_to_file(fits: Sequence[StabilityFit], path: str) -> None:
    with open(path, "w") as fh:
        json.dump([f.to_json() for f in fits], fh, indent=2, sort_keys=True)
        fh.write("\n")
