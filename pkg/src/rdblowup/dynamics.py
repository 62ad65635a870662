"""Time integration of the coupled system in similarity variables.

The total fields satisfy

    d_s Phi = L_1 Phi - a_u Phi + |Psi|^(p-1) Psi
    d_s Psi = L_mu Psi - a_v Psi + |Phi|^(q-1) Phi

with L_eta = eta d_yy - (y/2) d_y and (a_u, a_v) the blowup exponents.  A
Strang-split step composes an exact linear half-step (Gaussian kernel of
L_eta plus scalar damping), an explicit-midpoint step for the coupling,
and a second linear half-step.

Two algebraically equivalent evolution forms are provided, selected by
the field kind: "PhiPsi" evolves the totals; "LambdaUpsilon" evolves the
deviation from the intermediate profile, with the profile residual as
forcing and power differences computed cancellation-free.  The deviation
form (optionally in extended precision) keeps per-step rounding
proportional to the deviation itself, which deep trapping runs need: the
top eigenvalue 1 amplifies injected noise by e^(horizon).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import erf

from .core import ConfigurationError, Params, resample_values, signed_power
from .profile import Constants, FieldPair, Grid, cutoff, intermediate_profile, residual_R
from .spectral import ModeCoeffs, ProjectionTable, extract_modes, mode_quadratures, split_parts

# cells pinned to the far-field value after every full step; covers the
# constant-extension padding and the resampling stencil at the edge
CLAMP_CELLS = 8

_DTYPES = {"float64": np.float64, "longdouble": np.longdouble}


class StepBlowupError(RuntimeError):
    """The discrete scheme produced non-finite values."""

    def __init__(self, last_valid_s: float):
        super().__init__(f"scheme blew up; last valid s = {last_valid_s}")
        self.last_valid_s = last_valid_s


@dataclass(frozen=True)
class SolverConfig:
    s0: float
    s_end: float
    ds: float
    y_max: float
    n_grid: int
    K: float
    A: float
    M_trunc: int
    quad_order: int
    mode: str = "total"
    dtype: str = "float64"
    ds_out: float = 0.1

    def __post_init__(self) -> None:
        if not (self.s0 > 0 and self.s_end > self.s0):
            raise ConfigurationError(f"need 0 < s0 < s_end, got {self.s0}, {self.s_end}")
        if not 0 < self.ds <= 0.1:
            raise ConfigurationError(f"ds={self.ds} outside (0, 0.1]")
        if not self.K > 0:
            raise ConfigurationError(f"K={self.K} must be positive")
        if not self.A >= 1.0:
            raise ConfigurationError(f"A={self.A} must be >= 1")
        if self.M_trunc < 0 or self.M_trunc % 2:
            raise ConfigurationError(f"M_trunc={self.M_trunc} must be even and >= 0")
        if self.n_grid < 16:
            raise ConfigurationError(f"n_grid={self.n_grid} too small")
        if self.quad_order <= 0:
            raise ConfigurationError(f"quad_order={self.quad_order} must be positive")
        needed = 2.0 * self.K * math.sqrt(self.s_end)
        if self.y_max < needed:
            raise ConfigurationError(
                f"y_max={self.y_max} < 2 K sqrt(s_end) = {needed:.3f}: "
                "outer region not representable"
            )
        if self.mode not in ("total", "deviation"):
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if self.dtype not in _DTYPES:
            raise ConfigurationError(f"unknown dtype {self.dtype!r}")
        ratio = self.ds_out / self.ds
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigurationError(
                f"ds_out={self.ds_out} must be a positive integer multiple of ds={self.ds}"
            )

    @property
    def grid(self) -> Grid:
        return Grid(y_max=self.y_max, n=self.n_grid)

    @property
    def steps_per_out(self) -> int:
        return int(round(self.ds_out / self.ds))


@dataclass(frozen=True)
class ClauseCheck:
    clause: str
    value: float
    limit: float
    margin: float
    ok: bool


@dataclass(frozen=True)
class ShrinkReport:
    s: float
    bounds: Tuple[ClauseCheck, ...]
    in_set: bool
    first_violated: Optional[str]


class Sample(NamedTuple):
    s: float
    fields: FieldPair  # deviations, float64
    modes: ModeCoeffs
    shrink: ShrinkReport


@dataclass(frozen=True)
class Trajectory:
    samples: Tuple[Sample, ...]
    config: SolverConfig
    params: Params

    def __post_init__(self) -> None:
        svals = [smp.s for smp in self.samples]
        if any(b <= a for a, b in zip(svals, svals[1:])):
            raise ConfigurationError("trajectory samples not strictly increasing in s")


# ---------------------------------------------------------------------------
# kernel and linear flow


def mehler_kernel(eta: float, tau: float, y, x):
    """Kernel of e^(tau L_eta); a Gaussian in x centered at y e^(-tau/2)."""
    if not tau > 0:
        raise ConfigurationError(f"tau={tau} must be positive")
    if not eta > 0:
        raise ConfigurationError(f"eta={eta} must be positive")
    y = np.asarray(y)
    x = np.asarray(x)
    m = -math.expm1(-tau)  # 1 - e^(-tau), accurately for small tau
    width = 4.0 * eta * m
    d = y * math.exp(-0.5 * tau) - x
    out = np.exp(-(d * d) / width) / math.sqrt(math.pi * width)
    if out.ndim == 0:
        return float(out)
    return out


def semigroup_apply(eta: float, tau: float, field, grid: Grid):
    """Apply e^(tau L_eta) to grid samples by quadrature of the kernel.

    Composite midpoint-weighted quadrature over the grid; the Gaussian
    tails beyond the edges are closed with the boundary values (constant
    extension), and each row is normalized so constants are reproduced
    exactly.  The result is then a convex combination of samples: the
    sup norm never grows and nonnegative input stays nonnegative.
    """
    if not 0.0 < tau <= 5.0:
        raise ConfigurationError(f"tau={tau} outside (0, 5]")
    vals = np.asarray(field, dtype=float)
    if vals.shape != (grid.n,):
        raise ConfigurationError(f"field shape {vals.shape} does not match grid n={grid.n}")
    y = grid.nodes()
    h = grid.step
    m = -math.expm1(-tau)
    width = 4.0 * eta * m  # exponent denominator; variance is width/2
    centers = y * math.exp(-0.5 * tau)
    lo = y[0] - 0.5 * h
    hi = y[-1] + 0.5 * h
    left = 0.5 * (1.0 + erf((lo - centers) / math.sqrt(width)))
    right = 0.5 * (1.0 - erf((hi - centers) / math.sqrt(width)))
    out = np.empty_like(vals)
    # chunk the dense kernel rows to bound transient memory
    chunk = max(1, int(4.0e6 // grid.n))
    for start in range(0, grid.n, chunk):
        stop = min(start + chunk, grid.n)
        d = centers[start:stop, None] - y[None, :]
        rows = np.exp(-(d * d) / width) * (h / math.sqrt(math.pi * width))
        total = rows.sum(axis=1) + left[start:stop] + right[start:stop]
        acc = rows @ vals + left[start:stop] * vals[0] + right[start:stop] * vals[-1]
        out[start:stop] = acc / total
    return out


@lru_cache(maxsize=64)
def _conv_plan(eta: float, tau: float, y_max: float, n: int, dtype_name: str):
    """Discrete Gaussian taps + contraction data for the fast linear flow."""
    dtype = np.dtype(dtype_name)
    grid = Grid(y_max=y_max, n=n)
    h = grid.step
    m = -math.expm1(-tau)
    sigma = math.sqrt(2.0 * eta * m)
    half = max(3, int(math.ceil(8.0 * sigma / h)))
    offs = np.arange(-half, half + 1, dtype=dtype) * np.asarray(h, dtype=dtype)
    taps = np.exp(-(offs * offs) / np.asarray(4.0 * eta * m, dtype=dtype))
    taps = taps / taps.sum()  # mass-normalized: constants are exact
    contract = np.asarray(math.exp(-0.5 * tau), dtype=dtype)
    return taps, half, contract


def _linear_halfstep(values: np.ndarray, eta: float, tau: float, damp: float, grid: Grid):
    """e^(tau (L_eta - damp)) via convolution + resampling at y e^(-tau/2)."""
    dtype = values.dtype
    taps, half, contract = _conv_plan(eta, tau, grid.y_max, grid.n, dtype.name)
    padded = np.concatenate(
        [np.full(half, values[0], dtype=dtype), values, np.full(half, values[-1], dtype=dtype)]
    )
    conv = np.convolve(padded, taps, mode="valid")
    targets = grid.nodes(dtype=dtype) * contract
    out = resample_values(conv, -grid.y_max, grid.step, targets)
    return out * np.asarray(math.exp(-damp * tau), dtype=dtype)


# ---------------------------------------------------------------------------
# stepping


def _power_diff(base: np.ndarray, delta: np.ndarray, r: float):
    """|base+delta|^(r-1)(base+delta) - base^r without cancellation.

    Where base > 0 and |delta| < base/2 the difference is evaluated via
    expm1/log1p so rounding scales with the result, not with base^r.
    """
    base = np.asarray(base)
    delta = np.asarray(delta)
    out = signed_power(base + delta, r) - signed_power(base, r)
    safe = (base > 0) & (np.abs(delta) < 0.5 * base)
    if np.any(safe):
        bs = base[safe]
        ratio = delta[safe] / bs
        out[safe] = bs**r * np.expm1(r * np.log1p(ratio))
    return out


def _clamp_edges(u: np.ndarray, v: np.ndarray, u_edge, v_edge) -> None:
    k = CLAMP_CELLS
    if np.ndim(u_edge):
        u[:k], u[-k:] = u_edge[:k], u_edge[-k:]
        v[:k], v[-k:] = v_edge[:k], v_edge[-k:]
    else:
        u[:k] = u[-k:] = u_edge
        v[:k] = v[-k:] = v_edge


def step(state: FieldPair, ds: float, config: SolverConfig, c: Constants, params: Params) -> FieldPair:
    """One Strang step L(ds/2) N(ds) L(ds/2); aborts on non-finite values.

    The state kind selects the evolution form: "PhiPsi" steps the total
    fields (autonomous coupling), "LambdaUpsilon" steps the deviation
    with the profile residual as forcing, its time argument frozen at
    the interval midpoint.
    """
    if not ds > 0:
        raise ConfigurationError(f"ds={ds} must be positive")
    grid = state.grid
    dtype = np.asarray(state.u_comp).dtype
    tau = 0.5 * ds
    a_u, a_v = params.alpha_u, params.alpha_v
    ds_d = np.asarray(ds, dtype=dtype)

    # overflow here is the detected-and-reported abort condition, not a bug
    with np.errstate(over="ignore", invalid="ignore"):
        u = _linear_halfstep(np.asarray(state.u_comp), 1.0, tau, a_u, grid)
        v = _linear_halfstep(np.asarray(state.v_comp), params.mu, tau, a_v, grid)

        if state.kind == "PhiPsi":
            mid_u = u + 0.5 * ds_d * signed_power(v, params.p)
            mid_v = v + 0.5 * ds_d * signed_power(u, params.q)
            u = u + ds_d * signed_power(mid_v, params.p)
            v = v + ds_d * signed_power(mid_u, params.q)
        else:
            y = grid.nodes(dtype=dtype)
            s_mid = state.s + 0.5 * ds
            phi_m, psi_m = intermediate_profile(y, s_mid, c, params)
            r1, r2 = residual_R(y, s_mid, c, params)
            g_u = _power_diff(psi_m, v, params.p) + r1
            g_v = _power_diff(phi_m, u, params.q) + r2
            mid_u = u + 0.5 * ds_d * g_u
            mid_v = v + 0.5 * ds_d * g_v
            u = u + ds_d * (_power_diff(psi_m, mid_v, params.p) + r1)
            v = v + ds_d * (_power_diff(phi_m, mid_u, params.q) + r2)

        u = _linear_halfstep(u, 1.0, tau, a_u, grid)
        v = _linear_halfstep(v, params.mu, tau, a_v, grid)

    s_new = state.s + ds
    if state.kind == "PhiPsi":
        y = grid.nodes(dtype=dtype)
        phi_n, psi_n = intermediate_profile(y, s_new, c, params)
        _clamp_edges(u, v, phi_n, psi_n)
    else:
        zero = np.asarray(0.0, dtype=dtype)
        _clamp_edges(u, v, zero, zero)

    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise StepBlowupError(state.s)
    return FieldPair(grid=grid, u_comp=u, v_comp=v, s=s_new, kind=state.kind)


def deviations_to_total(fields: FieldPair, c: Constants, params: Params) -> FieldPair:
    if fields.kind != "LambdaUpsilon":
        raise ConfigurationError("expected deviation fields")
    y = fields.grid.nodes(dtype=np.asarray(fields.u_comp).dtype)
    phi, psi = intermediate_profile(y, fields.s, c, params)
    return FieldPair(fields.grid, fields.u_comp + phi, fields.v_comp + psi, fields.s, "PhiPsi")


def total_to_deviations(fields: FieldPair, c: Constants, params: Params) -> FieldPair:
    if fields.kind != "PhiPsi":
        raise ConfigurationError("expected total fields")
    y = fields.grid.nodes(dtype=np.asarray(fields.u_comp).dtype)
    phi, psi = intermediate_profile(y, fields.s, c, params)
    return FieldPair(fields.grid, fields.u_comp - phi, fields.v_comp - psi, fields.s, "LambdaUpsilon")


# ---------------------------------------------------------------------------
# membership in the shrinking set


def shrink_check(fields: FieldPair, modes: ModeCoeffs, config: SolverConfig) -> ShrinkReport:
    """Evaluate every membership inequality at the field's time.

    Clause ids, in display order: outer sup norms (outer_sup_L/U with the
    inner cutoff removed), weighted truncation remainders (wminus_L/U),
    theta_j and ttheta_j for 3 <= j <= M, ttheta_0..2, theta_2, and
    theta_0, theta_1.
    """
    if fields.kind != "LambdaUpsilon":
        raise ConfigurationError("membership is defined for deviation fields")
    M = config.M_trunc
    if len(modes.theta) != M + 1:
        raise ConfigurationError(
            f"mode coefficients truncated at {len(modes.theta) - 1}, config expects {M}"
        )
    s = fields.s
    A = config.A
    y = fields.grid.nodes()
    chi = cutoff(y, s, config.K)
    lam = np.asarray(fields.u_comp, dtype=float)
    ups = np.asarray(fields.v_comp, dtype=float)
    outer_l = float(np.max(np.abs((1.0 - chi) * lam)))
    outer_u = float(np.max(np.abs((1.0 - chi) * ups)))
    _, minus = split_parts(fields, modes)
    wgt = 1.0 + np.abs(y) ** (M + 1)
    wminus_l = float(np.max(np.abs(np.asarray(minus.u_comp, dtype=float)) / wgt))
    wminus_u = float(np.max(np.abs(np.asarray(minus.v_comp, dtype=float)) / wgt))

    sqrt_s = math.sqrt(s)
    checks = [
        ("outer_sup_L", outer_l, A ** (M + 2) / sqrt_s),
        ("outer_sup_U", outer_u, A ** (M + 2) / sqrt_s),
        ("wminus_L", wminus_l, A ** (M + 1) / s ** (0.5 * (M + 2))),
        ("wminus_U", wminus_u, A ** (M + 1) / s ** (0.5 * (M + 2))),
    ]
    for j in range(3, M + 1):
        lim = A**j / s ** (0.5 * (j + 1))
        checks.append((f"theta_{j}", abs(float(modes.theta[j])), lim))
        checks.append((f"ttheta_{j}", abs(float(modes.theta_tilde[j])), lim))
    for i in range(3):
        checks.append((f"ttheta_{i}", abs(float(modes.theta_tilde[i])), A**2 / s**2))
    checks.append(("theta_2", abs(float(modes.theta[2])), A**4 * math.log(s) / s**2))
    checks.append(("theta_0", abs(float(modes.theta[0])), A / s**2))
    checks.append(("theta_1", abs(float(modes.theta[1])), A / s**2))

    bounds = tuple(
        ClauseCheck(clause=cid, value=val, limit=lim, margin=lim - val, ok=val <= lim)
        for cid, val, lim in checks
    )
    first = next((b.clause for b in bounds if not b.ok), None)
    return ShrinkReport(s=s, bounds=bounds, in_set=first is None, first_violated=first)


# ---------------------------------------------------------------------------
# trajectories


def _as_deviation_sample(state: FieldPair, c: Constants, params: Params) -> FieldPair:
    if state.kind == "PhiPsi":
        dev = total_to_deviations(state, c, params)
    else:
        dev = state
    return FieldPair(
        dev.grid,
        np.asarray(dev.u_comp, dtype=float),
        np.asarray(dev.v_comp, dtype=float),
        dev.s,
        "LambdaUpsilon",
    )


def simulate(
    config: SolverConfig,
    initial: FieldPair,
    c: Constants,
    params: Params,
    table: ProjectionTable,
    stop_when_out: bool = False,
) -> Trajectory:
    """Evolve from s0 to s_end, sampling diagnostics every ds_out.

    Each output sample carries the deviation fields, their mode
    coefficients, and the membership report.  Terminates early at the
    first non-finite state, or (with stop_when_out) at the first sample
    outside the shrinking set.
    """
    if initial.grid != config.grid:
        raise ConfigurationError("initial data grid does not match config grid")
    if abs(initial.s - config.s0) > 1e-9:
        raise ConfigurationError(f"initial s={initial.s} but config s0={config.s0}")
    if table.M_trunc != config.M_trunc:
        raise ConfigurationError(
            f"projection table M={table.M_trunc} but config M_trunc={config.M_trunc}"
        )
    quads = mode_quadratures(params, order=config.quad_order)
    dtype = _DTYPES[config.dtype]

    state = initial
    if config.mode == "total" and state.kind == "LambdaUpsilon":
        state = deviations_to_total(state, c, params)
    elif config.mode == "deviation" and state.kind == "PhiPsi":
        state = total_to_deviations(state, c, params)
    state = FieldPair(
        state.grid,
        np.asarray(state.u_comp, dtype=dtype),
        np.asarray(state.v_comp, dtype=dtype),
        state.s,
        state.kind,
    )

    samples = []

    def record(st: FieldPair) -> ShrinkReport:
        dev = _as_deviation_sample(st, c, params)
        modes = extract_modes(dev, table, quads)
        rep = shrink_check(dev, modes, config)
        samples.append(Sample(s=dev.s, fields=dev, modes=modes, shrink=rep))
        return rep

    rep = record(state)
    n_out = int(math.ceil((config.s_end - config.s0) / config.ds_out - 1e-9))
    for _ in range(n_out):
        if stop_when_out and not rep.in_set:
            break
        try:
            for _ in range(config.steps_per_out):
                state = step(state, config.ds, config, c, params)
        except StepBlowupError:
            break
        rep = record(state)
    return Trajectory(samples=tuple(samples), config=config, params=params)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class ModeDiagnostics:
    """Scaled drift residuals of the tracked mode ODEs.

    ``scaled_residuals[label]`` holds the per-sample scaled residual on
    the interior stencil window ``s_interior``; ``sup_scaled`` its sup.
    ``decay_rates[label]`` is the fitted initial log-slope of a decaying
    coefficient, NaN when the series starts at the rounding floor.
    """

    s_interior: np.ndarray
    scaled_residuals: Dict[str, np.ndarray]
    sup_scaled: Dict[str, float]
    decay_rates: Dict[str, float]


def _fit_decay_rate(s: np.ndarray, series: np.ndarray) -> float:
    a = np.abs(series)
    scale = max(1.0, float(a.max(initial=0.0)))
    if a[0] < 1e-13 * scale or a[0] == 0.0:
        return float("nan")
    # fit on the first e^1.5 factor of decay, within the monotone
    # stretch: past that point the series bends toward its forced floor
    # (or crosses zero heading for an opposite-sign floor) and the slope
    # no longer measures the initial rate
    mono = len(a)
    for i in range(1, len(a)):
        if a[i] >= a[i - 1] or a[i] < 1e-14 * a[0]:
            mono = i
            break
    drop = next(
        (i for i in range(1, len(a)) if a[i] < a[0] * math.exp(-1.5)), len(a)
    )
    stop = min(mono, max(drop, 4))
    if stop < 3:
        return float("nan")
    slope = np.polyfit(s[:stop], np.log(a[:stop]), 1)[0]
    return float(-slope)


def mode_ode_residuals(traj: Trajectory) -> ModeDiagnostics:
    """Finite-difference drift residuals of theta_n along a trajectory.

    Uses the 4th-order centered first-derivative stencil, so at least 5
    uniformly spaced samples are required.  Reported quantities follow
    the expected sizes: s^2 |theta_0' - theta_0|, s^2 |theta_1' -
    theta_1/2|, s^3 |theta_2' - 2 theta_2/s|, and s^((j+1)/2) |theta_j'
    + ((j-2)/2) theta_j| for j >= 3.  Decaying coefficients get a fitted
    initial decay rate for comparison with j/2 + (p+1)(q+1)/(pq-1).
    """
    n = len(traj.samples)
    if n < 5:
        raise ConfigurationError(f"need >= 5 samples for the stencil, got {n}")
    s = np.array([smp.s for smp in traj.samples])
    hs = np.diff(s)
    h = float(hs[0])
    if np.max(np.abs(hs - h)) > 1e-9 * h:
        raise ConfigurationError("samples are not uniformly spaced in s")
    M = traj.config.M_trunc
    theta = np.array([smp.modes.theta for smp in traj.samples])
    ttheta = np.array([smp.modes.theta_tilde for smp in traj.samples])

    inner = slice(2, n - 2)
    d = (theta[:-4] - 8.0 * theta[1:-3] + 8.0 * theta[3:-1] - theta[4:]) / (12.0 * h)
    s_in = s[inner]
    scaled: Dict[str, np.ndarray] = {}
    for j in range(M + 1):
        tj = theta[inner, j]
        dj = d[:, j]
        if j == 0:
            res = dj - tj
            scl = s_in**2
        elif j == 1:
            res = dj - 0.5 * tj
            scl = s_in**2
        elif j == 2:
            res = dj - 2.0 * tj / s_in
            scl = s_in**3
        else:
            res = dj + 0.5 * (j - 2) * tj
            scl = s_in ** (0.5 * (j + 1))
        scaled[f"theta_{j}"] = scl * np.abs(res)
    sup = {k: float(v.max()) for k, v in scaled.items()}
    rates = {f"ttheta_{j}": _fit_decay_rate(s, ttheta[:, j]) for j in range(M + 1)}
    return ModeDiagnostics(
        s_interior=s_in, scaled_residuals=scaled, sup_scaled=sup, decay_rates=rates
    )


# ---------------------------------------------------------------------------
# physical variables


def unscale(sample: Sample, T: float, a: float, c: Constants, params: Params):
    """Physical-space snapshot (x, u, v) of a trajectory sample.

    The sample's similarity time s maps to t = T - e^(-s); the spatial
    window is x = a + y e^(-s/2) and the amplitudes are undone with the
    blowup exponents.
    """
    s = sample.s
    y = sample.fields.grid.nodes()
    phi, psi = intermediate_profile(y, s, c, params)
    total_u = np.asarray(sample.fields.u_comp, dtype=float) + phi
    total_v = np.asarray(sample.fields.v_comp, dtype=float) + psi
    root = math.exp(-0.5 * s)  # sqrt(T - t)
    x = a + y * root
    u = total_u * root ** (-2.0 * params.alpha_u)
    v = total_v * root ** (-2.0 * params.alpha_v)
    return x, u, v


def rescale(x, u, v, s: float, T: float, a: float, grid: Grid, c: Constants, params: Params) -> FieldPair:
    """Inverse of unscale back onto the similarity grid (round-trip exact
    when x is the unscaled image of the grid nodes)."""
    root = math.exp(-0.5 * s)
    y = (np.asarray(x, dtype=float) - a) / root
    phi, psi = intermediate_profile(y, s, c, params)
    lam = np.asarray(u, dtype=float) * root ** (2.0 * params.alpha_u) - phi
    ups = np.asarray(v, dtype=float) * root ** (2.0 * params.alpha_v) - psi
    return FieldPair(grid=grid, u_comp=lam, v_comp=ups, s=s, kind="LambdaUpsilon")


# ---------------------------------------------------------------------------
# CSV output


def _clause_value(rep: ShrinkReport, clause: str) -> float:
    for b in rep.bounds:
        if b.clause == clause:
            return b.value
    raise KeyError(clause)


def trajectory_to_csv(traj: Trajectory, path: str) -> None:
    M = traj.config.M_trunc
    header = (
        ["s"]
        + [f"theta_{j}" for j in range(M + 1)]
        + [f"ttheta_{j}" for j in range(M + 1)]
        + [
            "sup_Lambda",
            "sup_Upsilon",
            "sup_Lambda_e",
            "sup_Upsilon_e",
            "wnorm_minus_L",
            "wnorm_minus_U",
            "in_set",
        ]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for smp in traj.samples:
            row = [f"{smp.s:.17g}"]
            row += [f"{float(t):.17g}" for t in smp.modes.theta]
            row += [f"{float(t):.17g}" for t in smp.modes.theta_tilde]
            row += [
                f"{float(np.max(np.abs(smp.fields.u_comp))):.17g}",
                f"{float(np.max(np.abs(smp.fields.v_comp))):.17g}",
                f"{_clause_value(smp.shrink, 'outer_sup_L'):.17g}",
                f"{_clause_value(smp.shrink, 'outer_sup_U'):.17g}",
                f"{_clause_value(smp.shrink, 'wminus_L'):.17g}",
                f"{_clause_value(smp.shrink, 'wminus_U'):.17g}",
                "1" if smp.shrink.in_set else "0",
            ]
            writer.writerow(row)


def snapshot_to_csv(sample: Sample, c: Constants, params: Params, path: str) -> None:
    y = sample.fields.grid.nodes()
    phi, psi = intermediate_profile(y, sample.s, c, params)
    lam = np.asarray(sample.fields.u_comp, dtype=float)
    ups = np.asarray(sample.fields.v_comp, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y", "Lambda", "Upsilon", "phi", "psi"])
        for i in range(len(y)):
            writer.writerow(
                [
                    f"{y[i]:.17g}",
                    f"{lam[i]:.17g}",
                    f"{ups[i]:.17g}",
                    f"{phi[i]:.17g}",
                    f"{psi[i]:.17g}",
                ]
            )
