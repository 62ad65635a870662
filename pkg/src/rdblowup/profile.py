"""Closed-form ingredients of the blowup construction.

Derived constants, the slow-variable profile pair and its 1/s correction,
the linearization potential, the quadratic nonlinear remainder, the profile
residual (analytic derivatives only), the smooth cutoff, the two-parameter
initial data, and the final-time spatial asymptote.

Conventions.  ``z = y / sqrt(s)`` is the slow variable; the profile pair is

    P_u(z) = Gamma (1 + b z^2)^(-(p+1)/(pq-1)),
    P_v(z) = gamma (1 + b z^2)^(-(q+1)/(pq-1)),

and the corrected ("intermediate") profile adds ``(D, E)/s``.  All functions
are vectorized over ``y``/``z`` and preserve the floating dtype of the input,
so they can be driven in extended precision by the deviation-form solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .core import ConfigurationError, DomainCoverageError, Params, signed_power

__all__ = [
    "Constants",
    "Grid",
    "FieldPair",
    "constants",
    "profile_star",
    "intermediate_profile",
    "potential_V",
    "potential_leading",
    "nonlinear_F",
    "residual_R",
    "residual_leading",
    "b_selection_residual",
    "cutoff",
    "initial_data",
    "final_profile",
]


@dataclass(frozen=True)
class Constants:
    """Derived constants of the construction.

    ``Gamma``, ``gamma`` solve the algebraic pair
    ``gamma^p = Gamma (p+1)/(pq-1)``, ``Gamma^q = gamma (q+1)/(pq-1)``;
    ``b`` is the selected profile curvature, ``c1`` its mu=1 companion
    (``b = (pq-1) c1`` there), and ``(D, E)`` are the 1/s corrections
    ``D = 2 b Gamma (p mu + 1)/(pq-1)``, ``E = 2 b gamma (q + mu)/(pq-1)``.
    """

    Gamma: float
    gamma: float
    b: float
    c1: float
    D: float
    E: float


def constants(params: Params) -> Constants:
    """Compute all derived constants for the given exponents.

    ``(Gamma, gamma)`` come from the exact 2x2 log-linear solve of the
    defining pair (no fixed-point iteration):

        p log gamma - log Gamma = log((p+1)/(pq-1))
        q log Gamma - log gamma = log((q+1)/(pq-1))
    """
    p, q, mu = params.p, params.q, params.mu
    pq1 = params.pq1
    m1 = math.log((p + 1.0) / pq1)
    m2 = math.log((q + 1.0) / pq1)
    log_gamma = (q * m1 + m2) / pq1
    log_Gamma = (m1 + p * m2) / pq1
    Gamma = math.exp(log_Gamma)
    gamma = math.exp(log_gamma)
    b = pq1 * (2.0 * p * q + p + q) / (4.0 * p * q * (p + 1.0) * (q + 1.0) * (1.0 + mu))
    c1 = (2.0 * p * q + p + q) / (8.0 * p * q * (p + 1.0) * (q + 1.0))
    D = 2.0 * b * Gamma * (p * mu + 1.0) / pq1
    E = 2.0 * b * gamma * (q + mu) / pq1
    return Constants(Gamma=Gamma, gamma=gamma, b=b, c1=c1, D=D, E=E)


@dataclass(frozen=True)
class Grid:
    """Uniform symmetric grid on [-y_max, y_max] with n nodes."""

    y_max: float
    n: int

    def __post_init__(self) -> None:
        if not self.y_max > 0 or self.n < 3:
            raise ConfigurationError(f"grid y_max={self.y_max}, n={self.n} invalid")

    @property
    def step(self) -> float:
        return 2.0 * self.y_max / (self.n - 1)

    def nodes(self, dtype=np.float64) -> np.ndarray:
        # Built antisymmetric to the last bit so parity arguments survive.
        half = np.arange(self.n, dtype=dtype) - (self.n - 1) / 2.0
        return half * (np.asarray(2.0 * self.y_max, dtype=dtype) / (self.n - 1))


@dataclass(frozen=True)
class FieldPair:
    """Sampled component pair on a grid at self-similar time ``s``.

    ``kind`` is "PhiPsi" for total fields or "LambdaUpsilon" for deviations
    from the intermediate profile.
    """

    grid: Grid
    u_comp: np.ndarray
    v_comp: np.ndarray
    s: float
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in ("PhiPsi", "LambdaUpsilon"):
            raise ConfigurationError(f"unknown field kind {self.kind!r}")
        for name, arr in (("u_comp", self.u_comp), ("v_comp", self.v_comp)):
            a = np.asarray(arr)
            if a.shape != (self.grid.n,):
                raise ConfigurationError(
                    f"{name} has shape {a.shape}, grid expects ({self.grid.n},)"
                )
            if not np.all(np.isfinite(a)):
                raise ConfigurationError(f"{name} contains non-finite values")


def profile_star(z, c: Constants, params: Params) -> Tuple[np.ndarray, np.ndarray]:
    """Base profile pair at slow variable ``z``; positive, decreasing in |z|."""
    z = np.asarray(z)
    base = 1.0 + c.b * z * z
    return (
        c.Gamma * base ** (-params.alpha_u),
        c.gamma * base ** (-params.alpha_v),
    )


def _profile_star_derivs(z, c: Constants, params: Params):
    """First and second z-derivatives of both base profiles, closed form."""
    z = np.asarray(z)
    b = c.b
    base = 1.0 + b * z * z
    mu_, mv_ = params.alpha_u, params.alpha_v
    du = c.Gamma * (-mu_) * base ** (-mu_ - 1.0) * 2.0 * b * z
    dv = c.gamma * (-mv_) * base ** (-mv_ - 1.0) * 2.0 * b * z
    ddu = c.Gamma * (-2.0 * b * mu_ * base ** (-mu_ - 1.0)
                     + 4.0 * b * b * mu_ * (mu_ + 1.0) * z * z * base ** (-mu_ - 2.0))
    ddv = c.gamma * (-2.0 * b * mv_ * base ** (-mv_ - 1.0)
                     + 4.0 * b * b * mv_ * (mv_ + 1.0) * z * z * base ** (-mv_ - 2.0))
    return du, dv, ddu, ddv


def intermediate_profile(y, s, c: Constants, params: Params):
    """Corrected profile ``(P_u(y/sqrt(s)) + D/s, P_v(y/sqrt(s)) + E/s)``."""
    if not np.all(np.asarray(s) > 0):
        raise ConfigurationError(f"s={s} must be positive")
    y = np.asarray(y)
    z = y / np.sqrt(np.asarray(s, dtype=y.dtype if y.dtype.kind == "f" else float))
    pu, pv = profile_star(z, c, params)
    return pu + c.D / s, pv + c.E / s


def potential_V(y, s, c: Constants, params: Params):
    """Linearization potential pair, by direct evaluation (no series).

    ``V_u = p (psi^(p-1) - gamma^(p-1))`` and ``V_v = q (phi^(q-1) - Gamma^(q-1))``
    where (phi, psi) is the intermediate profile.  Pointwise -> 0 as s grows;
    far-field limits are ``-p gamma^(p-1)`` and ``-q Gamma^(q-1)``.
    """
    phi, psi = intermediate_profile(y, s, c, params)
    p, q = params.p, params.q
    return (
        p * (psi ** (p - 1.0) - c.gamma ** (p - 1.0)),
        q * (phi ** (q - 1.0) - c.Gamma ** (q - 1.0)),
    )


def eigen_quadratic_pair(c: Constants, params: Params):
    """Coefficient tuples (const, quadratic) of the degree-2 growing-branch
    eigenfunction pair, recursion normalization:

        f2 = (p+1) Gamma y^2 - 2 Gamma (p mu + 1)
        g2 = (q+1) gamma y^2 - 2 gamma (q + mu)
    """
    p, q, mu = params.p, params.q, params.mu
    f2 = (-2.0 * c.Gamma * (p * mu + 1.0), (p + 1.0) * c.Gamma)
    g2 = (-2.0 * c.gamma * (q + mu), (q + 1.0) * c.gamma)
    return f2, g2


def potential_leading(y, s, c: Constants, params: Params):
    """Order-1/s approximation of the potential pair.

    Built on the recursion-form degree-2 eigenfunctions:
    ``-p(p-1) gamma^(p-2) (b/((pq-1) s)) g2(y)`` and the (q, Gamma, f2)
    analog.  Valid in |y| <= sqrt(s); the error is O((1+y^4)/s^2).
    """
    y = np.asarray(y)
    p, q = params.p, params.q
    (f20, f22), (g20, g22) = eigen_quadratic_pair(c, params)
    pref_u = -p * (p - 1.0) * c.gamma ** (p - 2.0) * c.b / (params.pq1 * s)
    pref_v = -q * (q - 1.0) * c.Gamma ** (q - 2.0) * c.b / (params.pq1 * s)
    return pref_u * (g20 + g22 * y * y), pref_v * (f20 + f22 * y * y)


def nonlinear_F(lam, ups, y, s, c: Constants, params: Params):
    """Quadratic-remainder pair of the source terms about the profile.

    ``F_u = |psi + ups|^(p-1)(psi + ups) - psi^p - p psi^(p-1) ups`` and the
    (q, phi, lam) analog; vanishes to second order at zero perturbation.
    """
    phi, psi = intermediate_profile(y, s, c, params)
    p, q = params.p, params.q
    f1 = signed_power(psi + ups, p) - psi**p - p * psi ** (p - 1.0) * ups
    f2 = signed_power(phi + lam, q) - phi**q - q * phi ** (q - 1.0) * lam
    return f1, f2


def residual_R(y, s, c: Constants, params: Params):
    """Residual of the intermediate profile under the self-similar flow.

    Direct evaluation with closed-form derivatives (no numerical
    differentiation): writing z = y/sqrt(s) and m_u = (p+1)/(pq-1),

        R_u = (z/(2s)) P_u' + D/s^2 + P_u''/s - (z/2) P_u'
              - m_u (P_u + D/s) + (P_v + E/s)^p

    and the analog with mu P_v'' and exponent q.  Satisfies
    ``s * sup |R_i| <= C`` and ``s^2 R_i -> residual_leading`` pointwise.
    """
    y = np.asarray(y)
    fdt = y.dtype if y.dtype.kind == "f" else np.dtype(float)
    s_a = np.asarray(s, dtype=fdt)
    z = y / np.sqrt(s_a)
    pu, pv = profile_star(z, c, params)
    du, dv, ddu, ddv = _profile_star_derivs(z, c, params)
    mu_, mv_ = params.alpha_u, params.alpha_v
    phi = pu + c.D / s_a
    psi = pv + c.E / s_a
    r1 = (z / (2.0 * s_a)) * du + c.D / s_a**2 + ddu / s_a \
        - 0.5 * z * du - mu_ * phi + signed_power(psi, params.p)
    r2 = (z / (2.0 * s_a)) * dv + c.E / s_a**2 + params.mu * ddv / s_a \
        - 0.5 * z * dv - mv_ * psi + signed_power(phi, params.q)
    return r1, r2


def residual_leading(y, c: Constants, params: Params):
    """The 1/s^2 coefficient pair of the residual expansion, closed form.

    The y^2 coefficients follow the standard display; the constant terms are
    ``D + p(p-1) gamma^(p-2) E^2 / 2`` (and the swapped analog), i.e. the
    second-order Taylor term of the source about the base profile.  An
    alternate published constant fails the 1/s-extrapolation oracle; the
    identity suite reports both evaluations.
    """
    y = np.asarray(y)
    p, q, mu = params.p, params.q, params.mu
    pq1 = params.pq1
    b, Gamma, gamma = c.b, c.Gamma, c.gamma
    quad_u = (b * Gamma * (p + 1.0) / pq1) * (
        -1.0
        + 6.0 * b * p * (q + 1.0) / pq1
        - 2.0 * b * p * (q + 1.0) * (p - 1.0) * (q + mu) / pq1**2
    )
    quad_v = (b * gamma * (q + 1.0) / pq1) * (
        -1.0
        + 6.0 * b * mu * q * (p + 1.0) / pq1
        - 2.0 * b * q * (p + 1.0) * (q - 1.0) * (p * mu + 1.0) / pq1**2
    )
    const_u = c.D + 0.5 * p * (p - 1.0) * gamma ** (p - 2.0) * c.E**2
    const_v = c.E + 0.5 * q * (q - 1.0) * Gamma ** (q - 2.0) * c.D**2
    return quad_u * y * y + const_u, quad_v * y * y + const_v


def residual_leading_alternate_consts(c: Constants, params: Params):
    """Alternate published constant terms of the 1/s^2 residual coefficients.

    Kept only so the identity suite can report their disagreement with the
    extrapolation oracle; not used anywhere else.
    """
    p, q, mu = params.p, params.q, params.mu
    pq1 = params.pq1
    const_u = c.D - 4.0 * c.b**2 * q * (q - 1.0) * c.gamma**p * (q + mu) ** 2 / pq1**3
    const_v = c.E - 4.0 * c.b**2 * p * (p - 1.0) * c.Gamma**q * (p * mu + 1.0) ** 2 / pq1**3
    return const_u, const_v


def b_selection_residual(bhat: float, params: Params) -> float:
    """Compatibility defect of the order-z^2 matching system at curvature ``bhat``.

    The degree-2 matching equations for the 1/s correction share a singular
    coefficient matrix; solvability requires the weighted sum of their
    constant terms to vanish, which selects the curvature.  Returns

        k1(bhat) + (p (q+1) / (q (p+1))) k2(bhat)

    which is zero iff ``bhat`` equals the selected value.
    """
    p, q, mu = params.p, params.q, params.mu
    pq1 = params.pq1
    k1 = (
        2.0 * bhat**2 * p * (q + 1.0) * (p - 1.0) * (q + mu) / pq1**2
        - 6.0 * bhat**2 * p * (q + 1.0) / pq1
        + bhat
    )
    k2 = (
        2.0 * bhat**2 * q * (p + 1.0) * (q - 1.0) * (p * mu + 1.0) / pq1**2
        - 6.0 * mu * bhat**2 * q * (p + 1.0) / pq1
        + bhat
    )
    return k1 + (p * (q + 1.0) / (q * (p + 1.0))) * k2


def _mollified_step(t: np.ndarray) -> np.ndarray:
    """Smooth non-increasing transition: 1 for t <= 1, 0 for t >= 2.

    Standard exp(-1/t) partition on [1,2]:
    sigma(2-t) / (sigma(2-t) + sigma(t-1)), sigma(t) = exp(-1/t) for t > 0.
    Fixed bit-exactly here for reproducibility.
    """
    t = np.asarray(t)
    out = np.ones_like(t)
    out[t >= 2.0] = 0.0
    mid = (t > 1.0) & (t < 2.0)
    if np.any(mid):
        tm = t[mid]
        with np.errstate(over="ignore"):
            a = np.exp(-1.0 / (2.0 - tm))
            bb = np.exp(-1.0 / (tm - 1.0))
        out[mid] = a / (a + bb)
    return out


def cutoff(y, s, K: float):
    """Inner-region cutoff ``chi(y, s)``: 1 for |y| <= K sqrt(s), 0 beyond
    2 K sqrt(s), smooth and non-increasing in |y| in between."""
    if not np.all(np.asarray(s) > 0):
        raise ConfigurationError(f"s={s} must be positive")
    if not K > 0:
        raise ConfigurationError(f"K={K} must be positive")
    y = np.asarray(y)
    fdt = y.dtype if y.dtype.kind == "f" else np.dtype(float)
    t = np.abs(y) / (K * np.sqrt(np.asarray(s, dtype=fdt)))
    scalar = t.ndim == 0
    res = _mollified_step(np.atleast_1d(t))
    return float(res[0]) if scalar else res


def initial_data(
    d0: float,
    d1: float,
    s0: float,
    A: float,
    K: float,
    c: Constants,
    params: Params,
    table,
    grid: Grid,
    dtype=np.float64,
) -> FieldPair:
    """Two-parameter deviation data used to seed the trapping search.

    ``(A/s0^2) (d0 (f0, g0) + d1 (f1, g1)) chi(2y, s0)`` where (f0, g0) and
    (f1, g1) are the degree-0 and degree-1 growing-branch eigenfunction
    pairs taken from ``table`` and chi is the inner cutoff.  The doubled
    argument of chi makes the outer part vanish identically.  In original
    variables the data is the unscaled image of (profile + deviation); see
    the evolution module's unscale.
    """
    if not s0 >= math.e:
        raise ConfigurationError(f"s0={s0} must be >= e")
    if not A >= 1.0:
        raise ConfigurationError(f"A={A} must be >= 1")
    y = grid.nodes(dtype=dtype)
    pair0 = table.eigenpair(0, "plus")
    pair1 = table.eigenpair(1, "plus")
    f0 = pair0.poly_u(y)
    g0 = pair0.poly_v(y)
    f1 = pair1.poly_u(y)
    g1 = pair1.poly_v(y)
    chi2 = cutoff(2.0 * y, s0, K)
    amp = np.asarray(A, dtype=dtype) / np.asarray(s0, dtype=dtype) ** 2
    d0 = np.asarray(d0, dtype=dtype)
    d1 = np.asarray(d1, dtype=dtype)
    lam = amp * (d0 * f0 + d1 * f1) * chi2
    ups = amp * (d0 * g0 + d1 * g1) * chi2
    return FieldPair(grid=grid, u_comp=lam, v_comp=ups, s=float(s0), kind="LambdaUpsilon")


def final_profile(x, c: Constants, params: Params):
    """Final-time spatial asymptote near (but not at) the blowup point.

    ``u*(x) = Gamma (b x^2 / (2 |log|x||))^(-(p+1)/(pq-1))`` and the
    (gamma, q) analog; defined for 0 < |x| < 1/e.
    """
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x_arr == 0.0) or np.any(np.abs(x_arr) >= 1.0 / math.e):
        raise DomainCoverageError(
            f"final-profile asymptote requires 0 < |x| < 1/e, got {x}"
        )
    arg = c.b * x_arr**2 / (2.0 * np.abs(np.log(np.abs(x_arr))))
    u = c.Gamma * arg ** (-params.alpha_u)
    v = c.gamma * arg ** (-params.alpha_v)
    if np.ndim(x) == 0:
        return float(u[0]), float(v[0])
    return u, v
