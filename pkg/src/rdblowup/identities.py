"""Cross-verification of every closed-form identity the package relies on.

Each check pits a closed form against an oracle computed through a disjoint
code path: spectral interpolation derivatives against the base profile ODE,
a dense eigensolve against the recursion eigenvalue ladder, Gauss quadrature
expansions against displayed coefficients, 1/s extrapolation of the exact
residual against its closed leading term.  One :class:`CheckResult` per
claim; :func:`run_all` sweeps a parameter grid and writes a JSON report.

Two conventions keep the pass rule uniform:

* equality claims record ``abs_err = |lhs - rhs|`` and a relative error
  against an explicit scale; ``passed`` means the recorded error is within
  ``tol``;
* inequality claims (a sign, a fitted constant staying under a bound)
  record the constraint violation as ``abs_err``, zero when satisfied.

Rows flagged ``informational`` never gate the suite.  They exist for two
known document-level discrepancies: the two published displays of the
degree-2 growing pair disagree in their constant terms, and two published
constant terms for the leading residual disagree with the extrapolation
oracle.  The suite evaluates both sides of each and records the numbers.

Fault injection (``inject_b_fault``) reruns the curvature-sensitive checks
with the profile curvature misderived by 1%, proving the suite actually
detects a wrong constant rather than passing vacuously.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace

import numpy as np
from numpy.polynomial.chebyshev import Chebyshev

from .core import ConfigurationError, Params
from .dynamics import semigroup_apply
from .hermite import (
    DEFAULT_ORDER,
    Poly,
    Weight,
    gauss_quadrature,
    hermite_expand,
    hermite_norm_sq,
    hermite_weighted,
    inner_product,
)
from .profile import (
    Constants,
    Grid,
    b_selection_residual,
    constants,
    profile_star,
    residual_R,
    residual_leading,
    residual_leading_alternate_consts,
)
from .spectral import (
    EigenPair,
    _scaled_dense_matrix,
    branch_eigenvalue,
    dense_eigen_oracle,
    diagonal_weights,
    eigen_residual,
    eigenpair,
    offdiagonal_weights,
    projection_table,
    second_hermite_coeffs,
)

__all__ = [
    "CheckResult",
    "DEFAULT_GRID",
    "DEFAULT_SEED",
    "run_all",
    "verify_diagonalization",
    "verify_formal_analysis",
    "verify_null_mode",
    "verify_projections",
    "verify_residual_projection",
    "verify_semigroup",
]

DEFAULT_SEED = 20260822

# Exponents and diffusivities the acceptance sweep runs over.
DEFAULT_GRID = tuple(
    Params(p, q, mu)
    for p in (1.5, 2.0, 3.0)
    for q in (1.5, 2.0, 3.0)
    for mu in (0.5, 1.0, 2.0)
)


@dataclass(frozen=True)
class CheckResult:
    """One verified claim: a closed form versus an independent oracle."""

    id: str
    claim: str
    lhs: float
    rhs: float
    abs_err: float
    rel_err: float
    tol: float
    passed: bool
    oracle: str
    informational: bool = False


def _close(
    check_id: str,
    claim: str,
    lhs: float,
    rhs: float,
    tol: float,
    oracle: str,
    *,
    scale: float | None = None,
    relative: bool = True,
    extra_pass: bool = True,
    informational: bool = False,
) -> CheckResult:
    abs_err = abs(lhs - rhs)
    denom = max(scale if scale is not None else max(abs(lhs), abs(rhs)), 1e-300)
    rel_err = abs_err / denom
    err = rel_err if relative else abs_err
    return CheckResult(
        id=check_id,
        claim=claim,
        lhs=float(lhs),
        rhs=float(rhs),
        abs_err=float(abs_err),
        rel_err=float(rel_err),
        tol=float(tol),
        passed=bool(err <= tol and extra_pass),
        oracle=oracle,
        informational=informational,
    )


def _bounded(
    check_id: str,
    claim: str,
    value: float,
    bound: float,
    oracle: str,
) -> CheckResult:
    # abs_err is the constraint violation, zero when value <= bound
    viol = max(0.0, value - bound)
    return CheckResult(
        id=check_id,
        claim=claim,
        lhs=float(value),
        rhs=float(bound),
        abs_err=float(viol),
        rel_err=float(viol / max(abs(bound), 1e-300)),
        tol=0.0,
        passed=bool(viol == 0.0),
        oracle=oracle,
        informational=False,
    )


# ---------------------------------------------------------------------------
# matched-expansion identities


def verify_formal_analysis(
    params: Params, b_override: float | None = None
) -> list[CheckResult]:
    """Check the four closed forms behind the intermediate profile.

    (a) the base profile pair solves its first-order similarity ODE system;
    (b) the origin values of the 1/s correction match the solved 2x2 system;
    (c) the degree-1 matching determinant equals the dense-determinant route
        and is negative, so the odd correction vanishes;
    (d) the degree-2 compatibility defect vanishes at the selected curvature
        (``b_override`` substitutes a deliberately wrong curvature so fault
        injection can prove the check bites).
    """
    c = constants(params)
    p, q, mu = params.p, params.q, params.mu

    # Chebyshev interpolants give spectral-accuracy derivatives without
    # touching the closed derivative formulas under test.
    wide_u = Chebyshev.interpolate(lambda z: profile_star(z, c, params)[0], 90, domain=[-3.2, 3.2])
    wide_v = Chebyshev.interpolate(lambda z: profile_star(z, c, params)[1], 90, domain=[-3.2, 3.2])
    z = np.linspace(-3.0, 3.0, 121)
    pu, pv = profile_star(z, c, params)
    res_u = -0.5 * z * wide_u.deriv(1)(z) - params.alpha_u * pu + pv**p
    res_v = -0.5 * z * wide_v.deriv(1)(z) - params.alpha_v * pv + pu**q
    source_scale = max(np.max(np.abs(pv**p)), np.max(np.abs(pu**q)))
    ode = _close(
        "base-ode-residual",
        "base profile pair solves the first-order similarity ODE system",
        float(max(np.max(np.abs(res_u)), np.max(np.abs(res_v)))),
        0.0,
        1e-10,
        "Chebyshev interpolation derivative on [-3, 3]",
        scale=source_scale,
    )

    # narrow interpolants: second derivatives at the origin stay conditioned
    near_u = Chebyshev.interpolate(lambda z: profile_star(z, c, params)[0], 24, domain=[-0.8, 0.8])
    near_v = Chebyshev.interpolate(lambda z: profile_star(z, c, params)[1], 24, domain=[-0.8, 0.8])
    mat = np.array(
        [
            [-params.alpha_u, p * c.gamma ** (p - 1.0)],
            [q * c.Gamma ** (q - 1.0), -params.alpha_v],
        ]
    )
    rhs = np.array([-near_u.deriv(2)(0.0), -mu * near_v.deriv(2)(0.0)])
    solved = np.linalg.solve(mat, rhs)
    origin = _close(
        "correction-origin-values",
        "origin values of the 1/s correction match the linear system the "
        "profile curvature forces",
        float(np.max(np.abs(solved - np.array([c.D, c.E])))),
        0.0,
        1e-10,
        "Chebyshev curvature at the origin fed to a dense 2x2 solve",
        scale=max(abs(c.D), abs(c.E)),
    )

    a_closed = (
        0.5 * c.gamma ** (p + 1.0)
        + 0.5 * c.Gamma ** (q + 1.0)
        + 0.25 * c.Gamma * c.gamma
        - (p * q - 1.0) * c.Gamma**q * c.gamma**p
    )
    raw = np.array(
        [
            [0.5 + c.gamma**p / c.Gamma, -p * c.gamma ** (p - 1.0)],
            [-q * c.Gamma ** (q - 1.0), 0.5 + c.Gamma**q / c.gamma],
        ]
    )
    a_oracle = c.Gamma * c.gamma * np.linalg.det(raw)
    determinant = _close(
        "degree-one-determinant",
        "degree-1 matching determinant: closed form equals the dense route "
        "and is negative, so the odd 1/s correction is zero",
        float(a_closed),
        float(a_oracle),
        1e-10,
        "dense 2x2 determinant of the raw matching matrix",
        extra_pass=bool(a_closed < 0.0),
    )

    b_used = c.b if b_override is None else float(b_override)
    curvature = _close(
        "curvature-selection",
        "degree-2 matching defect vanishes at the selected profile curvature",
        float(b_selection_residual(b_used, params)),
        0.0,
        1e-9,
        "independent assembly of the degree-2 compatibility defect",
        scale=abs(b_used),
    )
    return [ode, origin, determinant, curvature]


# ---------------------------------------------------------------------------
# spectral decomposition


def _expected_clusters(M_trunc: int, params: Params) -> dict[float, int]:
    expected: dict[float, int] = {}
    for n in range(M_trunc + 1):
        for branch in ("plus", "minus"):
            lam = branch_eigenvalue(n, branch, params)
            for key in expected:
                if abs(key - lam) < 1e-9:
                    expected[key] += 1
                    break
            else:
                expected[lam] = 1
    return expected


def _cluster_deviation(M_trunc: int, params: Params) -> float:
    """Worst distance from a closed eigenvalue to its dense-spectrum cluster."""
    w = np.linalg.eigvals(_scaled_dense_matrix(M_trunc, params, constants(params)))
    used = np.zeros(len(w), dtype=bool)
    worst = 0.0
    for lam, mult in sorted(_expected_clusters(M_trunc, params).items(), key=lambda t: -t[0]):
        dist = np.abs(w - lam)
        dist[used] = np.inf
        idx = np.argsort(dist)[:mult]
        used[idx] = True
        worst = max(worst, abs(float(np.mean(w[idx].real)) - lam))
    return worst


def verify_diagonalization(params: Params, M_trunc: int) -> list[CheckResult]:
    """Recursion eigenpairs against the dense oracle and the closed displays."""
    if M_trunc > 20:
        raise ConfigurationError(f"M_trunc={M_trunc} above the verification cap 20")

    ladder = _close(
        "eigenvalue-ladder",
        "closed two-branch eigenvalue ladder matches the dense spectrum "
        "cluster by cluster",
        _cluster_deviation(M_trunc, params),
        0.0,
        1e-8,
        "dense eigensolve of the degree-truncated operator",
        relative=False,
    )

    clusters = _expected_clusters(M_trunc, params)

    def _multiplicity(lam: float) -> int:
        return next(m for key, m in clusters.items() if abs(key - lam) < 1e-9)

    oracle_pairs = {(o.n, o.branch): o for o in dense_eigen_oracle(M_trunc, params)}
    vec_dev = 0.0
    skipped = 0
    for n in range(M_trunc + 1):
        for branch in ("plus", "minus"):
            o = oracle_pairs[(n, branch)]
            # collided clusters leave the higher-degree member defined only
            # modulo the lower one; Jordan slots have no eigenvector at all
            if o.defect > 1e-8 or _multiplicity(o.eigenvalue) > 1:
                skipped += 1
                continue
            r = eigenpair(n, branch, params)
            scale = max(
                max(abs(x) for x in r.hermite_u), max(abs(x) for x in r.hermite_v)
            )
            dev = max(
                max(abs(a - b) for a, b in zip(r.hermite_u, o.hermite_u)),
                max(abs(a - b) for a, b in zip(r.hermite_v, o.hermite_v)),
            )
            vec_dev = max(vec_dev, dev / scale)
    vectors = _close(
        "eigenvector-alignment",
        "recursion eigenvectors match the dense oracle on every simple "
        f"non-defective eigenvalue ({skipped} collided or defective slots "
        "excluded)",
        vec_dev,
        0.0,
        # the dense eigensolve is nonsymmetric; its vector noise floor sits
        # an order above the eigenvalue one
        1e-7,
        "dense eigensolve, leading coefficient aligned to the branch "
        "normalization",
        relative=False,
    )

    resid = 0.0
    defective = 0
    for n in range(M_trunc + 1):
        for branch in ("plus", "minus"):
            r = eigenpair(n, branch, params)
            # slots downstream of an inconsistent singular recursion step
            # are not eigenpairs and say so through their recorded defect
            if r.defect > 1e-8:
                defective += 1
                continue
            resid = max(resid, eigen_residual(r, params))
    symbolic = _close(
        "eigen-equation-residual",
        "applying the linearized operator to each recursion pair reproduces "
        f"its eigenvalue coefficient-wise ({defective} defective slots "
        "excluded)",
        resid,
        0.0,
        1e-8,
        "symbolic polynomial application of the linearized operator",
        relative=False,
    )

    slot_dev = 0.0
    mu_one_dev = 0.0
    lead_scale = max((params.p + 1.0) * constants(params).Gamma,
                     (params.q + 1.0) * constants(params).gamma)
    for n in range(2, M_trunc + 1):
        for branch in ("plus", "minus"):
            d_cl, e_cl = second_hermite_coeffs(n, branch, params)
            r = eigenpair(n, branch, params)
            sc = max(abs(d_cl), abs(e_cl), 1.0)
            slot_dev = max(
                slot_dev,
                max(abs(r.hermite_u[n - 2] - d_cl), abs(r.hermite_v[n - 2] - e_cl)) / sc,
            )
            if params.mu == 1.0:
                mu_one_dev = max(
                    mu_one_dev, abs(r.hermite_u[n - 2]), abs(r.hermite_v[n - 2])
                )
    slots = _close(
        "second-slot-coefficients",
        "closed second Hermite coefficients of every eigenpair match the "
        "quadrature expansion of the recursion output",
        slot_dev,
        0.0,
        1e-10,
        "Gauss quadrature expansion of the recursion polynomials",
        relative=False,
    )

    top = _close(
        "unit-top-eigenvalue",
        "the leading growing mode has eigenvalue exactly one",
        branch_eigenvalue(0, "plus", params),
        1.0,
        1e-15,
        "exact arithmetic",
    )

    out = [ladder, vectors, symbolic, slots, top]
    if params.mu == 1.0:
        out.append(
            _close(
                "equal-diffusivity-decoupling",
                "at equal diffusivities every second-slot coefficient "
                "vanishes, both components and both branches",
                mu_one_dev,
                0.0,
                1e-10,
                "Gauss quadrature expansion of the recursion polynomials",
                scale=lead_scale,
            )
        )
    return out


def verify_projections(
    params: Params, M_trunc: int, seed: int = DEFAULT_SEED
) -> list[CheckResult]:
    """Projection-table entries against closed weights and a round trip."""
    table = projection_table(M_trunc, params)
    dw = diagonal_weights(params)
    diag_dev = max(
        max(
            abs(table.u_to_plus[n, n] - dw[0]),
            abs(table.v_to_plus[n, n] - dw[1]),
            abs(table.u_to_minus[n, n] - dw[2]),
            abs(table.v_to_minus[n, n] - dw[3]),
        )
        for n in range(M_trunc + 1)
    )
    diagonal = _close(
        "diagonal-extraction-weights",
        "closed diagonal extraction weights match the block-inverted table "
        "at every degree",
        diag_dev,
        0.0,
        1e-10,
        "exact block inversion of the expansion matrix",
        scale=max(abs(w) for w in dw),
    )

    off_dev = 0.0
    off_scale = 1e-300
    for n in range(M_trunc - 1):
        a_off, b_off = offdiagonal_weights(n, params)
        off_dev = max(
            off_dev,
            abs(table.u_to_plus[n + 2, n] - a_off),
            abs(table.v_to_plus[n + 2, n] - b_off),
        )
        off_scale = max(off_scale, abs(a_off), abs(b_off))
    offdiag = _close(
        "offdiagonal-extraction-weights",
        "closed first off-diagonal extraction weights match the table",
        off_dev,
        0.0,
        1e-10,
        "exact block inversion of the expansion matrix",
        # every off-diagonal weight vanishes at equal diffusivities, so the
        # diagonal magnitude backstops the scale
        scale=max(off_scale, max(abs(w) for w in dw)),
    )

    rng = np.random.default_rng(seed)
    worst = 0.0
    nn = M_trunc + 1
    for _ in range(3):
        amp_plus = rng.uniform(-1.0, 1.0, nn)
        amp_minus = rng.uniform(-1.0, 1.0, nn)
        raw_u = np.zeros(nn)
        raw_v = np.zeros(nn)
        for n in range(nn):
            pp, pm = table.pairs_plus[n], table.pairs_minus[n]
            for m in range(n + 1):
                raw_u[m] += amp_plus[n] * pp.hermite_u[m] + amp_minus[n] * pm.hermite_u[m]
                raw_v[m] += amp_plus[n] * pp.hermite_v[m] + amp_minus[n] * pm.hermite_v[m]
        got_plus = table.u_to_plus.T @ raw_u + table.v_to_plus.T @ raw_v
        got_minus = table.u_to_minus.T @ raw_u + table.v_to_minus.T @ raw_v
        worst = max(
            worst,
            float(np.max(np.abs(got_plus - amp_plus))),
            float(np.max(np.abs(got_minus - amp_minus))),
        )
    round_trip = _close(
        "amplitude-round-trip",
        "random mode amplitudes survive synthesis and extraction unchanged",
        worst,
        0.0,
        # collided eigenvalues make the expansion matrix mildly
        # ill-conditioned, so allow an order over the generic floor
        1e-9,
        "synthesized expansion fed back through the table, seeded draws",
        relative=False,
    )
    return [diagonal, offdiag, round_trip]


# ---------------------------------------------------------------------------
# null-direction identities


def _null_pairing_value(table, c: Constants, params: Params, pair: EigenPair) -> tuple[float, float]:
    """Project the quadratic-pair potential product; return (value, degree-4 u-slot)."""
    p, q = params.p, params.q
    w1 = pair.poly_v.scale(-p * (p - 1.0) * c.gamma ** (p - 2.0) * c.b / (p * q - 1.0))
    w2 = pair.poly_u.scale(-q * (q - 1.0) * c.Gamma ** (q - 2.0) * c.b / (p * q - 1.0))
    prod_u = w1 * pair.poly_v
    prod_v = w2 * pair.poly_u
    cu = hermite_expand(prod_u, Weight(1.0), 4, gauss_quadrature(1.0, DEFAULT_ORDER))
    cv = hermite_expand(prod_v, Weight(params.mu), 4, gauss_quadrature(params.mu, DEFAULT_ORDER))
    value = sum(
        table.u_to_plus[m, 2] * cu[m] + table.v_to_plus[m, 2] * cv[m] for m in (2, 4)
    )
    return float(value), float(cu[4])


def verify_null_mode(
    params: Params, M_trunc: int, c_override: Constants | None = None, table=None
) -> CheckResult:
    """The null-direction pairing of the quadratic-pair potential is -2.

    Builds the potential product from the degree-2 growing pair, expands it
    by quadrature over both Hermite families, and pushes it through the
    projection table.  The value is parameter independent.
    """
    if M_trunc < 4:
        raise ConfigurationError(f"M_trunc={M_trunc} must be at least 4")
    if table is None:
        table = projection_table(M_trunc, params)
    c = c_override if c_override is not None else constants(params)
    value, _ = _null_pairing_value(table, c, params, table.pairs_plus[2])
    return _close(
        "null-direction-pairing",
        "projection of the quadratic-pair potential product onto the null "
        "direction equals -2 at every parameter point",
        value,
        -2.0,
        1e-10,
        "Gauss quadrature expansion pushed through the block-inverted table",
        relative=False,
    )


def verify_residual_projection(
    params: Params, M_trunc: int, c_override: Constants | None = None, table=None
) -> CheckResult:
    """The leading residual has no component along the null direction.

    The selected curvature makes the null-direction projection of the
    leading 1/s^2 residual coefficients vanish; with a faulted curvature it
    does not, which is what fault injection exercises.
    """
    if table is None:
        table = projection_table(max(4, M_trunc), params)
    c = c_override if c_override is not None else constants(params)
    qu = gauss_quadrature(1.0, DEFAULT_ORDER)
    qv = gauss_quadrature(params.mu, DEFAULT_ORDER)

    def _slot(component: int, m: int, eta: float, quad) -> float:
        f = lambda y: residual_leading(y, c, params)[component]
        return inner_product(f, hermite_weighted(m, eta), Weight(eta), quad) / (
            hermite_norm_sq(m, eta)
        )

    terms = [
        table.u_to_plus[m, 2] * _slot(0, m, 1.0, qu)
        + table.v_to_plus[m, 2] * _slot(1, m, params.mu, qv)
        for m in (2, 4)
    ]
    return _close(
        "leading-residual-null-projection",
        "null-direction projection of the leading residual coefficients "
        "vanishes at the selected curvature",
        float(sum(terms)),
        0.0,
        1e-9,
        "quadrature projection of the closed leading residual",
        relative=False,
    )


# ---------------------------------------------------------------------------
# scalar semigroup bounds


def verify_semigroup(
    params: Params, M_trunc: int, seed: int = DEFAULT_SEED
) -> list[CheckResult]:
    """Contraction and far-mode decay of the drift-diffusion kernel.

    The kernel depends only on the diffusivity, so the two families checked
    are unit diffusivity and the pair's second-component value.
    """
    grid = Grid(24.0, 768)
    y = grid.nodes()
    rng = np.random.default_rng(seed)
    etas = (1.0, params.mu) if params.mu != 1.0 else (1.0,)

    ratio_max = 0.0
    for eta in etas:
        for _ in range(50 // len(etas)):
            f = rng.standard_normal(grid.n)
            out = semigroup_apply(eta, 0.7, f, grid)
            ratio_max = max(ratio_max, float(np.max(np.abs(out)) / np.max(np.abs(f))))
    contraction = _bounded(
        "kernel-contraction",
        "the kernel never expands the sup norm on seeded random fields",
        ratio_max,
        1.0 + 1e-8,
        "row-normalized kernel quadrature on 50 seeded fields",
    )

    tau = 1.0
    floor = np.exp(-(M_trunc + 1) * tau / 2.0)
    weight_poly = 1.0 + np.abs(y) ** (M_trunc + 1)
    decay_c = 0.0
    weighted_c = 0.0
    for eta in etas:
        dens = Weight(eta).density(y)
        fields = [hermite_weighted(m, eta)(y) for m in range(M_trunc + 1, M_trunc + 4)]
        mix = sum(
            g * w for g, w in zip(fields, rng.standard_normal(len(fields)))
        )
        for f in fields + [mix]:
            out = semigroup_apply(eta, tau, f, grid)
            n_in = float(np.sqrt(np.trapezoid(f * f * dens, y)))
            n_out = float(np.sqrt(np.trapezoid(out * out * dens, y)))
            decay_c = max(decay_c, (n_out / n_in) / floor)
            w_in = float(np.max(np.abs(f) / weight_poly))
            w_out = float(np.max(np.abs(out) / weight_poly))
            weighted_c = max(weighted_c, (w_out / w_in) / floor)
    decay = _bounded(
        "far-mode-decay-rate",
        "everything beyond the tracked degrees decays at least at the first "
        "untracked rate, fitted constant under 10",
        decay_c,
        10.0,
        "kernel application to far Hermite modes and a seeded mixture",
    )
    weighted = _bounded(
        "far-mode-weighted-bound",
        "the same decay holds in the polynomially weighted sup norm, fitted "
        "constant under 10",
        weighted_c,
        10.0,
        "kernel application to far Hermite modes and a seeded mixture",
    )
    return [contraction, decay, weighted]


# ---------------------------------------------------------------------------
# dual-evaluation records


def _dual_evaluation_rows(
    params: Params,
    M_trunc: int,
    c_override: Constants | None = None,
    table=None,
) -> list[CheckResult]:
    """Rows documenting the two known document-level discrepancies.

    The production evaluations double as regular checks; the alternate
    evaluations are informational and expected to fail their oracle.
    """
    if table is None:
        table = projection_table(max(4, M_trunc), params)
    c = c_override if c_override is not None else constants(params)
    p, q, mu = params.p, params.q, params.mu

    production = table.pairs_plus[2]
    alternate = EigenPair(
        n=2,
        branch="plus",
        eigenvalue=0.0,
        poly_u=Poly((2.0 * p * c.Gamma * (1.0 - mu), 0.0, (p + 1.0) * c.Gamma)),
        poly_v=Poly((2.0 * q * c.gamma * (mu - 1.0), 0.0, (q + 1.0) * c.gamma)),
        hermite_u=(),
        hermite_v=(),
    )
    v_prod, alpha4 = _null_pairing_value(table, c, params, production)
    v_alt, _ = _null_pairing_value(table, c, params, alternate)
    r_prod = eigen_residual(production, params)
    r_alt = eigen_residual(alternate, params)
    pair_rows = [
        _close(
            "quadratic-pair-production-evaluation",
            "two published displays of the degree-2 growing pair disagree in "
            "their constant terms; this row evaluates the null pairing with "
            "the production (recursion) form, whose eigen-equation residual "
            f"is {r_prod:.2e}",
            v_prod,
            -2.0,
            1e-10,
            "Gauss quadrature expansion pushed through the block-inverted table",
            relative=False,
            informational=True,
        ),
        _close(
            "quadratic-pair-alternate-evaluation",
            "same pairing evaluated with the alternate display of the "
            "degree-2 pair, whose eigen-equation residual is "
            f"{r_alt:.2e}; the disagreement with -2 documents the discrepancy",
            v_alt,
            -2.0,
            1e-10,
            "Gauss quadrature expansion pushed through the block-inverted table",
            relative=False,
            informational=True,
        ),
    ]

    alpha4_closed = -c.b * c.gamma**p * p * (p - 1.0) * (q + 1.0) ** 2 / (p * q - 1.0)
    alpha4_row = _close(
        "quadratic-pair-degree-four-slot",
        "degree-4 Hermite slot of the quadratic-pair potential product "
        "matches its closed display",
        alpha4,
        alpha4_closed,
        1e-10,
        "Gauss quadrature expansion of the polynomial product",
    )

    # three-level extrapolation in 1/s kills both subleading orders while
    # staying below the float64 cancellation floor of the scaled residual
    probe = np.array([0.0, 0.5, 1.0, 2.0])
    s0 = 1.0e3
    lead_u, lead_v = residual_leading(probe, c, params)

    def _scaled(component: int, s: float) -> np.ndarray:
        return np.asarray(residual_R(probe, s, c, params)[component]) * s * s

    extrap = [
        (_scaled(i, s0) - 6.0 * _scaled(i, 2.0 * s0) + 8.0 * _scaled(i, 4.0 * s0)) / 3.0
        for i in (0, 1)
    ]
    lead_scale = max(np.max(np.abs(lead_u)), np.max(np.abs(lead_v)))
    prod_dev = max(
        float(np.max(np.abs(extrap[0] - lead_u))), float(np.max(np.abs(extrap[1] - lead_v)))
    )
    alt_u, alt_v = residual_leading_alternate_consts(c, params)
    alt_dev = max(
        float(np.max(np.abs(extrap[0] - (lead_u - lead_u[0] + alt_u)))),
        float(np.max(np.abs(extrap[1] - (lead_v - lead_v[0] + alt_v)))),
    )
    residual_rows = [
        _close(
            "leading-residual-extrapolation",
            "closed leading residual coefficients match the extrapolated "
            "scaled residual",
            prod_dev,
            0.0,
            1e-6,
            "three-level 1/s extrapolation of the exact residual",
            scale=lead_scale,
        ),
        _close(
            "leading-residual-alternate-constants",
            "same extrapolation against the alternate published constant "
            f"terms ({alt_u:.6g}, {alt_v:.6g} versus the production "
            f"{lead_u[0]:.6g}, {lead_v[0]:.6g}); the gap documents the "
            "discrepancy",
            alt_dev,
            0.0,
            1e-6,
            "three-level 1/s extrapolation of the exact residual",
            scale=lead_scale,
            informational=True,
        ),
    ]
    return pair_rows + [alpha4_row] + residual_rows


# ---------------------------------------------------------------------------
# suite driver


def _faulted_constants(params: Params, factor: float = 1.01) -> Constants:
    """Constants with the curvature misderived by ``factor``, consistently.

    The curvature-derived fields scale along with it so the fault models a
    wrong derivation rather than an internally inconsistent record.
    """
    c = constants(params)
    return replace(
        c, b=factor * c.b, c1=factor * c.c1, D=factor * c.D, E=factor * c.E
    )


def run_all(
    params_grid=None,
    report_path=None,
    *,
    M_trunc: int = 10,
    seed: int = DEFAULT_SEED,
    inject_b_fault: bool = False,
) -> dict:
    """Sweep every verifier over a parameter grid and assemble the report.

    Returns the report dict; writes JSON to ``report_path`` when given.
    ``all_passed`` covers the gating rows only, never the informational
    ones, and is what the command line maps to its exit code.  The kernel
    checks depend on the diffusivity alone and run once per distinct value.
    """
    grid = DEFAULT_GRID if params_grid is None else tuple(params_grid)
    rows: list[tuple[Params, CheckResult]] = []
    seen_mu: set[float] = set()
    for prm in grid:
        fault = _faulted_constants(prm) if inject_b_fault else None
        table = projection_table(max(4, M_trunc), prm)
        point: list[CheckResult] = []
        point += verify_formal_analysis(
            prm, b_override=None if fault is None else fault.b
        )
        point += verify_diagonalization(prm, M_trunc)
        point += verify_projections(prm, M_trunc, seed=seed)
        point.append(verify_null_mode(prm, max(4, M_trunc), c_override=fault, table=table))
        point.append(
            verify_residual_projection(prm, M_trunc, c_override=fault, table=table)
        )
        if prm.mu not in seen_mu:
            seen_mu.add(prm.mu)
            point += verify_semigroup(prm, M_trunc, seed=seed)
        point += _dual_evaluation_rows(prm, M_trunc, c_override=fault, table=table)
        rows.extend((prm, r) for r in point)

    gating = [r for _, r in rows if not r.informational]
    failures = [r for r in gating if not r.passed]
    report = {
        "suite": "closed-identity verification",
        "seed": seed,
        "m_trunc": M_trunc,
        "fault_injected": bool(inject_b_fault),
        "grid": [[prm.p, prm.q, prm.mu] for prm in grid],
        "n_checks": len(gating),
        "n_pass": len(gating) - len(failures),
        "n_fail": len(failures),
        "n_informational": len(rows) - len(gating),
        "all_passed": not failures,
        "checks": [
            dict(asdict(r), params=[prm.p, prm.q, prm.mu]) for prm, r in rows
        ],
    }
    if report_path is not None:
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report
