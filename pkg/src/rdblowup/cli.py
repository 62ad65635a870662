"""Command-line entry point.

Exit codes: 0 success, 1 a check or capture failed, 2 configuration or
usage error.  All floating output uses 17 significant digits so files
round-trip exactly; identical config and seed give byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .config import RunConfig, load_config
from .core import (
    ConfigurationError,
    DomainCoverageError,
    NoCaptureError,
    OracleMismatchError,
    Params,
)
from .dynamics import simulate, trajectory_to_csv
from .identities import DEFAULT_SEED, run_all
from .profile import constants, final_profile, initial_data
from .shooting import (
    find_trapped,
    make_perturbation,
    stability_report_to_file,
    stability_scan,
    trap_report_to_file,
)
from .spectral import eigenpair, projection_table

_CONST_KEYS = ("Gamma", "gamma", "b", "c1", "D", "E")


def _params_from_args(args) -> Params:
    return Params(args.p, args.q, args.mu)


def _open_out(path):
    if path:
        return open(path, "w", newline="")
    return sys.stdout


def _cmd_constants(args) -> int:
    c = constants(_params_from_args(args))
    body = ", ".join(f'"{k}": {getattr(c, k):.17g}' for k in _CONST_KEYS)
    print("{" + body + "}")
    return 0


def _cmd_eigen(args) -> int:
    params = _params_from_args(args)
    M = args.m_trunc
    ncol = M + 1
    header = (
        ["n", "branch", "eigenvalue"]
        + [f"u_c{k}" for k in range(ncol)]
        + [f"v_c{k}" for k in range(ncol)]
    )
    out = _open_out(args.out)
    try:
        writer = csv.writer(out)
        writer.writerow(header)
        for n in range(M + 1):
            for branch in ("plus", "minus"):
                pair = eigenpair(n, branch, params)
                hu = list(pair.hermite_u) + [0.0] * (ncol - len(pair.hermite_u))
                hv = list(pair.hermite_v) + [0.0] * (ncol - len(pair.hermite_v))
                row = [str(n), branch, f"{pair.eigenvalue:.17g}"]
                row += [f"{float(x):.17g}" for x in hu[:ncol]]
                row += [f"{float(x):.17g}" for x in hv[:ncol]]
                writer.writerow(row)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_verify(args) -> int:
    given = [x is not None for x in (args.p, args.q, args.mu)]
    if any(given) and not all(given):
        raise ConfigurationError("verify needs all three of --p --q --mu, or none")
    grid = [Params(args.p, args.q, args.mu)] if all(given) else None
    report = run_all(
        grid,
        args.report or None,
        M_trunc=args.m_trunc,
        seed=args.seed,
        inject_b_fault=args.inject_b_fault,
    )
    if args.report:
        print(
            f"checks: {report['n_pass']}/{report['n_checks']} passed, "
            f"{report['n_informational']} informational; report -> {args.report}"
        )
    else:
        json.dump(report, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return 0 if report["all_passed"] else 1


def _load_run(args) -> RunConfig:
    return load_config(args.config)


def _dtype_of(cfg: RunConfig):
    return np.longdouble if cfg.dtype == "longdouble" else np.float64


def _cmd_simulate(args) -> int:
    cfg = _load_run(args)
    params, c = cfg.params, constants(cfg.params)
    table = projection_table(cfg.M_trunc, params)
    scfg = cfg.solver_config()
    fields = initial_data(
        args.d0, args.d1, cfg.s0, cfg.A, cfg.K, c, params, table,
        scfg.grid, dtype=_dtype_of(cfg),
    )
    traj = simulate(scfg, fields, c, params, table)
    csv_path = args.csv or cfg.csv_out
    if csv_path:
        trajectory_to_csv(traj, csv_path)
    last = traj.samples[-1]
    status = "inside" if last.shrink.in_set else "outside"
    print(
        f"simulated s={cfg.s0:g} -> {last.s:g} "
        f"({len(traj.samples)} samples, final state {status} the set)"
        + (f"; csv -> {csv_path}" if csv_path else "")
    )
    return 0


def _cmd_shoot(args) -> int:
    cfg = _load_run(args)
    params, c = cfg.params, constants(cfg.params)
    table = projection_table(cfg.M_trunc, params)
    scfg = cfg.solver_config(end=cfg.shoot_end)
    result = find_trapped(
        scfg, c, params, table,
        max_levels=cfg.levels, per_side=cfg.boundary_samples,
    )
    report_path = args.report or cfg.report_out
    if report_path:
        trap_report_to_file(result, report_path)
    print(
        f"trapped: d0={result.d0:.17g} after {len(result.levels) - 1} levels, "
        f"winding {result.top_winding}"
        + (f"; report -> {report_path}" if report_path else "")
    )
    return 0


def _parse_perturbation(text: str):
    kind, _, eps_text = text.partition(":")
    try:
        eps = float(eps_text) if eps_text else 0.0
    except ValueError:
        raise ConfigurationError(
            f"perturbation {text!r}: amplitude after ':' must be a number"
        ) from None
    return make_perturbation(kind, eps)


def _cmd_stability(args) -> int:
    cfg = _load_run(args)
    params, c = cfg.params, constants(cfg.params)
    table = projection_table(cfg.M_trunc, params)
    scfg = cfg.solver_config(end=cfg.shoot_end)
    perts = [_parse_perturbation(t) for t in (args.perturbation or ["zero:0"])]
    base = find_trapped(
        scfg, c, params, table,
        max_levels=cfg.levels, per_side=cfg.boundary_samples,
    )
    fits = stability_scan(base.certificate, perts, scfg, c, params, table)
    report_path = args.report or cfg.report_out
    if report_path:
        stability_report_to_file(fits, report_path)
    for fit in fits:
        print(
            f"{fit.label}: trapped={fit.trapped} "
            f"T={fit.fitted_T:.17g} a={fit.fitted_a:.17g} (rounds {fit.rounds})"
        )
    if report_path:
        print(f"report -> {report_path}")
    return 0 if all(fit.trapped for fit in fits) else 1


def _cmd_final_profile(args) -> int:
    params = _params_from_args(args)
    c = constants(params)
    n = args.n
    if n < 2 or n % 2:
        raise ConfigurationError(f"n={n} must be even and >= 2 to avoid x = 0")
    x = np.linspace(-args.x_max, args.x_max, n)
    u, v = final_profile(x, c, params)
    out = _open_out(args.out)
    try:
        writer = csv.writer(out)
        writer.writerow(["x", "u", "v"])
        for i in range(n):
            writer.writerow([f"{x[i]:.17g}", f"{u[i]:.17g}", f"{v[i]:.17g}"])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _add_point_flags(sub, required: bool = True) -> None:
    sub.add_argument("--p", type=float, required=required, default=None)
    sub.add_argument("--q", type=float, required=required, default=None)
    sub.add_argument("--mu", type=float, required=required, default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdblowup",
        description="Self-similar blowup toolkit: constants, spectra, "
        "identity verification, evolution, trapping, stability.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("constants", help="closed-form constants as JSON")
    _add_point_flags(s)
    s.set_defaults(handler=_cmd_constants)

    s = sub.add_parser("eigen", help="eigenvalue ladder and coefficients as CSV")
    _add_point_flags(s)
    s.add_argument("--m-trunc", type=int, default=10)
    s.add_argument("--out", default="")
    s.set_defaults(handler=_cmd_eigen)

    s = sub.add_parser("verify", help="run the closed-identity check suite")
    _add_point_flags(s, required=False)
    s.add_argument("--m-trunc", type=int, default=10)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--report", default="")
    s.add_argument("--inject-b-fault", action="store_true")
    s.set_defaults(handler=_cmd_verify)

    s = sub.add_parser("simulate", help="evolve one seed and emit the trajectory CSV")
    s.add_argument("--config", required=True)
    s.add_argument("--csv", default="")
    s.add_argument("--d0", type=float, default=0.0)
    s.add_argument("--d1", type=float, default=0.0)
    s.set_defaults(handler=_cmd_simulate)

    s = sub.add_parser("shoot", help="bisection search for a trapped seed")
    s.add_argument("--config", required=True)
    s.add_argument("--report", default="")
    s.set_defaults(handler=_cmd_shoot)

    s = sub.add_parser("stability", help="fit blowup parameters under perturbations")
    s.add_argument("--config", required=True)
    s.add_argument("--report", default="")
    s.add_argument(
        "--perturbation",
        action="append",
        metavar="KIND[:EPS]",
        help="repeatable; kinds: zero, gaussian-even, gaussian-skew",
    )
    s.set_defaults(handler=_cmd_stability)

    s = sub.add_parser("final-profile", help="final-time spatial asymptote as CSV")
    _add_point_flags(s)
    s.add_argument("--x-max", type=float, default=0.3)
    s.add_argument("--n", type=int, default=600)
    s.add_argument("--out", default="")
    s.set_defaults(handler=_cmd_final_profile)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(sys.argv[1:] if argv is None else argv)
    try:
        return args.handler(args)
    except (ConfigurationError, DomainCoverageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NoCaptureError, OracleMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
