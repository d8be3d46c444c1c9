"""Command-line front end: thresholds, interpolate, scan, bands, profile, converge.

Records go out as JSON lines, grids as CSV.  Exit codes: 0 ok, 2 usage,
3 numerical failure, 4 negative certificate when positivity was requested.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from contextlib import contextmanager

from . import __version__
from .data import sigma_table
from .errors import (ConfigError, DimensionMismatch, MourreError, NoConvergence, NoValidSigma,
                     RankDeficient, ScheduleInfeasible, SingularSystem)
from .gfun import ConjugateOperator, check_kappa
from .interp import (band_endpoints, build_system, constraint_defects,
                     search_sigma, solve_rho)
from .scan import ScanConfig, certify_band, emit_profile, find_bands, scan_energies
from .solver import (convergence_study, load_alignment_schedules, solve_F,
                     solve_J2, solve_documented_alignment, solve_well)

CONFIG_ENV = "MVMOURRE_CONFIG"

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_NEGATIVE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; '#' starts a comment. Keys use option names."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma separated integer list: {text!r}")


def _pool(text: str) -> list:
    return [_int_list(part) for part in text.split(";") if part.strip()]


def _kappa(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"kappa must be an integer: {text!r}")
    try:
        return check_kappa(k)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _dim(text: str) -> int:
    d = int(text)
    if d not in (2, 3):
        raise argparse.ArgumentTypeError("dimension must be 2 or 3")
    return d


def _add_grid(p):
    p.add_argument("--dim", type=_dim, default=2)
    p.add_argument("--n-E", dest="n_E", type=int, default=ScanConfig.n_E)
    p.add_argument("--n-x", dest="n_x", type=int, default=ScanConfig.n_x)
    p.add_argument("--n-y", dest="n_y", type=int, default=ScanConfig.n_y)
    p.add_argument("--tol-sign", dest="tol_sign", type=_positive_float, default=ScanConfig.tol_sign)
    p.add_argument("--full-domain", dest="full_domain", action="store_true",
                   help="d=3: scan all four sign quadrants")


def _add_operator(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--trivial", action="store_true", help="operator with sigma = {1}")
    g.add_argument("--sigma", type=_int_list, help="multipliers, e.g. 1,2,3,7 (rho solved for --band)")
    g.add_argument("--operator", help="JSON file with {kappa, sigma, rho}")
    p.add_argument("--band", type=int, help="band index n: interpolate on (E_n, E_{n-1})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvmourre", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help=f"key = value defaults file (env {CONFIG_ENV})")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out", help="output file (default stdout)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("thresholds", help="solve a family for n = 1..n_max (JSON lines)")
    p.add_argument("--family", required=True,
                   choices=["j2", "f", "well-dec", "well-inc", "alignment"])
    p.add_argument("--kappa", type=_kappa, required=True)
    p.add_argument("--n-max", dest="n_max", type=int, default=8)
    p.add_argument("--well", type=int, default=1)
    p.add_argument("--schedule", help="alignment: documented schedule name (default: all for kappa)")

    p = sub.add_parser("interpolate", help="solve the band system for rho")
    p.add_argument("--kappa", type=_kappa, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma", type=_int_list)
    p.add_argument("--search", type=_pool, help="candidate pool '1,2,3,4;1,2,3,5;...'")
    p.add_argument("--certify", action="store_true", help="scan the band and fail with 4 if not positive")
    _add_grid(p)

    p = sub.add_parser("scan", help="min G per energy (CSV)")
    p.add_argument("--kappa", type=_kappa, required=True)
    _add_operator(p)
    p.add_argument("--energies", type=lambda s: [float(t) for t in s.split(",")])
    p.add_argument("--window", type=lambda s: tuple(float(t) for t in s.split(",")))
    p.add_argument("--require-positive", dest="require_positive", action="store_true")
    _add_grid(p)

    p = sub.add_parser("bands", help="extract bands (CSV)")
    p.add_argument("--kappa", type=_kappa, required=True)
    _add_operator(p)
    p.add_argument("--window", type=lambda s: tuple(float(t) for t in s.split(",")),
                   default=(1e-4, 1 - 1e-4))
    p.add_argument("--sign-mode", dest="sign_mode", choices=["positive", "definite"],
                   help="definite also accepts uniformly negative runs (default for --trivial)")
    _add_grid(p)

    p = sub.add_parser("profile", help="G along the energy surface (CSV)")
    p.add_argument("--kappa", type=_kappa, required=True)
    _add_operator(p)
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--points", type=int, default=401)
    p.add_argument("--dim", type=_dim, default=2)

    p = sub.add_parser("converge", help="log-log regression of E_2n - cos^2(pi/kappa)")
    p.add_argument("--kappa", type=int, choices=[4, 6], required=True)
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--points-csv", dest="points_csv", help="also write the points as CSV")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    path = known.config or os.environ.get(CONFIG_ENV)
    if not path:
        return
    if not os.path.exists(path):
        raise UsageError(f"config file not found: {path}")
    values = read_config(path)
    # config values pass through the same converters as flags
    for action in parser._subparsers._group_actions[0].choices.values():
        conv = {a.dest: a for a in action._actions}
        defaults = {}
        for key, raw in values.items():
            a = conv.get(key)
            if a is None:
                continue
            if a.type is not None:
                defaults[key] = a.type(raw)
            elif isinstance(a, argparse._StoreTrueAction):
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            else:
                defaults[key] = raw
            # a required option supplied by the config no longer has to be typed
            a.required = False
        action.set_defaults(**defaults)
    top = {a.dest: a for a in parser._actions}
    for key in ("jobs", "out"):
        if key in values:
            parser.set_defaults(**{key: top[key].type(values[key]) if top[key].type else values[key]})


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _scan_config(a) -> ScanConfig:
    return ScanConfig(n_E=a.n_E, n_x=a.n_x, n_y=getattr(a, "n_y", ScanConfig.n_y),
                      tol_sign=a.tol_sign, full_domain=getattr(a, "full_domain", False))


def _operator(a) -> ConjugateOperator:
    if a.operator:
        with open(a.operator) as fh:
            op = ConjugateOperator.from_dict(json.load(fh))
        if op.kappa != a.kappa:
            raise UsageError("operator file kappa differs from --kappa")
        return op
    if a.trivial:
        return ConjugateOperator.trivial(a.kappa)
    if a.band is None:
        if a.sigma:
            raise UsageError("--sigma needs --band to determine the coefficients")
        raise UsageError("choose --trivial, --operator, or --band [--sigma]")
    sigma = a.sigma or sigma_table(a.kappa, a.band)
    left, right = band_endpoints(a.kappa, a.band)
    return solve_rho(build_system(a.kappa, a.band, left, right, sigma))


def cmd_thresholds(a, out) -> int:
    failed = False
    if a.family == "alignment":
        table = load_alignment_schedules()
        names = [a.schedule] if a.schedule else [k for k, v in table.items()
                                                   if v["schedule"].kappa == a.kappa]
        if a.schedule and a.schedule not in table:
            raise UsageError(f"unknown schedule {a.schedule}")
        for name in names:
            try:
                rec = solve_documented_alignment(name).to_dict()
                rec["schedule"] = name
            except (NoConvergence, ScheduleInfeasible, SingularSystem) as exc:
                rec, failed = {"schedule": name, "error": str(exc)}, True
            out.write(json.dumps(rec) + "\n")
        return EXIT_NUMERIC if failed else EXIT_OK
    for n in range(1, a.n_max + 1):
        try:
            if a.family == "j2":
                sol = solve_J2(a.kappa, n)
            elif a.family == "f":
                sol = solve_F(a.kappa, n)
            else:
                sol = solve_well(a.kappa, a.well, n,
                                 "Increasing" if a.family == "well-inc" else "Decreasing")
            rec = sol.to_dict()
        except ConfigError:
            raise
        except MourreError as exc:
            rec, failed = {"kappa": a.kappa, "n": n, "family": a.family, "error": str(exc)}, True
        out.write(json.dumps(rec) + "\n")
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_interpolate(a, out) -> int:
    cfg = _scan_config(a)
    if a.search:
        try:
            sigma, op, report = search_sigma(a.kappa, a.n, a.search, cfg, jobs=a.jobs)
        except NoValidSigma as exc:
            for s, reason in exc.reasons:
                out.write(json.dumps({"sigma": list(s), "accepted": False, "reason": reason}) + "\n")
            return EXIT_NEGATIVE
        rec = op.to_dict()
        rec["accepted"] = True
        rec["min_interior_G"] = min(report.min_G)
        out.write(json.dumps(rec) + "\n")
        return EXIT_OK
    sigma = a.sigma or sigma_table(a.kappa, a.n)
    left, right = band_endpoints(a.kappa, a.n)
    system = build_system(a.kappa, a.n, left, right, sigma)
    op = solve_rho(system)
    rec = op.to_dict()
    rec["band"] = [left.energy, right.energy]
    rec["rank"] = system.rank_estimate
    rec["max_constraint_defect"] = max(constraint_defects(system, op))
    code = EXIT_OK
    if a.certify:
        report = certify_band(op, left.energy, right.energy, cfg, jobs=a.jobs)
        rec["min_interior_G"] = min(report.min_G)
        rec["certified"] = report.certified
        if report.witness is not None:
            E, x, v = report.witness
            rec["witness"] = {"E": E, "point": x, "G": v}
            code = EXIT_NEGATIVE
    out.write(json.dumps(rec) + "\n")
    return code


def cmd_scan(a, out) -> int:
    op = _operator(a)
    cfg = _scan_config(a)
    if a.energies:
        energies = a.energies
    else:
        lo, hi = a.window or (1e-4, 1 - 1e-4)
        energies = [lo + (hi - lo) * i / (cfg.n_E - 1) for i in range(cfg.n_E)]
    res = scan_energies(op, energies, a.dim, cfg, a.jobs)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["E", "min_G", "argmin_x"] + (["argmin_y"] if a.dim == 3 else []))
    negative = False
    for E, (v, arg) in zip(energies, res):
        point = [arg] if a.dim == 2 else list(arg)
        w.writerow([repr(E), repr(v)] + [repr(p) for p in point])
        negative |= v <= cfg.tol_sign
    return EXIT_NEGATIVE if (a.require_positive and negative) else EXIT_OK


def cmd_bands(a, out) -> int:
    op = _operator(a)
    cfg = _scan_config(a)
    mode = a.sign_mode or ("definite" if a.trivial else "positive")
    report = find_bands(op, a.dim, tuple(a.window), cfg, a.jobs, definite=(mode == "definite"))
    cols = ["kappa", "dim", "sigma", "left", "right", "min_interior_G"]
    w = csv.DictWriter(out, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in report.bands_rows():
        w.writerow(row)
    return EXIT_OK


def cmd_profile(a, out) -> int:
    op = _operator(a)
    if not 0 < abs(a.energy) < 1:
        raise UsageError("energy must satisfy 0 < |E| < 1")
    emit_profile(op, a.energy, out, n_x=a.points, n_y=a.points if a.dim == 3 else None)
    return EXIT_OK


def cmd_converge(a, out) -> int:
    fit = convergence_study(a.kappa, a.N)
    out.write(json.dumps({"kappa": a.kappa, "N": a.N, "slope": fit.slope,
                          "intercept": fit.intercept}) + "\n")
    if a.points_csv:
        with open(a.points_csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["log_n", "log_gap"])
            for p in fit.points:
                w.writerow([repr(p[0]), repr(p[1])])
    return EXIT_OK


COMMANDS = {"thresholds": cmd_thresholds, "interpolate": cmd_interpolate, "scan": cmd_scan,
            "bands": cmd_bands, "profile": cmd_profile, "converge": cmd_converge}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (UsageError, argparse.ArgumentTypeError, ValueError) as exc:
        print(f"mvmourre: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        with _sink(args.out) as out:
            return COMMANDS[args.command](args, out)
    except (UsageError, ConfigError, DimensionMismatch, KeyError) as exc:
        print(f"mvmourre: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoConvergence, RankDeficient, SingularSystem, MourreError) as exc:
        print(f"mvmourre: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
