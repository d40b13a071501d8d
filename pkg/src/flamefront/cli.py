"""Command-line interface: ``flamefront {solve,sweep,profile,compare-asymptotics,phase}``.

Exit codes: 0 success, 1 usage or parameter error, 2 numerical or
validation failure.  Tables are CSV with a header row; lines starting with
``#`` carry metadata.  Numbers are printed with 12 significant digits.

Any subcommand accepts ``--config FILE`` holding ``key = value`` lines that
mirror the long flags (``theta-grid = 0.1:0.9:5``).  Flags given on the
command line override the file.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import asymptotics
from .front_solver import (DEFAULT_SIGMA_TOL, BracketError, reconstruct_profiles,
                           solve_front, trajectory_for, validate_front)
from .phase_portrait import angle_monotonicity_report, to_polar
from .profile_ode import (ALPHA_MAX, ALPHA_MIN, ConsistencyError, IntegrationError,
                          ModelParams, ParameterError)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2

DEFAULT_THETA_GRID = "0.25,0.5,0.75"
DEFAULT_LAMBDA_GRID = "0.2,1,5"
DEFAULT_ALPHA_GRID = "0.25,0.5,0.75"

NUMERIC_ERRORS = (IntegrationError, ConsistencyError, BracketError, ArithmeticError,
                  RuntimeError)


class UsageError(Exception):
    """Bad command line; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class SweepRecord:
    theta: float
    lambda_: float
    alpha: float
    sigma_star: float
    c_star: float
    r_star: float
    a_coef: float
    res_ign: float
    res_flux: float
    res_ode: float
    res_c_identity: float
    res_theta_identity: float
    wall_time_ms: float

    @classmethod
    def header(cls) -> list[str]:
        return [f.name.rstrip("_") for f in fields(cls)]

    def values(self) -> list[float]:
        return list(asdict(self).values())

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.header(), self.values()))

    @property
    def residual(self) -> float:
        return max(self.res_ign, self.res_flux, self.res_ode,
                   self.res_c_identity, self.res_theta_identity)

    @property
    def failed(self) -> bool:
        return math.isnan(self.c_star)


# formatting ---------------------------------------------------------------

def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, np.floating):
        return _json_value(float(value))
    return value


def write_table(out, header, rows, comments=(), fmt_name="csv"):
    """Write ``rows`` as CSV (with ``#`` comments) or as a JSON object."""
    if fmt_name == "json":
        doc = {"columns": list(header),
               "rows": [[_json_value(v) for v in row] for row in rows],
               "meta": [c for c in comments]}
        json.dump(doc, out, indent=1)
        out.write("\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    for line in comments:
        out.write(f"# {line}\n")


# argument helpers ---------------------------------------------------------

def parse_grid(text: str, name: str) -> list[float]:
    """Comma list ``a,b,c`` or inclusive range ``start:stop:count``."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError
            values = np.linspace(start, stop, count).tolist()
        else:
            values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"malformed --{name}: {text!r} "
                         "(expected a,b,c or start:stop:count)") from None
    if not values:
        raise UsageError(f"--{name} is empty")
    return values


def read_config(path: str) -> list[str]:
    """Turn ``key = value`` lines into ``--key value`` tokens."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from None
    tokens = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "yes", "on"):
            tokens.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            tokens.extend([flag, value])
    return tokens


def _expand_config(argv: list[str]) -> list[str]:
    """Splice config-file tokens in right after the subcommand so flags win."""
    if not argv:
        return argv
    out = list(argv)
    config_tokens = []
    i = 0
    while i < len(out):
        tok = out[i]
        if tok == "--config":
            if i + 1 >= len(out):
                raise UsageError("--config needs a file path")
            config_tokens.extend(read_config(out[i + 1]))
            del out[i:i + 2]
        elif tok.startswith("--config="):
            config_tokens.extend(read_config(tok.split("=", 1)[1]))
            del out[i]
        else:
            i += 1
    if not config_tokens:
        return out
    return out[:1] + config_tokens + out[1:]


def _add_model_flags(p, *, theta=True):
    if theta:
        p.add_argument("--theta", type=float, required=True, help="ignition temperature in (0,1)")
    p.add_argument("--lambda", dest="lam", type=float, required=True,
                   help="inverse Lewis number (> 0)")
    p.add_argument("--alpha", type=float, required=True,
                   help=f"reaction order, numerically in [{ALPHA_MIN}, {ALPHA_MAX}]")
    _add_tolerance_flags(p)


def _add_tolerance_flags(p):
    p.add_argument("--tol", type=float, default=DEFAULT_SIGMA_TOL,
                   help="relative bisection tolerance on sigma* (default %(default)g)")
    p.add_argument("--rel-tol", type=float, default=1e-10, help="integrator rtol")
    p.add_argument("--abs-tol", type=float, default=1e-12, help="integrator atol")


def _add_output_flags(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--config", default=None, help="key = value file mirroring flags")


def _check_model(args, *, theta=True):
    if theta and not 0.0 < args.theta < 1.0:
        raise ParameterError(f"--theta: theta must lie in (0,1), got {args.theta:g}")
    if not (math.isfinite(args.lam) and args.lam > 0):
        raise ParameterError(f"--lambda: lambda must be positive, got {args.lam:g}")
    if not 0.0 < args.alpha < 1.0:
        raise ParameterError(f"--alpha: alpha must lie in (0,1), got {args.alpha:g}")
    if args.alpha < ALPHA_MIN:
        raise ParameterError(
            f"--alpha: {args.alpha:g} is below {ALPHA_MIN:g}; use "
            "`flamefront compare-asymptotics --regimes alpha-zero` (asymptotics alpha-zero)")
    if args.alpha > ALPHA_MAX:
        raise ParameterError(
            f"--alpha: {args.alpha:g} is above {ALPHA_MAX:g}; use "
            "`flamefront compare-asymptotics --regimes alpha-one` (asymptotics alpha-one)")
    for name in ("tol", "rel_tol", "abs_tol"):
        if not getattr(args, name) > 0:
            raise ParameterError(f"--{name.replace('_', '-')} must be positive")


def _params(args, lam=None, alpha=None) -> ModelParams:
    return ModelParams(lam=args.lam if lam is None else lam,
                       alpha=args.alpha if alpha is None else alpha,
                       rel_tol=args.rel_tol, abs_tol=args.abs_tol)


# solving ------------------------------------------------------------------

def solve_record(theta: float, lam: float, alpha: float, *, tol: float = DEFAULT_SIGMA_TOL,
                 rel_tol: float = 1e-10, abs_tol: float = 1e-12, points: int = 64,
                 timing: bool = False) -> SweepRecord:
    """Solve and validate one parameter tuple."""
    start = time.perf_counter()
    params = ModelParams(lam=lam, alpha=alpha, rel_tol=rel_tol, abs_tol=abs_tol)
    front = solve_front(params, theta, tol)
    report = validate_front(front, reconstruct_profiles(front, n_points=points))
    elapsed = (time.perf_counter() - start) * 1e3 if timing else 0.0
    return SweepRecord(theta, lam, alpha, front.sigma_star, front.c_star, front.r_star,
                       front.a_coef, *report.as_dict().values(), wall_time_ms=elapsed)


def _failed_record(theta, lam, alpha) -> SweepRecord:
    nan = math.nan
    return SweepRecord(theta, lam, alpha, nan, nan, nan, nan,
                       math.inf, math.inf, math.inf, math.inf, math.inf, 0.0)


def _solve_group(tasks, opts):
    """Worker entry: solve tuples sharing ``(lambda, alpha)`` so one trajectory serves all."""
    out = []
    for index, (theta, lam, alpha) in tasks:
        try:
            rec = solve_record(theta, lam, alpha, **opts)
            err = None
        except (ParameterError, *NUMERIC_ERRORS) as exc:
            rec, err = _failed_record(theta, lam, alpha), f"{type(exc).__name__}: {exc}"
        out.append((index, rec, err))
    return out


def monotonicity_violations(records: list[SweepRecord], field_name: str, along: str,
                            direction: int = -1, rtol: float = 1e-9) -> list[str]:
    """Grid lines along ``along`` where ``field_name`` moves against ``direction``.

    ``direction=-1`` expects a non-increasing quantity, ``+1`` non-decreasing.
    Increments smaller than ``rtol`` relative are ignored.
    """
    keys = ("theta", "lambda_", "alpha")
    others = [k for k in keys if k != along]
    lines = {}
    for rec in records:
        if rec.failed:
            continue
        lines.setdefault(tuple(getattr(rec, k) for k in others), []).append(rec)
    found = []
    for key, recs in sorted(lines.items()):
        recs.sort(key=lambda r: getattr(r, along))
        for a, b in zip(recs, recs[1:]):
            va, vb = getattr(a, field_name), getattr(b, field_name)
            if direction * (vb - va) < -rtol * max(abs(va), abs(vb)):
                where = ", ".join(f"{k.rstrip('_')}={fmt(v)}" for k, v in zip(others, key))
                found.append(f"{field_name} along {along.rstrip('_')} at {where}: "
                             f"{fmt(getattr(a, along))}->{fmt(getattr(b, along))} "
                             f"gives {fmt(va)}->{fmt(vb)}")
    return found


def _open_out(path):
    if path is None:
        return sys.stdout, False
    try:
        return open(path, "w", encoding="utf-8", newline=""), True
    except OSError as exc:
        raise UsageError(f"cannot open --out {path!r}: {exc}") from None


def _emit(args, header, rows, comments=()):
    out, close = _open_out(args.out)
    try:
        write_table(out, header, rows, comments, args.format)
    finally:
        if close:
            out.close()


# subcommands --------------------------------------------------------------

def cmd_solve(args) -> int:
    _check_model(args)
    rec = solve_record(args.theta, args.lam, args.alpha, tol=args.tol, rel_tol=args.rel_tol,
                       abs_tol=args.abs_tol, points=args.points, timing=args.timing)
    ok = rec.residual < args.max_residual
    comments = [f"max_residual = {fmt(rec.residual)} (limit {fmt(args.max_residual)})",
                "status = " + ("ok" if ok else "residual above limit")]
    _emit(args, SweepRecord.header(), [rec.values()], comments)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_sweep(args) -> int:
    thetas = parse_grid(args.theta_grid, "theta-grid")
    lams = parse_grid(args.lambda_grid, "lambda-grid")
    alphas = parse_grid(args.alpha_grid, "alpha-grid")
    for t in thetas:
        if not 0 < t < 1:
            raise ParameterError(f"--theta-grid: theta must lie in (0,1), got {t:g}")
    for lam in lams:
        if not lam > 0:
            raise ParameterError(f"--lambda-grid: lambda must be positive, got {lam:g}")
    for a in alphas:
        if not ALPHA_MIN <= a <= ALPHA_MAX:
            raise ParameterError(f"--alpha-grid: alpha must lie in [{ALPHA_MIN}, {ALPHA_MAX}], "
                                 f"got {a:g}")
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")

    tuples = list(itertools.product(thetas, lams, alphas))
    groups = {}
    for index, (theta, lam, alpha) in enumerate(tuples):
        groups.setdefault((lam, alpha), []).append((index, (theta, lam, alpha)))
    opts = dict(tol=args.tol, rel_tol=args.rel_tol, abs_tol=args.abs_tol,
                points=args.points, timing=args.timing)

    results = [None] * len(tuples)
    errors = []
    if args.jobs == 1:
        batches = [_solve_group(g, opts) for g in groups.values()]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_solve_group, g, opts) for g in groups.values()]
            batches = [f.result() for f in futures]
    for batch in batches:
        for index, rec, err in batch:
            results[index] = rec
            if err is not None:
                errors.append(f"failed theta={fmt(rec.theta)} lambda={fmt(rec.lambda_)} "
                              f"alpha={fmt(rec.alpha)}: {err}")

    over = [r for r in results if not r.failed and r.residual >= args.max_residual]
    violations = (monotonicity_violations(results, "c_star", "theta")
                  + monotonicity_violations(results, "c_star", "lambda_")
                  + monotonicity_violations(results, "c_star", "alpha"))
    comments = [f"tuples = {len(results)}",
                f"failures = {len(errors)}",
                f"residual_above_limit = {len(over)} (limit {fmt(args.max_residual)})",
                f"c_star_monotonicity_violations = {len(violations)}"]
    comments += violations + errors
    _emit(args, SweepRecord.header(), [r.values() for r in results], comments)
    return EXIT_NUMERIC if errors or over else EXIT_OK


def cmd_profile(args) -> int:
    _check_model(args)
    if args.points < 16:
        raise ParameterError(f"--points must be at least 16, got {args.points}")
    front = solve_front(_params(args), args.theta, args.tol)
    if args.xi_min is not None and not args.xi_min < -front.r_star:
        raise ParameterError(f"--xi-min must be below the ignition point {fmt(-front.r_star)}")
    table = reconstruct_profiles(front, args.xi_min, args.points)
    report = validate_front(front, table)
    comments = [f"xi_ign = {fmt(table.xi_ign)}",
                f"xi_tr = {fmt(table.xi_tr)}",
                "for xi > xi_tr: u = 1, v = 0",
                f"c_star = {fmt(front.c_star)}",
                f"r_star = {fmt(front.r_star)}",
                f"a_coef = {fmt(front.a_coef)}",
                f"max_residual = {fmt(report.max())}"]
    _emit(args, ["xi", "u", "v", "uprime", "vprime"], table.rows, comments)
    return EXIT_OK if report.max() < args.max_residual else EXIT_NUMERIC


_REGIME_ALIASES = {r.value.replace("_", "-"): r for r in asymptotics.AsymptoticRegime}
_FRONT_REGIMES = {
    # regime: (applicability test, band, description of the domain)
    asymptotics.AsymptoticRegime.THETA_NEAR_ONE: (lambda a: a.theta >= 0.9, 0.05, "theta >= 0.9"),
    asymptotics.AsymptoticRegime.THETA_SMALL: (lambda a: a.theta <= 0.01, 0.10, "theta <= 0.01"),
    asymptotics.AsymptoticRegime.ALPHA_ZERO: (lambda a: a.alpha <= 0.01, 0.03, "alpha <= 0.01"),
    asymptotics.AsymptoticRegime.ALPHA_ONE: (lambda a: a.alpha >= 0.99, 0.05, "alpha >= 0.99"),
}


def _parse_regimes(text: str):
    out = []
    for name in (s.strip() for s in text.split(",")):
        if not name:
            continue
        regime = _REGIME_ALIASES.get(name.replace("_", "-"))
        if regime is None or regime not in _FRONT_REGIMES:
            valid = ", ".join(r.value.replace("_", "-") for r in _FRONT_REGIMES)
            raise UsageError(f"unknown regime {name!r}; choose from {valid}")
        out.append(regime)
    if not out:
        raise UsageError("--regimes is empty")
    return out


def _rel_err(numeric: float, reference: float) -> float:
    if not (math.isfinite(numeric) and math.isfinite(reference)):
        return math.nan
    return abs(numeric - reference) / abs(reference)


def cmd_compare_asymptotics(args) -> int:
    regimes = _parse_regimes(args.regimes)
    if not 0.0 < args.theta < 1.0:
        raise ParameterError(f"--theta: theta must lie in (0,1), got {args.theta:g}")
    if not args.lam > 0:
        raise ParameterError(f"--lambda: lambda must be positive, got {args.lam:g}")
    if not 0.0 < args.alpha < 1.0:
        raise ParameterError(f"--alpha: alpha must lie in (0,1), got {args.alpha:g}")
    for regime in regimes:
        applies, _, domain = _FRONT_REGIMES[regime]
        if not applies(args):
            raise ParameterError(f"regime {regime.value} needs {domain}")

    comments = []
    if ALPHA_MIN <= args.alpha <= ALPHA_MAX:
        front = solve_front(_params(args), args.theta, args.tol)
        c_num, r_num = front.c_star, front.r_star
    else:
        c_num = r_num = math.nan
        comments.append(f"numeric solve skipped: alpha outside [{ALPHA_MIN}, {ALPHA_MAX}]")

    rows = []
    failed = False
    for regime in regimes:
        _, band, _ = _FRONT_REGIMES[regime]
        c_ref, r_ref = asymptotics.closed_form_front(regime, args.theta, args.lam, args.alpha)
        for quantity, num, ref in (("c_star", c_num, c_ref), ("r_star", r_num, r_ref)):
            err = _rel_err(num, ref)
            within = not (err > band)
            failed |= not within
            rows.append([regime.value, quantity, num, ref, err, band, within])
    comments.append("status = " + ("ok" if not failed else "outside band"))
    _emit(args, ["regime", "quantity", "numeric", "asymptotic", "rel_err", "band", "within"],
          rows, comments)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_phase(args) -> int:
    _check_model(args, theta=False)
    reach = -abs(args.reach)
    if reach == 0:
        raise ParameterError("--reach must be nonzero")
    traj = trajectory_for(_params(args)).extend(reach)
    trace = to_polar(traj)
    report = angle_monotonicity_report(trace, args.angle_tol)
    comments = [f"reach = {fmt(traj.reach)}",
                f"seed_offset = {fmt(traj.seed_offset)}",
                f"max_angle_increment = {fmt(report.max_increment)} (tol {fmt(args.angle_tol)})",
                f"violations = {len(report.violations)}"]
    if report.t_location is not None:
        comments.append(f"worst_increment_at_t = {fmt(report.t_location)}")
    _emit(args, ["t", "q", "p", "r", "theta_angle"], trace.rows, comments)
    return EXIT_OK if report.ok else EXIT_NUMERIC


# entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flamefront",
                     description="Traveling fronts of ignition-temperature combustion "
                                 "with fractional reaction order.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one (theta, lambda, alpha) tuple")
    _add_model_flags(p)
    p.add_argument("--max-residual", type=float, default=1e-6)
    p.add_argument("--points", type=int, default=64, help="profile samples used for validation")
    p.add_argument("--timing", action="store_true", help="record wall time (breaks determinism)")
    _add_output_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="solve over a parameter grid",
                       description="Grids are comma lists or start:stop:count.  The defaults "
                                   "form a 3x3x3 grid; denser grids are up to the user.")
    p.add_argument("--theta-grid", default=DEFAULT_THETA_GRID)
    p.add_argument("--lambda-grid", default=DEFAULT_LAMBDA_GRID)
    p.add_argument("--alpha-grid", default=DEFAULT_ALPHA_GRID)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-residual", type=float, default=1e-6)
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--timing", action="store_true", help="record wall time (breaks determinism)")
    _add_tolerance_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("profile", help="sampled u, v profiles of one front")
    _add_model_flags(p)
    p.add_argument("--xi-min", type=float, default=None,
                   help="left end of the table (default -R - 5/c)")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--max-residual", type=float, default=1e-6)
    _add_output_flags(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("compare-asymptotics", help="solver against closed-form limits")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--regimes", required=True,
                   help="comma list of theta-near-one, theta-small, alpha-zero, alpha-one")
    _add_tolerance_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_compare_asymptotics)

    p = sub.add_parser("phase", help="polar-angle trace of the profile trajectory")
    _add_model_flags(p, theta=False)
    p.add_argument("--reach", type=float, default=400.0,
                   help="integrate out to x = -|reach| (default %(default)g)")
    p.add_argument("--angle-tol", type=float, default=1e-8)
    _add_output_flags(p)
    p.set_defaults(func=cmd_phase)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_expand_config(argv))
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
