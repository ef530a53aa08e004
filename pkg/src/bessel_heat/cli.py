"""Command-line front end: eval, table, validate and mc.

Exit codes: 0 success, 1 bad invocation, 2 validation failure. Errors in
the invocation itself go to stderr as one JSON line.
"""

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import kernels, montecarlo, validation
from .errors import DomainError
from .quadrature import QuadratureSpec

SEED_ENV = "BESSEL_HEAT_SEED"
METHODS = ("asymptotic", "exact-half", "hunt", "bracket", "mc", "envelope")
COLUMNS = ["mu", "a", "t", "x", "y", "method", "value", "lower", "upper",
           "regime", "error_scale"]
MC_COLUMNS = ["mu", "a", "t", "x0", "bin_lo", "bin_hi", "value", "std_err"]

# Built-in defaults; a --config file and then explicit flags override them.
DEFAULTS = {"rel_tol": 1e-10, "n": 2, "u_floor": 10.0, "paths": 200_000,
            "step": 2e-3, "seed": 0, "workers": 1, "bins": 64}
_CONFIG_TYPES = {"rel_tol": float, "n": int, "u_floor": float, "paths": int,
                 "step": float, "seed": int, "workers": int, "bins": int}


class SpecError(Exception):
    """Invalid invocation; reported on one line with exit status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise SpecError(message)


def _fail(kind, message, stream=None):
    line = json.dumps({"error": kind, "message": " ".join(str(message).split())})
    print(line, file=stream or sys.stderr)
    return 1


# --- configuration ------------------------------------------------------------

def read_config(path):
    """Parse a key=value file; blank lines and # comments are ignored."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise SpecError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _CONFIG_TYPES:
            raise SpecError(f"{path}:{lineno}: expected one of "
                            f"{sorted(_CONFIG_TYPES)} as key=value")
        try:
            out[key] = _CONFIG_TYPES[key](value.strip())
        except ValueError:
            raise SpecError(f"{path}:{lineno}: bad value for {key}") from None
    return out


def resolve_options(args):
    opts = dict(DEFAULTS)
    env_seed = os.environ.get(SEED_ENV)
    if env_seed:
        try:
            opts["seed"] = int(env_seed)
        except ValueError:
            raise SpecError(f"{SEED_ENV} must be an integer") from None
    if args.config:
        opts.update(read_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    if not opts["rel_tol"] > 0:
        raise SpecError("rel_tol must be positive")
    if opts["paths"] < 1 or not opts["step"] > 0 or opts["workers"] < 1 or opts["bins"] < 1:
        raise SpecError("paths, step, workers and bins must be positive")
    return opts


# --- grids --------------------------------------------------------------------

def parse_grid(text):
    """``v``, ``v1,v2,...`` or ``lo:hi:count[:log]``."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ("log", "lin")):
                raise ValueError
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError
            if len(parts) == 4 and parts[3] == "log":
                if lo <= 0 or hi <= 0:
                    raise SpecError(f"log grid needs positive ends: {text!r}")
                values = np.geomspace(lo, hi, count)
            else:
                values = np.linspace(lo, hi, count)
            return [float(v) for v in values]
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise SpecError(f"bad grid {text!r}; use v, v1,v2 or lo:hi:count[:log]") from None
    if not values or not all(math.isfinite(v) for v in values):
        raise SpecError(f"bad grid {text!r}")
    return values


# --- evaluation ---------------------------------------------------------------

def check_method(method, mu):
    if method not in METHODS:
        raise SpecError(f"unknown method {method!r}")
    if method in ("exact-half", "hunt") and mu != 0.5:
        raise SpecError(f"method {method} requires mu=0.5, got mu={mu!r}")
    if method == "bracket" and mu < 0:
        raise SpecError("method bracket requires mu >= 0")
    if method == "mc" and mu <= -1:
        raise SpecError("method mc requires mu > -1")


def _regime(mu, a, t, x, y, u_floor):
    try:
        return str(kernels.classify_regime(abs(mu), a, t, x, y, u_floor))
    except DomainError:
        return None


def evaluate(method, mu, a, t, x, y, opts):
    """One row as a dict with the output columns plus ``status``."""
    row = {"mu": mu, "a": a, "t": t, "x": x, "y": y, "method": method,
           "value": None, "lower": None, "upper": None,
           "regime": _regime(mu, a, t, x, y, opts["u_floor"]),
           "error_scale": None, "status": "ok"}
    try:
        if method == "asymptotic":
            try:
                ev = kernels.evaluate_asymptotic(mu, a, t, x, y, n=opts["n"],
                                                 u_floor=opts["u_floor"])
            except DomainError as exc:
                if "NonAsymptotic" not in str(exc):
                    raise
                row["status"] = "NonAsymptotic"
                return row
            row.update(value=ev.value, error_scale=ev.error_scale, regime=str(ev.regime))
        elif method == "exact-half":
            row["value"] = kernels.exact_half_kernel(a, t, x, y)
        elif method == "hunt":
            spec = QuadratureSpec(rel_tol=opts["rel_tol"])
            ev = kernels.hunt_kernel_eval(mu, a, t, x, y, kernels.EXACT_HALF, spec)
            row.update(value=ev.value, error_scale=ev.error_bound)
            if ev.clamped:
                row["status"] = "Clamped"
        elif method == "bracket":
            br = kernels.bracket_kernel(mu, a, t, x, y)
            row.update(value=br.midpoint, lower=br.lower, upper=br.upper)
        elif method == "envelope":
            row["value"] = kernels.envelope_sharp(mu, a, t, x, y)
        elif method == "mc":
            cfg = montecarlo.McConfig(paths=opts["paths"], step=opts["step"],
                                      seed=opts["seed"])
            est = montecarlo.estimate_hunt_mc(mu, x, a, t, [y], cfg)
            v, se = float(est.values[0]), float(est.std_errors[0])
            row.update(value=v, lower=v - 3.0 * se, upper=v + 3.0 * se, error_scale=se)
        else:
            raise SpecError(f"unknown method {method!r}")
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        row.update(value=None, lower=None, upper=None, error_scale=None,
                   status=type(exc).__name__)
    return row


def _evaluate_job(job):
    return evaluate(*job)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


# --- commands -----------------------------------------------------------------

def cmd_eval(args, opts, out):
    check_method(args.method, args.mu)
    try:
        kernels.KernelQuery(args.a, args.t, args.x, args.y)
    except DomainError as exc:
        raise SpecError(str(exc)) from None
    row = evaluate(args.method, args.mu, args.a, args.t, args.x, args.y, opts)
    out.write(json.dumps(row) + "\n")
    return 0


def table_rows(method, grids, opts):
    jobs = [(method,) + combo + (opts,) for combo in itertools.product(*grids)]
    if opts["workers"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=opts["workers"]) as pool:
            return list(pool.map(_evaluate_job, jobs))  # map keeps grid order
    return [_evaluate_job(j) for j in jobs]


def cmd_table(args, opts, out):
    grids = [parse_grid(g) for g in (args.mu, args.a, args.t, args.x, args.y)]
    for mu in grids[0]:
        check_method(args.method, mu)
    rows = table_rows(args.method, grids, opts)
    cols = COLUMNS + (["status"] if args.with_status else [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in cols])
    out.write(buf.getvalue())
    return 0


def cmd_validate(args, opts, out):
    names = list(validation.SUITES) if args.suite == "all" else [args.suite]
    reports = [validation.run_suite(n) for n in names]
    passed = all(r["passed"] for r in reports)
    lines = []
    for r in reports:
        lines.append(f"suite {r['suite']}: {'PASS' if r['passed'] else 'FAIL'}")
        for c in r["checks"]:
            mark = "PASS" if c["passed"] else "FAIL"
            lines.append(f"  {mark}  {c['name']}: measured {c['measured']:.3e} "
                         f"(limit {c['threshold']:.3e})")
    if args.format == "json":
        out.write(json.dumps({"passed": passed, "suites": reports}, indent=2) + "\n")
    else:
        out.write("\n".join(lines) + "\n")
    return 0 if passed else 2


def cmd_mc(args, opts, out):
    if args.edges:
        edges = parse_grid(args.edges)
    elif args.target == "kernel":
        edges = montecarlo.default_kernel_bins(args.x0, args.a, args.t, opts["bins"])
    else:
        edges = montecarlo.default_hitting_bins(args.t, opts["bins"])
    try:
        cfg = montecarlo.McConfig(paths=opts["paths"], step=opts["step"], seed=opts["seed"],
                                  scheme=args.scheme, bridge_correction=not args.no_bridge,
                                  bins=edges, workers=opts["workers"])
        if args.target == "kernel":
            est = montecarlo.estimate_kernel_mc(args.mu, args.x0, args.a, args.t, cfg)
        else:
            est = montecarlo.estimate_hitting_mc(args.mu, args.x0, args.a, args.t, cfg)
    except (DomainError, montecarlo.BudgetExceeded) as exc:
        raise SpecError(str(exc)) from None
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MC_COLUMNS)
    for lo, hi, v, se in zip(est.bin_lo, est.bin_hi, est.values, est.std_errors):
        writer.writerow([_fmt(float(x)) for x in (args.mu, args.a, args.t, args.x0, lo, hi, v, se)])
    out.write(buf.getvalue())
    return 0


# --- parser -------------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="key=value file with default settings")
    p.add_argument("--output", "-o", help="write here instead of stdout")
    p.add_argument("--rel-tol", dest="rel_tol", type=float, help="quadrature tolerance")
    p.add_argument("--n", type=int, help="expansion order")
    p.add_argument("--u-floor", dest="u_floor", type=float)
    p.add_argument("--paths", type=int)
    p.add_argument("--step", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)


def build_parser():
    parser = _Parser(prog="bessel-heat",
                     description="Killed Bessel heat kernels: evaluation, tables, checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate one point, print a JSON record")
    for name in ("mu", "a", "t", "x", "y"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--method", choices=METHODS, default="asymptotic")
    _common(p)

    p = sub.add_parser("table", help="evaluate a parameter grid, write CSV")
    for name in ("mu", "a", "t", "x", "y"):
        p.add_argument(f"--{name}", required=True, help="v, v1,v2 or lo:hi:count[:log]")
    p.add_argument("--method", choices=METHODS, default="asymptotic")
    p.add_argument("--with-status", action="store_true", help="append a status column")
    _common(p)

    p = sub.add_parser("validate", help="run a named self-check suite")
    p.add_argument("--suite", required=True, choices=list(validation.SUITES) + ["all"])
    p.add_argument("--format", choices=("text", "json"), default="text")
    _common(p)

    p = sub.add_parser("mc", help="Monte Carlo density estimate, write CSV")
    for name in ("mu", "a", "t", "x0"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--target", choices=("kernel", "hitting"), default="kernel")
    p.add_argument("--scheme", choices=[s.value for s in montecarlo.Scheme],
                   default=montecarlo.Scheme.EXACT.value)
    p.add_argument("--no-bridge", action="store_true")
    p.add_argument("--bins", type=int, help="number of default bins")
    p.add_argument("--edges", help="explicit bin edges as a grid")
    _common(p)
    return parser


COMMANDS = {"eval": cmd_eval, "table": cmd_table, "validate": cmd_validate, "mc": cmd_mc}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        opts = resolve_options(args)
        buf = io.StringIO()
        status = COMMANDS[args.command](args, opts, buf)
    except SpecError as exc:
        return _fail("SpecError", exc)
    except DomainError as exc:
        return _fail("DomainError", exc)
    text = buf.getvalue()
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
