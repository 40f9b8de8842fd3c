"""
Command-line front end: ``shs analyze | spectrum | harte | example | verify``.

Every invocation writes exactly one JSON document to stdout.  Errors go to
stderr as a one-line JSON object and are signalled by the exit status:

    0  success
    1  ``verify`` found failing checks
    2  unreadable input or bad arguments
    3  operator is not a member of B_{A^{1/2}}(H)
    4  metric validation failed
    5  operator tuple does not commute
"""
import argparse
import csv
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .errors import (
    CostGuard,
    DimensionMismatch,
    NotAMember,
    NotCommuting,
    NotHermitian,
    NotPSD,
    SemiHilbertError,
    TooSmall,
    UnknownExample,
    ZeroMetric,
)
from .harte import DEFAULT_HARTE_NMAX, check_thm46, harte_report, make_tuple
from .metric import new_metric
from .opspace import (
    DEFAULT_TOL_MEMBER,
    a_norm,
    a_numerical_radius,
    a_op_norm,
    gamma_a,
    gamma_a_direct,
    is_a_isometry,
    is_a_unitary,
    try_lift,
)
from .propcheck import CHECKS, SuiteConfig, verify_suite
from .spectrum import DEFAULT_GELFAND_NMAX, r_a_exact, thm319
from .truncation import EXAMPLES, trend_report

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NOT_MEMBER = 3
EXIT_METRIC = 4
EXIT_NOT_COMMUTING = 5

TOL_ENV = "SHS_TOL_DEFAULT"
BUILTIN_TOL = DEFAULT_TOL_MEMBER


class InputError(Exception):
    """Unreadable or malformed input file."""


class MetricError(Exception):
    """The metric file does not describe a valid positive semidefinite matrix."""


def default_tol():
    """Global default tolerance, overridable through ``SHS_TOL_DEFAULT``."""
    raw = os.environ.get(TOL_ENV)
    if raw is None or raw == "":
        return BUILTIN_TOL
    try:
        value = float(raw)
    except ValueError:
        raise InputError(f"{TOL_ENV}={raw!r} is not a number")
    if not math.isfinite(value) or value < 0:
        raise InputError(f"{TOL_ENV} must be a finite non-negative number")
    return value


# ---------------------------------------------------------------------------
# matrix files


def parse_matrix(text):
    """
    Parse a MatrixFile JSON document.

    Returns
    -------
    (ndarray, str or None)
        the complex matrix and the optional ``name``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}")
    if not isinstance(doc, dict):
        raise InputError("matrix file must be a JSON object")
    for key in ("rows", "cols", "data"):
        if key not in doc:
            raise InputError(f"matrix file lacks {key!r}")
    rows, cols, data = doc["rows"], doc["cols"], doc["data"]
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 1 or cols < 1:
        raise InputError("rows and cols must be positive integers")
    if not isinstance(data, list) or len(data) != rows:
        raise InputError(f"data must hold {rows} rows")
    M = np.empty((rows, cols), np.complex128)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != cols:
            raise InputError(f"row {i} must hold {cols} entries")
        for j, entry in enumerate(row):
            if not (isinstance(entry, list) and len(entry) == 2
                    and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)):
                raise InputError(f"entry ({i}, {j}) must be a [re, im] pair of numbers")
            re, im = float(entry[0]), float(entry[1])
            if not (math.isfinite(re) and math.isfinite(im)):
                raise InputError(f"entry ({i}, {j}) is not finite")
            M[i, j] = complex(re, im)
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise InputError("name must be a string")
    return M, name


def format_matrix(M, name=None):
    """Canonical MatrixFile text: compact JSON, fixed key order, trailing newline."""
    M = np.atleast_2d(np.asarray(M, dtype=np.complex128))
    doc = {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "data": [[[float(z.real), float(z.imag)] for z in row] for row in M],
    }
    if name is not None:
        doc["name"] = name
    return json.dumps(doc, separators=(",", ":")) + "\n"


def read_matrix_file(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}")
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise InputError(f"{path} is not UTF-8")
    M, name = parse_matrix(text)
    return M, name, hashlib.sha256(raw).hexdigest()


def write_matrix_file(path, M, name=None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix(M, name))


# ---------------------------------------------------------------------------
# JSON helpers


def _num(x):
    if x is None:
        return None
    if isinstance(x, (complex, np.complexfloating)):
        z = complex(x)
        return [_num(z.real), _num(z.imag)]
    x = float(x)
    return x if math.isfinite(x) else None


def jsonable(obj):
    """Convert numpy scalars, arrays and complex numbers into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2:
            return json.loads(format_matrix(obj))
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, complex, np.floating, np.complexfloating)):
        return _num(obj)
    return obj


def _report(command, inputs, tolerances, results, residuals, warnings=(), seed=None):
    return {
        "command": command,
        "inputs": inputs,
        "tolerances": tolerances,
        "results": results,
        "residuals": residuals,
        "warnings": list(warnings),
        "version": __version__,
        "seed": seed,
    }


def _emit(doc, stream=None):
    stream = sys.stdout if stream is None else stream
    stream.write(json.dumps(jsonable(doc), allow_nan=False) + "\n")


def _fail(code, error, message, **extra):
    _emit({"error": error, "message": message, **extra}, sys.stderr)
    return code


# ---------------------------------------------------------------------------
# loading


def _load_metric(path):
    A, name, digest = read_matrix_file(path)
    try:
        metric = new_metric(A)
    except (NotPSD, NotHermitian, ZeroMetric, DimensionMismatch) as exc:
        raise MetricError(f"{type(exc).__name__}: {exc}")
    return metric, {"path": str(path), "sha256": digest, "name": name}


def _load_op(path, metric, tol):
    T, name, digest = read_matrix_file(path)
    if T.shape != (metric.n, metric.n):
        raise InputError(f"{path}: operator is {T.shape[0]}x{T.shape[1]}, metric is {metric.n}x{metric.n}")
    return try_lift(metric, T, tol), {"path": str(path), "sha256": digest, "name": name}


def _spectral_pair(op):
    """``r_A(T)`` and ``r_A(T^)``: printed with every analysis."""
    return {"r_A(T)": r_a_exact(op), "r_A(T_diamond)": r_a_exact(op.lift_diamond())}


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args):
    tol = args.tol
    metric, m_info = _load_metric(args.metric)
    op, t_info = _load_op(args.op, metric, tol)
    w = a_numerical_radius(op)
    g = gamma_a(op)
    g_direct = gamma_a_direct(op)
    iso = is_a_isometry(op, tol)
    uni = is_a_unitary(op, tol)
    results = {
        "member": True,
        "rank": metric.rank,
        "norm_a": a_op_norm(op),
        "norm_a_diamond": a_norm(metric, op.diamond),
        "numerical_radius_a": w,
        "gamma_a": g,
        "diamond": op.diamond,
        "sharp": op.sharp,
        "is_a_isometry": iso.holds,
        "is_a_unitary": uni.holds,
        **_spectral_pair(op),
    }
    residuals = {
        "membership": op.membership_residual,
        "metric_reconstruction": metric.residuals,
        "adjoint_certificates": op.certificates,
        "gamma_a_direct_deviation": abs(g - g_direct),
        "isometry": iso.residual,
        "unitary": uni.residual,
        "unitary_details": uni.details,
    }
    doc = _report("analyze", {"metric": m_info, "op": t_info},
                  {"tol": tol, "tol_rank": metric.tol_rank}, results, residuals)
    _emit(doc)
    return EXIT_OK


def _spectrum_results(op, tol, n_max):
    rep = thm319(op, tol, n_max)
    points = [
        {"value": p.value, "multiplicity": p.multiplicity, "sigma_min": p.sigma_min,
         "oracle_residual": p.oracle_residual}
        for p in rep.sigma_a
    ]
    results = {
        "sigma_a": points,
        "sup_sigma": rep.sup_sigma,
        "r_A(T)": rep.r_a_exact,
        "r_A(T_diamond)": rep.r_a_diamond_exact,
        "gelfand": [{"n": n, "estimate": e} for n, e in rep.gelfand],
        "max_formula": rep.thm319_value,
        "attaining_radius": rep.attaining_radius,
        "bound_max_norms": rep.norm_bound,
    }
    return results, rep.certificates, rep.warnings


def cmd_spectrum(args):
    tol = args.tol
    metric, m_info = _load_metric(args.metric)
    op, t_info = _load_op(args.op, metric, tol)
    results, certs, warns = _spectrum_results(op, tol, args.gelfand)
    residuals = {"membership": op.membership_residual, **certs}
    doc = _report("spectrum", {"metric": m_info, "op": t_info},
                  {"tol": tol, "tol_cluster": 1e-8, "tol_rank": metric.tol_rank}, results, residuals, warns)
    _emit(doc)
    return EXIT_OK


def cmd_harte(args):
    tol = args.tol
    metric, m_info = _load_metric(args.metric)
    ops, infos = [], []
    for path in args.ops:
        op, info = _load_op(path, metric, tol)
        ops.append(op)
        infos.append(info)
    tup = make_tuple(ops, tol)
    report, joint = harte_report(tup, args.nmax, seed=args.seed)
    check = check_thm46(tup, args.nmax, seed=args.seed)
    results = {
        "d": tup.d,
        "radius_estimates": [{"n": n, "estimate": e} for n, e in report.radius_estimates],
        "best_upper": report.best_upper,
        "joint_points": [list(p) for p in report.joint_points],
        "sup_l2": report.sup_l2,
        "margin": check.margin,
        "margin_holds": check.holds,
        "extrapolated": check.extrapolated,
        "extrapolated_margin": check.extrapolated_margin,
        "spectral_pairs": [_spectral_pair(op) for op in ops],
    }
    residuals = {
        "commutation": tup.commutation_residual,
        "compression_commutation": tup.compression_commutation_residual,
        "triangularization": joint.triangularization_residual,
        "harte_oracle": joint.oracle_residuals,
        "membership": [op.membership_residual for op in ops],
    }
    doc = _report("harte", {"metric": m_info, "ops": infos},
                  {"tol": tol, "tol_comm": tol, "margin_slack": 1e-6}, results, residuals, seed=args.seed)
    _emit(doc)
    return EXIT_OK


def _write_csv(path, report):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "n", "gelfand", "sup_sigma", "thm319"])
        for row in report.rows:
            writer.writerow([row.N, row.n, repr(row.gelfand), repr(row.sup_sigma), repr(row.thm319)])


def cmd_example(args):
    report = trend_report(args.name, args.truncate, args.nmax)
    if args.csv:
        _write_csv(args.csv, report)
    results = {
        "name": report.name,
        "rows": [vars(r) for r in report.rows],
        "truncations": {
            str(N): {
                "r_A(T)": s["r_a"],
                "r_A(T_diamond)": s["r_a_diamond"],
                "sup_sigma": s["sup_sigma"],
                "sigma_a": s["sigma_a"],
                "power_norms": s["power_norms"],
                "diamond_power_norms": s["diamond_power_norms"],
                "diamond_gelfand": s["diamond_gelfand"],
                "gelfand_monotone_nonincreasing": s["gelfand_monotone_nonincreasing"],
            }
            for N, s in report.summaries.items()
        },
        "annotations": report.annotations,
    }
    doc = _report("example", {"name": args.name, "truncate": args.truncate, "nmax": args.nmax},
                  {"tol_inv": 1e-8}, results, {"membership": 0.0}, warnings=report.annotations)
    _emit(doc)
    return EXIT_OK


def cmd_verify(args):
    tolerances = {} if args.tol is None else {name: args.tol for name in CHECKS}
    config = SuiteConfig(seed=args.seed, trials=args.trials, dim=args.dim, rank=args.rank,
                         tolerances=tolerances)
    report = verify_suite(config)
    checks = report.as_dict()
    failures = [name for name, c in checks.items() if c["failed"]]
    kappas = np.asarray(report.kappas)
    results = {
        "ok": report.ok,
        "checks": checks,
        "failures": failures,
        "kappa_max": float(kappas.max()),
        "kappa_median": float(np.median(kappas)),
        "conditioning": report.conditioning(),
    }
    residuals = {name: c["worst_residual"] for name, c in checks.items()}
    doc = _report("verify", {"trials": args.trials, "dim": args.dim, "rank": args.rank},
                  config.tolerances, results, residuals, seed=args.seed)
    _emit(doc)
    return EXIT_OK if report.ok else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail(EXIT_USAGE, "UsageError", message, usage=self.format_usage().strip())
        sys.exit(EXIT_USAGE)


def _nonneg_float(text):
    value = float(text)
    if not math.isfinite(value) or value < 0:
        raise argparse.ArgumentTypeError("must be a finite non-negative number")
    return value


def _pos_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser(tol):
    parser = _Parser(prog="shs", description="Spectral analysis on semi-Hilbertian spaces.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def tol_flag(p):
        p.add_argument("--tol", type=_nonneg_float, default=tol,
                       help=f"membership / invertibility tolerance (default: %(default)s, env {TOL_ENV})")

    p = sub.add_parser("analyze", help="membership, A-norms, adjoints, w_A, gamma_A")
    p.add_argument("--metric", required=True)
    p.add_argument("--op", required=True)
    tol_flag(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("spectrum", help="A-spectrum, r_A and the Gelfand table")
    p.add_argument("--metric", required=True)
    p.add_argument("--op", required=True)
    p.add_argument("--gelfand", type=int, default=DEFAULT_GELFAND_NMAX,
                   help="number of Gelfand estimates, 0 to skip (default: %(default)s)")
    tol_flag(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("harte", help="A-Harte radius and joint spectrum of a commuting tuple")
    p.add_argument("--metric", required=True)
    p.add_argument("--ops", required=True, nargs="+")
    p.add_argument("--nmax", type=_pos_int, default=DEFAULT_HARTE_NMAX)
    p.add_argument("--seed", type=int, default=0, help="seed of the random Schur combination")
    tol_flag(p)
    p.set_defaults(func=cmd_harte)

    p = sub.add_parser("example", help="truncation trend table for ex1, ex2 or ex3")
    p.add_argument("--name", required=True, choices=EXAMPLES)
    p.add_argument("--truncate", required=True, type=int, nargs="+", metavar="N")
    p.add_argument("--nmax", type=_pos_int, default=DEFAULT_GELFAND_NMAX)
    p.add_argument("--csv", metavar="PATH", help="also write the trend rows as CSV")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("verify", help="randomised theorem-verification suite")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trials", type=_pos_int, default=200)
    p.add_argument("--dim", type=_pos_int, default=6)
    p.add_argument("--rank", type=_pos_int, default=3)
    p.add_argument("--tol", type=_nonneg_float, default=None,
                   help="override every check tolerance (default: per-check values)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    try:
        tol = default_tol()
    except InputError as exc:
        return _fail(EXIT_USAGE, "InputError", str(exc))
    args = build_parser(tol).parse_args(argv)
    if args.command == "verify" and args.rank > args.dim:
        return _fail(EXIT_USAGE, "UsageError", "rank must not exceed dim")
    if args.command == "spectrum" and args.gelfand < 0:
        return _fail(EXIT_USAGE, "UsageError", "--gelfand must be non-negative")
    try:
        return args.func(args)
    except InputError as exc:
        return _fail(EXIT_USAGE, "InputError", str(exc))
    except MetricError as exc:
        return _fail(EXIT_METRIC, "MetricError", str(exc))
    except NotAMember as exc:
        return _fail(EXIT_NOT_MEMBER, "NotAMember", str(exc), residual=exc.residual)
    except NotCommuting as exc:
        return _fail(EXIT_NOT_COMMUTING, "NotCommuting", str(exc), residual=exc.residual)
    except (UnknownExample, TooSmall, CostGuard) as exc:
        return _fail(EXIT_USAGE, type(exc).__name__, str(exc))
    except SemiHilbertError as exc:
        return _fail(EXIT_USAGE, type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
