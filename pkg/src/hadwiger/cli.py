"""Command-line entry point: ``hadwiger <command> [options]``.

Exit codes: 0 success, 2 unparsable input or arguments, 3 invalid input,
4 numerical or calibration failure (including a failed check command).
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import io as hio
from .cells import DegenerateSliceError, GridRegion, SimplicialSet, euler_characteristic
from .functions import ConstructibleFunction, PLFunction, StepFunction, critical_values
from .integrals import (
    euler_integral,
    hadwiger_integral,
    hadwiger_pl_euler,
    integrate_step_function,
    prop31_residual,
    step_integral,
    verdier_dual,
)
from .intrinsic import (
    CalibrationError,
    CroftonConstants,
    calibrate,
    default_constants,
    mu_crofton,
    mu_grid_polynomial,
    mu_slice_mc,
)
from .valuations import (
    CoefficientProfile,
    HadwigerValuation,
    ProfileError,
    additivity_residual,
    decreasing_composition,
    evaluate_terms,
    excursion_difference_form,
    invariance_check,
)

EXIT_PARSE, EXIT_VALIDATION, EXIT_NUMERICAL = 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_PARSE)


# --------------------------------------------------------------------------
# helpers


def _floats(text: str, name: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise hio.InputParseError(f"--{name}: expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str, name: str) -> list:
    vals = _floats(text, name)
    if any(v != int(v) or v < 1 for v in vals):
        raise hio.InputValidationError(f"--{name}: expected positive integers")
    return [int(v) for v in vals]


def _json_arg(text: str, name: str):
    """Inline JSON or a path to a JSON file."""
    path = Path(text)
    if not text.lstrip().startswith(("{", "[")) and path.exists():
        text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise hio.InputParseError(f"--{name}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _profile(doc, where: str) -> CoefficientProfile:
    if isinstance(doc, (int, float)):
        return CoefficientProfile.linear(float(doc))
    if not isinstance(doc, dict):
        raise hio.InputValidationError(f"{where}: a profile is a number (slope) or an object with x and y")
    if "slope" in doc:
        return CoefficientProfile.linear(float(doc["slope"]))
    try:
        return CoefficientProfile(doc["x"], doc["y"], doc.get("extrapolate", "linear"))
    except KeyError as exc:
        raise hio.InputValidationError(f"{where}: missing field {exc}") from exc
    except ProfileError as exc:
        raise hio.InputValidationError(f"{where}: {exc}") from exc


def _valuation(args, n: int) -> HadwigerValuation:
    if args.valuation is None:
        raise hio.InputValidationError("--valuation is required for this command")
    doc = _json_arg(args.valuation, "valuation")
    if not isinstance(doc, dict) or "profiles" not in doc:
        raise hio.InputValidationError("--valuation: expected an object with a 'profiles' list")
    profs = doc["profiles"]
    if not isinstance(profs, list) or len(profs) != n + 1:
        raise hio.InputValidationError(f"--valuation: 'profiles' needs {n + 1} entries for R^{n}")
    v = HadwigerValuation(
        tuple(_profile(p, f"--valuation profiles[{i}]") for i, p in enumerate(profs)),
        doc.get("bound", args.bound),
    )
    try:
        v.check_evaluable()
    except ProfileError as exc:
        raise hio.InputValidationError(f"--valuation: {exc}") from exc
    return v


def _inputs(args) -> list:
    objs = [hio.ingest_image(args.image, args.skeleton)] if args.image else []
    objs += [hio.load_document(p) for p in args.input or []]
    if not objs:
        raise hio.InputValidationError("--input or --image is required for this command")
    return objs


def _one_input(args, *types):
    objs = _inputs(args)
    obj = objs[0]
    if ConstructibleFunction in types and isinstance(obj, GridRegion):
        obj = ConstructibleFunction.indicator(obj)
    if types and not isinstance(obj, types):
        names = ", ".join(t.__name__ for t in types)
        raise hio.InputValidationError(f"this command needs one of: {names}")
    return obj


def _function(args):
    return _one_input(args, ConstructibleFunction, PLFunction)


def _require_k(args, n: int) -> int:
    if args.k is None:
        raise hio.InputValidationError("--k is required for this command")
    if not 0 <= args.k <= n:
        raise hio.InputValidationError(f"--k must lie in 0..{n}")
    return args.k


def _mc(args) -> dict:
    return dict(samples=args.samples, seed=args.seed, threads=args.threads, constants=_constants())


def _constants() -> CroftonConstants:
    try:
        return default_constants()
    except (OSError, ValueError, KeyError) as exc:
        raise CalibrationError(f"cannot read calibration table: {exc}") from exc


def _result_row(r) -> dict:
    row = {"k": r.k, "bound": r.bound, "value": r.value, "stderr": r.stderr, "method": r.method}
    if r.method.endswith("mc"):
        row.update(samples=r.samples, seed=r.seed, constant=r.constant)
    return row


def _estimate_row(k: int, e) -> dict:
    row = {"k": k, "value": e.value, "stderr": e.stderr, "method": e.method}
    if e.method != "exact":
        row.update(samples=e.samples, seed=e.seed, constant=e.constant)
    return row


# --------------------------------------------------------------------------
# commands; each returns a list of row dicts


def cmd_chi(args):
    obj = _one_input(args, GridRegion, SimplicialSet)
    return [{"chi": euler_characteristic(obj)}]


def cmd_mu(args):
    region = _one_input(args, GridRegion)
    poly = mu_grid_polynomial(region)
    ks = range(region.n + 1) if args.k is None else [_require_k(args, region.n)]
    return [{"k": k, "value": float(poly[k]), "method": "exact"} for k in ks]


def cmd_mu_mc(args):
    obj = _one_input(args, GridRegion, SimplicialSet)
    k = _require_k(args, obj.n)
    fn = mu_crofton if args.method == "crofton" else mu_slice_mc
    return [_estimate_row(k, fn(obj, k, **_mc(args)))]


def cmd_euler_int(args):
    h = _function(args)
    if isinstance(h, ConstructibleFunction):
        return [{"k": 0, "bound": args.bound, "value": euler_integral(h), "stderr": 0.0, "method": "excursion-exact"}]
    return [_result_row(hadwiger_pl_euler(h, args.bound))]


def cmd_hadwiger_int(args):
    h = _function(args)
    k = _require_k(args, h.n)
    return [_result_row(hadwiger_integral(h, k, args.bound, **_mc(args)))]


def cmd_step_seq(args):
    h = _function(args)
    k = _require_k(args, h.n)
    rows = []
    for m in _ints(args.m, "m"):
        r = step_integral(h, m, k, args.bound, **_mc(args))
        rows.append({"m": m, **_result_row(r)})
    return rows


def cmd_dual(args):
    h = _one_input(args, ConstructibleFunction)
    d = verdier_dual(h)
    if args.format == "json":
        return hio.dump_document(d)
    idx = np.argwhere(d.values != 0)
    return [
        {"cell": " ".join(str(int(i)) for i in cell), "value": float(d.values[tuple(cell)])}
        for cell in idx[np.lexsort(idx.T)]
    ]


def cmd_prop31(args):
    h = _one_input(args, ConstructibleFunction)
    ks = range(h.n + 1) if args.k is None else [_require_k(args, h.n)]
    rows = []
    for k in ks:
        lhs, rhs = prop31_residual(h, k)
        rows.append({"k": k, "lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs)})
    return rows


def _valuation_rows(terms, v) -> list:
    rows = [_result_row(t) for t in terms]
    total = {"k": "total", "bound": v.bound, "value": float(sum(t.value for t in terms))}
    total["stderr"] = float(math.sqrt(sum(t.stderr**2 for t in terms)))
    return rows + [total]


def cmd_valuation(args):
    h = _function(args)
    v = _valuation(args, h.n)
    rows = _valuation_rows(evaluate_terms(v, h, **_mc(args)), v)
    if isinstance(h, ConstructibleFunction):
        rows[-1]["excursion_difference_form"] = excursion_difference_form(v, h)
    return rows


def cmd_additivity_check(args):
    objs = [ConstructibleFunction.indicator(o) if isinstance(o, GridRegion) else o for o in _inputs(args)]
    if len(objs) != 2 or not all(isinstance(o, ConstructibleFunction) for o in objs):
        raise hio.InputValidationError("additivity-check needs two grid-function inputs (--input f --input g)")
    f, g = objs
    if f.n != g.n:
        raise hio.InputValidationError("inputs live in different dimensions")
    v = _valuation(args, f.n)
    resid = additivity_residual(v, f, g)
    return [{"residual": resid, "tolerance": args.tolerance, "pass": resid <= args.tolerance}]


def _motion(args, n: int):
    if args.rotation is not None:
        r = np.asarray(_json_arg(args.rotation, "rotation"), dtype=float)
        if r.shape != (n, n):
            raise hio.InputValidationError(f"--rotation must be a {n}x{n} matrix")
    else:
        r = np.eye(n)
        if args.angle:
            if n < 2:
                raise hio.InputValidationError("--angle needs dimension >= 2")
            a = math.radians(args.angle)
            r[:2, :2] = [[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]]
    t = np.zeros(n) if args.translation is None else np.asarray(_floats(args.translation, "translation"))
    if t.shape != (n,):
        raise hio.InputValidationError(f"--translation needs {n} components")
    return r, t


def cmd_invariance_check(args):
    h = _function(args)
    v = _valuation(args, h.n)
    r, t = _motion(args, h.n)
    resid, err = invariance_check(v, h, r, t, **_mc(args))
    limit = max(args.tolerance, 3 * err)
    row = {"residual": resid, "stderr": err, "limit": limit, "pass": resid <= limit}
    if err > 0:
        row.update(samples=args.samples, seed=args.seed, seed_moved=args.seed + 1)
    return [row]


def cmd_decreasing_exp(args):
    h = _function(args)
    k = _require_k(args, h.n)
    if args.profile is None:
        c = CoefficientProfile.linear(-1.0)
    else:
        c = _profile(_json_arg(args.profile, "profile"), "--profile")
    try:
        rows = decreasing_composition(h, c, k, _ints(args.m, "m"), **_mc(args))
    except ProfileError as exc:
        raise hio.InputValidationError(f"--profile: {exc}") from exc
    if 0 < k < h.n:
        const = _constants().get(h.n, k)
        for r in rows:
            r.update(samples=args.samples, seed=args.seed, constant=const)
    return rows


def cmd_mu_curve(args):
    h = _function(args)
    k = _require_k(args, h.n)
    crit = critical_values(h)
    levels = list(crit) + list(0.5 * (crit[1:] + crit[:-1]))
    if args.s is not None:
        levels += _floats(args.s, "s")
    levels = np.unique(np.asarray(levels, dtype=float))
    if np.any(levels <= 0):
        print("hadwiger: warning: levels s <= 0 include the zero region, clipped to the input's domain", file=sys.stderr)
    rows = []
    for s in levels:
        phi = StepFunction([s], [1.0], [0.0, 1.0])
        r = integrate_step_function(h, phi, k, "lower", **_mc(args))
        row = {"s": float(s), "k": k, "value": r.value, "stderr": r.stderr, "method": r.method}
        if r.method.endswith("mc"):
            row.update(samples=r.samples, seed=r.seed, constant=r.constant)
        rows.append(row)
    return rows


def cmd_calibrate(args):
    if args.n is None or args.k is None:
        raise hio.InputValidationError("calibrate needs --n and --k")
    if not 0 < args.k < args.n:
        raise hio.InputValidationError("calibrate needs 0 < k < n")
    est = calibrate(args.n, args.k, args.samples, args.seed, args.threads)
    closed = CroftonConstants().get(args.n, args.k)
    if args.table:
        table = CroftonConstants()
        if Path(args.table).exists():
            table = CroftonConstants.load(args.table)
        table.set(args.n, args.k, est.value, f"calibrate samples={args.samples} seed={args.seed}")
        Path(args.table).write_text(table.to_json() + "\n", encoding="utf-8")
    return [
        {
            "n": args.n,
            "k": args.k,
            "value": est.value,
            "stderr": est.stderr,
            "closed_form": closed,
            "samples": est.samples,
            "seed": est.seed,
        }
    ]


COMMANDS = {
    "chi": (cmd_chi, "Euler characteristic of a grid region or simplicial set"),
    "mu": (cmd_mu, "exact intrinsic volumes of a grid region"),
    "mu-mc": (cmd_mu_mc, "Monte Carlo intrinsic volume (crofton or slice)"),
    "euler-int": (cmd_euler_int, "lower/upper Euler integral"),
    "hadwiger-int": (cmd_hadwiger_int, "lower/upper Hadwiger integral for one k"),
    "step-seq": (cmd_step_seq, "floor/ceiling step approximants over a list of m"),
    "dual": (cmd_dual, "dual of a grid function"),
    "prop31": (cmd_prop31, "integral of h against the signed integral of its dual, per k"),
    "valuation": (cmd_valuation, "evaluate a valuation given by coefficient profiles"),
    "additivity-check": (cmd_additivity_check, "v(f)+v(g) against v(max)+v(min)"),
    "invariance-check": (cmd_invariance_check, "v(h) against v of a rigidly moved h"),
    "decreasing-exp": (cmd_decreasing_exp, "decreasing-profile composition experiment"),
    "mu-curve": (cmd_mu_curve, "mu_k of superlevel sets {h >= s}"),
    "calibrate": (cmd_calibrate, "estimate a Crofton constant on the unit cube"),
}

CHECKS = {"additivity-check", "invariance-check"}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hadwiger", description="Euler calculus, intrinsic volumes and Hadwiger integrals.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, helptext) in COMMANDS.items():
        s = sub.add_parser(name, help=helptext, description=helptext)
        s.add_argument("--input", action="append", help="input document (repeat for two inputs)")
        s.add_argument("--image", help="PGM image to use as a grid-function input")
        s.add_argument("--skeleton", choices=("max", "min"), default="max")
        s.add_argument("--k", type=int)
        s.add_argument("--n", type=int, help="ambient dimension (calibrate)")
        s.add_argument("--bound", choices=("lower", "upper"), default="lower")
        s.add_argument("--samples", type=int, default=10_000)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--threads", type=int, default=1)
        s.add_argument("--tolerance", type=float, default=1e-9)
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--output", help="write here instead of stdout")
        s.add_argument("--timing", action="store_true", help="add wall time to the output")
        s.add_argument("--method", choices=("crofton", "slice"), default="crofton")
        s.add_argument("--m", default="10,100,1000", help="comma-separated m values")
        s.add_argument("--s", help="extra comma-separated levels for mu-curve")
        s.add_argument("--valuation", help="valuation JSON (inline or file)")
        s.add_argument("--profile", help="coefficient profile JSON (inline or file)")
        s.add_argument("--angle", type=float, help="rotation in degrees in the first coordinate plane")
        s.add_argument("--rotation", help="rotation matrix JSON (inline or file)")
        s.add_argument("--translation", help="comma-separated translation vector")
        s.add_argument("--table", help="calibration table to update (calibrate)")
    return p


def _render(command: str, rows, fmt: str, extra: dict) -> str:
    if isinstance(rows, dict):
        # a document, e.g. the dual of a grid function
        return json.dumps(rows, indent=2) + "\n"
    if fmt == "json":
        return json.dumps({"command": command, **extra, "results": rows}, indent=2) + "\n"
    buf = _io.StringIO()
    keys = []
    for r in rows:
        keys += [key for key in r if key not in keys]
    w = csv.DictWriter(buf, fieldnames=keys + list(extra), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({**r, **extra})
    return buf.getvalue()


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fn = COMMANDS[args.command][0]
    start = time.perf_counter()
    try:
        if args.samples < 2:
            raise hio.InputValidationError("--samples must be at least 2")
        if args.threads < 1:
            raise hio.InputValidationError("--threads must be at least 1")
        rows = fn(args)
    except hio.InputParseError as exc:
        print(f"hadwiger: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (CalibrationError, DegenerateSliceError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"hadwiger: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (hio.InputValidationError, ValueError, TypeError) as exc:
        print(f"hadwiger: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    extra = {"wall_time_s": time.perf_counter() - start} if args.timing else {}
    text = _render(args.command, rows, args.format, extra)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.command in CHECKS and not all(r["pass"] for r in rows):
        print(f"hadwiger: {args.command} failed", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
