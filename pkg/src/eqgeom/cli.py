"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 tolerance breach, 3 numerical
failure (singular metric, non-convergence, domain exit, ...).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .economy import FAMILIES, embed, load_economy, make_economy
from .errors import EqGeomError, ValidationError
from .geodesic import TangentVector, integrate_geodesic
from .geometry import curvature_batch
from .selection import (branch_index, find_equilibria, follow_endowment_path, perturb,
                        select, uniqueness_check)
from .verification import sample_coords, verify_model

EXIT_OK, EXIT_INVALID, EXIT_TOLERANCE, EXIT_NUMERIC = 0, 1, 2, 3
INNER_R_TOL = 1e-12

COMMANDS = ("verify", "curvature", "geodesic", "select", "equilibria", "uniqueness")


class ToleranceBreach(Exception):
    pass


def _floats(text, name):
    if text is None:
        return None
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()], dtype=float)
    except ValueError:
        raise ValidationError(f"--{name} must be a comma-separated list of numbers") from None


def _economy(arg: str):
    """A JSON config path, or ``family`` / ``family:L`` as a shortcut."""
    head, _, tail = arg.partition(":")
    if head in FAMILIES and not arg.endswith(".json"):
        try:
            L = int(tail) if tail else 2
        except ValueError:
            raise ValidationError(f"bad dimension in economy shortcut {arg!r}") from None
        return make_economy(head, L)
    try:
        return load_economy(arg)
    except FileNotFoundError:
        raise ValidationError(f"economy config {arg!r} not found") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"economy config {arg!r} is not valid JSON: {exc}") from None


def _num(x):
    return float(x)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(obj, indent=2) + "\n"


def _table(header, rows, fmt):
    if fmt == "csv":
        return _csv_text(header, rows)
    return _json_text([{h: (_num(v) if isinstance(v, (float, np.floating)) else v)
                        for h, v in zip(header, row)} for row in rows])


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _base_point(model, args):
    t0 = 0.0 if args.t0 is None else args.t0
    alpha = _floats(args.alpha, "alpha")
    if alpha is None:
        alpha = np.zeros(model.L - 1)
    return embed(model, t0, alpha)


def _alpha_names(prefix, L):
    return [f"{prefix}_{i}" for i in range(1, L)]


# --------------------------------------------------------------------------
# commands


def cmd_verify(model, args):
    rows = verify_model(model, args.samples, args.seed)
    width = max(len(r.name) for r in rows)
    lines = [f"{'comparison':<{width}}  {'max error':>12}  {'tolerance':>10}  result"]
    for r in rows:
        lines.append(f"{r.name:<{width}}  {r.max_error:12.3e}  {r.tolerance:10.1e}  "
                     f"{'PASS' if r.passed else 'FAIL'}")
    print("\n".join(lines))
    if args.out:
        header = ["comparison", "max_error", "tolerance", "passed", "worst_index"]
        table = [[r.name, r.max_error, r.tolerance, r.passed, r.worst_index] for r in rows]
        _emit(_table(header, table, args.format), args.out)
    failed = [r for r in rows if not r.passed]
    if failed:
        raise ToleranceBreach(", ".join(r.name for r in failed))


def cmd_curvature(model, args):
    X = sample_coords(model, args.samples, args.seed)
    cb = curvature_batch(model, X)
    L = model.L
    header = (["t"] + _alpha_names("alpha", L) + ["det_g", "B", "A"]
              + _alpha_names("inner_R", L) + [f"sec_0{i}" for i in range(1, L)])
    rows = [list(X[n]) + [cb["det_g"][n], cb["B"][n], cb["A"][n]]
            + list(cb["inner_R"][n]) + list(cb["sec_0i"][n]) for n in range(len(X))]
    _emit(_table(header, rows, args.format), args.out)
    worst = float(np.max(cb["inner_R"]))
    if worst > INNER_R_TOL:
        n = int(np.argmax(np.max(cb["inner_R"], axis=1)))
        raise ToleranceBreach(f"inner_R = {worst:.3e} > {INNER_R_TOL:g} at t={X[n, 0]:.6g}, "
                              f"alpha={list(X[n, 1:])}")


def cmd_geodesic(model, args):
    base = _base_point(model, args)
    velocity = _floats(args.velocity, "velocity")
    if velocity is None:
        raise ValidationError("geodesic needs --velocity")
    v = TangentVector(base, velocity)
    path = integrate_geodesic(model, v.base.coords, v.coeffs)
    L = model.L
    header = (["s", "t"] + _alpha_names("alpha", L) + ["dt"] + _alpha_names("dalpha", L)
              + ["g_speed"])
    rows = [[path.s[n]] + list(path.coords[n]) + list(path.velocity[n]) + [path.speed[n]]
            for n in range(len(path.s))]
    _emit(_table(header, rows, args.format), args.out)


def _selection_record(model, base, omega_prime, res):
    return {
        "base": {"t": base.t, "alpha": base.alpha.tolist()},
        "omega_prime": [float(v) for v in omega_prime],
        "v_coeffs": res.v.coeffs.tolist(),
        "landed": {"t": res.landed.t, "alpha": res.landed.alpha.tolist()},
        "price_new": res.price_new.tolist(),
        "residual": res.endowment_residual,
        "iterations": res.iterations,
        "branch_index": branch_index(model, res.landed),
        "refined": res.refined,
    }


def cmd_select(model, args):
    base = _base_point(model, args)
    omega_prime = _floats(args.omega_prime, "omega-prime")
    if omega_prime is None:
        raise ValidationError("select needs --omega-prime")
    refine = not args.no_refine
    if args.path_steps:
        weights = np.arange(1, args.path_steps + 1) / args.path_steps
        start = base.endowment
        if omega_prime.size != model.L:
            raise ValidationError(f"omega' needs {model.L} entries, got {omega_prime.size}")
        targets = [start + w * (omega_prime - start) for w in weights]
        results = follow_endowment_path(model, base, targets, refine)
        bases = [base] + [r.landed for r in results[:-1]]
        records = [_selection_record(model, b, om, r) for b, om, r in zip(bases, targets, results)]
    else:
        records = [_selection_record(model, base, omega_prime,
                                     select(model, perturb(model, base, omega_prime), refine))]
    if args.format == "json":
        _emit(_json_text(records if args.path_steps else records[0]), args.out)
        return
    L = model.L
    header = (["base_t"] + _alpha_names("base_alpha", L) + [f"omega_prime_{i}" for i in range(1, L + 1)]
              + [f"v_{i}" for i in range(L)] + ["landed_t"] + _alpha_names("landed_alpha", L)
              + [f"price_new_{i}" for i in range(1, L)] + ["residual", "iterations",
                                                            "branch_index", "refined"])
    rows = [[r["base"]["t"], *r["base"]["alpha"], *r["omega_prime"], *r["v_coeffs"],
             r["landed"]["t"], *r["landed"]["alpha"], *r["price_new"], r["residual"],
             r["iterations"], r["branch_index"], r["refined"]] for r in records]
    _emit(_csv_text(header, rows), args.out)


def cmd_equilibria(model, args):
    endowment = _floats(args.endowment, "endowment")
    if endowment is None:
        endowment = np.zeros(model.L)
    points = find_equilibria(model, endowment)
    L = model.L
    header = ["t"] + _alpha_names("alpha", L) + [f"price_{i}" for i in range(1, L)]
    rows = [[p.t, *p.alpha, *p.price] for p in points]
    _emit(_table(header, rows, args.format), args.out)


def cmd_uniqueness(model, args):
    rep = uniqueness_check(model)
    record = {"unique": rep.unique, "max_abs_p_prime": rep.max_abs_p_prime,
              "max_abs_inner_R": rep.max_abs_inner_R, "curvature_zero": rep.curvature_zero}
    if args.format == "csv":
        _emit(_csv_text(list(record), [list(record.values())]), args.out)
    else:
        _emit(_json_text(record), args.out)


HANDLERS = {
    "verify": cmd_verify, "curvature": cmd_curvature, "geodesic": cmd_geodesic,
    "select": cmd_select, "equilibria": cmd_equilibria, "uniqueness": cmd_uniqueness,
}

DEFAULT_FORMAT = {"select": "json", "uniqueness": "json", "verify": "csv"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eqgeom", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--economy", required=True,
                   help="economy JSON config, or a family shortcut such as 'fold' or 'tanh-sin:3'")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--no-refine", action="store_true", help="one-shot selection without refinement")
    p.add_argument("--t0", type=float, help="base point t")
    p.add_argument("--alpha", help="base point alpha, comma list")
    p.add_argument("--omega-prime", help="new endowment of consumer 1, comma list")
    p.add_argument("--velocity", help="initial geodesic velocity (dt, dalpha...), comma list")
    p.add_argument("--endowment", help="endowment for equilibria, comma list")
    p.add_argument("--path-steps", type=int, default=0,
                   help="follow the straight endowment path to omega' in this many legs")
    return p


def _describe(exc):
    parts = [str(exc)]
    for attr in ("t", "alpha", "s", "coords", "residual", "iterations"):
        val = getattr(exc, attr, None)
        if val is not None:
            parts.append(f"{attr}={np.asarray(val).tolist()}")
    return "; ".join(parts)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.format is None:
        args.format = DEFAULT_FORMAT.get(args.command, "csv")
    try:
        if args.samples < 1:
            raise ValidationError("--samples must be at least 1")
        if args.path_steps < 0:
            raise ValidationError("--path-steps must be non-negative")
        model = _economy(args.economy)
        HANDLERS[args.command](model, args)
    except ToleranceBreach as exc:
        print(f"tolerance breach: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except EqGeomError as exc:
        print(f"numerical error ({type(exc).__name__}): {_describe(exc)}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
