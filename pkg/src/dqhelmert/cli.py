"""Command line front end.

Subcommands:
    solve      estimate the transformation from a control point CSV
    transform  apply solved parameters to new points
    compare    run every method side by side and check agreement
    gen        write a seeded synthetic control point CSV

Exit codes: 0 success, 1 solver failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .constrained import closure_check, solve_constrained, solve_scaled, transform_point
from .errors import DqHelmertError, ParseError
from .io import read_new_points_csv, read_points_csv, solve_report, write_report
from .precision import covariance_constrained
from .problem import PerPointVariances, Problem
from .qa import covariance_qa, solve_qa
from .simplified import covariance_simplified, solve_simplified
from .synth import make_problem

METHODS = ("dqa-constrained", "dqa-simplified", "qa")
COMPARE_GATE = 1e-6


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dqhelmert",
                                 description="Similarity (Helmert) transformation estimation "
                                             "with dual quaternions")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p, with_method=True):
        if with_method:
            p.add_argument("--method", choices=METHODS, default="dqa-constrained")
            p.add_argument("--quat-form", choices=("unit", "scaled"), default="unit",
                           help="scaled form is a dqa-constrained variant")
        p.add_argument("--mode", choices=("symmetric", "asymmetric"), default="symmetric")
        p.add_argument("--dim", type=int, choices=(2, 3), default=3)
        p.add_argument("--tol", type=float, default=1e-11,
                       help="stop when quaternion updates satisfy dr.dr+ds.ds < tol")
        p.add_argument("--max-iter", type=int, default=100)
        p.add_argument("--weights", metavar="MATRIX_FILE", default=None,
                       help="whitespace-delimited 6n x 6n weight matrix, overrides CSV columns")
        p.add_argument("--sigma1-sq", type=float, default=1.0,
                       help="unit-weight variance of the source frame")
        p.add_argument("--sigma2-sq", type=float, default=1.0,
                       help="unit-weight variance of the target frame")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument("--figures", metavar="DIR", default=None,
                       help="render report figures (PNG) into this directory")

    ps = sub.add_parser("solve", help="estimate transformation parameters")
    ps.add_argument("points", help="control point CSV")
    add_common(ps)
    ps.add_argument("--full-covariance", action="store_true",
                    help="include covariance matrices in the report")

    pt = sub.add_parser("transform", help="transform new points with solved parameters")
    pt.add_argument("points", help="control point CSV to solve, or a JSON report "
                                   "from `solve --format json`")
    pt.add_argument("new_points", help="CSV of points to transform (id,x,y[,z])")
    add_common(pt)

    pc = sub.add_parser("compare", help="run all methods and compare")
    pc.add_argument("points", help="control point CSV")
    add_common(pc, with_method=False)

    pg = sub.add_parser("gen", help="generate a synthetic control point CSV")
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--n", type=int, default=8)
    pg.add_argument("--dim", type=int, choices=(2, 3), default=3)
    pg.add_argument("--max-angle", type=float, default=90.0, help="degrees")
    pg.add_argument("--noise-src", type=float, default=0.0, help="std dev [m]")
    pg.add_argument("--noise-dst", type=float, default=0.0, help="std dev [m]")
    pg.add_argument("--out", default=None)
    return ap


def _solve_with(method: str, quat_form: str, problem: Problem, tol: float, max_iter: int):
    if method == "dqa-constrained":
        if quat_form == "scaled":
            result = solve_scaled(problem, tol=tol, max_iter=max_iter)
        else:
            result = solve_constrained(problem, tol=tol, max_iter=max_iter)
        report = covariance_constrained(result)
    elif method == "dqa-simplified":
        result = solve_simplified(problem, tol=tol, max_iter=max_iter)
        report = covariance_simplified(result)
    else:
        result = solve_qa(problem, tol=tol, max_iter=max_iter)
        report = covariance_qa(result)
    return result, report


def _load_problem(args) -> Problem:
    return read_points_csv(args.points, dim=args.dim, weight_matrix_path=args.weights,
                           mode=args.mode, sigma1_sq=args.sigma1_sq,
                           sigma2_sq=args.sigma2_sq)


def _emit(text_or_report, args, renderer) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            renderer(fh)
    else:
        renderer(sys.stdout)


def _cmd_solve(args) -> int:
    if args.quat_form == "scaled" and args.method != "dqa-constrained":
        print("error: --quat-form scaled is only available with --method dqa-constrained",
              file=sys.stderr)
        return 2
    problem = _load_problem(args)
    result, cov = _solve_with(args.method, args.quat_form, problem, args.tol, args.max_iter)
    closure = closure_check(result, problem)
    report = solve_report(result, cov, closure, full_covariance=args.full_covariance)
    _emit(report, args, lambda fh: write_report(report, args.format, fh))
    if args.figures:
        from .figures import render_solve_figures
        render_solve_figures(report, args.figures)
    return 0


def _params_from_json_report(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    p = data["parameters"]
    return float(p["lambda"]), np.array(p["r"]), np.array(p["s"])


class _FixedResult:
    """Minimal parameter carrier for transform-from-report."""

    def __init__(self, lam, r, s):
        self.lambda_ = lam
        self.r = r
        self.s = s

    @property
    def translation(self):
        from .quat import translation_from_dualquat
        return translation_from_dualquat(self.r, self.s)


def _cmd_transform(args) -> int:
    if args.points.endswith(".json"):
        lam, r, s = _params_from_json_report(args.points)
        result = _FixedResult(lam, r, s)
    else:
        problem = _load_problem(args)
        result, _ = _solve_with(args.method, args.quat_form, problem, args.tol, args.max_iter)
    ids, pts = read_new_points_csv(args.new_points, dim=args.dim)

    def render(fh):
        cols = "id,x,y,z,X,Y,Z" if args.dim == 3 else "id,x,y,X,Y"
        fh.write(cols + "\n")
        for pid, p in zip(ids, pts):
            out = transform_point(result, p)
            if args.dim == 3:
                fh.write(f"{pid},{p[0]:.6f},{p[1]:.6f},{p[2]:.6f},"
                         f"{out[0]:.6f},{out[1]:.6f},{out[2]:.6f}\n")
            else:
                fh.write(f"{pid},{p[0]:.6f},{p[1]:.6f},{out[0]:.6f},{out[1]:.6f}\n")

    _emit(None, args, render)
    return 0


def _cmd_compare(args) -> int:
    problem = _load_problem(args)
    columns: dict[str, dict] = {}
    runs = [("dqa-constrained", "unit"), ("dqa-constrained", "scaled"),
            ("dqa-simplified", "unit"), ("qa", "unit")]
    for method, form in runs:
        label = method if form == "unit" else f"{method} (scaled)"
        try:
            result, cov = _solve_with(method, form, problem, args.tol, args.max_iter)
            eps, psi, omega = np.degrees(result.euler)
            t = result.translation
            columns[label] = {
                "lambda": result.lambda_,
                "eps_deg": float(eps),
                "psi_deg": float(psi),
                "omega_deg": float(omega),
                "t_x": float(t[0]), "t_y": float(t[1]), "t_z": float(t[2]),
                "sigma0": result.sigma0,
                "iterations": result.iterations,
                "sigma_lambda": cov.sigma_lambda,
                "sigma_t": cov.sigmas_six[3:].tolist(),
            }
        except DqHelmertError as exc:
            columns[label] = {"error": f"{type(exc).__name__}: {exc}"}

    ok = {k: v for k, v in columns.items() if "error" not in v}
    quants = ("lambda", "eps_deg", "psi_deg", "omega_deg", "t_x", "t_y", "t_z", "sigma0")
    max_dev = 0.0
    if len(ok) >= 2:
        vals = np.array([[col[q] for q in quants] for col in ok.values()])
        max_dev = float(np.max(vals.max(axis=0) - vals.min(axis=0)))
    table = {"columns": columns, "max_pairwise_deviation": max_dev,
             "agreement": "PASS" if max_dev <= COMPARE_GATE else "FAIL"}

    def render(fh):
        if args.format == "json":
            json.dump(table, fh, indent=2)
            fh.write("\n")
            return
        labels = list(columns)
        fh.write(f"{'quantity':<14s}" + "".join(f"{m:>28s}" for m in labels) + "\n")
        rows = quants + ("iterations", "sigma_lambda")
        for q in rows:
            cells = []
            for m in labels:
                col = columns[m]
                if "error" in col:
                    cells.append("error" if q != "lambda" else col["error"][:26])
                elif q == "iterations":
                    cells.append(str(col[q]))
                else:
                    cells.append(f"{col[q]:.10g}")
            fh.write(f"{q:<14s}" + "".join(f"{c:>28s}" for c in cells) + "\n")
        fh.write(f"max pairwise deviation: {max_dev:.3e} "
                 f"-> {table['agreement']} (gate {COMPARE_GATE:.0e})\n")

    _emit(None, args, render)
    if args.figures:
        from .figures import render_compare_figure
        render_compare_figure(table, args.figures)
    if not ok:
        return 1
    return 0 if table["agreement"] == "PASS" or len(ok) < 2 else 1


def _cmd_gen(args) -> int:
    weighting = "variances" if (args.noise_src or args.noise_dst) else "unit"
    problem, truth = make_problem(args.seed, n=args.n, dim=args.dim,
                                  max_angle_deg=args.max_angle,
                                  noise_source=args.noise_src, noise_target=args.noise_dst,
                                  weighting=weighting)

    def render(fh):
        if isinstance(problem.weights, PerPointVariances):
            fh.write("id,x,y,z,X,Y,Z,var_src,var_dst\n")
            for i, p in enumerate(problem.points):
                fh.write(f"{p.id},{p.x:.6f},{p.y:.6f},{p.z:.6f},"
                         f"{p.X:.6f},{p.Y:.6f},{p.Z:.6f},"
                         f"{problem.weights.var_source[i]:g},"
                         f"{problem.weights.var_target[i]:g}\n")
        else:
            fh.write("id,x,y,z,X,Y,Z\n")
            for p in problem.points:
                fh.write(f"{p.id},{p.x:.6f},{p.y:.6f},{p.z:.6f},"
                         f"{p.X:.6f},{p.Y:.6f},{p.Z:.6f}\n")

    _emit(None, args, render)
    print(f"# seed {args.seed}: lambda={truth.lam:.9g} t=({truth.t[0]:.4f}, "
          f"{truth.t[1]:.4f}, {truth.t[2]:.4f})", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "transform":
            return _cmd_transform(args)
        if args.command == "compare":
            return _cmd_compare(args)
        return _cmd_gen(args)
    except ParseError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except DqHelmertError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
