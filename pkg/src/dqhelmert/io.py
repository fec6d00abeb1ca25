"""CSV ingestion and report rendering (JSON and text).

Input schema: a header row followed by one line per control point,

    id,x,y,z,X,Y,Z[,var_src,var_dst | ,w]

with `.` as the decimal separator.  The optional trailing columns select
the stochastic model: per-point variances for each frame, or one scalar
weight per point.  In 2D mode the z columns may be omitted
(id,x,y,X,Y[,...]); they are padded with zeros.

The JSON report is the source of truth; the text report is formatted
from the same values (angles in degrees with 9 decimals, translations
with 4, scale with 11 significant digits).
"""

from __future__ import annotations

import csv
import io as _io
import json
from typing import TextIO

import numpy as np

from .constrained import CLOSURE_TOL
from .errors import ParseError
from .precision import CovarianceReport
from .problem import (
    ControlPointPair,
    FullWeightMatrix,
    PerPointScalarWeights,
    PerPointVariances,
    Problem,
    UnitWeights,
)
from .result import SolveResult

CONDITION_WARN = 1e14

_SCHEMAS_3D = {
    ("id", "x", "y", "z", "X", "Y", "Z"): "unit",
    ("id", "x", "y", "z", "X", "Y", "Z", "var_src", "var_dst"): "variances",
    ("id", "x", "y", "z", "X", "Y", "Z", "w"): "scalar",
}
_SCHEMAS_2D = {
    ("id", "x", "y", "X", "Y"): "unit",
    ("id", "x", "y", "X", "Y", "var_src", "var_dst"): "variances",
    ("id", "x", "y", "X", "Y", "w"): "scalar",
}


def read_points_csv(path: str, dim: int = 3, weight_matrix_path: str | None = None,
                    mode: str = "symmetric", sigma1_sq: float = 1.0,
                    sigma2_sq: float = 1.0) -> Problem:
    """Parse a control point file into a Problem.

    The stochastic model is inferred from the header columns unless an
    explicit weight matrix file is given, which overrides them.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(str(exc), path=path) from exc
    rows = list(csv.reader(_io.StringIO(text)))
    rows = [row for row in rows if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ParseError("empty file", path=path)
    header = tuple(cell.strip() for cell in rows[0])
    schemas = _SCHEMAS_2D if dim == 2 else _SCHEMAS_3D
    full3 = tuple(h for h in _SCHEMAS_3D if len(h) == len(header))
    if header not in schemas:
        # 3D-shaped headers are accepted in 2D mode when z = Z = 0
        if dim == 2 and header in _SCHEMAS_3D:
            schemas = _SCHEMAS_3D
        else:
            expected = " | ".join(",".join(h) for h in schemas)
            raise ParseError(f"unrecognized header {','.join(header)!r}; expected {expected}",
                             path=path, row=0)
    kind = schemas[header]
    has_z = "z" in header

    ids: list[str] = []
    coords: list[list[float]] = []
    var_src: list[float] = []
    var_dst: list[float] = []
    wts: list[float] = []
    for irow, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}",
                             path=path, row=irow)
        ids.append(row[0].strip())
        try:
            vals = [float(cell) for cell in row[1:]]
        except ValueError as exc:
            raise ParseError(f"non-numeric field: {exc}", path=path, row=irow) from exc
        if has_z:
            x, y, z, xx, yy, zz = vals[:6]
            rest = vals[6:]
        else:
            x, y, xx, yy = vals[:4]
            z = zz = 0.0
            rest = vals[4:]
        if dim == 2 and (z != 0.0 or zz != 0.0):
            raise ParseError("2D mode requires z = Z = 0", path=path, row=irow)
        coords.append([x, y, z, xx, yy, zz])
        if kind == "variances":
            var_src.append(rest[0])
            var_dst.append(rest[1])
        elif kind == "scalar":
            wts.append(rest[0])

    points = tuple(ControlPointPair(ids[i], *coords[i]) for i in range(len(ids)))
    if weight_matrix_path is not None:
        weights = FullWeightMatrix(read_matrix_file(weight_matrix_path, 6 * len(points)))
    elif kind == "variances":
        weights = PerPointVariances(tuple(var_src), tuple(var_dst))
    elif kind == "scalar":
        weights = PerPointScalarWeights(tuple(wts))
    else:
        weights = UnitWeights()
    return Problem(points=points, weights=weights, mode=mode, dim=dim,
                   sigma1_sq=sigma1_sq, sigma2_sq=sigma2_sq)


def read_matrix_file(path: str, order: int) -> np.ndarray:
    """Read a whitespace-delimited square matrix of the given order."""
    try:
        m = np.loadtxt(path, dtype=float)
    except OSError as exc:
        raise ParseError(str(exc), path=path) from exc
    except ValueError as exc:
        raise ParseError(f"non-numeric matrix entry: {exc}", path=path) from exc
    m = np.atleast_2d(m)
    if m.shape != (order, order):
        raise ParseError(f"matrix shape {m.shape}, expected {(order, order)}", path=path)
    return m


def read_new_points_csv(path: str, dim: int = 3) -> tuple[list[str], np.ndarray]:
    """Parse a file of points to transform: header id,x,y[,z]."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise ParseError(str(exc), path=path) from exc
    if not rows:
        raise ParseError("empty file", path=path)
    header = tuple(cell.strip() for cell in rows[0])
    if header == ("id", "x", "y", "z"):
        file_dim = 3
    elif header == ("id", "x", "y"):
        file_dim = 2
    else:
        raise ParseError(f"unrecognized header {','.join(header)!r}; expected id,x,y[,z]",
                         path=path, row=0)
    if file_dim != dim:
        raise ParseError(f"dimension mismatch: {file_dim}D points in a {dim}D run", path=path)
    ids = []
    pts = []
    for irow, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}",
                             path=path, row=irow)
        ids.append(row[0].strip())
        try:
            vals = [float(c) for c in row[1:]]
        except ValueError as exc:
            raise ParseError(f"non-numeric field: {exc}", path=path, row=irow) from exc
        pts.append(vals + [0.0] * (3 - len(vals)))
    return ids, np.array(pts)


def solve_report(result: SolveResult, report: CovarianceReport | None,
                 closure: float, full_covariance: bool = False) -> dict:
    """Collect a solve into a JSON-serializable report dictionary."""
    eps, psi, omega = result.euler
    t = result.translation
    out: dict = {
        "method": result.method,
        "quat_form": result.quat_form,
        "mode": result.mode,
        "dim": result.dim,
        "n_points": result.n_points,
        "converged": result.converged,
        "iterations": result.iterations,
        "dof": result.dof,
        "sigma0": result.sigma0,
        "parameters": {
            "lambda": result.lambda_,
            "translation_m": t.tolist(),
            "angles_deg": {
                "eps": float(np.degrees(eps)),
                "psi": float(np.degrees(psi)),
                "omega": float(np.degrees(omega)),
            },
            "r": result.r.tolist(),
            "s": result.s.tolist(),
            "r_scaled": result.r_scaled.tolist(),
            "s_scaled": result.s_scaled.tolist(),
        },
        "residuals": [
            {
                "id": result.point_ids[i],
                "v_source_m": result.residuals_source[i].tolist(),
                "v_target_m": result.residuals_target[i].tolist(),
            }
            for i in range(result.n_points)
        ],
        "closure": {"max_deviation_m": closure, "pass": bool(closure < CLOSURE_TOL)},
        "condition_log": [float(c) for c in result.condition_log],
        "objective_log": [float(o) for o in result.objective_log],
        "warnings": [],
    }
    if result.dof_2d is not None:
        out["dof_2d"] = result.dof_2d
    if any(c > CONDITION_WARN for c in result.condition_log):
        out["warnings"].append(
            f"condition estimate exceeded {CONDITION_WARN:.0e} during iteration")
    if report is not None:
        sig = {
            "lambda": report.sigma_lambda,
            "translation_m": report.sigmas_six[3:].tolist(),
            "angles_deg": np.degrees(report.sigmas_six[:3]).tolist(),
            "r": report.sigma_r.tolist(),
        }
        if report.sigma_s is not None:
            sig["s"] = report.sigma_s.tolist()
        out["std_errors"] = sig
        if full_covariance:
            cov = {"c_par": report.c_par.tolist()}
            if report.c_qq is not None:
                cov["c_qq"] = report.c_qq.tolist()
            cov["c_full"] = report.c_full.tolist()
            out["covariance"] = cov
    return out


def _fmt_lambda(x: float) -> str:
    return f"{x:.11g}"


def _pm(value: str, sigma) -> str:
    return f"{value} +/- {sigma}" if sigma is not None else value


def render_text(report: dict) -> str:
    """Human-readable report; same numbers as the JSON form."""
    p = report["parameters"]
    sig = report.get("std_errors")
    lines = []
    lines.append(f"method: {report['method']} ({report['quat_form']} quaternions, "
                 f"{report['mode']}, {report['dim']}D)")
    lines.append(f"points: {report['n_points']}   dof: {report['dof']}"
                 + (f"   dof(2d): {report['dof_2d']}" if "dof_2d" in report else ""))
    lines.append(f"iterations: {report['iterations']}   converged: {report['converged']}")
    lines.append("")
    lines.append("parameters")

    def sig_of(key, idx=None):
        if sig is None:
            return None
        val = sig[key]
        return val if idx is None else val[idx]

    lam_sig = None if sig is None else _fmt_lambda(sig["lambda"])
    lines.append(f"  lambda = {_pm(_fmt_lambda(p['lambda']), lam_sig)}")
    ang = p["angles_deg"]
    for i, name in enumerate(("eps", "psi", "omega")):
        s = sig_of("angles_deg", i)
        s_txt = None if s is None else f"{s:.9f}"
        lines.append(f"  {name:5s} = {_pm(format(ang[name], '.9f'), s_txt)} deg")
    trans = p["translation_m"]
    for i, name in enumerate(("t_x", "t_y", "t_z")):
        s = sig_of("translation_m", i)
        s_txt = None if s is None else f"{s:.4f}"
        lines.append(f"  {name:5s} = {_pm(format(trans[i], '.4f'), s_txt)} m")
    for i in range(4):
        s = sig_of("r", i)
        s_txt = None if s is None else f"{s:.6g}"
        lines.append(f"  r{i + 1}    = {_pm(format(p['r'][i], '.10g'), s_txt)}")
    for i in range(4):
        s = None if sig is None or "s" not in sig else sig["s"][i]
        s_txt = None if s is None else f"{s:.6g}"
        lines.append(f"  s{i + 1}    = {_pm(format(p['s'][i], '.9g'), s_txt)}")
    if report["quat_form"] == "scaled":
        lines.append(f"  scaled r = {np.array2string(np.array(p['r_scaled']), precision=10)}")
        lines.append(f"  scaled s = {np.array2string(np.array(p['s_scaled']), precision=9)}")
    lines.append("")
    lines.append(f"sigma0: {report['sigma0']:.4f}")
    lines.append("")
    lines.append("residuals [m]")
    lines.append(f"  {'point':<16s}{'v_x':>10s}{'v_y':>10s}{'v_z':>10s}"
                 f"{'v_X':>10s}{'v_Y':>10s}{'v_Z':>10s}")
    for row in report["residuals"]:
        vs = row["v_source_m"]
        vt = row["v_target_m"]
        lines.append(f"  {row['id']:<16s}" + "".join(f"{x:>10.4f}" for x in vs + vt))
    lines.append("")
    clo = report["closure"]
    lines.append(f"closure check: max deviation {clo['max_deviation_m']:.3e} m "
                 f"-> {'pass' if clo['pass'] else 'FAIL'}")
    lines.append("condition estimates per iteration: "
                 + " ".join(f"{c:.2e}" for c in report["condition_log"]))
    for w in report["warnings"]:
        lines.append(f"warning: {w}")
    if "covariance" in report:
        lines.append("")
        lines.append("covariance of (eps, psi, omega, t_x, t_y, t_z) [rad, m]")
        for row in report["covariance"]["c_par"]:
            lines.append("  " + " ".join(f"{x:>12.5g}" for x in row))
        if "c_qq" in report["covariance"]:
            lines.append("quaternion(+scale) covariance block")
            for row in report["covariance"]["c_qq"]:
                lines.append("  " + " ".join(f"{x:>12.5g}" for x in row))
    return "\n".join(lines) + "\n"


def write_report(report: dict, fmt: str, out: TextIO) -> None:
    if fmt == "json":
        json.dump(report, out, indent=2)
        out.write("\n")
    else:
        out.write(render_text(report))
