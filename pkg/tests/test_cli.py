import json
import os

import numpy as np
import pytest

from dqhelmert.cli import main
from dqhelmert.errors import ParseError
from dqhelmert.io import read_new_points_csv, read_points_csv

from conftest import GEODETIC_CSV, SIMULATED_CSV


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_read_points_csv_variances(case1):
    assert case1.n == 7
    assert case1.points[0].id == "Solitude"
    assert case1.weights.var_source[0] == 0.1433


def test_read_points_malformed_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,x,y,z,X,Y,Z\na,b,c\n")
    with pytest.raises(ParseError) as err:
        read_points_csv(str(path))
    assert "row 1" in str(err.value)


def test_read_points_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("foo,bar\n1,2\n")
    with pytest.raises(ParseError):
        read_points_csv(str(path))


def test_read_points_2d(tmp_path):
    path = tmp_path / "flat.csv"
    path.write_text("id,x,y,X,Y\nA,0,0,1,1\nB,1,0,2,1\nC,0,1,1,2\n")
    prob = read_points_csv(str(path), dim=2)
    assert prob.dim == 2
    assert np.all(prob.source[:, 2] == 0.0)
    assert np.all(prob.target[:, 2] == 0.0)


def test_read_new_points_dimension_mismatch(tmp_path):
    path = tmp_path / "new.csv"
    path.write_text("id,x,y\nA,1,2\n")
    with pytest.raises(ParseError) as err:
        read_new_points_csv(str(path), dim=3)
    assert "dimension mismatch" in str(err.value)


def test_solve_json_matches_reference(capsys):
    code, out, _ = run_cli(capsys, "solve", GEODETIC_CSV, "--format", "json",
                           "--method", "dqa-simplified")
    assert code == 0
    rep = json.loads(out)
    assert rep["parameters"]["lambda"] == pytest.approx(1.00000561109, abs=1e-10)
    assert rep["parameters"]["translation_m"] == pytest.approx([641.8395, 68.4729, 416.2156],
                                                               abs=1e-3)
    assert rep["std_errors"]["translation_m"] == pytest.approx([9.0327, 10.5317, 9.0495],
                                                               abs=1e-4)
    assert rep["sigma0"] == pytest.approx(0.1976, abs=1e-4)
    assert rep["closure"]["pass"] is True


def test_solve_text_contains_parameter_block(capsys):
    code, out, _ = run_cli(capsys, "solve", SIMULATED_CSV)
    assert code == 0
    assert "lambda = 2.1361893189 +/-" in out
    assert "omega = 34.686929715" in out
    assert "closure check" in out and "pass" in out


def test_solve_residual_block_matches_reference(capsys):
    code, out, _ = run_cli(capsys, "solve", SIMULATED_CSV, "--format", "json")
    rep = json.loads(out)
    v3 = rep["residuals"][2]["v_source_m"]
    # reference residual table prints the opposite sign convention
    assert v3[0] == pytest.approx(8.6615, abs=1e-3)


def test_text_and_json_same_numbers(capsys):
    _, out_json, _ = run_cli(capsys, "solve", SIMULATED_CSV, "--format", "json")
    _, out_text, _ = run_cli(capsys, "solve", SIMULATED_CSV, "--format", "text")
    rep = json.loads(out_json)
    lam_text = [ln for ln in out_text.splitlines() if "lambda =" in ln][0]
    assert f"{rep['parameters']['lambda']:.11g}" in lam_text


def test_reports_bit_reproducible(capsys):
    _, a, _ = run_cli(capsys, "solve", GEODETIC_CSV, "--format", "json",
                      "--full-covariance")
    _, b, _ = run_cli(capsys, "solve", GEODETIC_CSV, "--format", "json",
                      "--full-covariance")
    assert a == b


def test_solve_scaled_form(capsys):
    code, out, _ = run_cli(capsys, "solve", SIMULATED_CSV, "--quat-form", "scaled",
                           "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["parameters"]["r_scaled"][3] == pytest.approx(1.39482577632, rel=1e-6)
    assert rep["parameters"]["s_scaled"][0] == pytest.approx(51.3785932, rel=1e-6)


def test_scaled_requires_constrained(capsys):
    code, _, err = run_cli(capsys, "solve", SIMULATED_CSV, "--quat-form", "scaled",
                           "--method", "qa")
    assert code == 2
    assert "scaled" in err


def test_solve_parse_error_exit_code(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,x,y,z,X,Y,Z\na,b,c\n")
    code, _, err = run_cli(capsys, "solve", str(path))
    assert code == 2
    assert "input error" in err


def test_solve_degenerate_exit_code(capsys, tmp_path):
    path = tmp_path / "line.csv"
    rows = ["id,x,y,z,X,Y,Z"] + [f"P{i},{i},{2 * i},{-i},{i},{2 * i},{-i}" for i in range(1, 5)]
    path.write_text("\n".join(rows) + "\n")
    code, _, err = run_cli(capsys, "solve", str(path))
    assert code == 1
    assert "DegenerateGeometry" in err


def test_transform_identity_echo(capsys, tmp_path):
    pts = tmp_path / "pts.csv"
    pts.write_text("id,x,y,z,X,Y,Z\nA,0,0,0,0,0,0\nB,1,0,0,1,0,0\nC,0,1,0,0,1,0\nD,0,0,1,0,0,1\n")
    new = tmp_path / "new.csv"
    new.write_text("id,x,y,z\nQ,5,6,7\n")
    code, out, _ = run_cli(capsys, "transform", str(pts), str(new))
    assert code == 0
    line = out.splitlines()[1].split(",")
    assert line[0] == "Q"
    assert [float(x) for x in line[4:]] == pytest.approx([5.0, 6.0, 7.0], abs=1e-6)


def test_transform_from_json_report(capsys, tmp_path):
    report_path = tmp_path / "solve.json"
    code, out, _ = run_cli(capsys, "solve", SIMULATED_CSV, "--format", "json",
                           "--out", str(report_path))
    assert code == 0
    new = tmp_path / "new.csv"
    new.write_text("id,x,y,z\nP1,30,40,10\n")
    code, out, _ = run_cli(capsys, "transform", str(report_path), str(new))
    assert code == 0
    vals = [float(x) for x in out.splitlines()[1].split(",")[4:]]
    # mapping the raw control point equals its corrected target minus the
    # rotated-and-scaled source correction
    with open(report_path) as fh:
        rep = json.load(fh)
    from dqhelmert.quat import rotation_from_unit_quat
    lam = rep["parameters"]["lambda"]
    rot = rotation_from_unit_quat(np.array(rep["parameters"]["r"]))
    v_src = np.array(rep["residuals"][0]["v_source_m"])
    v_dst = np.array(rep["residuals"][0]["v_target_m"])
    expected = np.array([290.0, 150.0, 15.0]) + v_dst - lam * rot @ v_src
    assert vals == pytest.approx(expected.tolist(), abs=1e-5)


def test_compare_agreement(capsys):
    code, out, _ = run_cli(capsys, "compare", SIMULATED_CSV, "--format", "json")
    assert code == 0
    table = json.loads(out)
    assert table["agreement"] == "PASS"
    assert table["max_pairwise_deviation"] < 1e-6
    assert len(table["columns"]) == 4
    iters = [c["iterations"] for c in table["columns"].values()]
    assert all(i >= 1 for i in iters)


def test_compare_text_output(capsys):
    code, out, _ = run_cli(capsys, "compare", GEODETIC_CSV)
    assert code == 0
    assert "max pairwise deviation" in out
    assert "PASS" in out


def test_compare_degenerate_annotations(capsys, tmp_path):
    path = tmp_path / "line.csv"
    rows = ["id,x,y,z,X,Y,Z"] + [f"P{i},{i},{2 * i},{-i},{i},{2 * i},{-i}" for i in range(1, 5)]
    path.write_text("\n".join(rows) + "\n")
    code, out, _ = run_cli(capsys, "compare", str(path), "--format", "json")
    assert code == 1
    table = json.loads(out)
    assert all("error" in col for col in table["columns"].values())
    assert all("DegenerateGeometry" in col["error"] for col in table["columns"].values())


def test_gen_roundtrip(capsys, tmp_path):
    out_csv = tmp_path / "synth.csv"
    code, _, err = run_cli(capsys, "gen", "--seed", "9", "--n", "6",
                           "--out", str(out_csv))
    assert code == 0
    prob = read_points_csv(str(out_csv))
    from dqhelmert import solve_constrained
    res = solve_constrained(prob)
    lam_truth = float(err.split("lambda=")[1].split(" ")[0])
    assert res.lambda_ == pytest.approx(lam_truth, abs=1e-6)


def test_figures_written(capsys, tmp_path):
    figdir = tmp_path / "figs"
    code, _, _ = run_cli(capsys, "solve", SIMULATED_CSV, "--figures", str(figdir),
                         "--out", str(tmp_path / "rep.txt"))
    assert code == 0
    assert (figdir / "residuals.png").exists()
    assert (figdir / "convergence.png").exists()
    code, _, _ = run_cli(capsys, "compare", SIMULATED_CSV, "--figures", str(figdir),
                         "--out", str(tmp_path / "cmp.txt"))
    assert code == 0
    assert (figdir / "method_agreement.png").exists()


def test_solve_2d_mode(capsys, tmp_path):
    from dqhelmert.synth import make_problem
    prob, truth = make_problem(seed=5, n=6, dim=2, max_angle_deg=60.0)
    path = tmp_path / "flat.csv"
    rows = ["id,x,y,X,Y"] + [f"{p.id},{p.x:.9f},{p.y:.9f},{p.X:.9f},{p.Y:.9f}"
                             for p in prob.points]
    path.write_text("\n".join(rows) + "\n")
    code, out, _ = run_cli(capsys, "solve", str(path), "--dim", "2", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["parameters"]["lambda"] == pytest.approx(truth.lam, abs=1e-8)
    assert rep["dof_2d"] == 2 * 6 - 4
    assert rep["parameters"]["angles_deg"]["eps"] == pytest.approx(0.0, abs=1e-9)
    assert rep["parameters"]["angles_deg"]["psi"] == pytest.approx(0.0, abs=1e-9)


def test_weight_matrix_file(capsys, tmp_path):
    # unit matrix supplied explicitly reproduces the unweighted solve
    pts = tmp_path / "pts.csv"
    rows = ["id,x,y,z,X,Y,Z"]
    rng = np.random.default_rng(12)
    src = rng.uniform(-40, 40, (5, 3))
    rot = np.eye(3)
    dst = 1.5 * src @ rot.T + np.array([3.0, 4.0, 5.0]) + rng.normal(0, 0.01, (5, 3))
    for i in range(5):
        rows.append(f"P{i}," + ",".join(f"{v:.6f}" for v in [*src[i], *dst[i]]))
    pts.write_text("\n".join(rows) + "\n")
    wfile = tmp_path / "w.txt"
    np.savetxt(wfile, np.eye(30))
    _, out_w, _ = run_cli(capsys, "solve", str(pts), "--weights", str(wfile),
                          "--format", "json")
    _, out_u, _ = run_cli(capsys, "solve", str(pts), "--format", "json")
    lam_w = json.loads(out_w)["parameters"]["lambda"]
    lam_u = json.loads(out_u)["parameters"]["lambda"]
    assert lam_w == pytest.approx(lam_u, abs=1e-10)
