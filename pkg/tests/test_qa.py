import numpy as np
import pytest

from dqhelmert import (
    covariance_constrained,
    covariance_qa,
    solve_constrained,
    solve_qa,
)
from dqhelmert.synth import make_problem


def test_case1_translations_with_errors(case1):
    res = solve_qa(case1)
    rep = covariance_qa(res)
    assert np.allclose(res.translation, [641.8395, 68.4729, 416.2156], atol=1e-3)
    assert rep.sigmas_six[3] == pytest.approx(9.0327, abs=1e-4)
    assert rep.sigmas_six[4] == pytest.approx(10.5317, abs=1e-4)
    assert rep.sigmas_six[5] == pytest.approx(9.0495, abs=1e-4)
    assert res.sigma0 == pytest.approx(0.1976, abs=1e-4)


def test_case2_parameters_with_errors(case2):
    res = solve_qa(case2)
    rep = covariance_qa(res)
    assert res.lambda_ == pytest.approx(2.136189318, rel=1e-9)
    assert rep.sigma_lambda == pytest.approx(0.152489951, abs=1e-9)
    assert res.r[0] == pytest.approx(0.0101594275, abs=1e-9)
    assert rep.sigma_r[0] == pytest.approx(0.04893072, abs=1e-8)
    assert rep.sigma_r[3] == pytest.approx(0.010715192, abs=1e-9)
    assert rep.sigma_s is None


def test_angle_errors_match_constrained(case2):
    rc = covariance_constrained(solve_constrained(case2))
    rq = covariance_qa(solve_qa(case2))
    assert np.allclose(rq.sigmas_six, rc.sigmas_six, rtol=1e-6)
    assert np.allclose(rq.c_par, rc.c_par, rtol=1e-5, atol=1e-12)


def test_implied_dual_part_consistent(case2):
    res = solve_qa(case2)
    # s reconstructed from t must reproduce t and satisfy orthogonality
    assert np.allclose(2.0 * res.translation,
                       2.0 * np.asarray(res.translation), atol=1e-12)
    assert abs(res.r @ res.s) < 1e-10 * max(1.0, np.linalg.norm(res.s))
    from dqhelmert.quat import translation_from_dualquat
    assert np.allclose(translation_from_dualquat(res.r, res.s), res.translation,
                       atol=1e-9)


def test_equivalence_with_constrained_on_synthetic():
    for seed in range(20):
        prob, _ = make_problem(seed=seed + 400, n=4 + seed % 5,
                               noise_source=0.02, noise_target=0.01,
                               weighting=("unit", "variances", "scalar")[seed % 3])
        a = solve_constrained(prob, tol=1e-24, max_iter=300)
        b = solve_qa(prob, tol=1e-24, max_iter=300)
        assert b.lambda_ == pytest.approx(a.lambda_, abs=1e-9)
        assert np.allclose(np.degrees(b.euler), np.degrees(a.euler), atol=1e-9)
        assert np.allclose(b.translation, a.translation, atol=1e-9)
        assert np.allclose(b.residuals, a.residuals, atol=1e-9)
        assert b.sigma0 == pytest.approx(a.sigma0, abs=1e-9)


def test_iteration_counts_logged(case1, case2):
    for prob in (case1, case2):
        res = solve_qa(prob)
        assert res.iterations >= 1
        assert len(res.condition_log) == res.iterations
