import numpy as np
import pytest

from dqhelmert import (
    covariance_constrained,
    six_param_covariance,
    solve_scaled,
)
from dqhelmert.errors import GimbalSingularity
from dqhelmert.precision import (
    angle_jacobian,
    angle_jacobian_scaled,
    six_param_jacobian,
    translation_jacobian,
)
from dqhelmert.quat import random_unit_quat

from oracles import central_diff_jacobian

# reference 9x9 covariance block (lambda, r, s) of the seven-point problem
C9_GEODETIC = np.array([
    [1.173e-12, 2.067e-24, 6.201e-24, -2.067e-24, 1.577e-29, -2.436e-06, -3.965e-07, -2.801e-06, -1.664e-12],
    [3.821e-26, 5.524e-13, -2.404e-13, -1.89e-13, -2.31e-18, 1.021e-06, 3.424e-06, -1.372e-06, -1.28e-10],
    [-2.36e-25, -2.404e-13, 7.061e-13, 1.498e-13, 2.473e-18, -3.271e-06, -1.771e-06, 3.096e-06, 3.326e-11],
    [-1.561e-26, -1.89e-13, 1.498e-13, 4.343e-13, 1.82e-18, -4.221e-07, -2.707e-06, 7.502e-07, -3.793e-11],
    [1.654e-24, -2.31e-18, 2.473e-18, 1.82e-18, 1.531e-23, -1.058e-11, -1.86e-11, 1.184e-11, 2.913e-16],
    [-2.436e-06, 1.021e-06, -3.271e-06, -4.221e-07, -1.058e-11, 20.4, 7.451, -8.462, -0.0001811],
    [-3.965e-07, 3.424e-06, -1.771e-06, -2.707e-06, -1.86e-11, 7.451, 27.73, -8.724, -0.0004535],
    [-2.801e-06, -1.372e-06, 3.096e-06, 7.502e-07, 1.184e-11, -8.462, -8.724, 20.48, 0.0002287],
    [-1.664e-12, -1.28e-10, 3.326e-11, -3.793e-11, 2.91e-16, -0.0001811, -0.0004535, 0.0002287, 4.78e-08],
])

# reference 6x6 covariance of (eps, psi, omega, t_x, t_y, t_z), rad and m
CPAR_GEODETIC = np.array([
    [2.21e-12, -9.617e-13, -7.559e-13, -4.082e-06, -1.369e-05, 5.488e-06],
    [-9.617e-13, 2.824e-12, 5.994e-13, 1.308e-05, 7.083e-06, -1.238e-05],
    [-7.559e-13, 5.994e-13, 1.737e-12, 1.688e-06, 1.083e-05, -3.001e-06],
    [-4.082e-06, 1.308e-05, 1.688e-06, 81.59, 29.8, -33.84],
    [-1.369e-05, 7.083e-06, 1.083e-05, 29.8, 110.9, -34.89],
    [5.488e-06, -1.238e-05, -3.001e-06, -33.84, -34.89, 81.89],
])

C9_SIMULATED = np.array([
    [0.0233, 0.0000, 0.0000, 0.0000, 0.0000, -1.0498, -0.9073, -0.1395, -0.0538],
    [0.0000, 0.0024, -0.0003, 0.0000, -0.0000, 0.0096, 0.0270, -0.6107, -0.3483],
    [-0.0000, -0.0003, 0.0028, -0.0000, 0.0001, -0.0376, -0.0007, 0.8637, 0.0582],
    [-0.0000, 0.0000, -0.0000, 0.0012, 0.0004, 0.3023, -0.3265, -0.0146, 0.0018],
    [0.0000, -0.0000, 0.0001, 0.0004, 0.0001, 0.0933, -0.1021, 0.0224, 0.0056],
    [-1.0498, 0.0096, -0.0376, 0.3023, 0.0933, 143.2756, -43.8112, -6.7913, 2.5779],
    [-0.9073, 0.0270, -0.0007, -0.3265, -0.1021, -43.8112, 144.5059, -0.0372, -3.4099],
    [-0.1395, -0.6107, 0.8637, -0.0146, 0.0224, -6.7913, -0.0372, 388.9484, 96.0516],
    [-0.0538, -0.3483, 0.0582, 0.0018, 0.0056, 2.5779, -3.4099, 96.0516, 52.3736],
])

CPAR_SIMULATED = np.array([
    [0.01054, -0.001639, -0.0002172, -0.263, -0.2182, 2.495],
    [-0.001639, 0.010330, 0.0001593, 0.3052, -0.1286, -1.735],
    [-0.000217, 0.000159, 0.005117, -0.5107, 1.1930, -0.06824],
    [-0.263, 0.3052, -0.5107, 410.9, 0.8242, -57.93],
    [-0.2182, -0.1286, 1.193, 0.8242, 405.2, -12.61],
    [2.495, -1.735, -0.06824, -57.93, -12.61, 844.8],
])


def assert_matches_printed(computed, printed, rel=5e-3, floor_rel=1e-6):
    """Entrywise comparison against a printed covariance table.

    Entries far below the scale sqrt(C_ii * C_jj) are rounding noise in
    both the table and the computation (the printed table is not even
    symmetric there); they are compared against a scale floor instead of
    relatively.
    """
    d = np.sqrt(np.abs(np.diag(printed)))
    scale = np.outer(d, d)
    tol = np.maximum(rel * np.abs(printed), floor_rel * scale)
    bad = np.argwhere(np.abs(computed - printed) > tol)
    assert bad.size == 0, f"entries off: {[(i, j, computed[i, j], printed[i, j]) for i, j in bad]}"


def test_case1_quaternion_sigmas(case1_result):
    rep = covariance_constrained(case1_result)
    assert rep.sigma_lambda == pytest.approx(0.00000108, abs=1e-8)
    assert rep.sigma_r[0] == pytest.approx(7.43265e-7, abs=1e-11)
    assert rep.sigma_r[1] == pytest.approx(8.40281e-7, abs=1e-11)
    assert rep.sigma_r[2] == pytest.approx(6.590298e-7, abs=1e-11)
    assert rep.sigma_r[3] == pytest.approx(3.913e-12, abs=1e-14)
    # dual-part labels in the reference are rotated by one (s1 here)
    assert rep.sigma_s[0] == pytest.approx(4.5166, abs=1e-4)
    assert rep.sigma_s[1] == pytest.approx(5.2662, abs=1e-4)
    assert rep.sigma_s[2] == pytest.approx(4.5250, abs=1e-4)
    assert rep.sigma_s[3] == pytest.approx(0.000218, abs=1e-6)


def test_case1_covariance_block_table(case1_result):
    rep = covariance_constrained(case1_result)
    assert_matches_printed(rep.c_qq, C9_GEODETIC)


def test_case1_six_param_covariance(case1_result):
    rep = covariance_constrained(case1_result)
    assert_matches_printed(rep.c_par, CPAR_GEODETIC)
    six, c_par = six_param_covariance(case1_result, rep)
    assert np.degrees(rep.sigmas_six[0]) == pytest.approx(0.00008517, abs=1e-8)
    assert np.degrees(rep.sigmas_six[1]) == pytest.approx(0.00009629, abs=1e-8)
    assert np.degrees(rep.sigmas_six[2]) == pytest.approx(0.00007552, abs=1e-8)
    assert rep.sigmas_six[3] == pytest.approx(9.0327, abs=1e-4)
    assert rep.sigmas_six[4] == pytest.approx(10.5317, abs=1e-4)
    assert rep.sigmas_six[5] == pytest.approx(9.0495, abs=1e-4)
    assert rep.sigmas_six[3] == pytest.approx(np.sqrt(81.59), abs=2e-4)
    assert np.allclose(six.t, case1_result.translation)


def test_case2_quaternion_sigmas(case2_result):
    rep = covariance_constrained(case2_result)
    assert rep.sigma_lambda == pytest.approx(0.152489951, abs=1e-9)
    assert rep.sigma_r[3] == pytest.approx(0.010715192, abs=1e-9)
    assert rep.sigma_r[0] == pytest.approx(0.04893072, abs=1e-8)
    assert rep.sigma_s[0] == pytest.approx(11.9697, abs=1e-4)
    assert rep.sigma_s[3] == pytest.approx(7.23696, abs=1e-5)


def test_case2_covariance_block_table(case2_result):
    rep = covariance_constrained(case2_result)
    # four printed decimals; zero-ish entries compared against the scale floor
    d = np.sqrt(np.abs(np.diag(C9_SIMULATED)))
    tol = np.maximum(np.maximum(5e-3 * np.abs(C9_SIMULATED), 1e-4), 1e-6 * np.outer(d, d))
    assert np.all(np.abs(rep.c_qq - C9_SIMULATED) <= tol)


def test_case2_six_param_covariance(case2_result):
    rep = covariance_constrained(case2_result)
    assert_matches_printed(rep.c_par, CPAR_SIMULATED)
    assert rep.sigmas_six[5] == pytest.approx(29.06571, abs=1e-5)
    assert rep.sigmas_six[5] == pytest.approx(np.sqrt(844.8), abs=5e-3)
    assert np.degrees(rep.sigmas_six[2]) == pytest.approx(4.098509955, abs=1e-9)
    assert rep.c_par[3, 5] == pytest.approx(-57.93, rel=5e-3)


def test_scaled_mode_sigmas_case2(case2):
    res = solve_scaled(case2)
    rep = covariance_constrained(res)
    assert rep.sigma_lambda == pytest.approx(0.152489951, abs=1e-8)
    assert rep.sigma_r[3] == pytest.approx(0.052189395, abs=1e-8)
    assert rep.sigma_r[0] == pytest.approx(0.071517683, abs=1e-8)
    assert rep.sigma_s[0] == pytest.approx(9.36527, abs=1e-5)
    assert rep.sigma_s[3] == pytest.approx(4.94820, abs=1e-5)
    # six-parameter errors are identical to the unit form
    assert np.degrees(rep.sigmas_six[1]) == pytest.approx(5.8225900, abs=1e-6)
    assert rep.sigmas_six[3] == pytest.approx(20.2709, abs=1e-4)


def test_scaled_mode_sigmas_case1(case1):
    res = solve_scaled(case1)
    rep = covariance_constrained(res)
    assert rep.sigma_r[3] == pytest.approx(5.41461e-7, abs=1e-11)
    assert rep.sigma_s[0] == pytest.approx(4.5166, abs=1e-4)
    assert rep.sigmas_six[3] == pytest.approx(9.0327, abs=1e-4)


def test_angle_jacobian_matches_finite_differences():
    from dqhelmert.quat import euler_from_unit_quat
    rng = np.random.default_rng(51)

    def angles_as_written(r):
        r1, r2, r3, r4 = r
        return np.array([
            -np.arctan2(2 * (r4 * r1 + r2 * r3), r4 ** 2 - r1 ** 2 - r2 ** 2 + r3 ** 2),
            np.arcsin(2 * (r3 * r1 - r4 * r2)),
            -np.arctan2(2 * (r4 * r3 + r2 * r1), r4 ** 2 + r1 ** 2 - r2 ** 2 - r3 ** 2),
        ])

    for _ in range(30):
        r = random_unit_quat(rng, np.radians(120.0))
        if abs(np.cos(euler_from_unit_quat(r)[1])) < 0.1:
            continue
        jac = angle_jacobian(r)
        fd = central_diff_jacobian(angles_as_written, r, h=1e-7)
        assert np.max(np.abs(jac - fd)) < 1e-6 * max(1.0, np.max(np.abs(fd)))


def test_scaled_angle_jacobian_matches_finite_differences():
    from dqhelmert.quat import euler_from_unit_quat
    rng = np.random.default_rng(53)

    def angles_normalized(r):
        r = np.asarray(r, dtype=float)
        nu = r @ r
        r1, r2, r3, r4 = r
        return np.array([
            -np.arctan2(2 * (r4 * r1 + r2 * r3), r4 ** 2 - r1 ** 2 - r2 ** 2 + r3 ** 2),
            np.arcsin(2 * (r3 * r1 - r4 * r2) / nu),
            -np.arctan2(2 * (r4 * r3 + r2 * r1), r4 ** 2 + r1 ** 2 - r2 ** 2 - r3 ** 2),
        ])

    for _ in range(30):
        u = random_unit_quat(rng, np.radians(120.0))
        if abs(np.cos(euler_from_unit_quat(u)[1])) < 0.1:
            continue
        r = u * np.sqrt(rng.uniform(0.3, 3.0))
        jac = angle_jacobian_scaled(r)
        fd = central_diff_jacobian(angles_normalized, r, h=1e-7)
        assert np.max(np.abs(jac - fd)) < 1e-6 * max(1.0, np.max(np.abs(fd)))


def test_translation_jacobian_exact():
    from dqhelmert.quat import translation_from_dualquat
    rng = np.random.default_rng(57)
    for _ in range(20):
        r = rng.normal(size=4)
        s = rng.normal(size=4)
        jt = translation_jacobian(r, s)

        def tfun(x):
            return translation_from_dualquat(x[:4], x[4:])

        # bilinear form: a wide central difference carries no truncation
        # error, only rounding, so the match is essentially exact
        fd = central_diff_jacobian(tfun, np.concatenate([r, s]), h=0.5)
        assert np.max(np.abs(jt - fd)) < 1e-12 * max(1.0, np.max(np.abs(jt)))


def test_six_param_jacobian_angle_rows_zero_for_dual_part():
    rng = np.random.default_rng(59)
    r = random_unit_quat(rng, np.radians(60.0))
    j = six_param_jacobian(r, rng.normal(size=4))
    assert np.array_equal(j[:3, 4:], np.zeros((3, 4)))


def test_gimbal_singularity_raises():
    r = np.array([0.0, -np.sin(np.pi / 4), 0.0, np.cos(np.pi / 4)])
    with pytest.raises(GimbalSingularity):
        angle_jacobian(r)


def test_c_par_symmetric(case1_result, case2_result):
    for res in (case1_result, case2_result):
        rep = covariance_constrained(res)
        assert np.allclose(rep.c_par, rep.c_par.T, atol=1e-12 * np.max(np.abs(rep.c_par)))
        assert np.all(np.diag(rep.c_par) >= 0.0)
