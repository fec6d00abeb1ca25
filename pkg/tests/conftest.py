import os

import pytest

from dqhelmert.io import read_points_csv

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data")

GEODETIC_CSV = os.path.join(DATA_DIR, "geodetic_7pt.csv")
SIMULATED_CSV = os.path.join(DATA_DIR, "simulated_4pt.csv")


@pytest.fixture(scope="session")
def case1():
    """Seven-point geodetic datum problem with per-point variances."""
    return read_points_csv(GEODETIC_CSV)


@pytest.fixture(scope="session")
def case2():
    """Four-point simulated problem with per-point scalar weights."""
    return read_points_csv(SIMULATED_CSV)


@pytest.fixture(scope="session")
def case1_result(case1):
    from dqhelmert import solve_constrained
    return solve_constrained(case1)


@pytest.fixture(scope="session")
def case2_result(case2):
    from dqhelmert import solve_constrained
    return solve_constrained(case2)
