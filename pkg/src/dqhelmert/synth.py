"""Seeded synthetic problem generator for testing and the `gen` subcommand."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quat
from .problem import (
    ControlPointPair,
    PerPointScalarWeights,
    PerPointVariances,
    Problem,
    UnitWeights,
)


@dataclass(frozen=True)
class PlantedTransform:
    """Ground truth used to build a synthetic problem."""

    lam: float
    r: np.ndarray
    t: np.ndarray

    @property
    def rotation(self) -> np.ndarray:
        return quat.rotation_from_unit_quat(self.r)


def make_problem(seed: int, n: int = 8, dim: int = 3, max_angle_deg: float = 90.0,
                 lam_range: tuple[float, float] = (0.5, 3.0),
                 extent: float = 200.0, noise_source: float = 0.0,
                 noise_target: float = 0.0, weighting: str = "unit",
                 mode: str = "symmetric") -> tuple[Problem, PlantedTransform]:
    """Build a random problem with a known planted similarity transform.

    With zero noise the planted parameters are recovered exactly; with
    noise, the per-frame standard deviations feed the stochastic model
    when ``weighting`` is "variances".  In 2D mode the rotation is about
    the z axis and all z coordinates are zero.
    """
    rng = np.random.default_rng(seed)
    src = rng.uniform(-extent, extent, (n, 3))
    if dim == 2:
        src[:, 2] = 0.0
        ang = rng.uniform(0.0, np.radians(max_angle_deg))
        sgn = rng.choice([-1.0, 1.0])
        r = np.array([0.0, 0.0, np.sin(sgn * ang / 2.0), np.cos(sgn * ang / 2.0)])
    else:
        r = quat.random_unit_quat(rng, np.radians(max_angle_deg))
    lam = rng.uniform(*lam_range)
    t = rng.uniform(-5.0 * extent, 5.0 * extent, 3)
    if dim == 2:
        t[2] = 0.0
    rot = quat.rotation_from_unit_quat(r)
    dst = lam * src @ rot.T + t

    e_src = rng.normal(0.0, noise_source, (n, 3)) if noise_source else np.zeros((n, 3))
    e_dst = rng.normal(0.0, noise_target, (n, 3)) if noise_target else np.zeros((n, 3))
    if dim == 2:
        e_src[:, 2] = 0.0
        e_dst[:, 2] = 0.0
    src_obs = src + e_src
    dst_obs = dst + e_dst

    points = tuple(
        ControlPointPair(f"P{i + 1}", *src_obs[i], *dst_obs[i]) for i in range(n)
    )
    if weighting == "variances":
        vs = max(noise_source, 1e-6) ** 2
        vt = max(noise_target, 1e-6) ** 2
        weights = PerPointVariances((vs,) * n, (vt,) * n)
    elif weighting == "scalar":
        weights = PerPointScalarWeights(tuple(rng.uniform(0.5, 4.0, n)))
    else:
        weights = UnitWeights()
    problem = Problem(points=points, weights=weights, mode=mode, dim=dim)
    return problem, PlantedTransform(lam=float(lam), r=r, t=t)
