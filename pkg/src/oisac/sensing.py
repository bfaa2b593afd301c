"""Multi-camera localization from noisy film-plane measurements.

The target reflects the superposed illumination; each camera sees the
reflection at its pinhole projection plus Gaussian noise whose variance
scales inversely with the reflected intensity reaching that camera.
Stacking the projection equations of all cameras (sharing orientation
and depth) gives an overdetermined linear system in the camera-1
coordinates of the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import channel
from .geometry import (
    CameraOffsets,
    Pose,
    build_default_poses,
    camera_to_film,
    camera_to_world,
    world_to_camera,
)


class InsufficientIlluminationError(RuntimeError):
    """Fewer than two cameras receive reflected light from the target."""


class RankDeficiencyError(np.linalg.LinAlgError):
    """The stacked projection system does not determine a 3D position."""


@dataclass(frozen=True)
class SensingMeasurement:
    camera_index: int
    film: np.ndarray  # (2,) measured film-plane coordinates
    variance: float  # per-axis noise variance


@dataclass(frozen=True)
class SensingSolution:
    p_camera1: np.ndarray
    p_world: np.ndarray
    residual: float


def reference_intensities(scenario, pattern, p_target, aim=None):
    """Reflected intensity reaching every camera, as one array."""
    return np.array(
        [
            float(channel.reflected_intensity(scenario, pattern, p_target, m, aim))
            for m in range(scenario.num_oaps)
        ]
    )


def synthesize_measurements(
    scenario, pattern, p_target, eta, sigma_i2, rng, poses=None, aim=None
):
    """Noisy film-plane coordinates of the target in every camera.

    Per-axis noise is N(0, eta * sigma_i2 / I_ref_m); sigma_i2 = 0
    reproduces the exact projections.  Cameras receiving no reflected
    light are dropped; fewer than two usable cameras (or a dark
    reference camera) is an error.
    """
    if poses is None:
        poses, _ = build_default_poses(scenario)
    if scenario.num_oaps < 2:
        # structural, not an illumination problem: one camera can never
        # pin down three coordinates
        raise RankDeficiencyError("at least 2 pinhole cameras are required")
    i_ref = reference_intensities(scenario, pattern, p_target, aim)
    visible = i_ref > 0
    if np.count_nonzero(visible) < 2 or not visible[0]:
        raise InsufficientIlluminationError(
            "need reflected light at the reference camera and one more"
        )
    out = []
    f = scenario.focal_length
    for m in np.flatnonzero(visible):
        proj = camera_to_film(world_to_camera(p_target, poses[m]), f, f)
        var = eta * sigma_i2 / i_ref[m]
        noisy = proj if sigma_i2 == 0 else proj + rng.normal(0.0, math.sqrt(var), 2)
        out.append(SensingMeasurement(camera_index=int(m), film=noisy, variance=var))
    return out


def assemble_system(measurements, offsets: CameraOffsets, f_x, f_y):
    """Stack the pinhole equations into Sigma p_C1 = gamma.

    Rows per camera: [f_x, 0, -x_m] and [0, f_y, -y_m]; gamma holds 0
    for the reference camera and -f * offset for the others (a constant
    vector, independent of the measurements).
    """
    if len(measurements) < 2:
        raise RankDeficiencyError("need at least 2 cameras")
    rows, rhs = [], []
    for meas in measurements:
        x_m, y_m = meas.film
        m = meas.camera_index
        rows.append([f_x, 0.0, -x_m])
        rows.append([0.0, f_y, -y_m])
        rhs.append(-f_x * offsets.x[m])
        rhs.append(-f_y * offsets.y[m])
    sigma = np.array(rows)
    gamma = np.array(rhs)
    if np.linalg.matrix_rank(sigma, tol=1e-12) < 3:
        raise RankDeficiencyError("projection system is rank-deficient")
    return sigma, gamma


def solve_position(sigma, gamma, pose_1: Pose) -> SensingSolution:
    """Least-squares solve (QR-backed) and transform back to the world."""
    sol, res, rank, _ = np.linalg.lstsq(sigma, gamma, rcond=None)
    if rank < 3:
        raise RankDeficiencyError("normal matrix is singular")
    residual = float(np.linalg.norm(sigma @ sol - gamma))
    return SensingSolution(
        p_camera1=sol,
        p_world=camera_to_world(sol, pose_1),
        residual=residual,
    )


def locate_target(scenario, pattern, p_target, eta, sigma_i2, rng, aim=None):
    """One synthesize -> assemble -> solve round trip."""
    poses, offsets = build_default_poses(scenario)
    meas = synthesize_measurements(
        scenario, pattern, p_target, eta, sigma_i2, rng, poses, aim
    )
    f = scenario.focal_length
    sigma, gamma = assemble_system(meas, offsets, f, f)
    return solve_position(sigma, gamma, poses[0])


def run_mse(
    scenario,
    pattern,
    targets,
    trials=1000,
    eta=1.0,
    sigma_i2=1e-12,
    seed=0,
    aim=None,
):
    """Monte Carlo localization MSE at one or more target positions.

    Each (target, trial) pair gets its own RNG substream keyed by its
    position in the list, so a run is reproducible for a given seed and
    target order; squared errors accumulate with compensated summation.
    """
    if trials < 100:
        raise ValueError("trials must be at least 100")
    targets = np.atleast_2d(np.asarray(targets, float))
    poses, offsets = build_default_poses(scenario)
    f = scenario.focal_length
    root = np.random.SeedSequence(seed)
    target_streams = root.spawn(len(targets))
    out = []
    for p_target, t_stream in zip(targets, target_streams):
        sq_errors = []
        for trial_stream in t_stream.spawn(trials):
            rng = np.random.default_rng(trial_stream)
            meas = synthesize_measurements(
                scenario, pattern, p_target, eta, sigma_i2, rng, poses, aim
            )
            sigma, gamma = assemble_system(meas, offsets, f, f)
            sol = solve_position(sigma, gamma, poses[0])
            sq_errors.append(float(np.sum((sol.p_world - p_target) ** 2)))
        out.append(math.fsum(sq_errors) / trials)
    return out
