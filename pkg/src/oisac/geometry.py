"""Scene definition and coordinate transforms.

Three coordinate systems are used throughout:

* the 3D world frame (origin at the floor center, z up),
* one 3D camera frame per O-AP (pinhole at the origin, z pointing down
  toward the floor),
* one 2D film-plane frame per camera.

All angles are stored in radians; degrees appear only in config files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

SPEED_OF_LIGHT = 299_792_458.0


class DegenerateDepthError(ValueError):
    """Device lies in the pinhole plane (camera z ~ 0)."""


@dataclass(frozen=True)
class Scenario:
    """Room, O-AP layout, device and camera parameters.

    ``tx_intensity`` is the emitted optical intensity per O-AP.  The paper
    normalizes it to 1 for the channel-gain definition; broadcast
    experiments drive it much higher (see ``harness.PHASE1_TX_INTENSITY``).
    """

    room_w: float = 5.0
    room_l: float = 5.0
    room_h: float = 3.0
    num_oaps: int = 4
    layout_radius: float = 1.92
    layout_angles: tuple = (
        math.pi / 4,
        3 * math.pi / 4,
        5 * math.pi / 4,
        7 * math.pi / 4,
    )
    pd_count: int = 4
    pd_spacing: float = 0.01
    pd_area: float = 1e-6
    semi_angle: float = math.pi / 3
    fov: float = math.pi / 3
    reflectance: float = 0.8
    focal_length: float = 0.05
    tx_intensity: float = 1.0

    def __post_init__(self):
        if min(self.room_w, self.room_l, self.room_h) <= 0:
            raise ValueError("room dimensions must be positive")
        if self.num_oaps < 1:
            raise ValueError("need at least one O-AP")
        if not 0 <= self.layout_radius <= min(self.room_w, self.room_l):
            raise ValueError("layout_radius outside [0, min(W, L)]")
        if len(self.layout_angles) != self.num_oaps:
            raise ValueError("layout_angles length must equal num_oaps")
        angles = tuple(float(a) % (2 * math.pi) for a in self.layout_angles)
        object.__setattr__(self, "layout_angles", angles)
        if not 0 <= self.reflectance <= 1:
            raise ValueError("reflectance must lie in [0, 1]")
        for name in ("semi_angle", "fov"):
            val = getattr(self, name)
            if not 0 < val <= math.pi / 2:
                raise ValueError(f"{name} must lie in (0, pi/2]")
        if self.pd_count < 1 or self.pd_area <= 0 or self.pd_spacing < 0:
            raise ValueError("bad PD array parameters")
        if self.focal_length <= 0 or self.tx_intensity <= 0:
            raise ValueError("focal_length and tx_intensity must be positive")

    @property
    def oap_positions(self):
        """(mu, 3) world coordinates of the O-APs on the ceiling."""
        ang = np.asarray(self.layout_angles)
        return np.column_stack(
            [
                self.layout_radius * np.cos(ang),
                self.layout_radius * np.sin(ang),
                np.full(self.num_oaps, self.room_h),
            ]
        )

    @property
    def pd_offsets(self):
        """(kappa, 3) offsets of the PD array around the device center.

        PDs sit on a square grid in the device plane, row-major from the
        corner, truncated to ``pd_count`` entries.
        """
        side = math.ceil(math.sqrt(self.pd_count))
        idx = np.arange(side) - (side - 1) / 2.0
        xx, yy = np.meshgrid(idx, idx)
        off = np.column_stack(
            [xx.ravel() * self.pd_spacing, yy.ravel() * self.pd_spacing]
        )[: self.pd_count]
        return np.column_stack([off, np.zeros(len(off))])

    def pd_positions(self, device_pos):
        return np.asarray(device_pos, float) + self.pd_offsets

    def with_layout(self, radius, angles):
        return replace(
            self,
            layout_radius=float(radius),
            layout_angles=tuple(float(a) for a in angles),
            num_oaps=len(tuple(angles)),
        )

    def with_tx_intensity(self, tx_intensity):
        return replace(self, tx_intensity=float(tx_intensity))


@dataclass(frozen=True)
class Pose:
    """Rigid transform world -> camera: p_C = Q @ p_D + t."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.rotation, float)
        t = np.asarray(self.translation, float)
        if q.shape != (3, 3) or t.shape != (3,):
            raise ValueError("rotation must be 3x3, translation length 3")
        if not np.allclose(q.T @ q, np.eye(3), atol=1e-12):
            raise ValueError("rotation is not orthonormal")
        if not math.isclose(float(np.linalg.det(q)), 1.0, abs_tol=1e-9):
            raise ValueError("rotation must be proper (det +1)")
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "translation", t)


@dataclass(frozen=True)
class CameraOffsets:
    """Per-camera (x, y) offsets relative to camera 1 in the shared
    camera orientation; the first entry is zero by construction."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, float)
        y = np.asarray(self.y, float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("offsets must be 1-D and equal length")
        if abs(x[0]) > 1e-12 or abs(y[0]) > 1e-12:
            raise ValueError("offsets are relative to camera 1 (first entry 0)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


def world_to_camera(p_world, pose: Pose):
    """Map a world point into a camera frame."""
    p = np.asarray(p_world, float)
    return p @ pose.rotation.T + pose.translation


def camera_to_world(p_cam, pose: Pose):
    p = np.asarray(p_cam, float)
    return (p - pose.translation) @ pose.rotation


def camera_to_film(p_cam, f_x, f_y):
    """Pinhole projection of a camera-frame point onto the film plane."""
    p = np.asarray(p_cam, float)
    z = p[..., 2]
    if np.any(np.abs(z) < 1e-12):
        raise DegenerateDepthError("device in the pinhole plane (z_C ~ 0)")
    return np.stack([f_x * p[..., 0] / z, f_y * p[..., 1] / z], axis=-1)


# Shared downward-facing orientation: camera x tracks world x, camera z
# points toward the floor.
_DOWNWARD = np.diag([1.0, -1.0, -1.0])


def build_default_poses(scenario: Scenario):
    """Construct the pose of every O-AP camera plus their relative offsets.

    All cameras share the downward orientation and sit at the O-AP
    positions, so every device has the same camera-frame depth and the
    offset relation x_Cm = x_C1 + off_x holds exactly.
    """
    poses = []
    for p_oap in scenario.oap_positions:
        poses.append(Pose(_DOWNWARD, -_DOWNWARD @ p_oap))
    deltas = (scenario.oap_positions[0] - scenario.oap_positions) @ _DOWNWARD.T
    offsets = CameraOffsets(deltas[:, 0], deltas[:, 1])
    return poses, offsets


_SCENARIO_KEYS = {
    "room_w",
    "room_l",
    "room_h",
    "num_oaps",
    "layout_radius",
    "layout_angles_deg",
    "pd_count",
    "pd_spacing",
    "pd_area",
    "semi_angle_deg",
    "fov_deg",
    "reflectance",
    "focal_length",
    "tx_intensity",
}


class ConfigError(ValueError):
    """Malformed scenario/experiment configuration."""


def scenario_from_dict(raw: dict) -> Scenario:
    unknown = set(raw) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    kwargs = {}
    for key, val in raw.items():
        if key == "layout_angles_deg":
            kwargs["layout_angles"] = tuple(math.radians(a) for a in val)
        elif key.endswith("_deg"):
            kwargs[key[:-4]] = math.radians(val)
        else:
            kwargs[key] = val
    try:
        return Scenario(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_scenario(path) -> Scenario:
    """Load a scenario from a YAML file (see README for the key names)."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping of scenario keys")
    return scenario_from_dict(raw)
