import math

import numpy as np
import pytest

from oisac.geometry import (
    CameraOffsets,
    ConfigError,
    DegenerateDepthError,
    Pose,
    Scenario,
    build_default_poses,
    camera_to_film,
    camera_to_world,
    scenario_from_dict,
    world_to_camera,
)


def test_default_scenario():
    sc = Scenario()
    assert sc.num_oaps == 4
    assert sc.oap_positions.shape == (4, 3)
    assert np.allclose(sc.oap_positions[:, 2], sc.room_h)
    assert np.allclose(np.hypot(*sc.oap_positions[:, :2].T), sc.layout_radius)


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario(room_w=-1.0)
    with pytest.raises(ValueError):
        Scenario(num_oaps=3)  # angle list length mismatch
    with pytest.raises(ValueError):
        Scenario(reflectance=1.5)
    with pytest.raises(ValueError):
        Scenario(fov=2.0)
    with pytest.raises(ValueError):
        Scenario(tx_intensity=0.0)


def test_with_layout_replaces_count():
    sc = Scenario().with_layout(1.0, (0.0, 1.0, 2.0))
    assert sc.num_oaps == 3
    assert sc.layout_radius == 1.0


def test_pd_offsets_grid():
    sc = Scenario()
    off = sc.pd_offsets
    assert off.shape == (4, 3)
    assert np.allclose(off.mean(axis=0), 0.0)
    assert np.allclose(np.abs(off[:, :2]), sc.pd_spacing / 2)
    pds = sc.pd_positions((1.0, -2.0, 0.5))
    assert np.allclose(pds.mean(axis=0), (1.0, -2.0, 0.5))


def test_pose_validation():
    with pytest.raises(ValueError):
        Pose(np.eye(3) * 2.0, np.zeros(3))
    with pytest.raises(ValueError):
        Pose(np.diag([1.0, 1.0, -1.0]), np.zeros(3))  # det -1


def test_world_camera_round_trip():
    poses, _ = build_default_poses(Scenario())
    rng = np.random.default_rng(3)
    for pose in poses:
        p = rng.uniform(-2, 2, 3)
        assert np.allclose(camera_to_world(world_to_camera(p, pose), pose), p)


def test_downward_camera_depth():
    sc = Scenario()
    poses, offsets = build_default_poses(sc)
    p = np.array([0.3, -0.7, 0.0])
    depths = [world_to_camera(p, pose)[2] for pose in poses]
    # shared orientation: every camera sees the same depth
    assert np.allclose(depths, sc.room_h)
    assert offsets.x[0] == 0.0 and offsets.y[0] == 0.0
    # offset relation x_Cm = x_C1 + off_x
    c1 = world_to_camera(p, poses[0])
    for m, pose in enumerate(poses):
        cm = world_to_camera(p, pose)
        assert np.allclose(cm[:2], c1[:2] + [offsets.x[m], offsets.y[m]])


def test_film_projection():
    p_cam = np.array([0.2, -0.4, 2.0])
    film = camera_to_film(p_cam, 0.05, 0.05)
    assert np.allclose(film, [0.05 * 0.1, 0.05 * -0.2])
    with pytest.raises(DegenerateDepthError):
        camera_to_film(np.array([1.0, 1.0, 0.0]), 0.05, 0.05)


def test_camera_offsets_validation():
    with pytest.raises(ValueError):
        CameraOffsets(np.array([1.0, 0.0]), np.array([0.0, 0.0]))


def test_scenario_from_dict():
    sc = scenario_from_dict(
        {"room_w": 4.0, "semi_angle_deg": 60.0, "num_oaps": 4}
    )
    assert sc.room_w == 4.0
    assert math.isclose(sc.semi_angle, math.pi / 3)
    with pytest.raises(ConfigError):
        scenario_from_dict({"room_width": 4.0})
    with pytest.raises(ConfigError):
        scenario_from_dict({"reflectance": 2.0})
