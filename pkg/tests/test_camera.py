"""Unit tests for the pinhole camera model."""

import numpy as np
import pytest

from raymeter.camera import (
    Intrinsics,
    PickOutOfBoundsError,
    PixelPick,
    Pose,
    look_at_pose,
    project_point,
    ray_from_pixel,
)

from oracles import point_line_distance, random_rotation

INTR = Intrinsics(fx=1000.0, fy=1000.0, cx=500.0, cy=500.0, width=2000, height=1000)


def identity_pose(center=(0.0, 0.0, 0.0)) -> Pose:
    return Pose(center=center, rotation=np.eye(3))


def random_pose(rng) -> Pose:
    return Pose(center=rng.normal(scale=5, size=3), rotation=random_rotation(rng))


def test_intrinsics_validation():
    with pytest.raises(ValueError):
        Intrinsics(fx=-1, fy=1, cx=1, cy=1, width=10, height=10)
    with pytest.raises(ValueError):
        Intrinsics(fx=1, fy=1, cx=20, cy=1, width=10, height=10)


def test_pose_requires_proper_rotation():
    with pytest.raises(ValueError):
        Pose(center=(0, 0, 0), rotation=np.eye(3) * 2.0)
    reflection = np.diag([1.0, 1.0, -1.0])
    with pytest.raises(ValueError):
        Pose(center=(0, 0, 0), rotation=reflection)


def test_principal_point_pick_gives_forward_axis():
    rng = np.random.default_rng(2)
    pose = random_pose(rng)
    ray = ray_from_pixel(pose, INTR, PixelPick(u=INTR.cx, v=INTR.cy, image_id="a"))
    assert np.allclose(ray.direction, pose.rotation[:, 2], atol=1e-12)
    assert np.array_equal(ray.origin, pose.center)


def test_one_focal_length_offset_pick():
    ray = ray_from_pixel(identity_pose(), INTR, PixelPick(u=1500.0, v=500.0))
    expected = np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0)
    assert np.allclose(ray.direction, expected, atol=1e-12)
    assert abs(ray.direction[0] - 0.7071) < 1e-4


def test_pick_out_of_bounds():
    with pytest.raises(PickOutOfBoundsError):
        ray_from_pixel(identity_pose(), INTR, PixelPick(u=-0.5, v=10.0))
    with pytest.raises(PickOutOfBoundsError):
        ray_from_pixel(identity_pose(), INTR, PixelPick(u=10.0, v=1000.5))


def test_project_optical_axis_point():
    rng = np.random.default_rng(4)
    pose = random_pose(rng)
    for depth in (0.1, 1.0, 57.0):
        point = pose.center + depth * pose.rotation[:, 2]
        u, v = project_point(pose, INTR, point)
        assert (u, v) == pytest.approx((INTR.cx, INTR.cy), abs=1e-9)


def test_project_point_behind_camera():
    pose = identity_pose()
    assert project_point(pose, INTR, (0.0, 0.0, -1.0)) is None
    assert project_point(pose, INTR, (0.0, 0.0, 0.0)) is None  # zero depth


def test_projection_ray_roundtrip():
    rng = np.random.default_rng(8)
    for _ in range(1000):
        pose = random_pose(rng)
        # random point inside the frustum, depth 0.5..50
        u = rng.uniform(0.0, INTR.width)
        v = rng.uniform(0.0, INTR.height)
        depth = rng.uniform(0.5, 50.0)
        d_cam = np.array([(u - INTR.cx) / INTR.fx, (v - INTR.cy) / INTR.fy, 1.0])
        point = pose.center + depth * (pose.rotation @ d_cam)
        pixel = project_point(pose, INTR, point)
        assert pixel is not None
        ray = ray_from_pixel(pose, INTR, PixelPick(u=pixel[0], v=pixel[1]))
        assert point_line_distance(point, ray.origin, ray.direction) < 1e-9
        assert np.array_equal(ray.origin, pose.center)


def test_look_at_pose_points_at_target():
    rng = np.random.default_rng(16)
    for _ in range(50):
        center = rng.normal(scale=10, size=3)
        target = rng.normal(scale=2, size=3)
        if np.linalg.norm(target - center) < 1e-3:
            continue
        pose = look_at_pose(center, target)
        u, v = project_point(pose, INTR, target)
        assert (u, v) == pytest.approx((INTR.cx, INTR.cy), abs=1e-6)
        # y-down convention: the image down axis must not point world-up
        assert pose.rotation[2, 1] <= 1e-12


def test_look_at_pose_straight_down():
    pose = look_at_pose((0, 0, 10), (0, 0, 0))
    assert np.allclose(pose.rotation[:, 2], [0, 0, -1])
    assert abs(np.linalg.det(pose.rotation) - 1.0) < 1e-12
