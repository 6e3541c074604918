"""Pinhole camera model: pixel picks to world rays and back.

Conventions, fixed once and used everywhere:

* Camera frame: +z forward into the scene, +x right, +y down.
* Image frame: origin at the top-left pixel corner, u right, v down,
  continuous coordinates with pixel (i, j) covering [i, i+1) x [j, j+1)
  and its center at (i + 0.5, j + 0.5). Sub-pixel picks are expected.
* ``Pose.rotation`` is the world-from-camera rotation: a camera-frame
  direction d maps to the world frame as ``rotation @ d``.

No lens distortion is modeled; rays come from posed ideal renderings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Ray, _vec3

# Depth below which a point counts as behind the camera (meters).
MIN_DEPTH = 1e-9


class PickOutOfBoundsError(Exception):
    """Pixel pick lies outside the referenced image."""


@dataclass
class Intrinsics:
    """Pinhole intrinsics in pixel units."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (self.width > 0 and self.height > 0):
            raise ValueError("image size must be positive")
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


@dataclass
class Pose:
    """Camera pose: center in world coordinates plus world-from-camera rotation."""

    center: np.ndarray
    rotation: np.ndarray

    def __post_init__(self) -> None:
        self.center = _vec3(self.center, "camera center")
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        if not np.all(np.isfinite(r)):
            raise ValueError("rotation must be finite")
        if np.max(np.abs(r.T @ r - np.eye(3))) > 1e-9:
            raise ValueError("rotation must be orthonormal within 1e-9")
        if abs(float(np.linalg.det(r)) - 1.0) > 1e-9:
            raise ValueError("rotation must have determinant +1")
        self.rotation = r


@dataclass
class PixelPick:
    """Sub-pixel image coordinates of an operator pick on one image."""

    u: float
    v: float
    image_id: str = ""


def pixel_direction(pose: Pose, intrinsics: Intrinsics, u: float, v: float) -> np.ndarray:
    """World-frame unit direction through image coordinates (u, v).

    Does not check image bounds; :func:`ray_from_pixel` is the bounded
    entry point and shares this code path.
    """
    d_cam = np.array(
        [
            (u - intrinsics.cx) / intrinsics.fx,
            (v - intrinsics.cy) / intrinsics.fy,
            1.0,
        ]
    )
    d_world = pose.rotation @ d_cam
    return d_world / np.linalg.norm(d_world)


def ray_from_pixel(pose: Pose, intrinsics: Intrinsics, pick: PixelPick) -> Ray:
    """Convert a pixel pick into a world-space measurement ray.

    The ray starts at the camera center and passes through the picked
    image point.

    Raises:
        PickOutOfBoundsError: If the pick lies outside [0, width] x
            [0, height].
    """
    if not (0.0 <= pick.u <= intrinsics.width and 0.0 <= pick.v <= intrinsics.height):
        raise PickOutOfBoundsError(
            f"pick ({pick.u}, {pick.v}) outside image "
            f"{intrinsics.width}x{intrinsics.height}"
        )
    direction = pixel_direction(pose, intrinsics, pick.u, pick.v)
    return Ray(origin=pose.center.copy(), direction=direction)


def project_point(
    pose: Pose, intrinsics: Intrinsics, point
) -> tuple[float, float] | None:
    """Project a world point to image coordinates (u, v).

    Returns None when the point is at or behind the camera plane
    (camera-frame depth <= 1e-9). The returned coordinates may lie outside
    the image bounds; visibility is the caller's concern.
    """
    p = _vec3(point, "point")
    p_cam = pose.rotation.T @ (p - pose.center)
    depth = float(p_cam[2])
    if depth <= MIN_DEPTH:
        return None
    u = intrinsics.fx * float(p_cam[0]) / depth + intrinsics.cx
    v = intrinsics.fy * float(p_cam[1]) / depth + intrinsics.cy
    return (u, v)


def look_at_pose(center, target, up=(0.0, 0.0, 1.0)) -> Pose:
    """Pose at ``center`` with the optical axis through ``target``.

    ``up`` picks the roll: the image +v (down) axis is aligned against it,
    so with the default world-z up, "up" in the image is up in the world.
    Falls back to a fixed right axis when the view direction is parallel
    to ``up``.
    """
    center = _vec3(center, "center")
    target = _vec3(target, "target")
    forward = target - center
    norm = float(np.linalg.norm(forward))
    if norm < 1e-12:
        raise ValueError("camera center and target coincide")
    z_axis = forward / norm
    up = _vec3(up, "up")
    x_axis = np.cross(z_axis, up)
    x_norm = float(np.linalg.norm(x_axis))
    if x_norm < 1e-9:
        x_axis = np.array([1.0, 0.0, 0.0])
        x_axis = x_axis - z_axis * float(x_axis @ z_axis)
        x_axis /= np.linalg.norm(x_axis)
    else:
        x_axis /= x_norm
    y_axis = np.cross(z_axis, x_axis)
    rotation = np.column_stack([x_axis, y_axis, z_axis])
    return Pose(center=center, rotation=rotation)
