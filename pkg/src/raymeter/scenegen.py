"""Synthetic posed-image projects for driving the service and UI.

Generates a ready-to-serve project directory: a manifest with per-image
pose and intrinsics, flat-shaded PNG renderings with a high-contrast cross
marker at every target point's projected location, and a ground-truth CSV.
Deterministic for a given camera count and seed, so golden tests can pick
marker centers and compare against the truth file.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from . import formats
from .camera import project_point
from .session import Project, ProjectImage, project_to_dict
from .simulate import SyntheticScene, make_ring_scene

# Target layout for the ring preset: offsets (meters) from the scene
# center, chosen to stay inside every camera's frustum, plus one marker
# color each (high contrast against the background, mutually distinct).
RING_TARGET_OFFSETS = [
    ("p1", (0.0, 0.0, 0.0), (255, 40, 40)),
    ("p2", (1.6, 0.0, 0.45), (40, 160, 255)),
    ("p3", (-1.1, 1.2, -0.3), (40, 200, 80)),
    ("p4", (0.4, -1.5, 0.8), (230, 160, 20)),
    ("p5", (-0.8, -0.9, 0.25), (200, 60, 220)),
]

BACKGROUND = (34, 34, 38)
MARKER_ARM = 9  # cross arm length in pixels


def draw_cross(draw: ImageDraw.ImageDraw, iu: int, iv: int, color) -> None:
    draw.line([(iu - MARKER_ARM, iv), (iu + MARKER_ARM, iv)], fill=color)
    draw.line([(iu, iv - MARKER_ARM), (iu, iv + MARKER_ARM)], fill=color)


def render_view(pose, intrinsics, targets) -> Image.Image:
    """Flat background plus one symmetric cross per visible target.

    The cross is centered on the pixel containing the projected point, so
    its center (at half-integer pixel coordinates) sits within 0.5 px of
    the exact projection.
    """
    image = Image.new("RGB", (intrinsics.width, intrinsics.height), BACKGROUND)
    draw = ImageDraw.Draw(image)
    for _, point, color in targets:
        pixel = project_point(pose, intrinsics, point)
        if pixel is None:
            continue
        u, v = pixel
        if not (0 <= u <= intrinsics.width and 0 <= v <= intrinsics.height):
            continue
        draw_cross(draw, int(np.floor(u)), int(np.floor(v)), color)
    return image


def ring_targets(center) -> list[tuple[str, np.ndarray, tuple]]:
    center = np.asarray(center, dtype=np.float64)
    return [
        (pid, center + np.asarray(offset), color)
        for pid, offset, color in RING_TARGET_OFFSETS
    ]


def generate_ring_project(
    out_dir,
    cameras: int = 5,
    radius: float = 10.0,
    seed: int = 0,
    project_id: str | None = None,
) -> dict:
    """Write a complete ring-preset project directory.

    Layout: ``<out_dir>/manifest.json``, ``<out_dir>/images/cam??.png``
    and ``<out_dir>/truth.csv``. The manifest id defaults to the directory
    name so the parent can be used directly as a served data directory.

    Returns the manifest document.
    """
    out_dir = Path(out_dir)
    images_dir = out_dir / "images"
    images_dir.mkdir(parents=True, exist_ok=True)
    scene = make_ring_scene(radius=radius, count=cameras, target=(0.0, 0.0, 0.0), seed=seed)
    targets = ring_targets((0.0, 0.0, 0.0))

    project_images = []
    for k, (pose, intrinsics) in enumerate(scene.cameras):
        image_id = f"cam{k:02d}"
        filename = f"images/{image_id}.png"
        render_view(pose, intrinsics, targets).save(out_dir / filename)
        project_images.append(
            ProjectImage(image_id=image_id, file=filename, intrinsics=intrinsics, pose=pose)
        )

    project = Project(
        id=project_id or out_dir.name,
        name=f"Synthetic ring ({cameras} cameras)",
        images=project_images,
    )
    manifest = project_to_dict(project)
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    formats.write_points_csv(
        out_dir / "truth.csv", [(pid, point) for pid, point, _ in targets]
    )
    return manifest


def scene_for_project(manifest: dict) -> SyntheticScene:
    """Reconstruct the camera rig of a generated project as a scene."""
    from .session import project_from_dict

    project = project_from_dict(manifest)
    cameras = [(img.pose, img.intrinsics) for img in project.images]
    targets = ring_targets((0.0, 0.0, 0.0))
    return SyntheticScene(
        target_points=[(pid, point) for pid, point, _ in targets],
        cameras=cameras,
        seed=0,
    )


def marker_colors() -> dict[str, tuple]:
    return {pid: color for pid, _, color in RING_TARGET_OFFSETS}
