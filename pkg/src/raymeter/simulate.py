"""Monte Carlo accuracy harness for multi-ray intersection.

Synthesizes measurement campaigns on a known scene: project each target
into a subset of cameras, perturb the picks with Gaussian pixel noise,
intersect the resulting rays, and score the 3D error against the known
target. Aggregates the standard accuracy statistics (RMSE, mean error,
standard deviation of the per-point 3D error norms).

Statistics conventions:

* Per-point error is the scalar Euclidean norm of the coordinate
  difference, so the "mean error" is a mean of norms and is nonnegative;
  it is not a signed bias.
* ``std`` is the sample standard deviation (n-1 denominator, the headline
  number); ``std_pop`` is the population value, which satisfies
  ``rmse^2 == mean_error^2 + std_pop^2`` exactly by construction.

Everything is deterministic given the scene seed: per-trial generators are
spawned from one root seed sequence, so trials are independent and the
campaign result is reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .camera import Intrinsics, Pose, look_at_pose, pixel_direction, project_point
from .geometry import Ray, SystemMode, _vec3, intersect_rays


class InsufficientVisibilityError(Exception):
    """A target is seen by fewer cameras than rays were requested."""


class UnmatchedIdError(Exception):
    """Measured point ids that do not exist in the truth set."""

    def __init__(self, ids: list[str]):
        self.ids = list(ids)
        super().__init__(f"ids missing from truth set: {', '.join(self.ids)}")


class EmptyInputError(Exception):
    """No points to evaluate."""


# Shared camera used by the canonical ring scene (pixels, 800x600 image).
DEFAULT_INTRINSICS = Intrinsics(fx=800.0, fy=800.0, cx=400.0, cy=300.0, width=800, height=600)


@dataclass
class NoiseModel:
    """Isotropic Gaussian pixel noise applied to every synthetic pick."""

    pixel_sigma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.pixel_sigma) and self.pixel_sigma >= 0.0):
            raise ValueError("pixel_sigma must be finite and >= 0")


@dataclass
class SyntheticScene:
    """Known target points observed by posed cameras.

    Every target must lie inside the frustum of at least two cameras;
    violated at construction time raises ValueError.
    """

    target_points: list[tuple[str, np.ndarray]]
    cameras: list[tuple[Pose, Intrinsics]]
    seed: int = 0

    def __post_init__(self) -> None:
        self.target_points = [
            (str(pid), _vec3(p, f"target {pid}")) for pid, p in self.target_points
        ]
        for pid, point in self.target_points:
            seen = len(visible_cameras(self, point))
            if seen < 2:
                raise ValueError(
                    f"target {pid} is visible in {seen} cameras, need >= 2"
                )


@dataclass
class AccuracyReport:
    """Per-point 3D errors plus their summary statistics (meters).

    ``std_defined`` is False for single-point reports, where the sample
    standard deviation does not exist and both std fields are zero.
    """

    per_point_errors: list[tuple[str, float]]
    rmse: float
    mean_error: float
    std: float
    std_pop: float
    n: int
    std_defined: bool


@dataclass
class CampaignResult:
    """One report per trial plus the pooled report over all trials."""

    trial_reports: list[AccuracyReport]
    pooled: AccuracyReport
    rays_per_point: int
    pixel_sigma: float
    mode: SystemMode
    seed: int


def report_from_errors(errors: list[tuple[str, float]]) -> AccuracyReport:
    """Build an AccuracyReport from (id, error norm) pairs.

    ``std_pop`` is derived as ``sqrt(rmse^2 - mean^2)`` so the RMSE
    identity holds exactly; the sample std rescales it by n/(n-1).
    """
    if not errors:
        raise EmptyInputError("no per-point errors to aggregate")
    values = np.array([e for _, e in errors], dtype=np.float64)
    n = len(values)
    rmse = math.sqrt(float(np.mean(values**2)))
    mean_error = float(np.mean(values))
    var_pop = max(rmse * rmse - mean_error * mean_error, 0.0)
    std_pop = math.sqrt(var_pop)
    if n > 1:
        std = math.sqrt(var_pop * n / (n - 1))
        std_defined = True
    else:
        std = 0.0
        std_pop = 0.0
        std_defined = False
    return AccuracyReport(
        per_point_errors=[(pid, float(e)) for pid, e in errors],
        rmse=rmse,
        mean_error=mean_error,
        std=std,
        std_pop=std_pop,
        n=n,
        std_defined=std_defined,
    )


def evaluate(
    measured: list[tuple[str, np.ndarray]], truth: list[tuple[str, np.ndarray]]
) -> AccuracyReport:
    """Score measured coordinates against ground-truth coordinates.

    The per-point error is the Euclidean norm of the coordinate
    difference, matched by id. Input order does not affect the summary
    statistics.

    Raises:
        UnmatchedIdError: If any measured id is absent from the truth set.
        EmptyInputError: If no measured points are given.
    """
    if not measured:
        raise EmptyInputError("no measured points")
    truth_by_id = {str(pid): _vec3(p, f"truth {pid}") for pid, p in truth}
    missing = [str(pid) for pid, _ in measured if str(pid) not in truth_by_id]
    if missing:
        raise UnmatchedIdError(missing)
    errors = []
    for pid, coords in measured:
        pid = str(pid)
        delta = _vec3(coords, f"measured {pid}") - truth_by_id[pid]
        errors.append((pid, float(np.linalg.norm(delta))))
    return report_from_errors(errors)


def visible_cameras(scene: SyntheticScene, point) -> list[int]:
    """Indices of scene cameras whose frustum contains the point."""
    indices = []
    for i, (pose, intrinsics) in enumerate(scene.cameras):
        pixel = project_point(pose, intrinsics, point)
        if pixel is None:
            continue
        u, v = pixel
        if 0.0 <= u <= intrinsics.width and 0.0 <= v <= intrinsics.height:
            indices.append(i)
    return indices


def make_ring_scene(
    radius: float,
    count: int,
    target=(0.0, 0.0, 0.0),
    seed: int = 0,
    height: float | None = None,
    intrinsics: Intrinsics | None = None,
) -> SyntheticScene:
    """Canonical test scene: cameras on a ring looking down at one target.

    Cameras sit evenly spaced on a horizontal circle of the given radius,
    ``height`` above the target (default: one radius, a 45 degree view),
    each aimed exactly at the target so it projects at the principal
    point. The elevated ring keeps every camera pair well conditioned,
    including diametrically opposite ones.

    Args:
        radius: Ring radius in meters, > 0.
        count: Number of cameras, >= 2.
        target: The single known target point.
        seed: Stored on the scene; drives campaign noise, not geometry.
        height: Ring height above the target; defaults to ``radius``.
        intrinsics: Camera to replicate; defaults to the 800x600 pinhole.

    Raises:
        ValueError: On non-positive radius or count < 2.
    """
    if count < 2:
        raise ValueError("ring scene needs at least 2 cameras")
    if not radius > 0.0:
        raise ValueError("radius must be > 0")
    target = _vec3(target, "target")
    if height is None:
        height = radius
    if intrinsics is None:
        intrinsics = DEFAULT_INTRINSICS
    cameras = []
    for k in range(count):
        angle = 2.0 * math.pi * k / count
        center = target + np.array(
            [radius * math.cos(angle), radius * math.sin(angle), height]
        )
        cameras.append((look_at_pose(center, target), intrinsics))
    return SyntheticScene(
        target_points=[("p0", target)], cameras=cameras, seed=seed
    )


def _measure_target(
    scene: SyntheticScene,
    target: np.ndarray,
    camera_indices: np.ndarray,
    pixel_sigma: float,
    rng: np.random.Generator,
    mode: SystemMode,
) -> np.ndarray:
    """One synthetic measurement: noisy picks in the chosen cameras."""
    rays = []
    for ci in camera_indices:
        pose, intrinsics = scene.cameras[int(ci)]
        u, v = project_point(pose, intrinsics, target)
        # Draw unconditionally: the same seed yields the same standard
        # normals for every pixel_sigma, so noise levels are comparable.
        du, dv = rng.normal(0.0, pixel_sigma, size=2)
        direction = pixel_direction(pose, intrinsics, u + du, v + dv)
        rays.append(Ray(origin=pose.center, direction=direction))
    return intersect_rays(rays, mode).point


def simulate_campaign(
    scene: SyntheticScene,
    noise: NoiseModel,
    rays_per_point: int,
    trials: int,
    mode: SystemMode = SystemMode.PROJECTION,
) -> CampaignResult:
    """Run a seeded Monte Carlo measurement campaign over the scene.

    Each trial measures every target once: draw ``rays_per_point`` cameras
    (uniformly, without replacement, among those seeing the target),
    project, perturb the picks with the noise model, intersect, and record
    the 3D error norm against the known target. Per-trial reports and the
    pooled report over all trials are both returned.

    Trials use generators spawned from ``scene.seed``, so results are
    reproducible and independent of any parallel scheduling of trials.

    Args:
        scene: Scene with known targets and posed cameras.
        noise: Gaussian pixel noise applied to each synthetic pick.
        rays_per_point: Rays (cameras) per measurement, >= 2.
        trials: Number of independent trials, >= 1.
        mode: Intersection mode for the synthetic measurements.

    Raises:
        InsufficientVisibilityError: If some target is visible in fewer
            than ``rays_per_point`` cameras.
        ValueError: On out-of-range arguments.
    """
    if rays_per_point < 2:
        raise ValueError("rays_per_point must be >= 2")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    mode = SystemMode(mode)
    visibility: list[tuple[str, np.ndarray, np.ndarray]] = []
    for pid, target in scene.target_points:
        seen = visible_cameras(scene, target)
        if len(seen) < rays_per_point:
            raise InsufficientVisibilityError(
                f"target {pid} visible in {len(seen)} cameras, "
                f"need {rays_per_point}"
            )
        visibility.append((pid, target, np.array(seen)))

    children = np.random.SeedSequence(scene.seed).spawn(trials)
    trial_reports = []
    pooled_errors: list[tuple[str, float]] = []
    for t in range(trials):
        rng = np.random.default_rng(children[t])
        errors = []
        for pid, target, seen in visibility:
            chosen = rng.choice(seen, size=rays_per_point, replace=False)
            estimate = _measure_target(
                scene, target, chosen, noise.pixel_sigma, rng, mode
            )
            errors.append((pid, float(np.linalg.norm(estimate - target))))
        trial_reports.append(report_from_errors(errors))
        pooled_errors.extend(errors)
    return CampaignResult(
        trial_reports=trial_reports,
        pooled=report_from_errors(pooled_errors),
        rays_per_point=rays_per_point,
        pixel_sigma=noise.pixel_sigma,
        mode=mode,
        seed=scene.seed,
    )
