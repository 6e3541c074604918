"""raymeter: precise 3D point measurement from multi-view ray intersection.

Core pieces:

* :mod:`raymeter.geometry` - least-squares ray intersection, sigma0,
  covariance, error ellipsoids.
* :mod:`raymeter.camera` - pinhole model mapping pixel picks to world rays.
* :mod:`raymeter.simulate` - Monte Carlo accuracy harness and report math.
* :mod:`raymeter.session` - durable measurement sessions and projects.
* :mod:`raymeter.service` - HTTP/JSON measurement service.
* :mod:`raymeter.cli` - command-line front door.
"""

from .camera import (
    Intrinsics,
    PickOutOfBoundsError,
    PixelPick,
    Pose,
    look_at_pose,
    project_point,
    ray_from_pixel,
)
from .geometry import (
    DegenerateGeometryError,
    ErrorEllipsoid,
    FewerThanTwoRaysError,
    GeometryError,
    IntersectionResult,
    InvalidRayError,
    LinearSystem,
    NotPositiveSemidefiniteError,
    Ray,
    SystemMode,
    build_system,
    ellipsoid_from_covariance,
    intersect_rays,
)
from .simulate import (
    AccuracyReport,
    CampaignResult,
    EmptyInputError,
    InsufficientVisibilityError,
    NoiseModel,
    SyntheticScene,
    UnmatchedIdError,
    evaluate,
    make_ring_scene,
    simulate_campaign,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport",
    "CampaignResult",
    "DegenerateGeometryError",
    "EmptyInputError",
    "ErrorEllipsoid",
    "FewerThanTwoRaysError",
    "GeometryError",
    "InsufficientVisibilityError",
    "IntersectionResult",
    "Intrinsics",
    "InvalidRayError",
    "LinearSystem",
    "NoiseModel",
    "NotPositiveSemidefiniteError",
    "PickOutOfBoundsError",
    "PixelPick",
    "Pose",
    "Ray",
    "SyntheticScene",
    "SystemMode",
    "UnmatchedIdError",
    "build_system",
    "ellipsoid_from_covariance",
    "evaluate",
    "intersect_rays",
    "look_at_pose",
    "make_ring_scene",
    "project_point",
    "ray_from_pixel",
    "simulate_campaign",
]
