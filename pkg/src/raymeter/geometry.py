"""Least-squares intersection of 3D viewing rays and its uncertainty.

A measurement ray is a half-line from a camera center through the aimed
feature. Given two or more rays that should meet at one physical point, the
best-fit point is the linear least-squares solution of a stacked system
``A x = b``, and the adjustment statistics (a posteriori sigma, redundancy,
3x3 covariance) quantify how well the rays actually agree.

Two row constructions are supported, selected by :class:`SystemMode`:

* ``paper`` stacks the two classical cross-product rows per ray. This is the
  compact textbook form, but rays running nearly parallel to the XY plane
  (direction z component near zero) degenerate to rank-deficient rows, and
  under noise its residuals are algebraic quantities rather than distances.
* ``projection`` stacks the three rows of the perpendicular projector
  ``I - d d^T`` per ray. Per-ray residual norms are then true perpendicular
  point-to-ray distances, and the construction is rotation invariant. This
  is the mode to prefer for production measurement.

All coordinates are meters in one Cartesian world frame. 3D vectors are
plain float64 numpy arrays of shape (3,).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

# Unit-direction tolerance enforced on rays entering a solve.
UNIT_TOLERANCE = 1e-9
# cond(A^T A) beyond this is reported as degenerate geometry: double
# precision results are meaningless past it.
CONDITION_LIMIT = 1e12
# In two-row mode a ray needs |direction z| above this for full-rank rows.
MIN_W_COMPONENT = 1e-9


class GeometryError(Exception):
    """Base class for ray-intersection failures."""


class FewerThanTwoRaysError(GeometryError):
    """An intersection needs at least two rays."""


class InvalidRayError(GeometryError):
    """Ray origin or direction is non-finite, zero, or not unit length."""


class DegenerateGeometryError(GeometryError):
    """The stacked system cannot determine a point (e.g. parallel rays)."""


class NotPositiveSemidefiniteError(GeometryError):
    """A covariance matrix has a meaningfully negative eigenvalue."""


class SystemMode(str, enum.Enum):
    """Row construction used to linearize each ray into ``A x = b``.

    PAPER contributes the classical two cross-product rows per ray;
    PROJECTION contributes the three perpendicular-projector rows. The
    string values are the interchange names used in files and APIs.
    """

    PAPER = "paper"
    PROJECTION = "projection"


def _vec3(value, name: str, err: type[Exception] = ValueError) -> np.ndarray:
    v = np.asarray(value, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(v)):
        raise err(f"{name} must have finite components, got {value!r}")
    return v


@dataclass
class Ray:
    """Half-line from ``origin`` along unit ``direction``, world frame.

    The direction is normalized at construction; callers may pass any
    non-zero vector. A zero or non-finite direction raises
    :class:`InvalidRayError`.
    """

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self) -> None:
        self.origin = _vec3(self.origin, "ray origin", InvalidRayError)
        direction = _vec3(self.direction, "ray direction", InvalidRayError)
        norm = float(np.linalg.norm(direction))
        if norm < 1e-12:
            raise InvalidRayError("ray direction has zero length")
        # Keep already-unit vectors bit-identical so that construction is
        # idempotent and stored rays round-trip exactly.
        if abs(norm - 1.0) > 1e-12:
            direction = direction / norm
        self.direction = direction


@dataclass
class LinearSystem:
    """Stacked system ``a_matrix @ x = b_vector`` for N rays.

    Row count is 2N in ``paper`` mode and 3N in ``projection`` mode.
    """

    a_matrix: np.ndarray
    b_vector: np.ndarray
    mode: SystemMode
    ray_count: int


@dataclass
class IntersectionResult:
    """Best-fit point plus the adjustment quality statistics.

    Attributes:
        point: Estimated 3D point (meters).
        residuals: Post-fit residual vector ``A @ point - b``.
        sigma0: A posteriori standard deviation of unit weight (meters).
            In projection mode this is the RMS perpendicular ray-to-point
            distance; in two-row mode it is an algebraic residual scale.
        redundancy: Degrees of freedom of the adjustment, 2N - 3. Each
            ray carries two independent scalar observations in both modes
            (the three projector rows per ray have rank 2).
        covariance: 3x3 covariance of the estimated point (m^2),
            ``sigma0^2 * (A^T A)^-1``, symmetric positive semidefinite.
        ray_count: Number of rays N.
        mode: Row construction that produced the result.
    """

    point: np.ndarray
    residuals: np.ndarray
    sigma0: float
    redundancy: int
    covariance: np.ndarray
    ray_count: int
    mode: SystemMode


@dataclass
class ErrorEllipsoid:
    """Principal-axes form of a point covariance for display.

    ``semi_axes`` are sorted descending; ``axes_directions[i]`` is the unit
    direction (row vector) of ``semi_axes[i]``. ``confidence_scale`` is the
    multiplier applied to the eigenvalue square roots (1 = one-sigma).
    """

    center: np.ndarray
    semi_axes: np.ndarray
    axes_directions: np.ndarray
    confidence_scale: float = 1.0


def _check_rays(rays: list[Ray]) -> None:
    if len(rays) < 2:
        raise FewerThanTwoRaysError(
            f"need at least 2 rays to intersect, got {len(rays)}"
        )
    for i, ray in enumerate(rays):
        if not (
            np.all(np.isfinite(ray.origin)) and np.all(np.isfinite(ray.direction))
        ):
            raise InvalidRayError(f"ray {i} has non-finite components")
        if abs(float(np.linalg.norm(ray.direction)) - 1.0) > UNIT_TOLERANCE:
            raise InvalidRayError(f"ray {i} direction is not unit length")


def build_system(
    rays: list[Ray], mode: SystemMode = SystemMode.PROJECTION
) -> LinearSystem:
    """Stack the per-ray rows into one linear system ``A x = b``.

    In ``paper`` mode ray i with origin (X, Y, Z) and direction (u, v, w)
    contributes the two rows::

        [ 0   w  -v ] x = w*Y - v*Z
        [-w   0   u ] x = -w*X + u*Z

    In ``projection`` mode it contributes the three rows of
    ``P = I - d d^T`` with right-hand side ``P @ origin``, so that
    ``A_i x - b_i`` is the perpendicular offset of x from the ray.

    Args:
        rays: At least two measurement rays.
        mode: Row construction to use.

    Returns:
        The stacked system (2N or 3N rows).

    Raises:
        FewerThanTwoRaysError: If fewer than two rays are given.
        InvalidRayError: If a ray is non-finite or its direction is not
            unit length within 1e-9.
    """
    _check_rays(rays)
    mode = SystemMode(mode)
    n = len(rays)
    if mode is SystemMode.PAPER:
        a = np.zeros((2 * n, 3))
        b = np.zeros(2 * n)
        for i, ray in enumerate(rays):
            x0, y0, z0 = ray.origin
            u, v, w = ray.direction
            a[2 * i] = (0.0, w, -v)
            b[2 * i] = w * y0 - v * z0
            a[2 * i + 1] = (-w, 0.0, u)
            b[2 * i + 1] = -w * x0 + u * z0
    else:
        a = np.zeros((3 * n, 3))
        b = np.zeros(3 * n)
        eye = np.eye(3)
        for i, ray in enumerate(rays):
            projector = eye - np.outer(ray.direction, ray.direction)
            a[3 * i : 3 * i + 3] = projector
            b[3 * i : 3 * i + 3] = projector @ ray.origin
    return LinearSystem(a_matrix=a, b_vector=b, mode=mode, ray_count=n)


def intersect_rays(
    rays: list[Ray], mode: SystemMode = SystemMode.PROJECTION
) -> IntersectionResult:
    """Compute the least-squares intersection point of N >= 2 rays.

    The solve uses an orthogonal decomposition (SVD via ``lstsq``) rather
    than forming the explicit normal-equation inverse; on well-conditioned
    systems the result matches ``(A^T A)^-1 A^T b`` to well below 1e-9.

    Args:
        rays: At least two measurement rays.
        mode: Row construction, see :class:`SystemMode`.

    Returns:
        The estimated point with residuals, sigma0, redundancy and
        covariance (see :class:`IntersectionResult`).

    Raises:
        FewerThanTwoRaysError: If fewer than two rays are given.
        InvalidRayError: As for :func:`build_system`.
        DegenerateGeometryError: If ``A^T A`` is singular or its condition
            number exceeds 1e12 (parallel or coincident rays), or if in
            ``paper`` mode any ray direction has |z component| < 1e-9, whose
            two rows would silently drop that ray's x/y information.
    """
    system = build_system(rays, mode)
    if system.mode is SystemMode.PAPER:
        for i, ray in enumerate(rays):
            if abs(float(ray.direction[2])) < MIN_W_COMPONENT:
                raise DegenerateGeometryError(
                    f"ray {i} has |direction z| < {MIN_W_COMPONENT:g}; its "
                    "two-row form is rank deficient, use projection mode"
                )
    a = system.a_matrix
    b = system.b_vector
    ata = a.T @ a
    singular_values = np.linalg.svd(ata, compute_uv=False)
    if singular_values[0] == 0.0 or (
        singular_values[-1] * CONDITION_LIMIT < singular_values[0]
    ):
        raise DegenerateGeometryError(
            "normal matrix is singular or ill-conditioned "
            f"(condition > {CONDITION_LIMIT:.0e}); rays are parallel, "
            "coincident, or otherwise do not determine a point"
        )
    point = np.linalg.lstsq(a, b, rcond=None)[0]
    residuals = a @ point - b
    n = system.ray_count
    redundancy = 2 * n - 3
    vtv = float(residuals @ residuals)
    sigma0 = math.sqrt(vtv / redundancy) if redundancy > 0 else 0.0
    ata_inv = np.linalg.inv(ata)
    covariance = sigma0 * sigma0 * ata_inv
    covariance = 0.5 * (covariance + covariance.T)
    return IntersectionResult(
        point=point,
        residuals=residuals,
        sigma0=sigma0,
        redundancy=redundancy,
        covariance=covariance,
        ray_count=n,
        mode=system.mode,
    )


def ellipsoid_from_covariance(
    center, covariance, confidence_scale: float = 1.0
) -> ErrorEllipsoid:
    """Decompose a 3x3 covariance into an error ellipsoid.

    Semi-axis lengths are ``confidence_scale * sqrt(eigenvalue)`` with the
    matching orthonormal eigenvector directions, sorted by descending
    semi-axis. The default scale of 1 gives the one-sigma ellipsoid.

    Args:
        center: Ellipsoid center (the estimated point).
        covariance: Symmetric positive semidefinite 3x3 matrix (m^2).
        confidence_scale: Positive multiplier on the axis lengths.

    Raises:
        NotPositiveSemidefiniteError: If any eigenvalue is below -1e-9.
        ValueError: If ``confidence_scale`` is not positive.
    """
    if not (confidence_scale > 0.0):
        raise ValueError("confidence_scale must be > 0")
    center = _vec3(center, "ellipsoid center")
    q = np.asarray(covariance, dtype=np.float64).reshape(3, 3)
    q = 0.5 * (q + q.T)
    eigenvalues, eigenvectors = np.linalg.eigh(q)
    if float(eigenvalues.min()) < -1e-9:
        raise NotPositiveSemidefiniteError(
            f"covariance has negative eigenvalue {eigenvalues.min():.3e}"
        )
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    order = np.argsort(eigenvalues)[::-1]
    semi_axes = confidence_scale * np.sqrt(eigenvalues[order])
    directions = eigenvectors[:, order].T
    return ErrorEllipsoid(
        center=center,
        semi_axes=semi_axes,
        axes_directions=directions,
        confidence_scale=float(confidence_scale),
    )
