"""Independent oracles for the test suite.

Everything here is deliberately written against first principles (explicit
formulas, brute-force search) and never calls the library's solve path, so
agreement between the two is meaningful.
"""

from __future__ import annotations

import numpy as np


def point_line_distance(point, origin, direction) -> float:
    """Perpendicular distance from a point to the line (origin, unit direction)."""
    diff = np.asarray(point, dtype=np.float64) - np.asarray(origin, dtype=np.float64)
    perp = diff - float(diff @ direction) * np.asarray(direction, dtype=np.float64)
    return float(np.linalg.norm(perp))


def sum_squared_distances(points, origins, directions) -> np.ndarray:
    """Summed squared point-to-line distances for a batch of points.

    Args:
        points: (M, 3) candidate points.
        origins: (N, 3) line origins.
        directions: (N, 3) unit line directions.

    Returns:
        (M,) cost values.
    """
    points = np.asarray(points, dtype=np.float64)
    cost = np.zeros(len(points))
    for origin, direction in zip(origins, directions):
        diff = points - origin
        along = diff @ direction
        # Form the perpendicular component explicitly: the shortcut
        # |diff|^2 - along^2 cancels catastrophically far from the origin.
        perp = diff - along[:, None] * direction
        cost += np.einsum("ij,ij->i", perp, perp)
    return cost


def pair_midpoint(o1, d1, o2, d2) -> np.ndarray:
    """Midpoint of the common perpendicular segment of two skew lines.

    Solved from the closed-form 2x2 system for the closest points; used
    only to seed the brute-force search box.
    """
    o1 = np.asarray(o1, dtype=np.float64)
    o2 = np.asarray(o2, dtype=np.float64)
    d1 = np.asarray(d1, dtype=np.float64)
    d2 = np.asarray(d2, dtype=np.float64)
    w = o1 - o2
    b = float(d1 @ d2)
    denom = 1.0 - b * b
    if abs(denom) < 1e-12:
        return 0.5 * (o1 + o2)
    s = (b * float(d2 @ w) - float(d1 @ w)) / denom
    t = (float(d2 @ w) - b * float(d1 @ w)) / denom
    return 0.5 * ((o1 + s * d1) + (o2 + t * d2))


def brute_force_intersection(
    origins, directions, half_width: float | None = None, grid: int = 21
) -> np.ndarray:
    """Grid-refinement minimizer of summed squared point-to-line distances.

    Starts from a box around the pairwise closest-approach midpoints and
    repeatedly re-grids around the best cell, shrinking the box until its
    half width drops below 1e-8 m. The cost is convex quadratic, so the
    grid argmin stays within one cell of the true minimum and the
    refinement cannot lose it.
    """
    origins = np.asarray(origins, dtype=np.float64)
    directions = np.asarray(directions, dtype=np.float64)
    directions = directions / np.linalg.norm(directions, axis=1, keepdims=True)
    n = len(origins)
    midpoints = [
        pair_midpoint(origins[i], directions[i], origins[j], directions[j])
        for i in range(n)
        for j in range(i + 1, n)
    ]
    midpoints = np.array(midpoints)
    center = midpoints.mean(axis=0)
    if half_width is None:
        spread = float(np.max(np.linalg.norm(midpoints - center, axis=1)))
        half_width = spread + 10.0
    for _ in range(200):
        axes = [np.linspace(c - half_width, c + half_width, grid) for c in center]
        xs, ys, zs = np.meshgrid(*axes, indexing="ij")
        points = np.column_stack([xs.ravel(), ys.ravel(), zs.ravel()])
        cost = sum_squared_distances(points, origins, directions)
        center = points[int(np.argmin(cost))]
        spacing = 2.0 * half_width / (grid - 1)
        half_width = 2.0 * spacing
        if half_width < 1e-8:
            break
    return center


def normal_equation_solution(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """The explicit textbook solve (A^T A)^-1 A^T b."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.linalg.inv(a.T @ a) @ (a.T @ b)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform-ish random rotation matrix via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def rays_through_point(
    rng: np.random.Generator,
    point,
    count: int,
    origin_scale: float = 10.0,
    direction_noise: float = 0.0,
    min_w: float = 0.05,
):
    """Random ray (origins, directions) passing (near) a common point.

    Directions all keep |z component| >= min_w so the two-row construction
    stays full rank. With direction_noise > 0 the rays only pass near the
    point, giving a well-conditioned noisy system.
    """
    point = np.asarray(point, dtype=np.float64)
    origins = []
    directions = []
    while len(origins) < count:
        origin = point + rng.normal(scale=origin_scale, size=3)
        direction = point - origin
        norm = np.linalg.norm(direction)
        if norm < 1e-6:
            continue
        direction = direction / norm
        if abs(direction[2]) < min_w:
            continue
        if direction_noise > 0.0:
            direction = direction + rng.normal(scale=direction_noise, size=3)
            direction = direction / np.linalg.norm(direction)
            if abs(direction[2]) < min_w:
                continue
        origins.append(origin)
        directions.append(direction)
    return np.array(origins), np.array(directions)
