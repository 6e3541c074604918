"""
Intersecting viewing rays into a 3D point, with uncertainty
===========================================================

A measurement ray starts at a camera center and passes through the aimed
feature. With two or more rays aimed at the same physical point, the
best-fit point is a small linear least-squares problem; the leftover
disagreement between the rays becomes a per-point quality number (sigma0)
and a full 3x3 covariance.
"""

import numpy as np

from raymeter import Ray, SystemMode, ellipsoid_from_covariance, intersect_rays

np.set_printoptions(precision=6, suppress=True)

# Five cameras around and above the target, all aimed at (apex) with a
# little synthetic aiming error added to the directions.
apex = np.array([2.0, -1.0, 4.0])
rng = np.random.default_rng(1)

rays = []
for k in range(5):
    angle = 2 * np.pi * k / 5
    origin = apex + np.array([10 * np.cos(angle), 10 * np.sin(angle), 8.0])
    direction = apex - origin + rng.normal(scale=0.004, size=3)
    rays.append(Ray(origin=origin, direction=direction))

result = intersect_rays(rays, SystemMode.PROJECTION)

print("estimated point:", result.point)
print("true point:     ", apex)
print("sigma0 (m):     ", round(result.sigma0, 6))
print("redundancy:     ", result.redundancy, f"(N={result.ray_count} rays)")
print("covariance (m^2):")
print(result.covariance)

# The covariance is easiest to read as an error ellipsoid: principal
# directions and one-sigma semi-axes.
ellipsoid = ellipsoid_from_covariance(result.point, result.covariance)
print("\nerror ellipsoid semi-axes (m):", ellipsoid.semi_axes)
print("longest-axis direction:       ", ellipsoid.axes_directions[0])

# The classical two-row construction gives the same point on good
# geometry; it is kept for faithfulness to the hand-derived formulation.
classic = intersect_rays(rays, SystemMode.PAPER)
print("\ntwo-row mode point:           ", classic.point)
print("difference between modes (m): ",
      np.linalg.norm(classic.point - result.point))
