"""
Monte Carlo accuracy of multi-ray measurement
=============================================

How much does a third, fourth, fifth ray actually buy? This script runs
seeded measurement campaigns on the canonical ring scene at a fixed
1-pixel aiming noise and tabulates the accuracy statistics per ray count,
in the RMSE / mean error / standard deviation format used for accuracy
assessments.
"""

from raymeter import NoiseModel, make_ring_scene, simulate_campaign

scene = make_ring_scene(radius=10.0, count=8, target=(0.0, 0.0, 0.0), seed=7)
noise = NoiseModel(pixel_sigma=1.0)
trials = 500

print(f"ring of 8 cameras, radius 10 m, {noise.pixel_sigma} px noise, "
      f"{trials} trials per row\n")
print(f"{'N rays':>7} {'RMSE':>8} {'ME':>8} {'Std':>8}   (meters)")
baseline = None
for n in (2, 3, 4, 5, 6):
    pooled = simulate_campaign(scene, noise, rays_per_point=n, trials=trials).pooled
    note = ""
    if baseline is None:
        baseline = pooled.rmse
    else:
        note = f"  {1 - pooled.rmse / baseline:+.0%} vs N=2"
    print(f"{n:>7} {pooled.rmse:>8.4f} {pooled.mean_error:>8.4f} "
          f"{pooled.std:>8.4f}{note}")

print("\nSame scene, N=4, increasing aiming noise:")
print(f"{'noise px':>9} {'RMSE':>8}")
for sigma in (0.25, 0.5, 1.0, 2.0):
    pooled = simulate_campaign(
        scene, NoiseModel(sigma), rays_per_point=4, trials=trials
    ).pooled
    print(f"{sigma:>9.2f} {pooled.rmse:>8.4f}")
