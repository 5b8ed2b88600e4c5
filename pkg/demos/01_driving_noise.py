"""Driving noise: Brownian and fractional Brownian increments.

Generates fBm batches for several Hurst indices, compares their sample
covariance with the closed form, and plots one path per index. Run from the
repository root:

    python demos/01_driving_noise.py [output_dir]
"""

from __future__ import annotations

import sys
from pathlib import Path

from roucir.noise import RngSeed, TimeGrid, generate_fbm_increments, validate_noise_covariance
from roucir.plotting import Series, write_svg

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(parents=True, exist_ok=True)
grid = TimeGrid(1.0, 512)

# Larger H means smoother, more persistent paths. The covariance table should
# show |z| well below 4 for every index.
series = []
for H, color in zip((0.5, 0.7, 0.9), ("black", "blue", "red")):
    batch = generate_fbm_increments(grid, H, RngSeed(0), n_paths=5000)
    report = validate_noise_covariance(batch, H)
    print(f"H = {H}: max |z| = {report.max_abs_z:.2f}")
    print(report.table())
    series.append(Series(grid.times, batch.path(0).cumulative(), color, 1.0, f"H = {H}"))

write_svg(out / "01_fbm_paths.svg", series, title="fBm sample paths")
print(f"plot written to {out / '01_fbm_paths.svg'}")
