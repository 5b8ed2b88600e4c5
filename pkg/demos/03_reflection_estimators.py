"""Three routes to the reflection function.

1. The projected Euler scheme accumulates its clamps.
2. The residual of the path after removing drift and noise reproduces that
   accumulator to rounding error.
3. For an OU path U, |U| is a reflected process driven by the sign-modulated
   noise sgn(U) dB, and its reflection term matches an occupation-density
   estimate of the local time of U at zero.

    python demos/03_reflection_estimators.py [output_dir]
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from roucir.models import ModelParams, SamplePath
from roucir.noise import RngSeed, TimeGrid, generate_bm_increments
from roucir.plotting import Series, write_svg
from roucir.reflection import (
    compare_estimators,
    default_bandwidth,
    occupation_local_time,
    residual_reflection,
    tanaka_noise,
)
from roucir.schemes import simulate_ou, simulate_rou_projected

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(parents=True, exist_ok=True)
params = ModelParams(y0=0.25, b=1.0, sigma=1.0)

noise = generate_bm_increments(TimeGrid(5.0, 5000), RngSeed(0))
projected = simulate_rou_projected(params, noise)
residual = residual_reflection(projected.path, noise, params)
gap = compare_estimators(residual, projected.reflection).sup_gap
print(f"clamp accumulator vs residual: sup gap = {gap:.2e}, clamps = {len(projected.clamp_events)}")

fine = generate_bm_increments(TimeGrid(5.0, 50_000), RngSeed(0))
u = simulate_ou(params, fine)
abs_u = SamplePath(u.grid, np.abs(u.values))
tanaka = residual_reflection(abs_u, tanaka_noise(u, fine), params)
print(f"Tanaka residual of |U| at T: {float(tanaka.terminal):.4f}")
for delta in (0.05, 0.02, default_bandwidth(fine.grid.dt)):
    est = occupation_local_time(u, delta, params)
    print(f"  occupation estimate, delta = {delta:.3g}: {float(est.terminal):.4f}")

occ = occupation_local_time(u, default_bandwidth(fine.grid.dt), params)
write_svg(out / "03_local_time.svg", [
    Series(u.grid.times, tanaka.values, "black", 1.5, "Tanaka residual of |U|"),
    Series(u.grid.times, occ.values, "red", 1.0, "occupation estimate"),
], title="local time of U at zero")
