"""Limit experiments under common random numbers.

* :func:`epsilon_ladder` -- square-root paths for a decreasing sequence of
  perturbations on one shared noise, measured against the projected-Euler
  reflected path and its clamp accumulator;
* :func:`square_consistency` -- squared implicit square-root path versus the
  full-truncation CIR scheme on nested grids;
* :func:`grid_refinement_study` -- any named scheme on successively halved
  (or otherwise refined) grids.

Coarse grids always consume block sums of the finest increments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import GridMismatchError
from .models import ModelParams, Regime, SamplePath, regime
from .noise import NoisePath
from .reflection import epsilon_integral_reflection
from .schemes import SCHEMES, euler_cir_full_truncation, simulate_rou_projected, simulate_sqrt_process

__all__ = [
    "ConvergenceReport",
    "SquareConsistencyReport",
    "RefinementSpec",
    "RefinementReport",
    "epsilon_ladder",
    "square_consistency",
    "grid_refinement_study",
    "FIGURE2_EPSILONS",
    "EXACT_SLACK",
]

FIGURE2_EPSILONS = (1.0, 0.5, 0.25, 0.1, 1e-4)
EXACT_SLACK = 1e-12


def _sup(x):
    return np.max(np.abs(x), axis=-1)


@dataclass
class ConvergenceReport:
    """Outcome of an epsilon ladder.

    ``sup_gap_Y[i]`` and ``sup_gap_L[i]`` belong to ``epsilons[i]``; for a
    batched noise they carry a trailing batch axis. ``order_violation`` is
    the largest ``Y_{eps_{n+1}} - Y_{eps_n}`` seen anywhere (nonpositive
    when the ladder is ordered) and ``sandwich_violation`` the largest
    ``Y_ref - Y_eps``.
    """

    epsilons: np.ndarray
    sup_gap_Y: np.ndarray
    sup_gap_L: np.ndarray
    monotone_Y: bool
    order_violation: float
    sandwich_violation: float
    hurst: float
    horizon: float
    n_steps: int
    seeds: tuple = ()
    paths: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    def manifest_items(self) -> list[tuple[str, str]]:
        items = [
            ("ladder.hurst", repr(self.hurst)),
            ("ladder.horizon", repr(self.horizon)),
            ("ladder.n_steps", str(self.n_steps)),
            ("ladder.dt", repr(self.dt)),
            ("ladder.seeds", ",".join(str(s) for s in self.seeds)),
            ("ladder.monotone_Y", str(self.monotone_Y).lower()),
            ("ladder.order_violation", repr(self.order_violation)),
            ("ladder.sandwich_violation", repr(self.sandwich_violation)),
        ]
        for i, eps in enumerate(self.epsilons):
            gy = np.atleast_1d(self.sup_gap_Y[i])
            gl = np.atleast_1d(self.sup_gap_L[i])
            items.append((f"ladder.rung.{i}.epsilon", repr(float(eps))))
            items.append((f"ladder.rung.{i}.sup_gap_Y", ",".join(repr(float(v)) for v in gy)))
            items.append((f"ladder.rung.{i}.sup_gap_L", ",".join(repr(float(v)) for v in gl)))
        return items


def _check_ladder(epsilons):
    eps = np.asarray(epsilons, dtype=float)
    if eps.ndim != 1 or eps.size == 0:
        raise ValueError("epsilons must be a nonempty 1-d sequence")
    if np.any(eps <= 0):
        raise ValueError("epsilons must be positive")
    if np.any(np.diff(eps) >= 0):
        raise ValueError("epsilons must be strictly decreasing")
    return eps


def epsilon_ladder(
    params_base: ModelParams,
    epsilons: Sequence[float],
    noise: NoisePath,
    seeds: Sequence[int] = (),
    keep_paths: bool = False,
) -> ConvergenceReport:
    """Run the perturbed square-root process for every rung on one noise.

    The base must be the unperturbed limit: critical (``4a == sigma**2``) for
    Brownian noise, ``a == 0`` for fractional noise; rung ``eps`` then has
    drift numerator ``eps``. The reference pair ``(Y, L)`` is the
    projected-Euler reflected path on the same noise.
    """
    eps = _check_ladder(epsilons)
    if noise.hurst != params_base.hurst:
        raise GridMismatchError(
            f"noise hurst {noise.hurst} does not match params hurst {params_base.hurst}"
        )
    if params_base.hurst == 0.5 and regime(params_base) is not Regime.CRITICAL:
        raise ValueError("Brownian ladder needs a critical base (4a == sigma**2)")
    if params_base.hurst != 0.5 and params_base.a != 0.0:
        raise ValueError("fractional ladder needs a == 0")

    ref = simulate_rou_projected(params_base.replace(epsilon=0.0), noise)
    ref_y, ref_l = ref.path.values, ref.reflection.values
    gaps_y, gaps_l, ys = [], [], []
    paths = {"reference": ref} if keep_paths else {}
    for e in eps:
        y = simulate_sqrt_process(params_base.replace(epsilon=float(e)), noise)
        L = epsilon_integral_reflection(y, float(e))
        gaps_y.append(_sup(y.values - ref_y))
        gaps_l.append(_sup(L.values - ref_l))
        ys.append(y.values)
        if keep_paths:
            paths[float(e)] = (y, L)
    order = max((float(np.max(lo - hi)) for hi, lo in zip(ys, ys[1:])), default=-np.inf)
    sandwich = max(float(np.max(ref_y - y)) for y in ys)
    return ConvergenceReport(
        epsilons=eps,
        sup_gap_Y=np.array(gaps_y),
        sup_gap_L=np.array(gaps_l),
        monotone_Y=bool(order <= EXACT_SLACK),
        order_violation=order,
        sandwich_violation=sandwich,
        hurst=noise.hurst,
        horizon=noise.grid.horizon,
        n_steps=noise.grid.n_steps,
        seeds=tuple(seeds),
        paths=paths,
    )


@dataclass(frozen=True)
class SquareConsistencyReport:
    dts: tuple[float, ...]
    sup_gaps: tuple[float, ...]

    def strictly_decreasing(self) -> bool:
        g = self.sup_gaps
        return all(b < a for a, b in zip(g, g[1:]))


def square_consistency(
    params: ModelParams, noise: NoisePath, factors: Sequence[int] = (1,)
) -> SquareConsistencyReport:
    """Sup gap between ``Y**2`` (implicit square root) and full-truncation CIR.

    ``factors`` are aggregation factors applied to ``noise``; pass them
    coarsest first, e.g. ``(100, 10, 1)``, to get one entry per level.
    """
    if not noise.is_brownian:
        raise ValueError("square consistency is defined for Brownian noise")
    if regime(params) is not Regime.SUPERCRITICAL:
        raise ValueError("square consistency needs a supercritical regime (4a > sigma**2)")
    dts, gaps = [], []
    for f in factors:
        nz = noise.coarsen(int(f))
        y = simulate_sqrt_process(params, nz).values
        x = euler_cir_full_truncation(params, nz).values
        dts.append(nz.grid.dt)
        gaps.append(float(np.max(np.abs(y * y - x))))
    return SquareConsistencyReport(tuple(dts), tuple(gaps))


@dataclass(frozen=True)
class RefinementSpec:
    """What to refine: a scheme (name or callable), its parameters, the finest noise.

    ``oracle``, if given, maps ``(params, noise)`` to values that the scheme
    should reproduce at every level.
    """

    scheme: str | Callable[[ModelParams, NoisePath], SamplePath]
    params: ModelParams
    noise: NoisePath
    factor: int = 2
    oracle: Callable[[ModelParams, NoisePath], np.ndarray] | None = None

    def integrator(self):
        if callable(self.scheme):
            return self.scheme
        try:
            return SCHEMES[self.scheme]
        except KeyError:
            raise ValueError(f"unknown scheme {self.scheme!r}; known: {sorted(SCHEMES)}") from None


@dataclass(frozen=True)
class RefinementReport:
    """Per-level results, coarsest level first.

    ``consecutive_gaps[i]`` compares level ``i`` with level ``i + 1`` on the
    coarse grid points.
    """

    dts: tuple[float, ...]
    terminal_values: tuple
    consecutive_gaps: tuple[float, ...]
    oracle_gaps: tuple[float, ...] | None = None

    def gap_ratios(self) -> np.ndarray:
        g = np.asarray(self.consecutive_gaps)
        return g[:-1] / g[1:]


def grid_refinement_study(spec: RefinementSpec, levels: int) -> RefinementReport:
    """Run ``spec`` on ``levels`` nested grids derived from ``spec.noise``."""
    if levels < 2:
        raise ValueError("a refinement study needs at least 2 levels")
    factor = int(spec.factor)
    if factor != spec.factor or factor < 2:
        raise ValueError(f"refinement factor must be an integer >= 2, got {spec.factor}")
    top = factor ** (levels - 1)
    if spec.noise.grid.n_steps % top:
        raise ValueError(
            f"n_steps={spec.noise.grid.n_steps} is not divisible by {factor}**{levels - 1}"
        )
    run = spec.integrator()
    dts, terminals, values, oracle_gaps = [], [], [], []
    for lvl in range(levels):
        nz = spec.noise.coarsen(factor ** (levels - 1 - lvl))
        v = run(spec.params, nz).values
        dts.append(nz.grid.dt)
        terminals.append(v[..., -1].copy() if v.ndim > 1 else float(v[-1]))
        values.append(v)
        if spec.oracle is not None:
            oracle_gaps.append(float(np.max(np.abs(v - spec.oracle(spec.params, nz)))))
    gaps = tuple(
        float(np.max(np.abs(coarse - fine[..., ::factor])))
        for coarse, fine in zip(values, values[1:])
    )
    return RefinementReport(
        tuple(dts), tuple(terminals), gaps, tuple(oracle_gaps) if spec.oracle is not None else None
    )
