"""Estimators of the reflection function and related path diagnostics.

Three independent routes to the reflection function ``L``:

* :func:`epsilon_integral_reflection` -- ``(1/2) int eps / Y_eps ds`` along a
  perturbed square-root path;
* :func:`residual_reflection` -- what is left of ``Y`` after removing the
  initial value, the linear drift and the noise;
* :func:`occupation_local_time` -- occupation density of an OU path near 0,
  normalized by its quadratic variation.

plus :func:`skorokhod_map`, the closed-form discrete Skorokhod reflection
used as an oracle for the projected scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError
from .models import ModelParams, ReflectionPath, SamplePath
from .noise import NoisePath

__all__ = [
    "HittingReport",
    "EstimatorComparison",
    "MonotonicityReport",
    "InverseIntegral",
    "epsilon_integral_reflection",
    "residual_reflection",
    "tanaka_noise",
    "occupation_local_time",
    "default_bandwidth",
    "hitting_time",
    "inverse_integral_diagnostic",
    "skorokhod_map",
    "compare_estimators",
    "monotonicity_report",
    "INVERSE_FLOOR",
]

INVERSE_FLOOR = 1e-30


def _left_cumsum(integrand, dt):
    # L_k = sum_{j<k} integrand_j * dt, shape (..., n+1)
    out = np.zeros(integrand.shape)
    np.cumsum(integrand[..., :-1] * dt, axis=-1, out=out[..., 1:])
    return out


def epsilon_integral_reflection(path: SamplePath, epsilon: float) -> ReflectionPath:
    """``L_k = (1/2) sum_{j<k} (epsilon / Y_j) dt``.

    All path values must be positive; that holds for any path produced by
    :func:`~roucir.schemes.simulate_sqrt_process` with a positive drift
    numerator.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    y = path.values
    if np.any(y <= 0):
        raise ValueError("epsilon-integral estimator needs a strictly positive path")
    return ReflectionPath(path.grid, _left_cumsum(0.5 * epsilon / y, path.grid.dt))


def residual_reflection(path: SamplePath, noise: NoisePath, params: ModelParams) -> ReflectionPath:
    """``L_k = Y_k - Y_0 + (b/2) sum_{j<k} Y_j dt - (sigma/2) B_k``.

    For a projected-scheme path and its own noise this equals the clamp
    accumulator up to rounding. Monotonicity is not enforced; see
    :func:`monotonicity_report`.
    """
    if path.grid != noise.grid:
        raise GridMismatchError("path and noise live on different grids")
    y = path.values
    drift = _left_cumsum(0.5 * params.b * y, path.grid.dt)
    res = y - y[..., :1] + drift - 0.5 * params.sigma * noise.cumulative()
    res[..., 0] = 0.0
    return ReflectionPath(path.grid, res)


@dataclass(frozen=True)
class MonotonicityReport:
    monotone: bool
    max_decrease: float
    tolerance: float


def monotonicity_report(reflection: ReflectionPath, tol: float = 1e-12) -> MonotonicityReport:
    """Largest one-step decrease of ``reflection`` and whether it is within ``tol``."""
    steps = np.diff(reflection.values, axis=-1)
    worst = float(max(0.0, -steps.min())) if steps.size else 0.0
    return MonotonicityReport(worst <= tol, worst, tol)


def tanaka_noise(ou_path: SamplePath, bm: NoisePath) -> NoisePath:
    """``dW_k = sgn(U_k) dB_k`` with ``sgn(0) = 0``."""
    if ou_path.grid != bm.grid:
        raise GridMismatchError("OU path and noise live on different grids")
    if not bm.is_brownian:
        raise ValueError("tanaka_noise needs Brownian noise")
    sign = np.sign(ou_path.values[..., :-1])
    return NoisePath(bm.grid, sign * bm.increments, "bm", 0.5, bm.seed, bm.method, bm.notes)


def default_bandwidth(dt: float) -> float:
    return math.sqrt(dt)


def occupation_local_time(ou_path: SamplePath, delta: float, params: ModelParams) -> ReflectionPath:
    """Occupation-density estimate of the local time at zero.

    ``L_k = (sigma^2/4) / (2 delta) * sum_{j<k} 1{|U_j| < delta} dt``; the
    factor ``sigma^2/4`` is the quadratic-variation rate of ``U``, so the
    estimate targets the local time appearing in Tanaka's formula for
    ``|U|``.
    """
    if not delta > 0:
        raise ValueError("bandwidth delta must be positive")
    inside = (np.abs(ou_path.values) < delta).astype(float)
    scale = 0.25 * params.sigma**2 / (2.0 * delta)
    return ReflectionPath(ou_path.grid, scale * _left_cumsum(inside, ou_path.grid.dt))


@dataclass(frozen=True)
class HittingReport:
    tau_index: int | None
    tau_time: float | None
    threshold: float


def hitting_time(path: SamplePath, threshold: float = 0.0) -> HittingReport:
    """First grid point where the (single) path is ``<= threshold``."""
    y = path.values
    if y.ndim != 1:
        raise ValueError("hitting_time takes a single path")
    hits = np.flatnonzero(y <= threshold)
    if hits.size == 0:
        return HittingReport(None, None, threshold)
    k = int(hits[0])
    return HittingReport(k, float(path.grid.times[k]), threshold)


@dataclass(frozen=True)
class InverseIntegral:
    """Left-point estimate of ``int_0^upto ds / Y(s)``.

    ``floored`` counts grid values replaced by the floor ``eta``.
    """

    value: float
    floored: int
    eta: float

    @property
    def was_floored(self) -> bool:
        return self.floored > 0


def inverse_integral_diagnostic(path: SamplePath, upto: float, eta: float = INVERSE_FLOOR) -> InverseIntegral:
    """``sum dt / max(Y_j, eta)`` over grid points ``t_j < upto``.

    Zeros are floored rather than rejected: divergence of the integral past
    a zero of ``Y`` has to be observable. The last grid value counts as the
    left endpoint of a final cell, so ``upto`` may reach
    ``(n_steps + 1) * dt``.
    """
    y = path.values
    if y.ndim != 1:
        raise ValueError("inverse_integral_diagnostic takes a single path")
    dt = path.grid.dt
    m = math.ceil(upto / dt - 1e-9)
    if m < 0 or m > y.size:
        raise ValueError(f"upto={upto} outside the range covered by the path")
    head = y[:m]
    low = head < eta
    return InverseIntegral(float(np.sum(dt / np.where(low, eta, head))), int(low.sum()), eta)


def skorokhod_map(free_path: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Discrete Skorokhod reflection at 0 of ``free_path`` (last axis = time).

    Returns ``(reflected, regulator)`` with
    ``regulator_k = max(0, max_{j<=k} -free_j)`` and
    ``reflected = free + regulator``.
    """
    z = np.asarray(free_path, dtype=float)
    reg = np.maximum(np.maximum.accumulate(-z, axis=-1), 0.0)
    return z + reg, reg


@dataclass(frozen=True)
class EstimatorComparison:
    labels: tuple[str, str]
    gaps: np.ndarray

    @property
    def sup_gap(self) -> float:
        return float(self.gaps.max()) if self.gaps.size else 0.0


def compare_estimators(first: ReflectionPath, second: ReflectionPath, labels=("first", "second")) -> EstimatorComparison:
    """Pointwise absolute gaps between two reflection estimates on one grid."""
    if first.grid != second.grid:
        raise GridMismatchError("estimates live on different grids")
    return EstimatorComparison(tuple(labels), np.abs(first.values - second.values))
