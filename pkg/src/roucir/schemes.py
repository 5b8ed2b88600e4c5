"""Time-stepping integrators driven by a :class:`~roucir.noise.NoisePath`.

All schemes integrate every path of a batched noise at once: increments of
shape ``(n_paths, n_steps)`` give values of shape ``(n_paths, n_steps + 1)``.
Discrete integrals use left-point rectangles throughout, which turns the
telescoping identities checked in :mod:`roucir.reflection` into exact
algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import GridMismatchError
from .models import ModelParams, ReflectionPath, SamplePath
from .noise import NoisePath

__all__ = [
    "SchemeOutput",
    "euler_cir_full_truncation",
    "implicit_sqrt_step",
    "simulate_sqrt_process",
    "simulate_rou_projected",
    "simulate_ou",
    "ou_squared_sum",
    "SCHEMES",
]


@dataclass(frozen=True)
class SchemeOutput:
    """Projected-scheme result: the path, its reflection, and the clamps.

    ``clamps[..., k]`` is the amount added by the projection on step
    ``k -> k+1`` (zero when no clamp happened), so
    ``reflection.values[..., k] == clamps[..., :k].sum(-1)``.
    """

    path: SamplePath
    reflection: ReflectionPath
    clamps: np.ndarray

    @property
    def clamp_events(self) -> list[tuple[int, float]]:
        """``(step index, clamp magnitude)`` for every step that was clamped."""
        if self.clamps.ndim != 1:
            raise ValueError("clamp_events is only defined for a single path")
        idx = np.flatnonzero(self.clamps > 0)
        return [(int(k), float(self.clamps[k])) for k in idx]


def _check_stability(b, dt):
    if b * dt >= 2.0:
        raise ValueError(f"unstable step: b*dt = {b * dt} >= 2")


def _initial(noise, value):
    out = np.empty(noise.increments.shape[:-1] + (noise.grid.n_steps + 1,))
    out[..., 0] = value
    return out


def euler_cir_full_truncation(params: ModelParams, noise: NoisePath) -> SamplePath:
    """Full-truncation Euler scheme for ``dX = (a - bX) dt + sigma sqrt(X) dW``.

    ``X_{k+1} = X_k + (a - b X_k^+) dt + sigma sqrt(X_k^+) dW_k``. The raw
    iterate is returned and may dip below zero; consumers floor it at zero
    before taking square roots.
    """
    if not noise.is_brownian:
        raise ValueError("full-truncation Euler needs Brownian noise (hurst=1/2)")
    dt = noise.grid.dt
    a, b, sigma = params.a, params.b, params.sigma
    x = _initial(noise, params.x0)
    inc = noise.increments
    for k in range(noise.grid.n_steps):
        xp = np.maximum(x[..., k], 0.0)
        x[..., k + 1] = x[..., k] + (a - b * xp) * dt + sigma * np.sqrt(xp) * inc[..., k]
    return SamplePath(noise.grid, x)


def _check_drift(c):
    if c < 0:
        raise ValueError(
            f"drift numerator c={c} < 0: subcritical square-root SDE is not supported"
        )


def _sqrt_root(beta, c, dt, A):
    # positive root of A y^2 - beta y - c dt / 2 = 0, cancellation-free for beta < 0
    # hypot with sqrt(c) keeps tiny drift numerators from underflowing to 0
    disc = np.hypot(beta, np.sqrt(c) * np.sqrt(2.0 * dt * A))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(beta >= 0.0, (beta + disc) / (2.0 * A), (c * dt) / (disc - beta))


def implicit_sqrt_step(y, dt: float, dnoise, params: ModelParams, drift: float | None = None):
    """One backward-Euler step of ``dY = (c/(2Y) - bY/2) dt + (sigma/2) dB``.

    Solves ``(1 + b dt/2) y^2 - (y_prev + sigma dnoise/2) y - c dt/2 = 0``
    for its nonnegative root. ``drift`` overrides ``c``, which otherwise is
    ``params.drift_numerator``. With ``c = 0`` the step reduces to
    ``max(0, beta) / (1 + b dt/2)``.
    """
    c = params.drift_numerator if drift is None else float(drift)
    _check_drift(c)
    A = 1.0 + 0.5 * params.b * dt
    beta = np.asarray(y, dtype=float) + 0.5 * params.sigma * np.asarray(dnoise, dtype=float)
    out = _sqrt_root(beta, c, dt, A)
    return out[()] if out.ndim == 0 else out


def simulate_sqrt_process(params: ModelParams, noise: NoisePath) -> SamplePath:
    """Implicit square-root process; strictly positive whenever ``c > 0``.

    Brownian noise integrates ``dY = ((a - sigma^2/4 + eps)/(2Y) - bY/2) dt
    + (sigma/2) dW``; fractional noise integrates the same equation with
    numerator ``a + eps``. The noise Hurst index must match ``params.hurst``.
    """
    if noise.hurst != params.hurst:
        raise ValueError(
            f"noise hurst {noise.hurst} does not match params hurst {params.hurst}"
        )
    c = params.drift_numerator
    _check_drift(c)
    dt = noise.grid.dt
    A = 1.0 + 0.5 * params.b * dt
    half_sigma = 0.5 * params.sigma
    y = _initial(noise, params.y0)
    inc = noise.increments
    for k in range(noise.grid.n_steps):
        y[..., k + 1] = _sqrt_root(y[..., k] + half_sigma * inc[..., k], c, dt, A)
    return SamplePath(noise.grid, y)


def simulate_rou_projected(params: ModelParams, noise: NoisePath) -> SchemeOutput:
    """Projected Euler scheme for the reflected (fractional) OU process.

    ``Y_{k+1} = max(0, Y_k - (b/2) Y_k dt + (sigma/2) dB_k)``; the clamp
    ``-min(0, pre-projection value)`` accumulates into the reflection
    function. ``params.epsilon`` is ignored.
    """
    dt = noise.grid.dt
    _check_stability(params.b, dt)
    half_b, half_sigma = 0.5 * params.b, 0.5 * params.sigma
    y = _initial(noise, params.y0)
    clamps = np.empty(noise.increments.shape)
    inc = noise.increments
    for k in range(noise.grid.n_steps):
        yk = y[..., k]
        pre = yk - half_b * yk * dt + half_sigma * inc[..., k]
        clamps[..., k] = np.maximum(-pre, 0.0)
        y[..., k + 1] = np.maximum(pre, 0.0)
    refl = np.zeros_like(y)
    np.cumsum(clamps, axis=-1, out=refl[..., 1:])
    return SchemeOutput(SamplePath(noise.grid, y), ReflectionPath(noise.grid, refl), clamps)


def simulate_ou(params: ModelParams, noise: NoisePath) -> SamplePath:
    """Euler scheme for ``U = y0 - (b/2) int U ds + (sigma/2) B``.

    ``U_{k+1} = (1 - b dt/2) U_k + (sigma/2) dB_k``; the sign is free.
    """
    dt = noise.grid.dt
    _check_stability(params.b, dt)
    rho = 1.0 - 0.5 * params.b * dt
    forcing = 0.5 * params.sigma * noise.increments
    zi = np.full(forcing.shape[:-1] + (1,), rho * params.y0)
    tail, _ = lfilter([1.0], [1.0, -rho], forcing, axis=-1, zi=zi)
    u = _initial(noise, params.y0)
    u[..., 1:] = tail
    return SamplePath(noise.grid, u)


def ou_squared_sum(d: int, params: ModelParams, noises: Sequence[NoisePath]) -> SamplePath:
    """Sum of squares of ``d`` OU paths, each started at ``params.y0``.

    With independent Brownian drivers the sum is a CIR process with
    ``a = d sigma^2 / 4`` and ``x0 = d y0^2``.
    """
    if int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    noises = list(noises)
    if len(noises) != d:
        raise ValueError(f"expected {d} noise paths, got {len(noises)}")
    grid = noises[0].grid
    shape = noises[0].increments.shape
    for nz in noises:
        if nz.grid != grid or nz.increments.shape != shape:
            raise GridMismatchError("ou_squared_sum needs noises on a common grid")
        if not nz.is_brownian:
            raise ValueError("ou_squared_sum needs Brownian noise")
    total = np.zeros(shape[:-1] + (grid.n_steps + 1,))
    for nz in noises:
        total += simulate_ou(params, nz).values ** 2
    return SamplePath(grid, total)


def _rou_path(params, noise):
    return simulate_rou_projected(params, noise).path


# single-noise schemes addressable by name
SCHEMES = {
    "cir-euler": euler_cir_full_truncation,
    "sqrt-implicit": simulate_sqrt_process,
    "rou-projected": _rou_path,
    "ou": simulate_ou,
}
