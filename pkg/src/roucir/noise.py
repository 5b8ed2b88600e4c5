"""Driving noise: standard and fractional Brownian increments on a uniform grid.

Every generator is a pure function of ``(grid, hurst, seed, method)``. Batches
of independent paths are produced by asking for ``n_paths``; the increments
then have shape ``(n_paths, n_steps)`` and every scheme in
:mod:`roucir.schemes` integrates all of them at once.

Fractional Gaussian noise is sampled exactly, either with the Davies-Harte
circulant embedding (default) or with the Hosking / Durbin-Levinson
recursion. Hurst indices below 1/2 are rejected.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CirculantEmbeddingFailure, GridMismatchError, InsufficientSampleError

__all__ = [
    "TimeGrid",
    "RngSeed",
    "NoisePath",
    "StatReport",
    "fbm_covariance",
    "fgn_autocovariance",
    "generate_bm_increments",
    "generate_fbm_increments",
    "validate_noise_covariance",
    "check_hurst",
    "stack_noises",
]

logger = logging.getLogger(__name__)

DAVIES_HARTE = "davies-harte"
HOSKING = "hosking"
_METHODS = (DAVIES_HARTE, HOSKING)


def check_hurst(hurst: float) -> float:
    """Return ``hurst`` as a float, or raise if it lies outside [1/2, 1)."""
    hurst = float(hurst)
    if not (0.5 <= hurst < 1.0):
        raise ValueError(f"Hurst index must lie in [1/2, 1), got {hurst}")
    return hurst


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = k * dt`` on ``[0, horizon]``."""

    horizon: float
    n_steps: int

    def __post_init__(self):
        if not np.isfinite(self.horizon) or self.horizon <= 0:
            raise ValueError(f"horizon must be positive and finite, got {self.horizon}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @classmethod
    def from_dt(cls, horizon: float, dt: float) -> "TimeGrid":
        n = round(horizon / dt)
        if n < 1 or not np.isclose(n * dt, horizon, rtol=1e-9, atol=0.0):
            raise ValueError(f"dt={dt} does not divide horizon={horizon}")
        return cls(horizon, n)

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)

    def coarsen(self, factor: int) -> "TimeGrid":
        if factor < 1 or self.n_steps % factor:
            raise ValueError(f"factor {factor} does not divide n_steps={self.n_steps}")
        return TimeGrid(self.horizon, self.n_steps // factor)

    def index_of(self, t: float) -> int:
        """Nearest grid index to time ``t``."""
        k = int(round(t / self.dt))
        if not 0 <= k <= self.n_steps:
            raise ValueError(f"time {t} outside [0, {self.horizon}]")
        return k


@dataclass(frozen=True)
class RngSeed:
    """Master seed plus a replication stream index.

    Stream ``r`` is derived through :class:`numpy.random.SeedSequence` with
    ``spawn_key=(r,)``, so any replication can be regenerated on its own
    without drawing the preceding ones.
    """

    master: int
    stream: int = 0

    def __post_init__(self):
        if self.master < 0 or self.stream < 0:
            raise ValueError("seed components must be nonnegative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.master), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))

    def with_stream(self, stream: int) -> "RngSeed":
        return RngSeed(self.master, stream)


def _as_seed(seed) -> RngSeed:
    if isinstance(seed, RngSeed):
        return seed
    return RngSeed(int(seed))


@dataclass(frozen=True)
class NoisePath:
    """Increments of a driving process on ``grid``.

    ``increments`` has shape ``(n_steps,)`` for a single path or
    ``(n_paths, n_steps)`` for a batch. ``kind`` is ``"bm"`` or ``"fbm"``.
    ``notes`` collects generator events worth recording in a run manifest
    (padding retries, Hosking fallback).
    """

    grid: TimeGrid
    increments: np.ndarray
    kind: str = "bm"
    hurst: float = 0.5
    seed: RngSeed | None = None
    method: str | None = None
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        inc = np.array(self.increments, dtype=float)
        if inc.ndim not in (1, 2) or inc.shape[-1] != self.grid.n_steps:
            raise GridMismatchError(
                f"increments of shape {inc.shape} do not match n_steps={self.grid.n_steps}"
            )
        if not np.all(np.isfinite(inc)):
            raise ValueError("noise increments must be finite")
        if self.kind not in ("bm", "fbm"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "bm" and self.hurst != 0.5:
            raise ValueError("Brownian noise must carry hurst=0.5")
        check_hurst(self.hurst)
        inc.setflags(write=False)
        object.__setattr__(self, "increments", inc)

    @property
    def is_brownian(self) -> bool:
        return self.hurst == 0.5

    @property
    def n_paths(self) -> int:
        return 1 if self.increments.ndim == 1 else self.increments.shape[0]

    @property
    def batched(self) -> bool:
        return self.increments.ndim == 2

    def cumulative(self) -> np.ndarray:
        """Path values at grid points, starting from 0."""
        out = np.zeros(self.increments.shape[:-1] + (self.grid.n_steps + 1,))
        np.cumsum(self.increments, axis=-1, out=out[..., 1:])
        return out

    def coarsen(self, factor: int) -> "NoisePath":
        """Block sums of ``factor`` consecutive increments (common random numbers)."""
        grid = self.grid.coarsen(factor)
        inc = self.increments.reshape(self.increments.shape[:-1] + (grid.n_steps, factor))
        return NoisePath(grid, inc.sum(axis=-1), self.kind, self.hurst, self.seed, self.method, self.notes)

    def path(self, i: int) -> "NoisePath":
        """The ``i``-th member of a batch as a single-path NoisePath."""
        if not self.batched:
            if i != 0:
                raise IndexError(i)
            return self
        return NoisePath(self.grid, self.increments[i], self.kind, self.hurst, self.seed, self.method, self.notes)

    def split(self) -> list["NoisePath"]:
        return [self.path(i) for i in range(self.n_paths)]

    def with_increments(self, increments: np.ndarray) -> "NoisePath":
        return NoisePath(self.grid, increments, self.kind, self.hurst, self.seed, self.method, self.notes)


def stack_noises(noises: Sequence[NoisePath]) -> NoisePath:
    """Stack single-path noises (e.g. one per seed) into one batch."""
    noises = list(noises)
    if not noises:
        raise ValueError("nothing to stack")
    first = noises[0]
    for nz in noises:
        if nz.grid != first.grid:
            raise GridMismatchError("cannot stack noises on different grids")
        if nz.kind != first.kind or nz.hurst != first.hurst or nz.batched:
            raise ValueError("stack_noises needs single paths of one kind and Hurst index")
    notes = tuple(n for nz in noises for n in nz.notes)
    inc = np.vstack([nz.increments for nz in noises])
    return NoisePath(first.grid, inc, first.kind, first.hurst, None, first.method, notes)


def fbm_covariance(s, t, hurst: float):
    """Covariance ``E[B^H(s) B^H(t)]`` of fractional Brownian motion.

    >>> fbm_covariance(1.0, 2.0, 0.5)
    1.0
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise ValueError("fbm_covariance is defined for nonnegative times only")
    if not 0.0 < hurst < 1.0:
        raise ValueError(f"Hurst index must lie in (0, 1), got {hurst}")
    h2 = 2.0 * hurst
    out = 0.5 * (s**h2 + t**h2 - np.abs(t - s) ** h2)
    return out[()] if out.ndim == 0 else out


def fgn_autocovariance(k, hurst: float):
    """Lag-``k`` autocovariance of unit-step fractional Gaussian noise."""
    k = np.abs(np.asarray(k, dtype=float))
    h2 = 2.0 * hurst
    out = 0.5 * ((k + 1.0) ** h2 - 2.0 * k**h2 + np.abs(k - 1.0) ** h2)
    return out[()] if out.ndim == 0 else out


def generate_bm_increments(grid: TimeGrid, seed, n_paths: int | None = None) -> NoisePath:
    """I.i.d. ``N(0, dt)`` increments of standard Brownian motion."""
    seed = _as_seed(seed)
    shape = (grid.n_steps,) if n_paths is None else (int(n_paths), grid.n_steps)
    z = seed.generator().standard_normal(shape)
    return NoisePath(grid, np.sqrt(grid.dt) * z, "bm", 0.5, seed, None)


def _circulant_eigenvalues(n: int, hurst: float, size: int) -> np.ndarray:
    half = size // 2
    gamma = fgn_autocovariance(np.arange(half + 1), hurst)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    return np.fft.fft(row).real


def _davies_harte(n, hurst, rng, shape, notes, max_doublings=1):
    size = 2 * n
    for attempt in range(max_doublings + 1):
        lam = _circulant_eigenvalues(n, hurst, size)
        tol = 1e-12 * lam.max()
        if lam.min() >= -tol:
            break
        notes.append(f"davies-harte: negative eigenvalue at size {size}")
        if attempt == max_doublings:
            raise CirculantEmbeddingFailure(float(lam.min()), size)
        size *= 2
    lam = np.clip(lam, 0.0, None)
    z = rng.standard_normal(shape + (size,)) + 1j * rng.standard_normal(shape + (size,))
    x = np.fft.fft(np.sqrt(lam / size) * z, axis=-1)
    return x.real[..., :n]


def _hosking(n, hurst, rng, shape):
    gamma = fgn_autocovariance(np.arange(n), hurst)
    z = rng.standard_normal(shape + (n,))
    x = np.empty(shape + (n,))
    x[..., 0] = z[..., 0]
    phi = np.zeros(0)
    v = gamma[0]
    for k in range(1, n):
        # Durbin-Levinson update of the one-step predictor
        phi_kk = (gamma[k] - phi @ gamma[k - 1:0:-1]) / v
        phi = np.concatenate([phi - phi_kk * phi[::-1], [phi_kk]])
        v *= 1.0 - phi_kk * phi_kk
        mean = x[..., k - 1::-1] @ phi
        x[..., k] = mean + np.sqrt(v) * z[..., k]
    return x


def generate_fbm_increments(
    grid: TimeGrid,
    hurst: float,
    seed,
    method: str = DAVIES_HARTE,
    n_paths: int | None = None,
) -> NoisePath:
    """Exact fractional Gaussian noise increments of ``B^H`` on ``grid``.

    Parameters
    ----------
    grid : TimeGrid
    hurst : float
        Hurst index in [1/2, 1).
    seed : int or RngSeed
    method : {"davies-harte", "hosking"}
        Davies-Harte retries once with doubled circulant padding when the
        embedding has negative eigenvalues, then falls back to Hosking. The
        fallback is recorded in ``NoisePath.notes``.
    n_paths : int, optional
        Batch size; ``None`` returns a single path.

    Returns
    -------
    NoisePath
        Kind ``"fbm"``; increments scaled by ``dt**hurst``.
    """
    hurst = check_hurst(hurst)
    if method not in _METHODS:
        raise ValueError(f"unknown fBm method {method!r}; expected one of {_METHODS}")
    seed = _as_seed(seed)
    rng = seed.generator()
    shape = () if n_paths is None else (int(n_paths),)
    n = grid.n_steps
    notes: list[str] = []
    used = method
    if method == DAVIES_HARTE:
        try:
            x = _davies_harte(n, hurst, rng, shape, notes)
        except CirculantEmbeddingFailure as exc:
            logger.warning("%s; falling back to Hosking", exc)
            notes.append(f"fallback to hosking: {exc}")
            used = HOSKING
            rng = seed.generator()
            x = _hosking(n, hurst, rng, shape)
    else:
        x = _hosking(n, hurst, rng, shape)
    inc = grid.dt**hurst * x
    return NoisePath(grid, inc, "fbm", hurst, seed, used, tuple(notes))


@dataclass(frozen=True)
class StatReport:
    """Sample versus theoretical covariance of path values at ``(s, t)`` pairs."""

    pairs: tuple[tuple[float, float], ...]
    sample: np.ndarray
    theoretical: np.ndarray
    std_error: np.ndarray
    n_paths: int

    @property
    def z_scores(self) -> np.ndarray:
        return (self.sample - self.theoretical) / self.std_error

    @property
    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.z_scores)))

    def passed(self, threshold: float = 4.0) -> bool:
        return self.max_abs_z < threshold

    def table(self) -> str:
        lines = ["       s        t     sample  theoretical        z"]
        for (s, t), m, th, z in zip(self.pairs, self.sample, self.theoretical, self.z_scores):
            lines.append(f"{s:8.4f} {t:8.4f} {m:10.5f} {th:12.5f} {z:8.3f}")
        return "\n".join(lines)


def _default_pairs(horizon):
    T = horizon
    return ((T / 4, T / 4), (T / 4, T / 2), (T / 2, T / 2), (T / 2, T), (T, T))


def validate_noise_covariance(
    paths: NoisePath | Sequence[NoisePath],
    hurst: float,
    pairs: Iterable[tuple[float, float]] | None = None,
) -> StatReport:
    """Compare the sample covariance of ``B(s), B(t)`` with :func:`fbm_covariance`.

    ``paths`` is either one batched NoisePath or a collection of single
    paths on a common grid; at least 100 paths are required. The mean is
    known to be zero, so the estimator is the sample mean of
    ``B(s) B(t)`` and its standard error is the sample standard deviation of
    those products over ``sqrt(n_paths)``.
    """
    if isinstance(paths, NoisePath):
        grid = paths.grid
        values = np.atleast_2d(paths.cumulative())
    else:
        paths = list(paths)
        if not paths:
            raise InsufficientSampleError("no paths supplied")
        grid = paths[0].grid
        if any(p.grid != grid for p in paths):
            raise GridMismatchError("noise paths live on different grids")
        values = np.vstack([np.atleast_2d(p.cumulative()) for p in paths])
    n = values.shape[0]
    if n < 100:
        raise InsufficientSampleError(f"need at least 100 paths, got {n}")
    pairs = tuple(pairs) if pairs is not None else _default_pairs(grid.horizon)
    times = grid.times
    sample, theo, se = [], [], []
    for s, t in pairs:
        i, j = grid.index_of(s), grid.index_of(t)
        prod = values[:, i] * values[:, j]
        sample.append(prod.mean())
        se.append(prod.std(ddof=1) / np.sqrt(n))
        theo.append(fbm_covariance(times[i], times[j], hurst))
    return StatReport(pairs, np.array(sample), np.array(theo), np.array(se), n)
