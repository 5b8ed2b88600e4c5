"""Model parameters, derived quantities and path containers."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParameterError
from .noise import TimeGrid

__all__ = [
    "Regime",
    "ModelParams",
    "DerivedQuantities",
    "ValidatedParams",
    "SamplePath",
    "ReflectionPath",
    "SubcriticalWarning",
    "validate",
    "regime",
]


class SubcriticalWarning(UserWarning):
    """Simulation requested with ``a < sigma**2 / 4``; no limit theorem applies."""


class Regime(enum.Enum):
    SUPERCRITICAL = "supercritical"
    CRITICAL = "critical"
    SUBCRITICAL = "subcritical"


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the square-root / reflected OU family.

    ``y0`` is the initial value of the square-root process (so ``x0 = y0**2``
    for the CIR process), ``a`` the CIR mean-reversion numerator, ``b`` the
    mean-reversion speed, ``sigma`` the volatility, ``epsilon`` the
    perturbation of the drift numerator and ``hurst`` the Hurst index of the
    driving noise (1/2 for Brownian motion).

    Construction only rejects values that make no sense for any scheme
    (negative ``a``, ``epsilon``, ``b``, ``sigma``, ``y0``; non-finite
    values; ``hurst`` outside [1/2, 1)). :func:`validate` applies the strict
    positivity constraints.
    """

    y0: float
    a: float = 0.0
    b: float = 1.0
    sigma: float = 1.0
    epsilon: float = 0.0
    hurst: float = 0.5

    def __post_init__(self):
        bad, details = [], {}
        for name in ("y0", "a", "b", "sigma", "epsilon", "hurst"):
            value = getattr(self, name)
            if not math.isfinite(value):
                bad.append("NonFinite")
                details["NonFinite"] = name
        checks = [
            (self.y0 < 0, "InitialValueNegative"),
            (self.a < 0, "DriftNumeratorNegative"),
            (self.b < 0, "MeanReversionNegative"),
            (self.sigma < 0, "VolatilityNegative"),
            (self.epsilon < 0, "PerturbationNegative"),
            (not 0.5 <= self.hurst < 1.0, "HurstOutOfRange"),
        ]
        bad += [name for failed, name in checks if failed]
        if bad:
            raise ParameterError(bad, details)
        for name in ("y0", "a", "b", "sigma", "epsilon", "hurst"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def x0(self) -> float:
        return self.y0 * self.y0

    @property
    def p(self) -> float:
        """``a - sigma**2 / 4``."""
        return self.a - self.sigma**2 / 4.0

    @property
    def d(self) -> float:
        """Degrees of freedom ``4 a / sigma**2``."""
        return 4.0 * self.a / self.sigma**2 if self.sigma > 0 else math.inf

    @property
    def regime(self) -> Regime:
        return regime(self)

    @property
    def drift_numerator(self) -> float:
        """Numerator ``c`` of the ``c / (2 Y)`` drift of the square-root SDE.

        Brownian case: ``c = a - sigma**2/4 + epsilon``. Fractional case:
        ``c = a + epsilon`` (no Ito correction under pathwise integration).
        """
        if self.hurst == 0.5:
            return self.p + self.epsilon
        return self.a + self.epsilon

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def regime(params: ModelParams) -> Regime:
    """Classify by the sign of ``4a - sigma**2`` with exact float comparison."""
    lhs, rhs = 4.0 * params.a, params.sigma**2
    if lhs > rhs:
        return Regime.SUPERCRITICAL
    if lhs == rhs:
        return Regime.CRITICAL
    return Regime.SUBCRITICAL


@dataclass(frozen=True)
class DerivedQuantities:
    p: float
    d: float
    regime: Regime


@dataclass(frozen=True)
class ValidatedParams:
    params: ModelParams
    derived: DerivedQuantities
    warnings: tuple[str, ...] = field(default=())


def validate(params: ModelParams, *, allow_zero_mean_reversion: bool = False) -> ValidatedParams:
    """Check the strict constraints ``y0 > 0``, ``b > 0``, ``sigma > 0``.

    Every violated constraint is reported in one :class:`ParameterError`.
    ``allow_zero_mean_reversion`` admits ``b = 0`` (plain and reflected
    scaled Brownian motion). A subcritical Brownian configuration is
    accepted but emits :class:`SubcriticalWarning` and is listed in
    ``warnings``.
    """
    bad = []
    if params.y0 <= 0:
        bad.append("InitialValueNonpositive")
    if params.b < 0 or (params.b == 0 and not allow_zero_mean_reversion):
        bad.append("MeanReversionNonpositive")
    if params.sigma <= 0:
        bad.append("VolatilityNonpositive")
    if bad:
        raise ParameterError(bad)
    reg = regime(params)
    notes = []
    if params.hurst == 0.5 and reg is Regime.SUBCRITICAL:
        msg = f"subcritical regime: a={params.a} < sigma^2/4={params.sigma**2 / 4}"
        warnings.warn(msg, SubcriticalWarning, stacklevel=2)
        notes.append(msg)
    return ValidatedParams(params, DerivedQuantities(params.p, params.d, reg), tuple(notes))


def _check_values(values, grid):
    values = np.array(values, dtype=float)
    if values.shape[-1] != grid.n_steps + 1:
        raise ValueError(
            f"path has {values.shape[-1]} points, grid needs {grid.n_steps + 1}"
        )
    if not np.all(np.isfinite(values)):
        raise ValueError("path values must be finite")
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class SamplePath:
    """Process values at the grid points; shape ``(..., n_steps + 1)``."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.values, self.grid))

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def path(self, i: int) -> "SamplePath":
        return SamplePath(self.grid, self.values[i]) if self.values.ndim > 1 else self

    def coarsen(self, factor: int) -> "SamplePath":
        """Values at every ``factor``-th grid point."""
        return SamplePath(self.grid.coarsen(factor), self.values[..., ::factor])


@dataclass(frozen=True)
class ReflectionPath:
    """A reflection function sampled on the grid; starts at 0.

    Monotonicity is checked by :meth:`is_monotone` rather than enforced,
    since estimators applied to arbitrary inputs can violate it.
    """

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = _check_values(self.values, self.grid)
        if np.any(values[..., 0] != 0.0):
            raise ValueError("reflection path must start at 0")
        object.__setattr__(self, "values", values)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def terminal(self):
        return self.values[..., -1]

    def is_monotone(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.diff(self.values, axis=-1) >= -tol))

    def path(self, i: int) -> "ReflectionPath":
        return ReflectionPath(self.grid, self.values[i]) if self.values.ndim > 1 else self
