"""Run configuration, CSV output and run manifests.

Configuration and manifests share one line-oriented ``key = value`` format.
A manifest starts with the parameter echo and adds metadata under the
reserved ``run.`` / ``ladder.`` prefixes, which the config reader skips, so
a manifest can be fed back as a config to reproduce a run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import RouCirError
from .models import ModelParams, ReflectionPath, SamplePath
from .noise import NoisePath, TimeGrid

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config",
    "read_config",
    "write_csv",
    "write_sample_path",
    "write_scheme_output",
    "write_reflection",
    "write_noise",
    "write_manifest",
    "read_manifest",
]

_FLOAT_KEYS = ("y0", "a", "b", "sigma", "epsilon", "hurst", "T")
_INT_KEYS = ("n_steps", "seed", "replications")
_METADATA_PREFIXES = ("run.", "ladder.")
_FMT = "%.17g"


class ConfigError(RouCirError, ValueError):
    """Malformed configuration; ``key`` names the offending entry."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = field(default_factory=lambda: ModelParams(0.25))
    horizon: float = 5.0
    n_steps: int = 5000
    seed: int = 0
    replications: int = 1

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.horizon, self.n_steps)

    def items(self) -> list[tuple[str, str]]:
        p = self.params
        return [
            ("y0", repr(p.y0)),
            ("a", repr(p.a)),
            ("b", repr(p.b)),
            ("sigma", repr(p.sigma)),
            ("epsilon", repr(p.epsilon)),
            ("hurst", repr(p.hurst)),
            ("T", repr(self.horizon)),
            ("n_steps", str(self.n_steps)),
            ("seed", str(self.seed)),
            ("replications", str(self.replications)),
        ]


def _parse_lines(text: str):
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}", key=key, line=lineno)
        seen[key] = (value, lineno)
    return seen


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines; unknown keys are errors.

    Keys: y0, a, b, sigma, epsilon, hurst, T, n_steps, seed, replications.
    Missing keys keep the value from ``base`` (defaults: y0=0.25, a=0, b=1,
    sigma=1, epsilon=0, hurst=0.5, T=5, n_steps=5000, seed=0,
    replications=1). ``#`` starts a comment.
    """
    base = base or RunConfig()
    values = dict(base.items())
    for key, (value, lineno) in _parse_lines(text).items():
        if key.startswith(_METADATA_PREFIXES):
            continue
        if key not in _FLOAT_KEYS and key not in _INT_KEYS:
            raise ConfigError(f"unknown key {key!r}", key=key, line=lineno)
        try:
            float(value) if key in _FLOAT_KEYS else int(value)
        except ValueError:
            kind = "a number" if key in _FLOAT_KEYS else "an integer"
            raise ConfigError(f"{key} must be {kind}, got {value!r}", key=key, line=lineno) from None
        values[key] = value
    try:
        params = ModelParams(
            y0=float(values["y0"]),
            a=float(values["a"]),
            b=float(values["b"]),
            sigma=float(values["sigma"]),
            epsilon=float(values["epsilon"]),
            hurst=float(values["hurst"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), key=None) from exc
    n_steps, seed, reps = (int(values[k]) for k in _INT_KEYS)
    if n_steps < 1:
        raise ConfigError("n_steps must be >= 1", key="n_steps")
    if seed < 0:
        raise ConfigError("seed must be >= 0", key="seed")
    if reps < 1:
        raise ConfigError("replications must be >= 1", key="replications")
    horizon = float(values["T"])
    if not horizon > 0:
        raise ConfigError("T must be positive", key="T")
    return RunConfig(params, horizon, n_steps, seed, reps)


def read_config(path, base: RunConfig | None = None) -> RunConfig:
    return parse_config(Path(path).read_text(), base)


def write_csv(path, header: str, columns: Iterable[np.ndarray]) -> Path:
    """Comma-separated, ``%.17g`` numbers, LF line endings, one header line."""
    path = Path(path)
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    with open(path, "w", newline="\n") as fh:
        np.savetxt(fh, data, fmt=_FMT, delimiter=",", header=header, comments="")
    return path


def write_sample_path(path, sample: SamplePath) -> Path:
    return write_csv(path, "t,value", [sample.times, sample.values])


def write_scheme_output(path, sample: SamplePath, reflection: ReflectionPath) -> Path:
    return write_csv(path, "t,Y,L", [sample.times, sample.values, reflection.values])


def write_reflection(path, reflection: ReflectionPath) -> Path:
    return write_csv(path, "t,L", [reflection.times, reflection.values])


def write_noise(path, noise: NoisePath) -> Path:
    """One row per step: right endpoint time, increment, running sum."""
    if noise.batched:
        raise ValueError("write_noise takes a single path")
    t = noise.grid.times[1:]
    return write_csv(path, "t,increment,cum", [t, noise.increments, noise.cumulative()[1:]])


def write_manifest(path, items: Iterable[tuple[str, str]]) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        for key, value in items:
            fh.write(f"{key} = {value}\n")
    return path


def read_manifest(path) -> dict[str, str]:
    return {k: v for k, (v, _) in _parse_lines(Path(path).read_text()).items()}
