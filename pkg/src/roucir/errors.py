"""Exception types raised across the package."""

from __future__ import annotations


class RouCirError(Exception):
    """Base class for every error raised by :mod:`roucir`."""


class ParameterError(RouCirError, ValueError):
    """One or more model parameters violate their constraints.

    ``names`` lists each violated constraint individually, e.g.
    ``("MeanReversionNonpositive", "VolatilityNonpositive")``.
    """

    def __init__(self, names, details=None):
        self.names = tuple(names)
        self.details = dict(details or {})
        parts = [f"{n} ({self.details[n]})" if n in self.details else n for n in self.names]
        super().__init__("invalid parameters: " + ", ".join(parts))


class GridMismatchError(RouCirError, ValueError):
    """Paths or noises that must share a time grid do not."""


class InsufficientSampleError(RouCirError, ValueError):
    """A statistical check received too few sample paths."""


class CirculantEmbeddingFailure(RouCirError, RuntimeError):
    """Circulant embedding produced negative eigenvalues."""

    def __init__(self, min_eigenvalue: float, size: int):
        self.min_eigenvalue = min_eigenvalue
        self.size = size
        super().__init__(
            f"circulant embedding of size {size} has a negative eigenvalue "
            f"({min_eigenvalue:.3e})"
        )
