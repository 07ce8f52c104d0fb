"""Foundational numeric types: vectors, datasets and step-size schedules.

Vectors are plain 1-D float64 numpy arrays; :func:`as_vector` is the single
entry point that enforces the invariants (finite entries, dimension >= 1).
Datasets wrap a read-only, C-contiguous ``(n, d)`` array so that streaming
passes stay cache friendly even when ``n * d`` gets large.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DimensionMismatch",
    "Dataset",
    "StepSchedule",
    "as_vector",
    "data_array",
    "norm",
    "eps_zero",
    "step_size",
]

# Relative threshold deciding "this observation coincides with the iterate".
# Shared by every degenerate-case branch (SGD step, subgradient, Weiszfeld).
EPS_MATCH = 1e-12


class DimensionMismatch(ValueError):
    """Raised when two vectors or a vector and a dataset disagree on d."""


def as_vector(values, dim: int | None = None) -> np.ndarray:
    """Validate and return ``values`` as a finite 1-D float64 array."""
    x = np.ascontiguousarray(values, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 1:
        raise ValueError(f"expected a 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector entries must be finite")
    if dim is not None and x.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {x.shape[0]}")
    return x


def norm(x) -> float:
    """Euclidean norm; zero exactly when ``x`` is the zero vector."""
    return float(np.linalg.norm(np.asarray(x, dtype=np.float64)))


def eps_zero(x) -> float:
    """Degenerate-match threshold at ``x``: ``1e-12 * max(1, ||x||)``."""
    return EPS_MATCH * max(1.0, norm(x))


class Dataset:
    """Immutable ordered collection of ``n >= 1`` points of equal dimension.

    Points are stored row-major in one contiguous float64 block.
    """

    __slots__ = ("_points",)

    def __init__(self, points):
        arr = np.ascontiguousarray(points, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected an (n, d) array, got shape {arr.shape}")
        n, d = arr.shape
        if n < 1 or d < 1:
            raise ValueError(f"dataset needs n >= 1 and d >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise ValueError(f"non-finite value at point {bad[0]}, coordinate {bad[1]}")
        arr.setflags(write=False)
        self._points = arr

    @property
    def points(self) -> np.ndarray:
        """Read-only ``(n, d)`` view of the data."""
        return self._points

    @property
    def n(self) -> int:
        return self._points.shape[0]

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i) -> np.ndarray:
        return self._points[i]

    def __iter__(self):
        return iter(self._points)

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, dim={self.dim})"


def data_array(data) -> np.ndarray:
    """Coerce a Dataset or array-like into a validated ``(n, d)`` array."""
    if isinstance(data, Dataset):
        return data.points
    return Dataset(data).points


@dataclass(frozen=True)
class StepSchedule:
    """Descent gains ``gamma_n = c_gamma * n**(-alpha)``.

    ``alpha`` must lie strictly inside (1/2, 1): the lower bound keeps the
    squared gains summable, the upper bound keeps the gains non-summable,
    and ``alpha = 1`` is rejected outright because that regime makes the
    constant ``c_gamma`` critical rather than a mild tuning knob.
    """

    c_gamma: float
    alpha: float = 0.75

    def __post_init__(self):
        if not (np.isfinite(self.c_gamma) and self.c_gamma > 0):
            raise ValueError(f"c_gamma must be a positive real, got {self.c_gamma}")
        if not (0.5 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie strictly in (1/2, 1), got {self.alpha}")

    def step_size(self, n: int) -> float:
        """Gain used by the n-th step, n >= 1; strictly decreasing in n."""
        if n < 1:
            raise ValueError(f"step index must be >= 1, got {n}")
        return self.c_gamma * float(n) ** (-self.alpha)


def step_size(schedule: StepSchedule, n: int) -> float:
    """Functional alias for :meth:`StepSchedule.step_size`."""
    return schedule.step_size(n)
