"""Batch objective evaluation and the static Vardi-Zhang baseline.

``empirical_loss`` and ``empirical_subgradient`` evaluate the normalized
objective ``mean(||x_i - a|| - ||x_i||)`` and a subgradient of it (atoms
coinciding with the evaluation point are dropped, which picks a valid
subgradient at the kinks). ``vardi_zhang`` iterates the modified Weiszfeld
map, which handles iterates landing exactly on data points.
``brute_force_oracle`` is a deliberately naive grid minimizer used to
cross-check the solvers at desk scale.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from geomed.backend import kernels
from geomed.core import as_vector, data_array, eps_zero, norm
from geomed.sgd import EstimateReport

__all__ = [
    "SolverConfig",
    "empirical_loss",
    "empirical_subgradient",
    "quantile_objective",
    "vardi_zhang",
    "vz_optimality",
    "brute_force_oracle",
]


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-8
    max_iter: int = 10_000

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


def empirical_loss(alpha, data) -> float:
    """``mean(||x_i - alpha|| - ||x_i||)``; finite for any finite alpha."""
    arr = data_array(data)
    alpha = as_vector(alpha, dim=arr.shape[1])
    return float(kernels.loss(arr, alpha))


def empirical_subgradient(alpha, data) -> np.ndarray:
    """Subgradient ``-(1/n) sum_{x_i != alpha} (x_i - alpha)/||x_i - alpha||``."""
    arr = data_array(data)
    alpha = as_vector(alpha, dim=arr.shape[1])
    out = np.empty(arr.shape[1])
    kernels.subgrad(arr, alpha, out)
    return out


def quantile_objective(alpha, data, v) -> float:
    """Directional objective ``empirical_loss + <xbar - alpha, v>``.

    Minimized by the empirical geometric quantile for direction ``v``;
    reduces to ``empirical_loss`` when ``v = 0``.
    """
    arr = data_array(data)
    alpha = as_vector(alpha, dim=arr.shape[1])
    v = as_vector(v, dim=arr.shape[1])
    return empirical_loss(alpha, arr) + float((arr.mean(axis=0) - alpha) @ v)


def _aggregate(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deduplicate exactly-equal rows into (unique points, multiplicities)."""
    uniq, counts = np.unique(arr, axis=0, return_counts=True)
    return np.ascontiguousarray(uniq), counts.astype(np.float64)


def vardi_zhang(data, config: SolverConfig | None = None, z0=None) -> EstimateReport:
    """Static geometric-median estimate via the modified Weiszfeld map.

    Duplicate points are aggregated into weights up front. Starting from
    ``z0`` (default: the coordinate-wise mean), each iteration pulls the
    iterate toward the weighted reprojection ``T(y)`` while the multiplicity
    sitting exactly at ``y`` holds it back; iteration stops once the move
    falls below ``tol * max(1, ||y||)``. Non-convergence within ``max_iter``
    is reported via ``converged=False``, not raised.
    """
    config = config or SolverConfig()
    t0 = time.perf_counter()
    arr = data_array(data)
    points, weights = _aggregate(arr)
    y = arr.mean(axis=0) if z0 is None else as_vector(z0, dim=arr.shape[1]).copy()
    out = np.empty_like(y)
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iter + 1):
        kernels.vz_step(points, weights, y, out)
        if norm(out - y) <= config.tol * max(1.0, norm(y)):
            y = out.copy()
            converged = True
            break
        y, out = out, y
    return EstimateReport(estimate=y, empirical_loss=empirical_loss(y, arr),
                          observations=arr.shape[0],
                          elapsed=time.perf_counter() - t0,
                          method="vardi_zhang", iterations=iterations,
                          converged=converged)


def vz_optimality(data, y) -> tuple[float, float]:
    """Optimality certificate ``(r, eta)`` at ``y``.

    ``r`` is the norm of the summed unit directions away from ``y`` and
    ``eta`` the number of sample points equal to ``y``; ``y`` is a minimizer
    iff ``r <= eta`` when ``y`` is a data atom, or ``r = 0`` otherwise.
    """
    arr = data_array(data)
    y = as_vector(y, dim=arr.shape[1])
    points, weights = _aggregate(arr)
    out = np.empty_like(y)
    r, eta = kernels.vz_step(points, weights, y, out)
    return float(r), float(eta)


def brute_force_oracle(data, bounds, resolution: int, v=None) -> np.ndarray:
    """Grid argmin of the empirical objective over a box (test oracle).

    ``bounds`` is one (lo, hi) pair per axis, d <= 3, and the grid has
    ``resolution <= 2001`` points per axis; accuracy is the grid spacing.
    With ``v`` given, minimizes the directional quantile objective instead.
    """
    arr = data_array(data)
    d = arr.shape[1]
    if d > 3:
        raise ValueError("brute-force grid search is limited to d <= 3")
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    if len(bounds) != d:
        raise ValueError(f"need {d} (lo, hi) pairs, got {len(bounds)}")
    if not 2 <= resolution <= 2001:
        raise ValueError("resolution must be in [2, 2001]")
    axes = [np.linspace(lo, hi, resolution) for lo, hi in bounds]
    if v is not None:
        v = as_vector(v, dim=d)
    xbar = arr.mean(axis=0)

    best_val = np.inf
    best_point = None
    tail = np.array(list(itertools.product(*axes[1:]))) if d > 1 else np.zeros((1, 0))
    # Chunk along the first axis so the (points, n, d) intermediate stays small.
    per_head = tail.shape[0] * arr.shape[0] * d
    chunk = max(1, int(6e6 / per_head))
    for start in range(0, resolution, chunk):
        head = axes[0][start:start + chunk]
        pts = np.empty((head.shape[0] * tail.shape[0], d))
        pts[:, 0] = np.repeat(head, tail.shape[0])
        if d > 1:
            pts[:, 1:] = np.tile(tail, (head.shape[0], 1))
        dists = np.linalg.norm(arr[None, :, :] - pts[:, None, :], axis=2)
        vals = dists.mean(axis=1)
        if v is not None:
            vals = vals + (xbar - pts) @ v
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val = float(vals[i])
            best_point = pts[i].copy()
    return best_point
