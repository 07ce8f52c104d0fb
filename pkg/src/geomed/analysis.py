"""Statistical diagnostics: error metric, curvature and sandwich covariance.

The Hessian of the objective at a non-atomic point has the empirical form
``mean_i (1/r_i) (I - u_i u_i^T)`` with ``r_i = ||x_i - a||`` and unit
directions ``u_i``; the unit-score covariance is ``mean_i u_i u_i^T``.
Their sandwich composition ``H^{-1} S H^{-1}`` is the asymptotic covariance
of the scaled, averaged estimator, which :mod:`geomed.simulate` checks by
Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from geomed._rng import NS_CONVEXITY, rng_for
from geomed.core import as_vector, data_array, eps_zero

__all__ = [
    "AtomCoincidenceError",
    "SingularHessianError",
    "ConvexityReport",
    "estimation_error",
    "hessian_estimate",
    "score_covariance",
    "sandwich_covariance",
    "convexity_check",
]

# Above this dimension the d x d covariances are refused unless the caller
# opts in: quadratic memory is pointless for estimate-only workloads.
LARGE_DIM = 2000


class AtomCoincidenceError(ValueError):
    """Evaluation point sits on a data atom where the Hessian is undefined."""


class SingularHessianError(ValueError):
    """Hessian is numerically singular (data nearly concentrated on a line)."""


def estimation_error(m_hat, m) -> float:
    """Euclidean distance between an estimate and the reference point."""
    m_hat = as_vector(m_hat)
    m = as_vector(m, dim=m_hat.shape[0])
    return float(np.linalg.norm(m_hat - m))


def _unit_directions(alpha, data) -> tuple[np.ndarray, np.ndarray]:
    arr = data_array(data)
    alpha = as_vector(alpha, dim=arr.shape[1])
    diffs = arr - alpha
    r = np.linalg.norm(diffs, axis=1)
    if float(r.min()) <= eps_zero(alpha):
        raise AtomCoincidenceError(
            "evaluation point coincides with a data atom; move it off the sample")
    return diffs / r[:, None], r


def hessian_estimate(alpha, data) -> np.ndarray:
    """Empirical Hessian ``mean_i (1/r_i)(I - u_i u_i^T)`` at ``alpha``.

    Symmetric positive semidefinite; raises :class:`AtomCoincidenceError`
    when ``alpha`` matches a data point.
    """
    u, r = _unit_directions(alpha, data)
    n, d = u.shape
    delta = (u / r[:, None]).T @ u / n
    h = float((1.0 / r).mean()) * np.eye(d) - delta
    return (h + h.T) / 2.0


def score_covariance(alpha, data) -> np.ndarray:
    """Covariance ``mean_i u_i u_i^T`` of the unit scores; unit trace."""
    u, _ = _unit_directions(alpha, data)
    s = u.T @ u / u.shape[0]
    return (s + s.T) / 2.0


def sandwich_covariance(data, m_hat, allow_large: bool = False) -> np.ndarray:
    """Asymptotic covariance ``H^{-1} S H^{-1}`` evaluated at ``m_hat``.

    Raises :class:`SingularHessianError` when the smallest eigenvalue of the
    Hessian falls below ``1e-10`` times the largest, which empirically flags
    data concentrated near a line.
    """
    arr = data_array(data)
    if arr.shape[1] > LARGE_DIM and not allow_large:
        raise ValueError(
            f"refusing a {arr.shape[1]}x{arr.shape[1]} covariance; "
            "pass allow_large=True to override")
    h = hessian_estimate(m_hat, arr)
    s = score_covariance(m_hat, arr)
    w, vecs = np.linalg.eigh(h)
    if w[0] <= 1e-10 * w[-1]:
        raise SingularHessianError(
            "Hessian is numerically singular; the sample looks concentrated "
            "near a line, so the sandwich covariance is not identifiable")
    h_inv = (vecs / w) @ vecs.T
    out = h_inv @ s @ h_inv
    return (out + out.T) / 2.0


@dataclass(frozen=True)
class ConvexityReport:
    min_eig_lower: float
    max_eig_upper: float
    trials: int


def convexity_check(data, box, trials: int, seed: int) -> ConvexityReport:
    """Sample Hessian eigenvalue extremes over random points in a box.

    A strictly positive ``min_eig_lower`` is the empirical strong-convexity
    certificate; collinear or one-point data drive it to zero.
    """
    arr = data_array(data)
    d = arr.shape[1]
    bounds = [(float(lo), float(hi)) for lo, hi in box]
    if len(bounds) != d:
        raise ValueError(f"need {d} (lo, hi) pairs, got {len(bounds)}")
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    rng = rng_for(seed, NS_CONVEXITY)
    min_eig = np.inf
    max_eig = -np.inf
    done = 0
    while done < trials:
        for _ in range(100):
            alpha = lo + rng.random(d) * (hi - lo)
            try:
                h = hessian_estimate(alpha, arr)
            except AtomCoincidenceError:
                continue
            break
        else:
            raise RuntimeError("could not sample a non-atomic point in the box")
        w = np.linalg.eigvalsh(h)
        min_eig = min(min_eig, float(w[0]))
        max_eig = max(max_eig, float(w[-1]))
        done += 1
    return ConvexityReport(min_eig_lower=min_eig, max_eig_upper=max_eig, trials=trials)
