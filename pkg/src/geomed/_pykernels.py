"""Pure-Python (numpy) implementations of the hot kernels.

Same call signatures and semantics as the compiled ``geomed._speedups``
module; selected automatically when the extension is unavailable or when
``GEOMED_BACKEND=python`` is set. The chain update is an inherently
sequential recursion, so this backend loops per observation and is one to
two orders of magnitude slower than the compiled one (see
``benchmarks/bench_backends.py``).
"""

from __future__ import annotations

import math

import numpy as np

EPS_MATCH = 1e-12


def chain_run(points, z, zbar, count, c_gamma, alpha, v):
    """Advance the averaged stochastic-gradient chain over a block of rows.

    ``z`` (current iterate) and ``zbar`` (running average) are updated in
    place; returns the new step count. Step ``n`` uses gain
    ``c_gamma * n**-alpha``; an observation within the degenerate-match
    threshold of ``z`` contributes only the quantile drift ``gamma * v``.
    """
    count = int(count)
    for i in range(points.shape[0]):
        x = points[i]
        count += 1
        gamma = c_gamma * float(count) ** (-alpha)
        diff = x - z
        dist = math.sqrt(float(diff @ diff))
        if dist <= EPS_MATCH * max(1.0, math.sqrt(float(z @ z))):
            z += gamma * v
        else:
            z += gamma * (diff / dist + v)
        zbar += (z - zbar) / count
    return count


def loss(points, at):
    """Empirical objective ``mean(||x_i - at|| - ||x_i||)``."""
    d = np.linalg.norm(points - at, axis=1) - np.linalg.norm(points, axis=1)
    return float(d.mean())


def subgrad(points, at, out):
    """Empirical subgradient at ``at``; atoms matching ``at`` are dropped.

    Writes ``-(1/n) * sum_{x_i != at} (x_i - at)/||x_i - at||`` into ``out``
    and returns the number of dropped atom terms.
    """
    diff = points - at
    dist = np.linalg.norm(diff, axis=1)
    keep = dist > EPS_MATCH * max(1.0, math.sqrt(float(at @ at)))
    out[:] = 0.0
    if keep.any():
        out -= (diff[keep] / dist[keep, None]).sum(axis=0)
        out /= points.shape[0]
    return int(points.shape[0] - keep.sum())


def vz_step(points, weights, y, out):
    """One modified-Weiszfeld step on weighted (deduplicated) points.

    Writes the next iterate into ``out`` and returns ``(r, eta)`` where
    ``r`` is the norm of the weighted sum of unit directions away from
    ``y`` and ``eta`` the total weight sitting exactly at ``y`` (both in
    observation counts). ``eta == 0`` reduces to a plain Weiszfeld step.
    """
    diff = points - y
    dist = np.linalg.norm(diff, axis=1)
    at_y = dist <= EPS_MATCH * max(1.0, math.sqrt(float(y @ y)))
    eta = float(weights[at_y].sum())
    keep = ~at_y
    if not keep.any():
        out[:] = y
        return 0.0, eta
    inv = weights[keep] / dist[keep]
    denom = float(inv.sum())
    t_point = (inv[:, None] * points[keep]).sum(axis=0) / denom
    r_vec = (inv[:, None] * diff[keep]).sum(axis=0)
    r = math.sqrt(float(r_vec @ r_vec))
    if eta == 0.0:
        out[:] = t_point
    elif r <= 1e-300:
        out[:] = y
    else:
        ratio = eta / r
        out[:] = max(0.0, 1.0 - ratio) * t_point + min(1.0, ratio) * y
    return r, eta
