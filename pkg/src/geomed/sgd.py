"""Averaged stochastic-gradient estimation of geometric medians/quantiles.

The estimator is an explicit state machine: :func:`sgd_step` maps one
observation and an :class:`SgdState` to a new state, so chains can be
paused, resumed and moved around. :func:`fit_stream` drives a single chain
over a one-shot stream; :func:`multi_start_fit` runs several chains from
random starting points over a replayable source and keeps the one with the
smallest empirical loss.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from geomed._rng import NS_STARTS, rng_for
from geomed.backend import kernels
from geomed.core import Dataset, DimensionMismatch, StepSchedule, as_vector, data_array, norm

__all__ = [
    "SgdState",
    "FitConfig",
    "EstimateReport",
    "init_state",
    "sgd_step",
    "fit_stream",
    "multi_start_fit",
    "multi_start_fit_source",
    "ArraySource",
    "default_schedule",
]

# Rows buffered per kernel call when consuming a stream. Memory stays
# bounded by this block regardless of stream length.
BLOCK_ROWS = 8192

# Streaming-mode default for the starting-point truncation bound M.
STREAM_INIT_CAP = 1e9

_PILOT_ROWS = 1024


def _check_direction(v, dim: int) -> np.ndarray:
    if v is None:
        return np.zeros(dim)
    v = as_vector(v, dim=dim)
    if norm(v) >= 1.0:
        raise ValueError(f"quantile direction must satisfy ||v|| < 1, got ||v|| = {norm(v)}")
    return v


@dataclass(frozen=True, eq=False)
class SgdState:
    """Chain state: iterate ``z``, running average ``z_bar``, step count."""

    z: np.ndarray
    z_bar: np.ndarray
    count: int
    schedule: StepSchedule
    v: np.ndarray

    def __post_init__(self):
        z = as_vector(self.z)
        z_bar = as_vector(self.z_bar, dim=z.shape[0])
        v = _check_direction(self.v, z.shape[0])
        if self.count < 0:
            raise ValueError("count must be nonnegative")
        if self.count == 0 and np.any(z_bar != 0.0):
            raise ValueError("a fresh chain must carry a zero running average")
        for name, val in (("z", z), ("z_bar", z_bar), ("v", v)):
            val = val.copy()
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def dim(self) -> int:
        return self.z.shape[0]


@dataclass(frozen=True, eq=False)
class FitConfig:
    """Knobs shared by the fit drivers.

    ``schedule=None`` picks alpha = 3/4 and sets ``c_gamma`` to the mean
    distance to the centroid over a pilot block of the data. ``init_cap``
    is the truncation bound M for the starting point: ``None`` means no
    truncation for batch fits, while streams fall back to ``1e9``.
    """

    schedule: StepSchedule | None = None
    v: np.ndarray | None = None
    num_starts: int = 10
    init_cap: float | None = None
    seed: int = 0
    epochs: int = 1

    def __post_init__(self):
        if self.num_starts < 1:
            raise ValueError("num_starts must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.init_cap is not None and not self.init_cap > 0:
            raise ValueError("init_cap must be positive")
        if self.v is not None:
            _check_direction(self.v, len(np.atleast_1d(self.v)))


@dataclass(eq=False)
class EstimateReport:
    """Outcome of a fit: the estimate plus bookkeeping."""

    estimate: np.ndarray
    empirical_loss: float | None
    observations: int
    elapsed: float
    method: str
    start_index: int | None = None
    iterations: int | None = None
    converged: bool | None = None


def init_state(z0, schedule: StepSchedule, v=None) -> SgdState:
    """Fresh chain at ``z0`` with zero running average and zero count."""
    z0 = as_vector(z0)
    return SgdState(z=z0, z_bar=np.zeros(z0.shape[0]), count=0, schedule=schedule,
                    v=_check_direction(v, z0.shape[0]))


def sgd_step(state: SgdState, x) -> SgdState:
    """Consume one observation and return the successor state.

    Step ``n = count + 1`` moves ``z`` by ``gamma_n * ((x - z)/||x - z|| + v)``,
    or by ``gamma_n * v`` alone when ``x`` matches ``z`` (so a pure median
    chain does not move on a degenerate draw), then folds the new iterate
    into the running average.
    """
    x = as_vector(x, dim=state.dim)
    z = state.z.copy()
    z_bar = state.z_bar.copy()
    count = kernels.chain_run(x.reshape(1, -1), z, z_bar, state.count,
                              state.schedule.c_gamma, state.schedule.alpha, state.v)
    return SgdState(z=z, z_bar=z_bar, count=count, schedule=state.schedule, v=state.v)


class ArraySource:
    """Replayable block source over an in-memory ``(n, d)`` array."""

    def __init__(self, arr: np.ndarray):
        self._arr = arr
        self.n, self.dim = arr.shape

    def blocks(self) -> Iterator[np.ndarray]:
        yield self._arr

    def rows(self, indices) -> np.ndarray:
        return self._arr[np.asarray(indices, dtype=np.intp)].copy()


def _iter_blocks(stream, block_rows: int = BLOCK_ROWS) -> Iterator[np.ndarray]:
    """Normalize a stream of rows/blocks into validated (k, d) blocks."""
    if isinstance(stream, Dataset):
        yield stream.points
        return
    if isinstance(stream, np.ndarray):
        yield data_array(stream)
        return
    buf: list[np.ndarray] = []
    buffered = 0
    dim = None
    for item in stream:
        arr = np.ascontiguousarray(item, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2 or arr.shape[1] < 1:
            raise ValueError(f"stream items must be vectors or row blocks, got shape {arr.shape}")
        if dim is None:
            dim = arr.shape[1]
        elif arr.shape[1] != dim:
            raise DimensionMismatch(
                f"stream dimension changed from {dim} to {arr.shape[1]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("stream contains a non-finite value")
        buf.append(arr)
        buffered += arr.shape[0]
        if buffered >= block_rows:
            block = np.vstack(buf) if len(buf) > 1 else buf[0]
            yield block
            buf, buffered = [], 0
    if buf:
        yield np.vstack(buf) if len(buf) > 1 else buf[0]


def _pilot_schedule(blocks: Iterator[np.ndarray]) -> tuple[StepSchedule, list[np.ndarray]]:
    """Pick c_gamma = mean ||x - xbar|| from a pilot prefix of the stream.

    Returns the schedule and the buffered prefix so no data is lost.
    """
    buf: list[np.ndarray] = []
    rows = 0
    for block in blocks:
        buf.append(block)
        rows += block.shape[0]
        if rows >= _PILOT_ROWS:
            break
    if not buf:
        raise ValueError("empty stream")
    pilot = np.vstack(buf) if len(buf) > 1 else buf[0]
    center = pilot.mean(axis=0)
    c_gamma = float(np.linalg.norm(pilot - center, axis=1).mean())
    if c_gamma <= 0.0:
        c_gamma = 1.0  # all pilot rows identical; any positive gain works
    return StepSchedule(c_gamma=c_gamma), buf


def default_schedule(data) -> StepSchedule:
    """Schedule used when the caller does not provide one (alpha = 3/4)."""
    schedule, _ = _pilot_schedule(_iter_blocks(data))
    return schedule


def fit_stream(stream, config: FitConfig | None = None) -> EstimateReport:
    """Single-pass averaged-SGD fit over a stream of observations.

    The first element (truncated to zero if its norm exceeds ``init_cap``)
    seeds the chain; every later element feeds one step. The estimate is
    the final running average. The empirical loss is filled in by a second
    pass only when ``stream`` is replayable (a Dataset or array), and left
    ``None`` otherwise.
    """
    config = config or FitConfig()
    t0 = time.perf_counter()
    replayable = isinstance(stream, (Dataset, np.ndarray))
    blocks = _iter_blocks(stream)
    if config.schedule is None:
        schedule, head = _pilot_schedule(blocks)
        blocks = _chain_iters(head, blocks)
    else:
        schedule = config.schedule

    cap = config.init_cap if config.init_cap is not None else STREAM_INIT_CAP
    z = None
    z_bar = None
    v = None
    count = 0
    observations = 0
    for block in blocks:
        if z is None:
            z0 = block[0].copy()
            if norm(z0) > cap:
                z0 = np.zeros_like(z0)
            z = z0
            z_bar = np.zeros_like(z0)
            v = _check_direction(config.v, z0.shape[0])
            observations = 1
            block = block[1:]
            if block.shape[0] == 0:
                continue
        count = kernels.chain_run(block, z, z_bar, count,
                                  schedule.c_gamma, schedule.alpha, v)
        observations += block.shape[0]
    if z is None:
        raise ValueError("empty stream")
    estimate = z_bar if count >= 1 else z.copy()
    loss = None
    if replayable:
        source = ArraySource(data_array(stream))
        loss = float(_stream_losses(source, estimate.reshape(1, -1), v)[0][0])
    return EstimateReport(estimate=estimate, empirical_loss=loss,
                          observations=observations,
                          elapsed=time.perf_counter() - t0, method="sgd_stream")


def _chain_iters(head: list[np.ndarray], rest: Iterator[np.ndarray]) -> Iterator[np.ndarray]:
    yield from head
    yield from rest


def _stream_losses(source, candidates: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Median loss and selection objective of each candidate over a source.

    The selection objective adds the quantile tilt ``<xbar - a, v>`` to the
    median loss; both coincide when ``v = 0``.
    """
    k = candidates.shape[0]
    totals = np.zeros(k)
    x_sum = np.zeros(candidates.shape[1])
    n = 0
    for block in source.blocks():
        base = float(np.linalg.norm(block, axis=1).sum())
        for c in range(k):
            totals[c] += float(np.linalg.norm(block - candidates[c], axis=1).sum()) - base
        x_sum += block.sum(axis=0)
        n += block.shape[0]
    median_losses = totals / n
    tilt = (x_sum / n - candidates) @ v
    return median_losses, median_losses + tilt


def multi_start_fit_source(source, config: FitConfig | None = None,
                           method: str = "sgd_multistart") -> EstimateReport:
    """Multi-start fit over any replayable block source (array or file)."""
    config = config or FitConfig()
    t0 = time.perf_counter()
    n, dim = source.n, source.dim
    if config.schedule is None:
        schedule, _ = _pilot_schedule(source.blocks())
    else:
        schedule = config.schedule
    v = _check_direction(config.v, dim)

    rng = rng_for(config.seed, NS_STARTS)
    start_rows = rng.integers(0, n, size=config.num_starts)
    z_chains = np.ascontiguousarray(source.rows(start_rows))
    if config.init_cap is not None:
        over = np.linalg.norm(z_chains, axis=1) > config.init_cap
        z_chains[over] = 0.0
    zbar_chains = np.zeros_like(z_chains)

    count = 0
    for _ in range(config.epochs):
        for block in source.blocks():
            new_count = count
            for c in range(config.num_starts):
                new_count = kernels.chain_run(block, z_chains[c], zbar_chains[c],
                                              count, schedule.c_gamma, schedule.alpha, v)
            count = new_count

    estimates = zbar_chains if count >= 1 else z_chains
    median_losses, selection = _stream_losses(source, estimates, v)
    best = int(np.argmin(selection))
    return EstimateReport(estimate=estimates[best].copy(),
                          empirical_loss=float(median_losses[best]),
                          observations=n * config.epochs,
                          elapsed=time.perf_counter() - t0,
                          method=method, start_index=best)


def multi_start_fit(data, config: FitConfig | None = None) -> EstimateReport:
    """Multi-start averaged-SGD fit of an in-memory dataset.

    Runs ``num_starts`` chains, each seeded at a uniformly drawn sample
    point and consuming the dataset in stored order (``epochs`` times);
    returns the chain whose final average minimizes the empirical loss,
    ties broken by the lowest start index.
    """
    return multi_start_fit_source(ArraySource(data_array(data)), config)
