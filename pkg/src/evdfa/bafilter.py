"""Background-activity correlation filter.

An event is signal when at least ``rho_min`` *other* events lie inside its
spatiotemporal box: ``|dx| <= dsx``, ``|dy| <= dsy`` and ``|dt| <= dt``
(symmetric mode) or ``0 <= t_i - t_j <= dt`` (causal mode, past only).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .events import EventStream

SYMMETRIC = "symmetric"
CAUSAL = "causal"


@dataclass(frozen=True)
class BaFilterParams:
    dt: int
    dsx: int = 1
    dsy: int = 1
    rho_min: int = 1
    temporal_mode: str = SYMMETRIC

    def __post_init__(self):
        if self.dt < 1:
            raise ValueError("dt must be >= 1 us")
        if self.dsx < 0 or self.dsy < 0:
            raise ValueError("dsx and dsy must be >= 0")
        if self.rho_min < 1:
            raise ValueError("rho_min must be >= 1")
        if self.temporal_mode not in (SYMMETRIC, CAUSAL):
            raise ValueError(f"temporal_mode must be {SYMMETRIC!r} or {CAUSAL!r}")


@dataclass(frozen=True)
class Partition:
    clean: EventStream
    noise: EventStream
    params: BaFilterParams | None = None


def correlation_count_naive(stream: EventStream, params: BaFilterParams, i: int) -> int:
    """Reference O(N) count of events correlated with event ``i``."""
    n = len(stream)
    if not 0 <= i < n:
        raise IndexError(f"event index {i} out of range for stream of {n}")
    t = stream.t.astype(np.int64)
    lag = t[i] - t
    near = (np.abs(stream.x.astype(np.int64) - stream.x[i]) <= params.dsx) & (
        np.abs(stream.y.astype(np.int64) - stream.y[i]) <= params.dsy
    )
    if params.temporal_mode == SYMMETRIC:
        near &= np.abs(lag) <= params.dt
    else:
        near &= (lag >= 0) & (lag <= params.dt)
    near[i] = False
    return int(near.sum())


def correlation_counts(stream: EventStream, params: BaFilterParams) -> np.ndarray:
    """Correlated-neighbour count for every event.

    Events are indexed by a composite ``(pixel, time)`` sort key; for each of
    the ``(2*dsx+1)*(2*dsy+1)`` pixel offsets the neighbours of every event are
    counted with two binary searches. Work is O(N * box * log N).
    """
    n = len(stream)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    g = stream.geometry
    x = stream.x.astype(np.int64)
    y = stream.y.astype(np.int64)
    t = stream.t.astype(np.int64)
    t0 = int(t.min())
    span = int(t.max()) - t0 + 1
    if g.n_pixels * span >= 2**62:
        raise OverflowError("stream time span too long for composite sort key; slice it into windows")

    rel = t - t0
    keys = np.sort((y * g.width + x) * span + rel)

    lo_t = rel - params.dt
    hi_t = rel if params.temporal_mode == CAUSAL else rel + params.dt
    np.clip(lo_t, 0, span - 1, out=lo_t)
    np.clip(hi_t, 0, span - 1, out=hi_t)

    counts = np.zeros(n, dtype=np.int64)
    for oy in range(-params.dsy, params.dsy + 1):
        ny = y + oy
        for ox in range(-params.dsx, params.dsx + 1):
            nx = x + ox
            ok = (nx >= 0) & (nx < g.width) & (ny >= 0) & (ny < g.height)
            if not ok.any():
                continue
            base = (ny[ok] * g.width + nx[ok]) * span
            left = np.searchsorted(keys, base + lo_t[ok], side="left")
            right = np.searchsorted(keys, base + hi_t[ok], side="right")
            counts[ok] += right - left
    # the (0, 0) offset always finds the event itself
    return counts - 1


def classify(stream: EventStream, params: BaFilterParams) -> np.ndarray:
    """Boolean label vector, True where the event is signal."""
    return correlation_counts(stream, params) >= params.rho_min


def partition(stream: EventStream, labels, params: BaFilterParams | None = None) -> Partition:
    labels = np.asarray(labels, dtype=bool)
    if labels.shape != (len(stream),):
        raise ValueError(f"label vector length {labels.shape[0]} != stream length {len(stream)}")
    return Partition(stream.take(labels), stream.take(~labels), params)


def apply_filter(stream: EventStream, params: BaFilterParams) -> Partition:
    return partition(stream, classify(stream, params), params)
