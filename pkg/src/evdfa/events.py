"""Event data model, time-window slicing and hot-pixel handling.

Events are held column-wise in a numpy structured array with fields
``t`` (int64, microseconds), ``x``, ``y`` (int32) and ``p`` (int8, +1/-1).
Streams may optionally carry per-event ground-truth label codes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

EVENT_DTYPE = np.dtype([("t", np.int64), ("x", np.int32), ("y", np.int32), ("p", np.int8)])

# ground-truth label codes, shared by the csv and binary formats
UNKNOWN = 0
SIGNAL = 1
NOISE = 2
LABEL_CODES = (UNKNOWN, SIGNAL, NOISE)


class EventError(ValueError):
    """Base class for invalid event data."""


class MalformedRecord(EventError):
    pass


class MalformedPolarity(MalformedRecord):
    pass


class OutOfBounds(EventError):
    pass


class UnsortedInput(EventError):
    pass


@dataclass(frozen=True)
class SensorGeometry:
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"sensor geometry must be at least 1x1, got {self.width}x{self.height}")

    @property
    def n_pixels(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class TimeWindow:
    start: int
    duration: int

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("window duration must be positive")

    @property
    def stop(self) -> int:
        return self.start + self.duration


def make_events(t, x, y, p) -> np.ndarray:
    """Pack column arrays into an ``EVENT_DTYPE`` record array."""
    t = np.asarray(t)
    out = np.empty(t.shape[0], dtype=EVENT_DTYPE)
    out["t"] = t
    out["x"] = x
    out["y"] = y
    out["p"] = p
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EventStream:
    """A time-sorted, bounds-checked sequence of events on a sensor.

    ``labels`` is either None or a uint8 array of ground-truth codes
    (``UNKNOWN``, ``SIGNAL``, ``NOISE``) aligned with ``events``.
    Arrays are copied and made read-only on construction.
    """

    geometry: SensorGeometry
    events: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=EVENT_DTYPE))
    labels: np.ndarray | None = None

    def __post_init__(self):
        ev = np.asarray(self.events)
        if ev.dtype != EVENT_DTYPE:
            ev = ev.astype(EVENT_DTYPE)
        object.__setattr__(self, "events", _frozen(ev))
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.uint8)
            if lab.shape != (len(ev),):
                raise ValueError(f"labels length {lab.shape} does not match {len(ev)} events")
            if not np.isin(lab, LABEL_CODES).all():
                raise MalformedRecord("label codes must be 0, 1 or 2")
            object.__setattr__(self, "labels", _frozen(lab))
        check_events(ev, self.geometry)

    def __len__(self) -> int:
        return len(self.events)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        if self.geometry != other.geometry or not np.array_equal(self.events, other.events):
            return False
        if self.labels is None or other.labels is None:
            return self.labels is None and other.labels is None
        return np.array_equal(self.labels, other.labels)

    __hash__ = None

    @property
    def t(self) -> np.ndarray:
        return self.events["t"]

    @property
    def x(self) -> np.ndarray:
        return self.events["x"]

    @property
    def y(self) -> np.ndarray:
        return self.events["y"]

    @property
    def p(self) -> np.ndarray:
        return self.events["p"]

    def take(self, index) -> EventStream:
        """Sub-stream by integer index array or boolean mask (order preserved)."""
        labels = None if self.labels is None else self.labels[index]
        return EventStream(self.geometry, self.events[index], labels)

    def with_timestamps(self, t) -> EventStream:
        ev = self.events.copy()
        ev["t"] = t
        return EventStream(self.geometry, ev, self.labels)


def check_events(events: np.ndarray, geometry: SensorGeometry | None = None, sorted_required=True):
    """Validate polarity, coordinate and timestamp domains in place."""
    if len(events) == 0:
        return
    if not np.isin(events["p"], (-1, 1)).all():
        raise MalformedPolarity("polarity must be +1 or -1")
    if (events["t"] < 0).any():
        raise MalformedRecord("timestamps must be non-negative")
    if (events["x"] < 0).any() or (events["y"] < 0).any():
        raise OutOfBounds("pixel coordinates must be non-negative")
    if geometry is not None:
        if (events["x"] >= geometry.width).any() or (events["y"] >= geometry.height).any():
            raise OutOfBounds(f"event outside {geometry.width}x{geometry.height} sensor")
    if sorted_required and (np.diff(events["t"]) < 0).any():
        i = int(np.argmax(np.diff(events["t"]) < 0))
        raise UnsortedInput(f"timestamp decreases at index {i + 1}")


def validate_sort(
    events,
    geometry: SensorGeometry,
    mode: str = "strict",
    labels=None,
) -> EventStream:
    """Build an EventStream, rejecting (``strict``) or stably sorting (``stable-sort``)
    out-of-order timestamps."""
    ev = np.asarray(events)
    if ev.dtype != EVENT_DTYPE:
        ev = ev.astype(EVENT_DTYPE)
    if mode == "strict":
        check_events(ev, geometry)
    elif mode == "stable-sort":
        order = np.argsort(ev["t"], kind="stable")
        ev = ev[order]
        if labels is not None:
            labels = np.asarray(labels)[order]
    else:
        raise ValueError(f"unknown sort mode {mode!r}")
    return EventStream(geometry, ev, labels)


def slice_window(stream: EventStream, window: TimeWindow) -> EventStream:
    """Events with ``start <= t < start + duration``."""
    t = stream.t
    lo = np.searchsorted(t, window.start, side="left")
    hi = np.searchsorted(t, window.stop, side="left")
    return stream.take(slice(lo, hi))


def iter_windows(stream: EventStream, start: int, duration: int) -> Iterable[EventStream]:
    """Consecutive non-overlapping windows from ``start`` to the last event."""
    if len(stream) == 0:
        return
    last = int(stream.t[-1])
    while start <= last:
        yield slice_window(stream, TimeWindow(start, duration))
        start += duration


@dataclass(frozen=True, eq=False)
class PixelHistogram:
    geometry: SensorGeometry
    counts: np.ndarray  # shape (height, width)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def pixel_histogram(stream: EventStream) -> PixelHistogram:
    g = stream.geometry
    flat = np.bincount(stream.y.astype(np.int64) * g.width + stream.x, minlength=g.n_pixels)
    return PixelHistogram(g, flat.reshape(g.height, g.width))


def detect_hot_pixels(hist: PixelHistogram, factor: float = 10.0) -> set[tuple[int, int]]:
    """Pixels whose count exceeds ``factor`` times the median nonzero count.

    Returns a set of ``(x, y)`` coordinates.
    """
    if factor <= 1:
        raise ValueError("factor must be > 1")
    counts = hist.counts
    nonzero = counts[counts > 0]
    if nonzero.size == 0:
        return set()
    threshold = factor * np.median(nonzero)
    ys, xs = np.nonzero(counts > threshold)
    return {(int(x), int(y)) for x, y in zip(xs, ys)}


def remove_pixels(stream: EventStream, pixels: Iterable[Sequence[int]]) -> EventStream:
    pixels = list(pixels)
    if not pixels:
        return stream
    g = stream.geometry
    drop = np.zeros(g.n_pixels, dtype=bool)
    for x, y in pixels:
        if 0 <= x < g.width and 0 <= y < g.height:
            drop[y * g.width + x] = True
    keep = ~drop[stream.y.astype(np.int64) * g.width + stream.x]
    return stream.take(keep)


def remove_hot_pixels(stream: EventStream, factor: float = 10.0) -> tuple[EventStream, set]:
    hot = detect_hot_pixels(pixel_histogram(stream), factor)
    return remove_pixels(stream, hot), hot
