"""Labeled synthetic event streams: Poisson background activity plus moving objects.

Every generator draws from ``numpy.random.Generator(PCG64(seed))`` so a
(model, seed) pair always produces the same stream. Timestamps are the
continuous arrival times floored to whole microseconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .events import EVENT_DTYPE, NOISE, SIGNAL, UNKNOWN, EventStream, SensorGeometry

US = 1_000_000


class TrajectoryOutOfBounds(ValueError):
    pass


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def poisson_arrivals(rng: np.random.Generator, rate: float, duration: float) -> np.ndarray:
    """Arrival times in seconds on ``[0, duration)`` from i.i.d. exponential gaps."""
    expected = rate * duration
    chunk = int(expected + 6 * np.sqrt(expected) + 16)
    times = np.cumsum(rng.exponential(1.0 / rate, size=chunk))
    while times[-1] < duration:
        more = times[-1] + np.cumsum(rng.exponential(1.0 / rate, size=chunk))
        times = np.concatenate([times, more])
    return times[times < duration]


@dataclass(frozen=True)
class NoiseModel:
    """Homogeneous background activity.

    ``rate`` is events per second over the whole array. With ``pixel`` set,
    every event fires at that one pixel (a hot-pixel injector).
    """

    rate: float
    geometry: SensorGeometry
    seed: int = 0
    pixel: tuple[int, int] | None = None

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("noise rate must be positive")


@dataclass(frozen=True)
class ObjectModel:
    """A rectangle of ``size`` pixels moving at constant velocity.

    ``start`` is the top-left corner at onset, ``velocity`` in pixels/s.
    The object emits ``event_rate`` events per second, each at a pixel drawn
    uniformly from the area it currently covers, between ``onset`` and
    ``onset + duration`` seconds.
    """

    geometry: SensorGeometry
    start: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)
    shape: str = "dot"
    size: tuple[int, int] | None = None
    event_rate: float = 2000.0
    duration: float = 1.0
    onset: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.shape not in ("dot", "bar"):
            raise ValueError("shape must be 'dot' or 'bar'")
        if not self.event_rate > 0:
            raise ValueError("event_rate must be positive")
        if not self.duration > 0:
            raise ValueError("duration must be positive")

    @property
    def extent(self) -> tuple[int, int]:
        if self.size is not None:
            return self.size
        return (1, 1) if self.shape == "dot" else (2, 16)

    def anchor(self, tau) -> tuple[np.ndarray, np.ndarray]:
        """Rounded top-left pixel at ``tau`` seconds after onset."""
        tau = np.asarray(tau, dtype=np.float64)
        ax = np.rint(self.start[0] + self.velocity[0] * tau).astype(np.int64)
        ay = np.rint(self.start[1] + self.velocity[1] * tau).astype(np.int64)
        return ax, ay


def _labeled(geometry, t_us, x, y, p, code) -> EventStream:
    ev = np.empty(len(t_us), dtype=EVENT_DTYPE)
    ev["t"] = t_us
    ev["x"] = x
    ev["y"] = y
    ev["p"] = p
    return EventStream(geometry, ev, np.full(len(t_us), code, dtype=np.uint8))


def gen_poisson_noise(model: NoiseModel, duration: float) -> EventStream:
    """Background noise over ``duration`` seconds; every label is NOISE."""
    if not duration > 0:
        raise ValueError("duration must be positive")
    rng = _rng(model.seed)
    g = model.geometry
    times = poisson_arrivals(rng, model.rate, duration)
    n = len(times)
    if model.pixel is None:
        x = rng.integers(0, g.width, size=n)
        y = rng.integers(0, g.height, size=n)
    else:
        px, py = model.pixel
        if not (0 <= px < g.width and 0 <= py < g.height):
            raise ValueError(f"pixel {model.pixel} outside sensor")
        x = np.full(n, px)
        y = np.full(n, py)
    p = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
    return _labeled(g, np.floor(times * US).astype(np.int64), x, y, p, NOISE)


def gen_moving_object(model: ObjectModel) -> EventStream:
    """Events of one moving object; every label is SIGNAL."""
    g = model.geometry
    w, h = model.extent
    ax, ay = model.anchor([0.0, model.duration])
    if ax.min() < 0 or ay.min() < 0 or ax.max() + w > g.width or ay.max() + h > g.height:
        raise TrajectoryOutOfBounds(
            f"{w}x{h} object from {model.start} at {model.velocity} px/s leaves the "
            f"{g.width}x{g.height} sensor within {model.duration} s"
        )
    rng = _rng(model.seed)
    tau = poisson_arrivals(rng, model.event_rate, model.duration)
    n = len(tau)
    px, py = model.anchor(tau)
    x = px + rng.integers(0, w, size=n)
    y = py + rng.integers(0, h, size=n)
    p = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
    t_us = np.floor((model.onset + tau) * US).astype(np.int64)
    return _labeled(g, t_us, x, y, p, SIGNAL)


def merge(streams) -> EventStream:
    """Stable time-merge of streams on one sensor; labels travel with events."""
    streams = list(streams)
    if not streams:
        raise ValueError("nothing to merge")
    g = streams[0].geometry
    if any(s.geometry != g for s in streams):
        raise ValueError("cannot merge streams with different geometries")
    events = np.concatenate([s.events for s in streams])
    labels = np.concatenate(
        [s.labels if s.labels is not None else np.full(len(s), UNKNOWN, np.uint8) for s in streams]
    )
    order = np.argsort(events["t"], kind="stable")
    return EventStream(g, events[order], labels[order])


@dataclass(frozen=True)
class Scene:
    """Parameters of the reference synthetic recording."""

    width: int = 128
    height: int = 128
    noise_rate: float = 5000.0
    duration: float = 10.0
    shape: str = "bar"
    velocity: tuple[float, float] = (60.0, 0.0)
    object_rate: float = 3000.0
    crossing: float = 2.0
    seed: int = 0

    @property
    def geometry(self) -> SensorGeometry:
        return SensorGeometry(self.width, self.height)

    def object_model(self) -> ObjectModel:
        w, h = (1, 1) if self.shape == "dot" else (2, 16)
        vx, vy = self.velocity
        # centre the path on the sensor and run it for `crossing` seconds mid-recording
        x0 = (self.width - w - vx * self.crossing) / 2
        y0 = (self.height - h - vy * self.crossing) / 2
        onset = max(0.0, (self.duration - self.crossing) / 2)
        return ObjectModel(
            self.geometry, (x0, y0), (vx, vy), self.shape, (w, h),
            self.object_rate, min(self.crossing, self.duration), onset, self.seed + 1,
        )

    def noise_model(self) -> NoiseModel:
        return NoiseModel(self.noise_rate, self.geometry, self.seed)


def make_scene(scene: Scene = Scene()) -> EventStream:
    """Poisson noise merged with one object crossing the sensor."""
    noise = gen_poisson_noise(scene.noise_model(), scene.duration)
    obj = gen_moving_object(scene.object_model())
    return merge([noise, obj])
