import numpy as np
import pytest

from evdfa.events import EventStream, SensorGeometry, make_events


def random_stream(rng, n, width=64, height=64, t_max=1_000_000, labels=False):
    t = np.sort(rng.integers(0, t_max, size=n))
    ev = make_events(t, rng.integers(0, width, n), rng.integers(0, height, n), rng.choice([-1, 1], n))
    lab = rng.integers(0, 3, size=n).astype(np.uint8) if labels else None
    return EventStream(SensorGeometry(width, height), ev, lab)


def stream_from(ts, xs=None, ys=None, ps=None, width=64, height=64):
    n = len(ts)
    xs = np.zeros(n, int) if xs is None else xs
    ys = np.zeros(n, int) if ys is None else ys
    ps = np.ones(n, int) if ps is None else ps
    return EventStream(SensorGeometry(width, height), make_events(ts, xs, ys, ps))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
