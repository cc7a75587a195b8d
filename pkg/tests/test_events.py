import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from evdfa.events import (
    EVENT_DTYPE,
    EventStream,
    MalformedPolarity,
    OutOfBounds,
    PixelHistogram,
    SensorGeometry,
    TimeWindow,
    UnsortedInput,
    detect_hot_pixels,
    iter_windows,
    make_events,
    pixel_histogram,
    remove_pixels,
    slice_window,
    validate_sort,
)
from evdfa.synth import NoiseModel, gen_poisson_noise, merge

from conftest import random_stream, stream_from

G = SensorGeometry(64, 64)


def test_geometry_must_be_positive():
    with pytest.raises(ValueError):
        SensorGeometry(0, 5)


def test_bad_polarity_rejected():
    with pytest.raises(MalformedPolarity):
        stream_from([0], ps=[2])


def test_out_of_bounds_rejected():
    with pytest.raises(OutOfBounds):
        stream_from([0], xs=[64])


def test_stream_is_read_only(rng):
    s = random_stream(rng, 10)
    with pytest.raises(ValueError):
        s.events["t"][0] = 5


def test_validate_sort_identity_on_sorted(rng):
    s = random_stream(rng, 100)
    assert validate_sort(s.events, G, "strict") == s
    assert validate_sort(s.events, G, "stable-sort") == s


def test_validate_sort_strict_rejects_decrease():
    ev = make_events([5, 3], [0, 0], [0, 0], [1, 1])
    with pytest.raises(UnsortedInput):
        validate_sort(ev, G, "strict")


def test_validate_sort_stable_keeps_tie_order():
    ev = make_events([7, 7, 2], [1, 2, 3], [0, 0, 0], [1, -1, 1])
    out = validate_sort(ev, G, "stable-sort")
    assert list(out.x) == [3, 1, 2]


@given(st.lists(st.integers(0, 50), min_size=0, max_size=60))
def test_stable_sort_always_sorted(ts):
    ev = make_events(ts, np.arange(len(ts)) % 64, np.zeros(len(ts), int), np.ones(len(ts), int))
    out = validate_sort(ev, G, "stable-sort")
    assert (np.diff(out.t) >= 0).all()
    # equal-t events keep their input order (x encodes input index mod 64)
    for a, b in zip(out.events[:-1], out.events[1:]):
        if a["t"] == b["t"]:
            assert a["x"] < b["x"]


def test_slice_window_half_open():
    s = stream_from([0, 10, 20, 30])
    assert list(slice_window(s, TimeWindow(10, 20)).t) == [10, 20]


def test_slice_window_full_span_identity(rng):
    s = random_stream(rng, 200)
    assert slice_window(s, TimeWindow(0, int(s.t[-1]) + 1)) == s


def test_slice_window_beyond_end_empty(rng):
    s = random_stream(rng, 50)
    assert len(slice_window(s, TimeWindow(int(s.t[-1]) + 1, 1000))) == 0


def test_adjacent_windows_reconstruct(rng):
    s = random_stream(rng, 500)
    parts = list(iter_windows(s, 0, 70_000))
    joined = np.concatenate([p.events for p in parts])
    assert np.array_equal(joined, s.events)


def test_window_duration_positive():
    with pytest.raises(ValueError):
        TimeWindow(0, 0)


def test_histogram_empty():
    h = pixel_histogram(EventStream(G))
    assert h.counts.shape == (64, 64) and h.total == 0


def test_histogram_single_pixel():
    h = pixel_histogram(stream_from([1, 2, 3], xs=[4, 4, 4], ys=[9, 9, 9]))
    assert h.counts[9, 4] == 3 and h.total == 3


def test_histogram_poisson_sums_to_n():
    s = gen_poisson_noise(NoiseModel(3000.0, G, seed=3), 2.0)
    assert pixel_histogram(s).total == len(s)


def test_hot_pixels_uniform_grid_empty():
    assert detect_hot_pixels(PixelHistogram(G, np.full((64, 64), 7))) == set()


def test_hot_pixels_single_outlier():
    counts = np.full((64, 64), 3)
    counts[5, 17] = 300
    assert detect_hot_pixels(PixelHistogram(G, counts), factor=10) == {(17, 5)}


def test_hot_pixel_factor_must_exceed_one():
    with pytest.raises(ValueError):
        detect_hot_pixels(PixelHistogram(G, np.ones((64, 64))), factor=1)


def test_hot_pixel_detection_over_seeded_trials():
    # base rate ~20 events/pixel; hot pixel at 50x that rate
    base_rate = 20 * G.n_pixels
    for seed in range(100):
        noise = gen_poisson_noise(NoiseModel(base_rate, G, seed=seed), 1.0)
        hot = gen_poisson_noise(NoiseModel(50 * 20, G, seed=10_000 + seed, pixel=(31, 7)), 1.0)
        h = pixel_histogram(merge([noise, hot]))
        assert detect_hot_pixels(h, 10) == {(31, 7)}


def test_remove_pixels_identity_and_empty():
    s = stream_from([1, 2], xs=[3, 3], ys=[4, 4])
    assert remove_pixels(s, set()) == s
    assert len(remove_pixels(s, {(3, 4)})) == 0


def test_remove_pixels_idempotent_and_commutes_with_window(rng):
    s = random_stream(rng, 2000, width=8, height=8)
    px = {(1, 1), (2, 5), (7, 7)}
    once = remove_pixels(s, px)
    assert remove_pixels(once, px) == once
    w = TimeWindow(200_000, 300_000)
    assert slice_window(once, w) == remove_pixels(slice_window(s, w), px)


def test_labels_follow_take(rng):
    s = random_stream(rng, 100, labels=True)
    sub = s.take(s.x > 30)
    assert np.array_equal(sub.labels, s.labels[s.x > 30])


def test_dtype():
    assert make_events([1], [2], [3], [-1]).dtype == EVENT_DTYPE
