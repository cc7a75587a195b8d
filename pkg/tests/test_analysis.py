import math

import numpy as np
import pytest

from evdfa.analysis import (
    DenoiseMetrics,
    SweepRow,
    SweepTable,
    confusion,
    emit_plot_data,
    plot_data,
    select_optimal_dt,
    snr,
    sweep,
    table_from_csv,
    table_to_csv,
)
from evdfa.bafilter import BaFilterParams, classify, partition
from evdfa.dfa import DegenerateSeries, DfaConfig, ScalingFit, dfa_exponent
from evdfa.events import NOISE, SIGNAL
from evdfa.synth import Scene, make_scene

from conftest import random_stream, stream_from


def fit(alpha):
    return ScalingFit(alpha, 0.0, (4, 256), 0.0, 10)


def table(dts, alphas):
    rows = [SweepRow(d, DenoiseMetrics(1, 1), None if a is None else fit(a), None, 0.0)
            for d, a in zip(dts, alphas)]
    return SweepTable(tuple(rows))


@pytest.fixture(scope="module")
def scene():
    return make_scene(Scene(duration=4.0, crossing=2.0, seed=2))


def test_snr_ratio_and_db():
    m = DenoiseMetrics(9000, 1000)
    assert m.snr_ratio == 9.0 and m.snr_db == pytest.approx(9.542425094, abs=1e-9)


def test_snr_no_noise_undefined():
    m = DenoiseMetrics(10, 0)
    assert not m.defined and m.snr_ratio is None and m.snr_db is None


def test_snr_no_clean():
    m = DenoiseMetrics(0, 10)
    assert m.snr_ratio == 0 and m.snr_db == -math.inf


def test_snr_counts_match_partition(rng):
    s = random_stream(rng, 400)
    part = partition(s, classify(s, BaFilterParams(dt=20_000)))
    m = snr(part)
    assert (m.n_clean, m.n_noise) == (len(part.clean), len(part.noise))


def test_confusion_perfect_and_inverted(rng):
    truth = rng.random(200) < 0.3
    cm = confusion(truth, truth)
    assert cm.false_pos == cm.false_neg == 0
    cm = confusion(~truth, truth)
    assert cm.true_pos == cm.true_neg == 0


def test_confusion_sums_and_codes(rng):
    codes = rng.choice([SIGNAL, NOISE], 500).astype(np.uint8)
    pred = rng.random(500) < 0.5
    cm = confusion(pred, codes)
    assert cm.total == 500
    assert cm.true_pos == int(np.sum(pred & (codes == SIGNAL)))


def test_confusion_mismatch_and_unknown():
    with pytest.raises(ValueError):
        confusion([True], [True, False])
    with pytest.raises(ValueError):
        confusion([True], np.array([0], np.uint8))


def test_select_paper_like_series():
    t = table([1000, 4000, 8000, 16000], [0.74, 0.60, 0.52, 0.50])
    sel = select_optimal_dt(t, 0.02)
    assert sel.dt == 8000 and sel.converged


def test_select_fallback():
    sel = select_optimal_dt(table([1000, 2000, 4000], [0.7, 0.65, 0.6]), 0.02)
    assert sel.dt == 4000 and not sel.converged


def test_select_single_and_infinite_epsilon():
    assert select_optimal_dt(table([5000], [0.5]), 0.02).dt == 5000
    assert select_optimal_dt(table([1000, 2000], [0.9, 0.5]), math.inf).dt == 1000


def test_select_skips_flagged_rows():
    assert select_optimal_dt(table([1000, 2000, 4000], [None, 0.51, 0.5]), 0.02).dt == 2000


def test_select_empty_table():
    with pytest.raises(ValueError):
        select_optimal_dt(SweepTable(()), 0.02)


def test_sweep_single_row_equals_manual(scene):
    cfg = DfaConfig()
    t = sweep(scene, [4000], dfa_config=cfg, threads=1)
    labels = classify(scene, BaFilterParams(dt=4000))
    part = partition(scene, labels)
    row = t.rows[0]
    assert row.metrics == snr(part)
    assert row.alpha_noise == dfa_exponent(part.noise, cfg).fit
    assert row.alpha_clean == dfa_exponent(part.clean, cfg).fit


def test_sweep_rows_monotone_and_threads_irrelevant(scene):
    dts = [1000, 2000, 4000, 8000, 16000]
    one = sweep(scene, dts, truth=scene.labels, threads=1)
    many = sweep(scene, dts, truth=scene.labels, threads=4)
    assert one.dts == dts
    for a, b in zip(one.rows, many.rows):
        assert (a.metrics, a.alpha_noise, a.alpha_clean, a.confusion) == (b.metrics, b.alpha_noise, b.alpha_clean, b.confusion)
    n_clean = [r.metrics.n_clean for r in one.rows]
    n_noise = [r.metrics.n_noise for r in one.rows]
    assert n_clean == sorted(n_clean) and n_noise == sorted(n_noise, reverse=True)
    assert all(r.confusion.total == len(scene) for r in one.rows)


def test_sweep_flags_degenerate_rows():
    # 400 events on a 3x3 sensor: at a huge dt every event is signal and the noise part is empty
    rng = np.random.default_rng(6)
    ts = np.cumsum(rng.exponential(2000, 400)).astype(np.int64)
    s = stream_from(ts, rng.integers(0, 3, 400), rng.integers(0, 3, 400), width=3, height=3)
    t = sweep(s, [1, 10**7], threads=1)
    assert not t.rows[0].flagged
    assert t.rows[1].flagged and t.rows[1].metrics.n_noise == 0 and t.rows[1].noise_error
    assert select_optimal_dt(t, 1.0).dt == 1


def test_sweep_all_rows_degenerate():
    s = stream_from(np.arange(0, 5000) * 10)
    with pytest.raises(DegenerateSeries):
        sweep(s, [100, 200], threads=1)


def test_sweep_rejects_bad_dt_list(scene):
    with pytest.raises(ValueError):
        sweep(scene, [])
    with pytest.raises(ValueError):
        sweep(scene, [2000, 1000])


def test_table_csv_round_trip(scene):
    t = sweep(scene, [1000, 16000], BaFilterParams(dt=1, dsx=2), DfaConfig(fit_range=(8, 500)),
              truth=scene.labels, threads=1)
    back = table_from_csv(table_to_csv(t))
    assert back.params == t.params and back.dfa_config == t.dfa_config
    for a, b in zip(t.rows, back.rows):
        assert (a.dt, a.metrics, a.alpha_noise, a.alpha_clean, a.confusion) == (
            b.dt, b.metrics, b.alpha_noise, b.alpha_clean, b.confusion)


def test_plot_loglog_lines():
    res = dfa_exponent(np.cumsum(np.random.default_rng(0).exponential(10, 1100)), DfaConfig(q=2))
    assert len(res.curve) == 7
    text = plot_data(res.curve, "dfa-loglog")["dfa"]
    assert len(text.splitlines()) == 1 + 7


def test_plot_sweep_summary_lines():
    text = plot_data(table([1000, 4000, 8000, 16000], [0.7, 0.6, 0.52, 0.5]), "sweep-summary")["summary"]
    lines = text.splitlines()
    assert lines[0] == "dt,snr_db,alpha_noise,alpha_clean" and len(lines) == 5


def test_plot_xyt_cap_strided(rng, tmp_path):
    s = random_stream(rng, 50_000)
    paths = emit_plot_data(s, "xyt-cloud", tmp_path / "cloud.csv", cap=10_000)
    lines = paths[0].read_text().splitlines()
    assert len(lines) - 1 == 10_000
    assert lines[1] == ",".join(str(int(v)) for v in s.events[0].tolist())
    assert lines[2].split(",")[0] == str(s.t[5])


def test_plot_partition_two_files(rng, tmp_path):
    s = random_stream(rng, 1000)
    part = partition(s, classify(s, BaFilterParams(dt=10_000)))
    paths = emit_plot_data(part, "xyt-cloud", tmp_path / "p.csv")
    assert sorted(p.name for p in paths) == ["p_clean.csv", "p_noise.csv"]


def test_plot_kind_mismatch(rng):
    with pytest.raises(TypeError):
        plot_data(random_stream(rng, 10), "sweep-summary")
    with pytest.raises(ValueError):
        plot_data(None, "histogram")
