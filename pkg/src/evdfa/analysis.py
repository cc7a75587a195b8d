"""Filter-quality metrics, the dt sweep, and optimal-dt selection.

SNR here is a definition choice: the ratio of clean-partition to
noise-partition event counts (and its value in dB).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .bafilter import BaFilterParams, Partition, classify, partition
from .dfa import (
    DegenerateSeries,
    DfaConfig,
    DfaError,
    DfaResult,
    FluctuationCurve,
    ScalingFit,
    dfa_exponent,
    loglog_table,
)
from .events import NOISE, SIGNAL, EventStream


@dataclass(frozen=True)
class DenoiseMetrics:
    n_clean: int
    n_noise: int

    @property
    def defined(self) -> bool:
        return self.n_noise > 0

    @property
    def snr_ratio(self) -> float | None:
        return self.n_clean / self.n_noise if self.n_noise else None

    @property
    def snr_db(self) -> float | None:
        r = self.snr_ratio
        if r is None:
            return None
        return 10 * math.log10(r) if r > 0 else -math.inf


def snr(part: Partition) -> DenoiseMetrics:
    return DenoiseMetrics(len(part.clean), len(part.noise))


@dataclass(frozen=True)
class ConfusionMatrix:
    """Signal is the positive class."""

    true_pos: int
    false_pos: int
    true_neg: int
    false_neg: int

    @property
    def total(self) -> int:
        return self.true_pos + self.false_pos + self.true_neg + self.false_neg

    @property
    def precision(self) -> float:
        d = self.true_pos + self.false_pos
        return self.true_pos / d if d else math.nan

    @property
    def recall(self) -> float:
        d = self.true_pos + self.false_neg
        return self.true_pos / d if d else math.nan


def _truth_mask(truth) -> np.ndarray:
    truth = np.asarray(truth)
    if truth.dtype == bool:
        return truth
    if not np.isin(truth, (SIGNAL, NOISE)).all():
        raise ValueError("ground truth must be SIGNAL or NOISE for every event")
    return truth == SIGNAL


def confusion(predicted, truth) -> ConfusionMatrix:
    """Tally predicted signal mask against ground truth (bool mask or label codes)."""
    pred = np.asarray(predicted, dtype=bool)
    real = _truth_mask(truth)
    if pred.shape != real.shape:
        raise ValueError(f"length mismatch: {pred.shape[0]} predictions, {real.shape[0]} truth labels")
    return ConfusionMatrix(
        true_pos=int(np.sum(pred & real)),
        false_pos=int(np.sum(pred & ~real)),
        true_neg=int(np.sum(~pred & ~real)),
        false_neg=int(np.sum(~pred & real)),
    )


@dataclass(frozen=True)
class SweepRow:
    dt: int
    metrics: DenoiseMetrics
    alpha_noise: ScalingFit | None
    alpha_clean: ScalingFit | None
    wall_time: float  # ms
    confusion: ConfusionMatrix | None = None
    noise_error: str | None = None
    clean_error: str | None = None

    @property
    def flagged(self) -> bool:
        return self.alpha_noise is None


@dataclass(frozen=True)
class SweepTable:
    rows: tuple[SweepRow, ...]
    params: BaFilterParams | None = None
    dfa_config: DfaConfig = field(default_factory=DfaConfig)

    def __post_init__(self):
        dts = [r.dt for r in self.rows]
        if any(b <= a for a, b in zip(dts, dts[1:])):
            raise ValueError("sweep rows must have strictly increasing dt")

    def __len__(self):
        return len(self.rows)

    @property
    def dts(self) -> list[int]:
        return [r.dt for r in self.rows]


def _dfa_or_reason(stream: EventStream, config: DfaConfig):
    try:
        return dfa_exponent(stream, config).fit, None
    except DfaError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def thread_count() -> int:
    """Worker count from ``EVDFA_THREADS`` (0 or unset = one per CPU)."""
    raw = os.environ.get("EVDFA_THREADS", "0").strip() or "0"
    n = int(raw)
    return n if n > 0 else (os.cpu_count() or 1)


def sweep_row(
    stream: EventStream,
    dt: int,
    params_base: BaFilterParams | None = None,
    dfa_config: DfaConfig = DfaConfig(),
    truth=None,
) -> SweepRow:
    params = replace(params_base, dt=dt) if params_base is not None else BaFilterParams(dt=dt)
    start = time.perf_counter()
    labels = classify(stream, params)
    part = partition(stream, labels, params)
    wall = (time.perf_counter() - start) * 1e3
    fit_noise, err_noise = _dfa_or_reason(part.noise, dfa_config)
    fit_clean, err_clean = _dfa_or_reason(part.clean, dfa_config)
    return SweepRow(
        dt=dt,
        metrics=snr(part),
        alpha_noise=fit_noise,
        alpha_clean=fit_clean,
        wall_time=wall,
        confusion=None if truth is None else confusion(labels, truth),
        noise_error=err_noise,
        clean_error=err_clean,
    )


def sweep(
    stream: EventStream,
    dt_list: Sequence[int],
    params_base: BaFilterParams | None = None,
    dfa_config: DfaConfig = DfaConfig(),
    truth=None,
    threads: int | None = None,
) -> SweepTable:
    """Filter, partition and run DFA on both partitions for every dt.

    ``truth`` (bool mask or label codes) adds a confusion matrix per row.
    Rows whose noise partition is too short or degenerate for DFA are kept
    with ``alpha_noise=None``; only a sweep where every row is flagged raises.
    """
    dt_list = [int(d) for d in dt_list]
    if not dt_list:
        raise ValueError("dt_list is empty")
    if any(b <= a for a, b in zip(dt_list, dt_list[1:])):
        raise ValueError("dt_list must be strictly increasing")
    if truth is not None:
        truth = _truth_mask(truth)
    workers = min(threads or thread_count(), len(dt_list))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(lambda d: sweep_row(stream, d, params_base, dfa_config, truth), dt_list))
    else:
        rows = [sweep_row(stream, d, params_base, dfa_config, truth) for d in dt_list]
    if all(r.flagged for r in rows):
        raise DegenerateSeries("DFA failed on the noise partition at every dt: " + rows[0].noise_error)
    return SweepTable(tuple(rows), params_base, dfa_config)


_SLACK = 1e-12


@dataclass(frozen=True)
class Selection:
    dt: int
    alpha_noise: float | None
    converged: bool
    rationale: str


def select_optimal_dt(table: SweepTable, epsilon: float = 0.02) -> Selection:
    """Smallest dt whose noise-partition alpha is within ``epsilon`` of 0.5.

    Falls back to the largest dt with ``converged=False`` when no eligible row
    qualifies. Rows without a noise alpha are never eligible. The comparison
    allows 1e-12 of rounding slack so that e.g. 0.52 counts as within 0.02.
    """
    if not table.rows:
        raise ValueError("empty sweep table")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    for row in table.rows:
        if row.alpha_noise is not None and abs(row.alpha_noise.alpha - 0.5) <= epsilon + _SLACK:
            return Selection(
                row.dt, row.alpha_noise.alpha, True,
                f"dt={row.dt}: smallest dt with |alpha_noise - 0.5| = "
                f"{abs(row.alpha_noise.alpha - 0.5):.4f} <= {epsilon}",
            )
    last = table.rows[-1]
    alpha = last.alpha_noise.alpha if last.alpha_noise is not None else None
    return Selection(
        last.dt, alpha, False,
        f"no dt reached |alpha_noise - 0.5| <= {epsilon}; falling back to largest dt={last.dt}",
    )


# ---- table serialization -------------------------------------------------

TABLE_COLUMNS = [
    "dt", "n_clean", "n_noise", "snr_ratio", "snr_db",
    "alpha_noise", "log_c_noise", "fit_lo_noise", "fit_hi_noise", "residual_noise", "npts_noise",
    "alpha_clean", "log_c_clean", "fit_lo_clean", "fit_hi_clean", "residual_clean", "npts_clean",
    "tp", "fp", "tn", "fn", "precision", "recall", "wall_time_ms",
]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return repr(v)
    return str(v)


def _fit_cells(fit: ScalingFit | None) -> list:
    if fit is None:
        return [None] * 6
    return [fit.alpha, fit.log_c, fit.fit_range[0], fit.fit_range[1], fit.residual, fit.n_points]


def table_to_csv(table: SweepTable) -> str:
    buf = io.StringIO()
    echo = {
        "filter": asdict(table.params) if table.params is not None else None,
        "dfa": asdict(table.dfa_config),
    }
    buf.write("# config: " + json.dumps(echo) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in table.rows:
        cm = r.confusion
        cm_cells = [None] * 6 if cm is None else [
            cm.true_pos, cm.false_pos, cm.true_neg, cm.false_neg, cm.precision, cm.recall,
        ]
        cells = [r.dt, r.metrics.n_clean, r.metrics.n_noise, r.metrics.snr_ratio, r.metrics.snr_db]
        cells += _fit_cells(r.alpha_noise) + _fit_cells(r.alpha_clean) + cm_cells + [r.wall_time]
        w.writerow([_fmt(c) for c in cells])
    return buf.getvalue()


def _read_fit(rec: Mapping[str, str], suffix: str) -> ScalingFit | None:
    if not rec[f"alpha_{suffix}"]:
        return None
    return ScalingFit(
        alpha=float(rec[f"alpha_{suffix}"]),
        log_c=float(rec[f"log_c_{suffix}"]),
        fit_range=(int(rec[f"fit_lo_{suffix}"]), int(rec[f"fit_hi_{suffix}"])),
        residual=float(rec[f"residual_{suffix}"]),
        n_points=int(rec[f"npts_{suffix}"]),
    )


def table_from_csv(text: str) -> SweepTable:
    lines = text.splitlines()
    params, config = None, DfaConfig()
    if lines and lines[0].startswith("# config: "):
        echo = json.loads(lines[0][len("# config: "):])
        if echo.get("filter"):
            params = BaFilterParams(**echo["filter"])
        dfa = echo.get("dfa") or {}
        if dfa.get("fit_range") is not None:
            dfa["fit_range"] = tuple(dfa["fit_range"])
        config = DfaConfig(**dfa)
    rows = []
    for rec in csv.DictReader(line for line in lines if not line.startswith("#")):
        cm = None
        if rec["tp"]:
            cm = ConfusionMatrix(int(rec["tp"]), int(rec["fp"]), int(rec["tn"]), int(rec["fn"]))
        rows.append(SweepRow(
            dt=int(rec["dt"]),
            metrics=DenoiseMetrics(int(rec["n_clean"]), int(rec["n_noise"])),
            alpha_noise=_read_fit(rec, "noise"),
            alpha_clean=_read_fit(rec, "clean"),
            wall_time=float(rec["wall_time_ms"]),
            confusion=cm,
        ))
    return SweepTable(tuple(rows), params, config)


# ---- plot data -----------------------------------------------------------

PLOT_KINDS = ("dfa-loglog", "sweep-summary", "xyt-cloud")


def _stride_index(n: int, cap: int) -> np.ndarray:
    if n <= cap:
        return np.arange(n)
    return (np.arange(cap) * n) // cap


def _xyt_text(stream: EventStream, cap: int) -> str:
    ev = stream.events[_stride_index(len(stream), cap)]
    buf = io.StringIO()
    buf.write("t,x,y,p\n")
    if len(ev):
        cols = np.column_stack([ev[c].astype(np.int64) for c in ("t", "x", "y", "p")])
        np.savetxt(buf, cols, fmt="%d", delimiter=",")
    return buf.getvalue()


def _loglog_text(curve: FluctuationCurve) -> str:
    buf = io.StringIO()
    buf.write("log10_n,log10_F\n")
    tab = loglog_table(curve)
    if len(tab):
        np.savetxt(buf, tab, fmt="%.12g", delimiter=",")
    return buf.getvalue()


def _summary_text(table: SweepTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dt", "snr_db", "alpha_noise", "alpha_clean"])
    for r in table.rows:
        w.writerow([
            r.dt,
            _fmt(r.metrics.snr_db),
            _fmt(r.alpha_noise.alpha if r.alpha_noise else None),
            _fmt(r.alpha_clean.alpha if r.alpha_clean else None),
        ])
    return buf.getvalue()


def plot_data(artifact, kind: str, cap: int = 10_000) -> dict[str, str]:
    """Render plot-ready CSV text, one entry per data series.

    dfa-loglog
        FluctuationCurve, DfaResult, or a mapping of series name to either.
    sweep-summary
        SweepTable.
    xyt-cloud
        EventStream or Partition, each series strided down to ``cap`` events.
    """
    if kind == "dfa-loglog":
        if isinstance(artifact, (FluctuationCurve, DfaResult)):
            artifact = {"dfa": artifact}
        if not isinstance(artifact, Mapping):
            raise TypeError(f"dfa-loglog needs a FluctuationCurve, got {type(artifact).__name__}")
        return {
            name: _loglog_text(c.curve if isinstance(c, DfaResult) else c)
            for name, c in artifact.items()
        }
    if kind == "sweep-summary":
        if not isinstance(artifact, SweepTable):
            raise TypeError(f"sweep-summary needs a SweepTable, got {type(artifact).__name__}")
        return {"summary": _summary_text(artifact)}
    if kind == "xyt-cloud":
        if isinstance(artifact, Partition):
            return {"clean": _xyt_text(artifact.clean, cap), "noise": _xyt_text(artifact.noise, cap)}
        if isinstance(artifact, EventStream):
            return {"events": _xyt_text(artifact, cap)}
        raise TypeError(f"xyt-cloud needs an EventStream or Partition, got {type(artifact).__name__}")
    raise ValueError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")


def emit_plot_data(artifact, kind: str, out, cap: int = 10_000) -> list[Path]:
    """Write :func:`plot_data` series to disk.

    A single series goes to ``out``; several go to ``<stem>_<name><suffix>``.
    """
    series = plot_data(artifact, kind, cap)
    out = Path(out)
    if len(series) == 1:
        targets = {out: next(iter(series.values()))}
    else:
        targets = {out.with_name(f"{out.stem}_{name}{out.suffix or '.csv'}"): text for name, text in series.items()}
    for path, text in targets.items():
        path.write_text(text)
    return list(targets)
