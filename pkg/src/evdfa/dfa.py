"""Detrended fluctuation analysis of event time series.

The analysed variable is the inter-event interval, so the cumulative profile
of a stream is simply its timestamps relative to the first event. Segments
of geometrically growing length are detrended with a least-squares
polynomial, and the scaling exponent ``alpha`` is the slope of
``log F(n)`` against ``log n``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .events import EventStream

# F(n) below this fraction of the un-detrended spread is treated as exactly zero
DEGENERATE_RTOL = 1e-9
MAX_ORDER = 3


class DfaError(ValueError):
    pass


class TooFewEvents(DfaError):
    pass


class SeriesTooShort(DfaError):
    pass


class DegenerateSeries(DfaError):
    pass


@dataclass(frozen=True)
class DfaConfig:
    q: float = 2 ** 0.25
    m1: int = 4
    max_fraction: float = 0.25
    detrend_order: int = 1
    fit_range: tuple[int, int] | None = None

    def __post_init__(self):
        if not self.q > 1:
            raise ValueError("q must be > 1")
        if self.m1 < 4:
            raise ValueError("m1 must be >= 4")
        if not 0 < self.max_fraction <= 1:
            raise ValueError("max_fraction must lie in (0, 1]")
        if not 1 <= self.detrend_order <= MAX_ORDER:
            raise ValueError(f"detrend_order must be between 1 and {MAX_ORDER}")
        if self.fit_range is not None:
            lo, hi = self.fit_range
            if not lo < hi:
                raise ValueError("fit_range must satisfy n_lo < n_hi")


@dataclass(frozen=True, eq=False)
class IntervalSeries:
    values: np.ndarray
    origin_t0: float = 0.0

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class ProfileSeries:
    values: np.ndarray

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class SegmentSchedule:
    sizes: tuple[int, ...]
    q: float


@dataclass(frozen=True, eq=False)
class FluctuationCurve:
    n: np.ndarray
    F: np.ndarray
    degenerate: np.ndarray

    def __len__(self):
        return len(self.n)


@dataclass(frozen=True)
class ScalingFit:
    alpha: float
    log_c: float
    fit_range: tuple[int, int]
    residual: float
    n_points: int

    @property
    def C(self) -> float:
        return float(np.exp(self.log_c))


@dataclass(frozen=True, eq=False)
class DfaResult:
    fit: ScalingFit
    curve: FluctuationCurve
    config: DfaConfig = field(default_factory=DfaConfig)


def intervals(stream) -> IntervalSeries:
    """Inter-event intervals of an EventStream (or a bare timestamp array)."""
    t = stream.t if isinstance(stream, EventStream) else np.asarray(stream)
    if len(t) < 2:
        raise TooFewEvents(f"need at least 2 events for an interval series, got {len(t)}")
    t = t.astype(np.float64)
    return IntervalSeries(np.diff(t), float(t[0]))


def profile(series: IntervalSeries) -> ProfileSeries:
    values = np.asarray(series.values, dtype=np.float64)
    if values.size == 0:
        raise DfaError("cannot build the profile of an empty series")
    return ProfileSeries(np.cumsum(values))


def segment_schedule(n_total: int, config: DfaConfig = DfaConfig()) -> SegmentSchedule:
    """Geometric segment sizes ``round(m1 * q**k)``, deduplicated and capped at
    ``floor(n_total * max_fraction)``."""
    cap = int(np.floor(n_total * config.max_fraction))
    sizes = []
    k = 0
    while True:
        n = int(round(config.m1 * config.q ** k))
        if n > cap:
            break
        if not sizes or n > sizes[-1]:
            sizes.append(n)
        k += 1
    if len(sizes) < 3:
        raise SeriesTooShort(
            f"series of length {n_total} gives {len(sizes)} segment sizes (<3) "
            f"with m1={config.m1}, q={config.q}, max_fraction={config.max_fraction}"
        )
    return SegmentSchedule(tuple(sizes), config.q)


def _trend_basis(n: int, order: int) -> np.ndarray:
    """Orthonormal basis (n, order+1) of polynomials up to ``order`` on 0..n-1."""
    u = np.arange(n, dtype=np.float64)
    u = (u - u.mean()) / max(n - 1, 1)
    q, _ = np.linalg.qr(np.vander(u, order + 1, increasing=True))
    return q


def _detrended_ms(segments: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean squared detrended residual per row, plus the mean squared deviation
    from the row mean (the scale used for the degeneracy test)."""
    segments = segments - segments[:, :1]
    basis = _trend_basis(segments.shape[1], order)
    resid = segments - (segments @ basis) @ basis.T
    spread = segments - segments.mean(axis=1, keepdims=True)
    return np.mean(resid ** 2, axis=1), np.mean(spread ** 2, axis=1)


def local_fluctuation(prof: ProfileSeries, segment_start: int, n: int, order: int = 1) -> float:
    """Root-mean-square residual of one segment after polynomial detrending."""
    if n < order + 2:
        raise DfaError(f"segment length {n} too short for detrend order {order}")
    if segment_start < 0 or segment_start + n > len(prof):
        raise IndexError(f"segment [{segment_start}, {segment_start + n}) outside profile of {len(prof)}")
    seg = np.asarray(prof.values[segment_start:segment_start + n], dtype=np.float64)[None, :]
    ms, spread = _detrended_ms(seg, order)
    if ms[0] <= DEGENERATE_RTOL ** 2 * spread[0]:
        return 0.0
    return float(np.sqrt(ms[0]))


def fluctuation_curve(prof: ProfileSeries, schedule: SegmentSchedule, order: int = 1) -> FluctuationCurve:
    """Total fluctuation ``F(n)`` for every scheduled segment length.

    The first ``floor(N/n) * n`` points are cut into contiguous segments; the
    trailing remainder is dropped.
    """
    X = np.asarray(prof.values, dtype=np.float64)
    N = len(X)
    sizes = np.asarray(schedule.sizes, dtype=np.int64)
    F = np.zeros(len(sizes))
    degenerate = np.zeros(len(sizes), dtype=bool)
    for j, n in enumerate(sizes):
        n = int(n)
        if n < order + 2:
            raise DfaError(f"segment length {n} too short for detrend order {order}")
        k = N // n
        if k < 1:
            raise SeriesTooShort(f"segment length {n} exceeds profile length {N}")
        ms, spread = _detrended_ms(X[:k * n].reshape(k, n), order)
        total = float(np.mean(ms))
        if total <= DEGENERATE_RTOL ** 2 * float(np.mean(spread)):
            degenerate[j] = True
        else:
            F[j] = np.sqrt(total)
    return FluctuationCurve(sizes, F, degenerate)


def fit_alpha(curve: FluctuationCurve, fit_range: tuple[int, int] | None = None) -> ScalingFit:
    """Least-squares line through ``(ln n, ln F(n))`` over non-degenerate points."""
    n = np.asarray(curve.n, dtype=np.float64)
    use = ~np.asarray(curve.degenerate, dtype=bool) & (np.asarray(curve.F) > 0)
    if fit_range is not None:
        use &= (n >= fit_range[0]) & (n <= fit_range[1])
    if use.sum() < 3:
        raise DegenerateSeries(f"only {int(use.sum())} usable fluctuation points (need 3)")
    lx = np.log(n[use])
    ly = np.log(np.asarray(curve.F, dtype=np.float64)[use])
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    return ScalingFit(
        alpha=float(slope),
        log_c=float(intercept),
        fit_range=(int(n[use][0]), int(n[use][-1])),
        residual=float(np.sqrt(np.mean(resid ** 2))),
        n_points=int(use.sum()),
    )


def dfa_exponent(stream, config: DfaConfig = DfaConfig()) -> DfaResult:
    """Full pipeline: intervals, profile, schedule, fluctuation curve, fit.

    ``stream`` may be an EventStream, a timestamp array, or an IntervalSeries.
    """
    series = stream if isinstance(stream, IntervalSeries) else intervals(stream)
    prof = profile(series)
    schedule = segment_schedule(len(prof), config)
    curve = fluctuation_curve(prof, schedule, config.detrend_order)
    return DfaResult(fit_alpha(curve, config.fit_range), curve, config)


def report_dict(result: DfaResult) -> dict:
    c = result.curve
    f = result.fit
    return {
        "n": [int(v) for v in c.n],
        "F": [float(v) for v in c.F],
        "flags": [bool(v) for v in c.degenerate],
        "alpha": f.alpha,
        "intercept": f.log_c,
        "residual": f.residual,
        "fit_range": list(f.fit_range),
        "config": asdict(result.config),
    }


def report_json(result: DfaResult) -> str:
    return json.dumps(report_dict(result), indent=2)


def loglog_table(curve: FluctuationCurve) -> np.ndarray:
    """``(log10 n, log10 F)`` rows for the non-degenerate points."""
    ok = ~curve.degenerate
    return np.column_stack([np.log10(curve.n[ok].astype(float)), np.log10(curve.F[ok])])
