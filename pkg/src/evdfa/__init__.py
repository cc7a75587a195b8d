"""Background-activity filtering and detrended fluctuation analysis for event cameras."""

from .analysis import (
    ConfusionMatrix,
    DenoiseMetrics,
    Selection,
    SweepRow,
    SweepTable,
    confusion,
    emit_plot_data,
    plot_data,
    select_optimal_dt,
    snr,
    sweep,
)
from .bafilter import (
    BaFilterParams,
    Partition,
    apply_filter,
    classify,
    correlation_count_naive,
    correlation_counts,
    partition,
)
from .dfa import (
    DegenerateSeries,
    DfaConfig,
    DfaResult,
    FluctuationCurve,
    ScalingFit,
    SeriesTooShort,
    TooFewEvents,
    dfa_exponent,
    fit_alpha,
    fluctuation_curve,
    intervals,
    local_fluctuation,
    profile,
    segment_schedule,
)
from .events import (
    EVENT_DTYPE,
    NOISE,
    SIGNAL,
    UNKNOWN,
    EventStream,
    SensorGeometry,
    TimeWindow,
    detect_hot_pixels,
    make_events,
    pixel_histogram,
    remove_hot_pixels,
    remove_pixels,
    slice_window,
    validate_sort,
)
from .io import load_stream, save_stream, write_stream
from .synth import NoiseModel, ObjectModel, Scene, gen_moving_object, gen_poisson_noise, make_scene, merge

__version__ = "0.1.0"
