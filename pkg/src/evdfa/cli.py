"""Command-line entry point ``evdfa``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 degenerate analysis.
Event files ending in ``.csv`` use the csv format, anything else evs-binary.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, io
from .bafilter import BaFilterParams, apply_filter
from .dfa import DfaConfig, DfaError, DegenerateSeries, FluctuationCurve, dfa_exponent, report_json
from .events import NOISE, SIGNAL, EventError, TimeWindow, remove_hot_pixels, slice_window
from .synth import Scene, TrajectoryOutOfBounds, make_scene

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DEGENERATE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pair(text: str, sep: str, conv=float):
    parts = text.split(sep)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two values separated by {sep!r}, got {text!r}")
    return tuple(conv(v) for v in parts)


def _int_list(text: str) -> list[int]:
    try:
        return [int(float(v)) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _add_filter_flags(p, dt_required=True):
    if dt_required:
        p.add_argument("--dt", type=int, required=True, help="filter time window in us")
    p.add_argument("--dsx", type=int, default=1)
    p.add_argument("--dsy", type=int, default=1)
    p.add_argument("--rho-min", type=int, default=1)
    p.add_argument("--mode", choices=("symmetric", "causal"), default="symmetric")


def _add_dfa_flags(p):
    p.add_argument("--q", type=float, default=2 ** 0.25, help="segment-size ratio")
    p.add_argument("--m1", type=int, default=4, help="smallest segment")
    p.add_argument("--max-fraction", type=float, default=0.25, help="largest segment as a fraction of N")
    p.add_argument("--order", type=int, default=1, help="detrending polynomial order")
    p.add_argument("--fit", type=lambda s: _pair(s, ":", int), default=None, metavar="LO:HI")


def _add_polarity_flag(p):
    p.add_argument("--polarity", choices=("both", "on", "off"), default="both",
                   help="analyse only ON (+1) or OFF (-1) events")


def _filter_params(args, dt=1) -> BaFilterParams:
    return BaFilterParams(dt=getattr(args, "dt", None) or dt, dsx=args.dsx, dsy=args.dsy,
                          rho_min=args.rho_min, temporal_mode=args.mode)


def _dfa_config(args) -> DfaConfig:
    return DfaConfig(q=args.q, m1=args.m1, max_fraction=args.max_fraction,
                     detrend_order=args.order, fit_range=args.fit)


def _load(args):
    stream = io.load_stream(args.input, strict=not getattr(args, "sort", False))
    pol = getattr(args, "polarity", "both")
    if pol != "both":
        stream = stream.take(stream.p == (1 if pol == "on" else -1))
    return stream


def cmd_synth(args):
    scene = Scene(width=args.width, height=args.height, noise_rate=args.noise_rate,
                  duration=args.duration, shape=args.object, velocity=args.velocity,
                  object_rate=args.object_rate, crossing=args.crossing, seed=args.seed)
    stream = make_scene(scene)
    io.write_stream(stream, args.output)
    print(f"wrote {len(stream)} events ({int(np.sum(stream.labels == SIGNAL))} signal) to {args.output}")


def cmd_hotpixel(args):
    stream = _load(args)
    cleaned, hot = remove_hot_pixels(stream, args.factor)
    io.write_stream(cleaned, args.output)
    print(f"removed {len(hot)} hot pixels, {len(stream) - len(cleaned)} events")
    for x, y in sorted(hot):
        print(f"  ({x}, {y})")


def cmd_window(args):
    stream = _load(args)
    out = slice_window(stream, TimeWindow(args.start, args.duration))
    io.write_stream(out, args.output)
    print(f"wrote {len(out)} of {len(stream)} events")


def cmd_filter(args):
    stream = _load(args)
    part = apply_filter(stream, _filter_params(args))
    io.write_stream(part.clean, args.clean_out)
    io.write_stream(part.noise, args.noise_out)
    m = analysis.snr(part)
    db = "undefined" if m.snr_db is None else f"{m.snr_db:.2f} dB"
    print(f"clean={m.n_clean} noise={m.n_noise} snr={db}")


def cmd_dfa(args):
    stream = _load(args)
    result = dfa_exponent(stream, _dfa_config(args))
    Path(args.output).write_text(report_json(result))
    if args.loglog:
        analysis.emit_plot_data(result.curve, "dfa-loglog", args.loglog)
    f = result.fit
    print(f"alpha={f.alpha:.4f} fit n in [{f.fit_range[0]}, {f.fit_range[1]}] residual={f.residual:.4g}")


def _truth_of(stream):
    lab = stream.labels
    if lab is None or not np.isin(lab, (SIGNAL, NOISE)).all():
        return None
    return lab


def cmd_sweep(args):
    stream = _load(args)
    table = analysis.sweep(stream, args.dt_list, _filter_params(args), _dfa_config(args),
                           truth=_truth_of(stream))
    Path(args.output).write_text(analysis.table_to_csv(table))
    for r in table.rows:
        a = "flagged" if r.alpha_noise is None else f"{r.alpha_noise.alpha:.4f}"
        line = f"dt={r.dt:>8d} clean={r.metrics.n_clean:>8d} noise={r.metrics.n_noise:>8d} alpha_noise={a}"
        if r.confusion is not None:
            line += f" precision={r.confusion.precision:.3f} recall={r.confusion.recall:.3f}"
        print(line)


def cmd_select(args):
    table = analysis.table_from_csv(Path(args.input).read_text())
    if not table.rows:
        raise EventError("sweep table has no rows")
    sel = analysis.select_optimal_dt(table, args.epsilon)
    print(json.dumps({"dt": sel.dt, "alpha_noise": sel.alpha_noise,
                      "converged": sel.converged, "rationale": sel.rationale}))
    if not sel.converged:
        print(f"warning: {sel.rationale}", file=sys.stderr)


def cmd_plot(args):
    if args.kind == "dfa-loglog":
        rep = json.loads(Path(args.input).read_text())
        artifact = FluctuationCurve(np.asarray(rep["n"]), np.asarray(rep["F"], dtype=float),
                                    np.asarray(rep["flags"], dtype=bool))
    elif args.kind == "sweep-summary":
        artifact = analysis.table_from_csv(Path(args.input).read_text())
    else:
        artifact = _load(args)
    for path in analysis.emit_plot_data(artifact, args.kind, args.output, cap=args.cap):
        print(f"wrote {path}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evdfa", description="Event-camera BA filtering and DFA noise analysis")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a labeled synthetic scene")
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--noise-rate", type=float, default=5000.0, help="events/s over the array")
    p.add_argument("--object", choices=("dot", "bar"), default="bar")
    p.add_argument("--velocity", type=lambda s: _pair(s, ","), default=(60.0, 0.0), metavar="VX,VY")
    p.add_argument("--object-rate", type=float, default=3000.0, help="object events/s")
    p.add_argument("--crossing", type=float, default=2.0, help="seconds the object is visible")
    p.add_argument("--duration", type=float, default=10.0, help="seconds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("hotpixel", help="remove hot pixels")
    p.add_argument("--factor", type=float, default=10.0)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_hotpixel)

    p = sub.add_parser("window", help="cut a time window")
    p.add_argument("--start", type=lambda s: int(float(s)), required=True)
    p.add_argument("--duration", type=lambda s: int(float(s)), required=True)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_window)

    p = sub.add_parser("filter", help="split a stream into clean and noise parts")
    _add_filter_flags(p)
    _add_polarity_flag(p)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--clean-out", required=True)
    p.add_argument("--noise-out", required=True)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("dfa", help="DFA scaling exponent of a stream")
    _add_dfa_flags(p)
    _add_polarity_flag(p)
    p.add_argument("--loglog", help="also write log10 n, log10 F plot data here")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_dfa)

    p = sub.add_parser("sweep", help="filter + DFA over a list of dt values")
    p.add_argument("--dt-list", type=_int_list, default=[1000, 2000, 4000, 8000, 16000])
    _add_filter_flags(p, dt_required=False)
    _add_dfa_flags(p)
    _add_polarity_flag(p)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("select", help="choose the optimal dt from a sweep table")
    p.add_argument("--epsilon", type=float, default=0.02)
    p.add_argument("-i", "--input", required=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("plot", help="write plot data for external rendering")
    p.add_argument("--kind", choices=analysis.PLOT_KINDS, required=True)
    p.add_argument("--cap", type=int, default=10_000, help="max events per xyt series")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_plot)

    for action in sub.choices.values():
        if any(a.dest == "input" for a in action._actions):
            action.add_argument("--sort", action="store_true",
                                help="stably sort unsorted input instead of rejecting it")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except DegenerateSeries as exc:
        print(f"evdfa: degenerate analysis: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (EventError, DfaError, TrajectoryOutOfBounds, OSError, ValueError, KeyError) as exc:
        print(f"evdfa: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
