"""Readers and writers for the csv and evs-binary event formats.

csv
    Header ``t,x,y,p`` (optionally ``,label``), one event per line, polarity
    written as ``1``/``-1``. A ``0`` polarity is read as ``-1``.

evs-binary
    ``b"EVS1"`` followed by a little-endian header ``<HHQB`` (width, height,
    count, flags; flags bit 0 = labels present), then ``count`` packed records
    ``<u8 t, <u2 x, <u2 y, i1 p[, u1 label]``.
"""

from __future__ import annotations

import io
import os
import struct
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from .events import (
    EVENT_DTYPE,
    EventStream,
    MalformedPolarity,
    MalformedRecord,
    SensorGeometry,
    validate_sort,
)

MAGIC = b"EVS1"
_HEADER = struct.Struct("<HHQB")
_RECORD = np.dtype([("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "i1")])
_RECORD_LABELED = np.dtype(_RECORD.descr + [("label", "u1")])

FORMATS = ("csv", "evs-binary")

Source = Union[bytes, str, os.PathLike, BinaryIO]


def _read_bytes(source: Source) -> bytes:
    if isinstance(source, (bytes, bytearray, memoryview)):
        return bytes(source)
    if isinstance(source, (str, os.PathLike)):
        return Path(source).read_bytes()
    return source.read()


def guess_format(path) -> str:
    return "csv" if str(path).lower().endswith((".csv", ".txt")) else "evs-binary"


def load_stream(
    source: Source,
    format: str | None = None,
    *,
    strict: bool = True,
    geometry: SensorGeometry | None = None,
) -> EventStream:
    """Read an event stream.

    ``format`` defaults to a guess from the file suffix. With ``strict`` an
    out-of-order timestamp raises :class:`UnsortedInput`, otherwise events are
    stably sorted. csv files carry no geometry; it is taken from ``geometry``
    or inferred from the largest coordinates.
    """
    if format is None:
        if not isinstance(source, (str, os.PathLike)):
            raise ValueError("format is required when reading from bytes or a file object")
        format = guess_format(source)
    data = _read_bytes(source)
    if format == "csv":
        events, labels = _parse_csv(data.decode("ascii"))
        if geometry is None:
            geometry = SensorGeometry(
                int(events["x"].max()) + 1 if len(events) else 1,
                int(events["y"].max()) + 1 if len(events) else 1,
            )
    elif format == "evs-binary":
        file_geometry, events, labels = _parse_binary(data)
        geometry = geometry or file_geometry
    else:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    return validate_sort(events, geometry, "strict" if strict else "stable-sort", labels)


def save_stream(stream: EventStream, format: str = "csv") -> bytes:
    if format == "csv":
        return _format_csv(stream).encode("ascii")
    if format == "evs-binary":
        return _format_binary(stream)
    raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")


def write_stream(stream: EventStream, path, format: str | None = None) -> None:
    Path(path).write_bytes(save_stream(stream, format or guess_format(path)))


def _parse_csv(text: str):
    lines = text.splitlines()
    if not lines:
        raise MalformedRecord("empty csv: missing header")
    header = [h.strip() for h in lines[0].split(",")]
    if header not in (["t", "x", "y", "p"], ["t", "x", "y", "p", "label"]):
        raise MalformedRecord(f"bad csv header {lines[0]!r}")
    ncol = len(header)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != ncol:
            raise MalformedRecord(f"line {lineno}: expected {ncol} fields, got {len(fields)}")
        try:
            rows.append([int(f) for f in fields])
        except ValueError:
            raise MalformedRecord(f"line {lineno}: non-integer field in {line!r}") from None
    arr = np.array(rows, dtype=np.int64).reshape(-1, ncol)
    p = arr[:, 3]
    bad = ~np.isin(p, (-1, 0, 1))
    if bad.any():
        i = int(np.argmax(bad))
        raise MalformedPolarity(f"line {i + 2}: polarity {p[i]} not in {{1, -1, 0}}")
    if (arr[:, :3] < 0).any():
        raise MalformedRecord("negative timestamp or coordinate")
    events = np.empty(len(arr), dtype=EVENT_DTYPE)
    events["t"] = arr[:, 0]
    events["x"] = arr[:, 1]
    events["y"] = arr[:, 2]
    events["p"] = np.where(p == 0, -1, p)
    labels = arr[:, 4].astype(np.uint8) if ncol == 5 else None
    if labels is not None and (arr[:, 4] > 2).any():
        raise MalformedRecord("label must be 0, 1 or 2")
    return events, labels


def _format_csv(stream: EventStream) -> str:
    buf = io.StringIO()
    ev = stream.events
    if stream.labels is None:
        buf.write("t,x,y,p\n")
        cols = (ev["t"], ev["x"], ev["y"], ev["p"])
    else:
        buf.write("t,x,y,p,label\n")
        cols = (ev["t"], ev["x"], ev["y"], ev["p"], stream.labels)
    if len(ev):
        np.savetxt(buf, np.column_stack([c.astype(np.int64) for c in cols]), fmt="%d", delimiter=",")
    return buf.getvalue()


def _parse_binary(data: bytes):
    if data[:4] != MAGIC:
        raise MalformedRecord("missing EVS1 magic")
    if len(data) < 4 + _HEADER.size:
        raise MalformedRecord("truncated header")
    width, height, count, flags = _HEADER.unpack_from(data, 4)
    rec = _RECORD_LABELED if flags & 1 else _RECORD
    body = data[4 + _HEADER.size:]
    if len(body) != count * rec.itemsize:
        raise MalformedRecord(
            f"expected {count} records ({count * rec.itemsize} bytes), got {len(body)} bytes"
        )
    raw = np.frombuffer(body, dtype=rec, count=count)
    if not np.isin(raw["p"], (-1, 1)).all():
        raise MalformedPolarity("polarity must be +1 or -1")
    if (raw["t"] > np.iinfo(np.int64).max).any():
        raise MalformedRecord("timestamp overflows int64")
    events = np.empty(count, dtype=EVENT_DTYPE)
    for name in ("t", "x", "y", "p"):
        events[name] = raw[name]
    labels = raw["label"].copy() if flags & 1 else None
    return SensorGeometry(width, height), events, labels


def _format_binary(stream: EventStream) -> bytes:
    g = stream.geometry
    if g.width > 0xFFFF or g.height > 0xFFFF:
        raise ValueError("evs-binary supports sensors up to 65535 pixels per side")
    labeled = stream.labels is not None
    rec = np.empty(len(stream), dtype=_RECORD_LABELED if labeled else _RECORD)
    for name in ("t", "x", "y", "p"):
        rec[name] = stream.events[name]
    if labeled:
        rec["label"] = stream.labels
    return MAGIC + _HEADER.pack(g.width, g.height, len(stream), int(labeled)) + rec.tobytes()
