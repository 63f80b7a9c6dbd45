"""Tick parsing, bar resampling, min-max normalization, and windowing.

All functions here are pure: they take immutable inputs and return new
objects, so they are safe to call from multiple threads.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateFeature,
    EmptyInput,
    InsufficientData,
    MalformedRow,
    MissingField,
    NonMonotoneTimestamp,
)

TICK_FIELDS = (
    "UpdateTime",
    "UpdateMillisec",
    "LastPrice",
    "Volume",
    "BidPrice1",
    "BidVolume1",
    "AskPrice1",
    "AskVolume1",
)


@dataclass(frozen=True)
class TickRecord:
    update_time: float        # seconds (within-day or epoch, feed dependent)
    update_millisec: int      # [0, 999]
    last_price: float
    volume: int               # cumulative trade count
    bid_price1: float
    bid_volume1: int
    ask_price1: float
    ask_volume1: int

    @property
    def timestamp(self) -> float:
        return self.update_time + self.update_millisec / 1000.0


@dataclass(frozen=True)
class Bar:
    open_time: float
    open: float
    high: float
    low: float
    close: float
    volume_delta: int


@dataclass(frozen=True)
class NormalizationParams:
    x_min: np.ndarray  # per-feature minimum, shape (F,)
    x_max: np.ndarray  # per-feature maximum, shape (F,)


@dataclass
class WindowedDataset:
    inputs: np.ndarray          # (N, T, F)
    targets: np.ndarray         # (N, window_out)
    feature_names: list[str]
    norm: NormalizationParams | None = None
    target_times: np.ndarray | None = None   # open_time of each target bar

    @property
    def num_samples(self) -> int:
        return self.inputs.shape[0]


@dataclass
class ParseResult:
    records: list[TickRecord]
    dropped_rows: int  # rows with a zero bid/ask sentinel, skipped non-fatally


def _parse_time(text: str) -> float:
    """Accepts 'HH:MM:SS' (seconds within day) or a plain number of seconds."""
    parts = text.split(":")
    if len(parts) == 3:
        h, m, s = (int(p) for p in parts)
        return float(h * 3600 + m * 60 + s)
    return float(text)


def parse_ticks(
    stream: io.TextIOBase | str,
    delimiter: str = ",",
) -> ParseResult:
    """Parse delimiter-separated tick rows into TickRecords.

    The first row must be a header naming all eight tick fields (any order).
    Rows with a zero bid or ask sentinel are dropped and counted; any other
    violation raises with the offending line number.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    lines = iter(enumerate(stream, start=1))
    try:
        _, header_line = next(lines)
    except StopIteration:
        raise MissingField("stream is empty; header row required")
    header = [h.strip() for h in header_line.rstrip("\n").split(delimiter)]
    for name in TICK_FIELDS:
        if name not in header:
            raise MissingField(f"header lacks required field {name!r}")
    col = {name: header.index(name) for name in TICK_FIELDS}

    records: list[TickRecord] = []
    dropped = 0
    prev_ts: float | None = None
    for lineno, line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split(delimiter)
        if len(parts) != len(header):
            raise MalformedRow(
                lineno, f"expected {len(header)} fields, got {len(parts)}"
            )
        try:
            rec = TickRecord(
                update_time=_parse_time(parts[col["UpdateTime"]].strip()),
                update_millisec=int(parts[col["UpdateMillisec"]]),
                last_price=float(parts[col["LastPrice"]]),
                volume=int(parts[col["Volume"]]),
                bid_price1=float(parts[col["BidPrice1"]]),
                bid_volume1=int(parts[col["BidVolume1"]]),
                ask_price1=float(parts[col["AskPrice1"]]),
                ask_volume1=int(parts[col["AskVolume1"]]),
            )
        except ValueError as exc:
            raise MalformedRow(lineno, f"unparsable value ({exc})")
        if not 0 <= rec.update_millisec <= 999:
            raise MalformedRow(lineno, "UpdateMillisec outside [0, 999]")
        if rec.last_price <= 0:
            raise MalformedRow(lineno, "LastPrice must be positive")
        if rec.bid_price1 == 0 or rec.ask_price1 == 0:
            dropped += 1
            continue
        if rec.ask_price1 > 0 and rec.bid_price1 > 0 and rec.ask_price1 < rec.bid_price1:
            raise MalformedRow(lineno, "crossed book: AskPrice1 < BidPrice1")
        if prev_ts is not None and rec.timestamp < prev_ts:
            raise NonMonotoneTimestamp(
                lineno, f"timestamp {rec.timestamp} < previous {prev_ts}"
            )
        prev_ts = rec.timestamp
        records.append(rec)
    return ParseResult(records=records, dropped_rows=dropped)


def resample(ticks: Sequence[TickRecord], interval: float = 30.0) -> list[Bar]:
    """Aggregate ticks into fixed-interval OHLC bars.

    Empty intervals between populated ones are forward-filled with the
    previous close (o=h=l=c, volume_delta 0). Volume is treated as
    cumulative; per-bar deltas are differenced and clamped at 0.
    """
    if not ticks:
        raise EmptyInput("no ticks to resample")
    t0 = ticks[0].timestamp
    buckets: dict[int, list[TickRecord]] = {}
    for t in ticks:
        buckets.setdefault(int((t.timestamp - t0) // interval), []).append(t)

    bars: list[Bar] = []
    prev_close: float | None = None
    prev_cum_volume = ticks[0].volume
    last_bucket = max(buckets)
    for b in range(last_bucket + 1):
        open_time = t0 + b * interval
        group = buckets.get(b)
        if group is None:
            assert prev_close is not None
            bars.append(Bar(open_time, prev_close, prev_close, prev_close,
                            prev_close, 0))
            continue
        prices = [t.last_price for t in group]
        cum = group[-1].volume
        vd = max(0, cum - prev_cum_volume) if bars else max(0, cum - ticks[0].volume)
        prev_cum_volume = cum
        bars.append(Bar(open_time, prices[0], max(prices), min(prices),
                        prices[-1], vd))
        prev_close = prices[-1]
    return bars


def fit_minmax(series: np.ndarray) -> NormalizationParams:
    """Column extrema of a (n, F) array; rejects zero-range features."""
    series = np.asarray(series, dtype=float)
    if series.ndim == 1:
        series = series.reshape(-1, 1)
    x_min = series.min(axis=0)
    x_max = series.max(axis=0)
    degenerate = np.nonzero(x_max <= x_min)[0]
    if degenerate.size:
        raise DegenerateFeature(
            f"feature index {degenerate[0]} has zero range ({x_min[degenerate[0]]})"
        )
    return NormalizationParams(x_min=x_min, x_max=x_max)


def apply_minmax(values: np.ndarray, params: NormalizationParams) -> np.ndarray:
    """x -> (x - x_min) / (x_max - x_min); out-of-range values map outside [0,1]."""
    values = np.asarray(values, dtype=float)
    return (values - params.x_min) / (params.x_max - params.x_min)


def invert_minmax(normalized: np.ndarray, params: NormalizationParams) -> np.ndarray:
    normalized = np.asarray(normalized, dtype=float)
    return normalized * (params.x_max - params.x_min) + params.x_min


def default_feature_selector(bar: Bar) -> list[float]:
    return [bar.close]


def make_windows(
    bars: Sequence[Bar],
    feature_selector: Callable[[Bar], list[float]] = default_feature_selector,
    feature_names: Sequence[str] = ("close",),
    window_in: int = 5,
    window_out: int = 1,
    stride: int = 1,
) -> WindowedDataset:
    """Slide a window over contiguous bars; the target is the close price
    window_out steps after each input window (strictly later in time)."""
    n = len(bars)
    num = (n - window_in - window_out) // stride + 1 if n >= window_in + window_out else 0
    if num < 1:
        raise InsufficientData(
            f"{n} bars cannot supply window_in={window_in} + window_out={window_out}"
        )
    feats = np.array([feature_selector(b) for b in bars], dtype=float)  # (n, F)
    closes = np.array([b.close for b in bars], dtype=float)
    times = np.array([b.open_time for b in bars], dtype=float)
    inputs = np.stack(
        [feats[i * stride: i * stride + window_in] for i in range(num)]
    )
    targets = np.stack(
        [closes[i * stride + window_in: i * stride + window_in + window_out]
         for i in range(num)]
    )
    target_times = np.array(
        [times[i * stride + window_in + window_out - 1] for i in range(num)]
    )
    return WindowedDataset(
        inputs=inputs,
        targets=targets,
        feature_names=list(feature_names),
        target_times=target_times,
    )


# --- dataset artifact (binary, byte-exact; see README for the layout) ---

_MAGIC = b"QRWDSv1\x00"   # 8-byte magic
_VERSION = 1


def save_dataset(ds: WindowedDataset, path: str) -> None:
    buf = io.BytesIO()
    buf.write(_MAGIC)
    buf.write(struct.pack("<I", _VERSION))
    n, t, f = ds.inputs.shape
    wout = ds.targets.shape[1]
    buf.write(struct.pack("<IIII", n, t, f, wout))
    names = "\x1f".join(ds.feature_names).encode("utf-8")
    buf.write(struct.pack("<I", len(names)))
    buf.write(names)
    has_norm = ds.norm is not None
    has_times = ds.target_times is not None
    buf.write(struct.pack("<BB", int(has_norm), int(has_times)))
    if has_norm:
        buf.write(np.ascontiguousarray(ds.norm.x_min, dtype="<f8").tobytes())
        buf.write(np.ascontiguousarray(ds.norm.x_max, dtype="<f8").tobytes())
    if has_times:
        buf.write(np.ascontiguousarray(ds.target_times, dtype="<f8").tobytes())
    buf.write(np.ascontiguousarray(ds.inputs, dtype="<f8").tobytes())
    buf.write(np.ascontiguousarray(ds.targets, dtype="<f8").tobytes())
    from .io_utils import atomic_write_bytes
    atomic_write_bytes(path, buf.getvalue())


def load_dataset(path: str) -> WindowedDataset:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != _MAGIC:
        raise MalformedRow(0, f"{path}: bad dataset magic")
    off = 8
    (version,) = struct.unpack_from("<I", data, off); off += 4
    if version != _VERSION:
        raise MalformedRow(0, f"{path}: unsupported dataset version {version}")
    n, t, f, wout = struct.unpack_from("<IIII", data, off); off += 16
    (nlen,) = struct.unpack_from("<I", data, off); off += 4
    names = data[off:off + nlen].decode("utf-8").split("\x1f"); off += nlen
    has_norm, has_times = struct.unpack_from("<BB", data, off); off += 2
    norm = None
    if has_norm:
        x_min = np.frombuffer(data, "<f8", f, off).copy(); off += 8 * f
        x_max = np.frombuffer(data, "<f8", f, off).copy(); off += 8 * f
        norm = NormalizationParams(x_min=x_min, x_max=x_max)
    times = None
    if has_times:
        times = np.frombuffer(data, "<f8", n, off).copy(); off += 8 * n
    inputs = np.frombuffer(data, "<f8", n * t * f, off).reshape(n, t, f).copy()
    off += 8 * n * t * f
    targets = np.frombuffer(data, "<f8", n * wout, off).reshape(n, wout).copy()
    return WindowedDataset(inputs=inputs, targets=targets, feature_names=names,
                           norm=norm, target_times=times)
