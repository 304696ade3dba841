"""Time-tagged click records: file formats, gating, and ingestion.

A pulsed measurement is recorded as a stream of (channel, timestamp)
click records.  Ingestion folds the tags onto the pulse grid: pulse
index = floor(t / pulse_period), position in period = t mod
pulse_period.  A record counts only when its position falls inside the
detection gate [gate_offset, gate_offset + gate_width); multiple
surviving records of one channel in one pulse collapse to a single
click (the detector saturates).  The timing contract

    gate_width < dead_time < pulse_period

guarantees a detector fires at most once per gate and has recovered by
the next one, so per-pulse saturation is the complete description; the
dead time therefore enters validation only.

Two record formats are supported:

* CSV with header ``channel,timestamp_ns``; channel is A or B,
  timestamp a nonnegative integer in ns, nondecreasing per channel.
* A binary variant: an 8-byte little-endian record count, then 9 bytes
  per record (1 byte channel, ASCII A/B, and an 8-byte little-endian
  unsigned timestamp in ns).

Aggregated tallies travel as a flat ``key = value`` text block that
echoes the producing configuration, so a classification re-run needs no
side channel.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .model import (
    ClickCounts,
    Coherent,
    DetectionParams,
    EmitterWithBackground,
    FormatError,
    GateError,
    IdealEmitters,
    SourceModel,
)
from .simulate import SimConfig

log = logging.getLogger(__name__)

CSV_HEADER = "channel,timestamp_ns"
COUNTS_MAGIC = "photon-gate-counts v1"
_CHANNEL_CODE = {"A": 0, "B": 1}
_CHANNEL_NAME = ("A", "B")


@dataclass(frozen=True)
class GateConfig:
    """Pulse-grid timing in nanoseconds.

    dead_time_ns defaults to the midpoint between gate width and pulse
    period, which always satisfies the ordering contract.
    """

    pulse_period_ns: float
    gate_offset_ns: float
    gate_width_ns: float
    dead_time_ns: float | None = None

    def __post_init__(self) -> None:
        period, offset, width = self.pulse_period_ns, self.gate_offset_ns, self.gate_width_ns
        for name, v in (("pulse_period_ns", period), ("gate_offset_ns", offset),
                        ("gate_width_ns", width)):
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise GateError(f"{name} must be finite, got {v!r}")
        if period <= 0:
            raise GateError(f"pulse_period_ns must be positive, got {period!r}")
        if width <= 0:
            raise GateError(f"gate_width_ns must be positive, got {width!r}")
        if offset < 0:
            raise GateError(f"gate_offset_ns must be >= 0, got {offset!r}")
        if offset + width > period:
            raise GateError(
                f"gate [{offset}, {offset + width}) ns does not fit in the "
                f"{period} ns pulse period"
            )
        dead = self.dead_time_ns
        if dead is None:
            dead = 0.5 * (width + period)
            object.__setattr__(self, "dead_time_ns", dead)
        if not width < dead < period:
            raise GateError(
                f"need gate_width < dead_time < pulse_period, got "
                f"{width!r} / {dead!r} / {period!r} ns"
            )


class ClickRecord(NamedTuple):
    channel: str  # "A" or "B"
    timestamp_ns: int


# ---------------------------------------------------------------- CSV --


def write_timetags_csv(path: str | Path, channels: np.ndarray, timestamps: np.ndarray) -> None:
    lines = [CSV_HEADER]
    lines.extend(
        f"{_CHANNEL_NAME[int(c)]},{int(t)}" for c, t in zip(channels, timestamps)
    )
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_timetags_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Returns (channels, timestamps): uint8 codes (0=A, 1=B) and int64 ns."""
    channels: list[int] = []
    timestamps: list[int] = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        if header.strip() != CSV_HEADER:
            raise FormatError(f"{path}:1: expected header {CSV_HEADER!r}")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected 'channel,timestamp_ns'")
            ch = parts[0].strip()
            if ch not in _CHANNEL_CODE:
                raise FormatError(f"{path}:{lineno}: channel must be A or B, got {ch!r}")
            try:
                t = int(parts[1])
            except ValueError:
                raise FormatError(
                    f"{path}:{lineno}: timestamp must be an integer, got {parts[1]!r}"
                ) from None
            if t < 0:
                raise FormatError(f"{path}:{lineno}: timestamp must be >= 0, got {t}")
            channels.append(_CHANNEL_CODE[ch])
            timestamps.append(t)
    return np.asarray(channels, dtype=np.uint8), np.asarray(timestamps, dtype=np.int64)


# ------------------------------------------------------------- binary --

_BIN_DTYPE = np.dtype([("channel", "u1"), ("timestamp", "<u8")])


def write_timetags_binary(path: str | Path, channels: np.ndarray, timestamps: np.ndarray) -> None:
    records = np.empty(len(channels), dtype=_BIN_DTYPE)
    records["channel"] = np.where(np.asarray(channels) == 0, ord("A"), ord("B"))
    records["timestamp"] = np.asarray(timestamps, dtype=np.uint64)
    header = np.uint64(len(records)).tobytes()  # little-endian on all supported targets
    Path(path).write_bytes(header + records.tobytes())


def read_timetags_binary(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise FormatError(f"{path}: truncated; no record-count header")
    count = int(np.frombuffer(data[:8], dtype="<u8")[0])
    body = data[8:]
    if len(body) != count * _BIN_DTYPE.itemsize:
        raise FormatError(
            f"{path}: header promises {count} records "
            f"({count * _BIN_DTYPE.itemsize} bytes), found {len(body)} bytes"
        )
    records = np.frombuffer(body, dtype=_BIN_DTYPE)
    codes = records["channel"]
    bad = ~np.isin(codes, (ord("A"), ord("B")))
    if np.any(bad):
        first = int(np.flatnonzero(bad)[0])
        raise FormatError(f"{path}: record {first}: channel byte {codes[first]!r} not A/B")
    channels = (codes == ord("B")).astype(np.uint8)
    timestamps = records["timestamp"].astype(np.int64)
    if np.any(timestamps < 0):
        raise FormatError(f"{path}: timestamp exceeds the signed 64-bit range")
    return channels, timestamps


# ---------------------------------------------------------- ingestion --


def ingest_arrays(
    channels: np.ndarray,
    timestamps: np.ndarray,
    gate: GateConfig,
    n_pulses: int,
) -> ClickCounts:
    """Fold time tags onto the pulse grid and tally click patterns.

    Records outside the gate window never change the tallies; records
    beyond the declared n_pulses observation window are dropped (with a
    debug log).  Timestamps must be nondecreasing per channel.
    """
    if n_pulses < 1:
        raise FormatError(f"n_pulses must be >= 1, got {n_pulses!r}")
    channels = np.asarray(channels)
    ts = np.asarray(timestamps, dtype=np.int64)
    if channels.shape != ts.shape:
        raise FormatError("channels and timestamps must have equal length")
    if np.any(ts < 0):
        raise FormatError("timestamps must be nonnegative")
    kept_pulses: list[np.ndarray] = []
    for code in (0, 1):
        t = ts[channels == code]
        if t.size > 1 and np.any(np.diff(t) < 0):
            raise FormatError(
                f"channel {_CHANNEL_NAME[code]} timestamps are not sorted"
            )
        pulse = np.floor_divide(t, gate.pulse_period_ns).astype(np.int64) \
            if isinstance(gate.pulse_period_ns, int) \
            else np.floor(t / gate.pulse_period_ns).astype(np.int64)
        position = t - pulse * gate.pulse_period_ns
        in_gate = (position >= gate.gate_offset_ns) & (
            position < gate.gate_offset_ns + gate.gate_width_ns
        )
        in_window = pulse < n_pulses
        dropped = int(np.count_nonzero(in_gate & ~in_window))
        if dropped:
            log.debug(
                "channel %s: %d in-gate records beyond pulse window dropped",
                _CHANNEL_NAME[code], dropped,
            )
        kept_pulses.append(np.unique(pulse[in_gate & in_window]))
    a, b = kept_pulses
    n_11 = int(np.intersect1d(a, b, assume_unique=True).size)
    n_10 = int(a.size) - n_11
    n_01 = int(b.size) - n_11
    return ClickCounts(
        n_all=n_pulses,
        n_00=n_pulses - n_10 - n_01 - n_11,
        n_10=n_10,
        n_01=n_01,
        n_11=n_11,
    )


def ingest_records(
    records: Iterable[ClickRecord], gate: GateConfig, n_pulses: int
) -> ClickCounts:
    """Record-stream flavor of ingest_arrays."""
    channels: list[int] = []
    timestamps: list[int] = []
    for rec in records:
        if rec.channel not in _CHANNEL_CODE:
            raise FormatError(f"channel must be A or B, got {rec.channel!r}")
        channels.append(_CHANNEL_CODE[rec.channel])
        timestamps.append(int(rec.timestamp_ns))
    return ingest_arrays(
        np.asarray(channels, dtype=np.uint8),
        np.asarray(timestamps, dtype=np.int64),
        gate,
        n_pulses,
    )


def records_from_click_arrays(
    click_a: np.ndarray, click_b: np.ndarray, gate: GateConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Synthesize a time-tag stream from per-pulse click indicators,
    placing each click at the center of its pulse's gate.  Output is
    sorted by timestamp, hence per channel too."""
    center = gate.gate_offset_ns + gate.gate_width_ns / 2.0
    pa = np.flatnonzero(click_a)
    pb = np.flatnonzero(click_b)
    channels = np.concatenate(
        [np.zeros(pa.size, dtype=np.uint8), np.ones(pb.size, dtype=np.uint8)]
    )
    pulses = np.concatenate([pa, pb])
    timestamps = np.rint(pulses * float(gate.pulse_period_ns) + center).astype(np.int64)
    order = np.lexsort((channels, timestamps))
    return channels[order], timestamps[order]


# -------------------------------------------------- key-value persistence --

_SOURCE_KIND = {
    IdealEmitters: "ideal_emitters",
    EmitterWithBackground: "emitter_with_background",
    Coherent: "coherent",
}


def _config_lines(config: SimConfig) -> list[str]:
    kind = _SOURCE_KIND[type(config.source)]
    lines = [f"seed = {config.seed}", f"block_size = {config.block_size}",
             f"source.kind = {kind}"]
    if isinstance(config.source, IdealEmitters):
        lines.append(f"source.s = {config.source.s}")
    elif isinstance(config.source, Coherent):
        lines.append(f"source.mu = {config.source.mu!r}")
    p = config.params
    lines.extend([
        f"params.eta = {p.eta!r}",
        f"params.delta = {p.delta!r}",
        f"params.gamma = {p.gamma!r}",
        f"params.cycles = {p.cycles}",
    ])
    return lines


def _parse_kv(path: str | Path, lines: Iterable[str], start: int = 1) -> dict[str, tuple[int, str]]:
    out: dict[str, tuple[int, str]] = {}
    for lineno, raw in enumerate(lines, start=start):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise FormatError(f"{path}:{lineno}: empty key or value")
        if key in out:
            raise FormatError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = (lineno, value)
    return out


class _KvReader:
    def __init__(self, path: str | Path, kv: dict[str, tuple[int, str]]):
        self.path, self.kv = path, dict(kv)

    def take(self, key: str, kind, default=None, required: bool = False):
        if key not in self.kv:
            if required:
                raise FormatError(f"{self.path}: missing required key {key!r}")
            return default
        lineno, raw = self.kv.pop(key)
        try:
            return kind(raw)
        except ValueError:
            raise FormatError(
                f"{self.path}:{lineno}: {key} must be {kind.__name__}, got {raw!r}"
            ) from None

    def finish(self) -> None:
        if self.kv:
            key, (lineno, _) = next(iter(self.kv.items()))
            raise FormatError(f"{self.path}:{lineno}: unknown key {key!r}")


def _sim_config_from(reader: _KvReader) -> SimConfig:
    kind = reader.take("source.kind", str, required=True)
    if kind == "ideal_emitters":
        source: SourceModel = IdealEmitters(s=reader.take("source.s", int, default=1))
    elif kind == "emitter_with_background":
        source = EmitterWithBackground()
    elif kind == "coherent":
        source = Coherent(mu=reader.take("source.mu", float, required=True))
    else:
        raise FormatError(f"{reader.path}: unknown source.kind {kind!r}")
    params = DetectionParams(
        eta=reader.take("params.eta", float, required=True),
        delta=reader.take("params.delta", float, default=0.0),
        gamma=reader.take("params.gamma", float, default=0.0),
        cycles=reader.take("params.cycles", int, required=True),
    )
    return SimConfig(
        source=source,
        params=params,
        seed=reader.take("seed", int, required=True),
        block_size=reader.take("block_size", int, default=SimConfig.block_size),
    )


def read_sim_config(path: str | Path) -> SimConfig:
    """Parse a simulation config file (flat ``key = value`` lines,
    ``#`` comments allowed)."""
    text = Path(path).read_text(encoding="ascii")
    reader = _KvReader(path, _parse_kv(path, text.splitlines()))
    # accept 'cycles' as shorthand for params.cycles
    if "cycles" in reader.kv and "params.cycles" not in reader.kv:
        reader.kv["params.cycles"] = reader.kv.pop("cycles")
    config = _sim_config_from(reader)
    reader.finish()
    return config


def write_counts_block(path: str | Path, counts: ClickCounts, config: SimConfig) -> None:
    """Persist tallies plus the full producing configuration.  Output
    bytes depend only on (counts, config)."""
    lines = [
        COUNTS_MAGIC,
        f"n_all = {counts.n_all}",
        f"n_00 = {counts.n_00}",
        f"n_10 = {counts.n_10}",
        f"n_01 = {counts.n_01}",
        f"n_11 = {counts.n_11}",
    ]
    lines.extend(_config_lines(config))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def is_counts_block(path: str | Path) -> bool:
    try:
        with open(path, "r", encoding="ascii") as fh:
            return fh.readline().strip() == COUNTS_MAGIC
    except (OSError, UnicodeDecodeError):
        return False


def read_counts_block(path: str | Path) -> tuple[ClickCounts, SimConfig]:
    text = Path(path).read_text(encoding="ascii")
    lines = text.splitlines()
    if not lines or lines[0].strip() != COUNTS_MAGIC:
        raise FormatError(f"{path}:1: expected {COUNTS_MAGIC!r} header")
    reader = _KvReader(path, _parse_kv(path, lines[1:], start=2))
    counts = ClickCounts(
        n_all=reader.take("n_all", int, required=True),
        n_00=reader.take("n_00", int, required=True),
        n_10=reader.take("n_10", int, required=True),
        n_01=reader.take("n_01", int, required=True),
        n_11=reader.take("n_11", int, required=True),
    )
    config = _sim_config_from(reader)
    reader.finish()
    return counts, config
