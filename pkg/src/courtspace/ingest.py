"""Sensor-log parsing, per-player trajectories, stream statistics and grid resampling.

Tag ids are kept as strings throughout; :func:`tag_sort_key` gives the
canonical ordering (numeric ids numerically, then everything else
lexicographically).
"""

from __future__ import annotations

import csv
import io
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmptyInput, InputError, MalformedRow, UnknownTag

DEFAULT_COLUMNS = {"tag": "tagid", "timestamp": "timestamp_ms", "x": "klm_x", "y": "klm_y"}
ON_COURT = 5


def tag_sort_key(tag):
    s = str(tag)
    if s.isdigit():
        return (0, int(s), s)
    return (1, 0, s)


def sorted_tags(tags: Iterable) -> list[str]:
    return sorted((str(t) for t in tags), key=tag_sort_key)


@dataclass(frozen=True)
class SensorSample:
    tag_id: str
    timestamp_ms: int
    x: float
    y: float

    def __post_init__(self):
        if self.timestamp_ms < 0:
            raise ValueError("timestamp_ms must be >= 0")
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("coordinates must be finite")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-ordered samples of one player.

    ``t_ms`` is an int64 array and ``xy`` an ``(n, 2)`` float array; both are
    read-only views.
    """

    tag_id: str
    t_ms: np.ndarray
    xy: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_ms, dtype=np.int64).copy()
        xy = np.asarray(self.xy, dtype=float).reshape(-1, 2).copy()
        if len(t) != len(xy):
            raise ValueError("t_ms and xy lengths differ")
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("trajectory timestamps must be strictly increasing")
        t.flags.writeable = False
        xy.flags.writeable = False
        object.__setattr__(self, "t_ms", t)
        object.__setattr__(self, "xy", xy)

    def __len__(self):
        return len(self.t_ms)

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.tag_id == other.tag_id
            and np.array_equal(self.t_ms, other.t_ms)
            and np.array_equal(self.xy, other.xy)
        )

    @property
    def samples(self) -> list[tuple[int, float, float]]:
        return [(int(t), float(x), float(y)) for t, (x, y) in zip(self.t_ms, self.xy)]


@dataclass(frozen=True)
class StreamStats:
    total_samples: int
    per_player_counts: dict
    mean_interval_ms: dict
    mean_sampling_interval_ms: float
    observed_rate_hz: float
    span_s: float


@dataclass(frozen=True)
class Frame:
    t_ms: int
    positions: Mapping[str, tuple[float, float]]

    @property
    def tags(self) -> list[str]:
        return sorted_tags(self.positions)

    def as_array(self, tags: Sequence[str] | None = None) -> np.ndarray:
        tags = self.tags if tags is None else tags
        return np.array([self.positions[t] for t in tags], dtype=float).reshape(-1, 2)

    def centroid(self) -> tuple[float, float]:
        c = self.as_array().mean(axis=0)
        return float(c[0]), float(c[1])


class AttackDirection(str, Enum):
    TOWARD_POSITIVE_X = "toward_positive_x"
    TOWARD_NEGATIVE_X = "toward_negative_x"


@dataclass(frozen=True)
class CourtSpec:
    """Court dimensions in meters plus the attacked side for each period."""

    length_m: float = 28.0
    width_m: float = 15.0
    attack_direction: Mapping[int, AttackDirection] = field(
        default_factory=lambda: {1: AttackDirection.TOWARD_POSITIVE_X}
    )

    def __post_init__(self):
        if not (self.length_m > 0 and self.width_m > 0):
            raise ValueError("court dimensions must be positive")
        dirs = {int(p): AttackDirection(d) for p, d in dict(self.attack_direction).items()}
        object.__setattr__(self, "attack_direction", dirs)

    @property
    def half_line(self) -> float:
        return self.length_m / 2.0


def _open_text(source) -> io.TextIOBase:
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8"))
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, io.TextIOBase):
        return source
    # binary file object
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def _parse_timestamp(raw: str) -> int:
    raw = raw.strip()
    try:
        return int(raw)
    except ValueError:
        value = float(raw)
        if not value.is_integer():
            raise ValueError(f"non-integer timestamp {raw!r}")
        return int(value)


def parse_sensor_log(source, format: str = "csv", columns: Mapping[str, str] | None = None) -> list[SensorSample]:
    """Parse a CSV sensor log into samples, preserving row order.

    ``source`` may be bytes, a path, or a text/binary file object. ``columns``
    overrides any of the default column names (keys ``tag``, ``timestamp``,
    ``x``, ``y``).
    """
    if format != "csv":
        raise InputError(f"unsupported sensor log format {format!r}")
    names = {**DEFAULT_COLUMNS, **(columns or {})}
    fh = _open_text(source)
    try:
        try:
            reader = csv.reader(fh)
            header = next(reader, None)
        except UnicodeDecodeError as exc:
            raise InputError(f"input is not valid UTF-8: {exc}") from exc
        if header is None:
            raise EmptyInput()
        header = [h.strip().lstrip("﻿") for h in header]
        try:
            idx = {key: header.index(col) for key, col in names.items()}
        except ValueError as exc:
            raise MalformedRow(1, f"header lacks a required column ({exc})") from None
        width = max(idx.values()) + 1
        samples = []
        try:
            for row in reader:
                line_no = reader.line_num
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) < width:
                    raise MalformedRow(line_no, "missing fields")
                tag = row[idx["tag"]].strip()
                if not tag:
                    raise MalformedRow(line_no, "empty tag id")
                try:
                    ts = _parse_timestamp(row[idx["timestamp"]])
                    x = float(row[idx["x"]])
                    y = float(row[idx["y"]])
                    samples.append(SensorSample(tag, ts, x, y))
                except ValueError as exc:
                    raise MalformedRow(line_no, str(exc)) from None
        except UnicodeDecodeError as exc:
            raise InputError(f"input is not valid UTF-8: {exc}") from exc
    finally:
        if fh is not source:
            fh.close()
    if not samples:
        raise EmptyInput()
    return samples


def write_sensor_log(samples: Iterable[SensorSample], columns: Mapping[str, str] | None = None) -> str:
    names = {**DEFAULT_COLUMNS, **(columns or {})}
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([names["tag"], names["timestamp"], names["x"], names["y"]])
    for s in samples:
        writer.writerow([s.tag_id, s.timestamp_ms, repr(float(s.x)), repr(float(s.y))])
    return out.getvalue()


def build_trajectories(samples: Iterable[SensorSample]) -> dict[str, Trajectory]:
    """Group samples per tag and sort by time; a repeated (tag, timestamp) keeps the last row."""
    by_tag: dict[str, dict[int, tuple[float, float]]] = {}
    for s in samples:
        by_tag.setdefault(str(s.tag_id), {})[int(s.timestamp_ms)] = (float(s.x), float(s.y))
    out = {}
    for tag in sorted_tags(by_tag):
        rows = by_tag[tag]
        ts = sorted(rows)
        out[tag] = Trajectory(tag, np.array(ts, dtype=np.int64), np.array([rows[t] for t in ts], dtype=float))
    return out


def stream_stats(trajectories: Mapping[str, Trajectory]) -> StreamStats:
    counts = {tag: len(tr) for tag, tr in trajectories.items()}
    total = sum(counts.values())
    intervals = {}
    gaps_total, n_gaps = 0.0, 0
    t_min, t_max = None, None
    for tag, tr in trajectories.items():
        if len(tr) == 0:
            continue
        lo, hi = int(tr.t_ms[0]), int(tr.t_ms[-1])
        t_min = lo if t_min is None else min(t_min, lo)
        t_max = hi if t_max is None else max(t_max, hi)
        if len(tr) >= 2:
            intervals[tag] = (hi - lo) / (len(tr) - 1)
            gaps_total += hi - lo
            n_gaps += len(tr) - 1
    span_s = 0.0 if t_min is None else (t_max - t_min) / 1000.0
    rate = total / span_s if span_s > 0 else 0.0
    overall = gaps_total / n_gaps if n_gaps else 0.0
    return StreamStats(
        total_samples=total,
        per_player_counts=counts,
        mean_interval_ms=intervals,
        mean_sampling_interval_ms=overall,
        observed_rate_hz=rate,
        span_s=span_s,
    )


def default_roster(trajectories: Mapping[str, Trajectory], size: int = ON_COURT) -> list[str]:
    """The ``size`` most-sampled tags, ties broken by canonical tag order."""
    counts = Counter({tag: len(tr) for tag, tr in trajectories.items()})
    ranked = sorted(counts, key=lambda t: (-counts[t], tag_sort_key(t)))
    return sorted_tags(ranked[:size])


def resample_to_grid(
    trajectories: Mapping[str, Trajectory],
    grid_hz: float = 5.0,
    max_gap_ms: float = 1000.0,
    roster: Iterable | None = None,
) -> list[Frame]:
    """Linearly interpolate every roster player onto a common time grid.

    Grid instants are ``epoch + round(k * 1000 / grid_hz)`` with ``epoch`` the
    earliest roster sample. A frame is kept only when each roster player is
    bracketed by two samples at most ``max_gap_ms`` apart (or sampled exactly
    at the instant).
    """
    if not grid_hz > 0:
        raise InputError("grid_hz must be positive")
    roster = sorted_tags(default_roster(trajectories) if roster is None else roster)
    if not roster:
        raise InputError("roster is empty")
    for tag in roster:
        if tag not in trajectories or len(trajectories[tag]) == 0:
            raise UnknownTag(tag)
    trs = [trajectories[t] for t in roster]
    epoch = min(int(tr.t_ms[0]) for tr in trs)
    end = max(int(tr.t_ms[-1]) for tr in trs)
    step = 1000.0 / grid_hz
    n_steps = int(math.floor((end - epoch) / step + 1e-9)) + 1
    grid = epoch + np.round(np.arange(n_steps) * step).astype(np.int64)

    keep = np.ones(len(grid), dtype=bool)
    coords = np.empty((len(roster), len(grid), 2))
    for i, tr in enumerate(trs):
        t = tr.t_ms
        hi = np.searchsorted(t, grid, side="left")
        exact = (hi < len(t)) & (t[np.minimum(hi, len(t) - 1)] == grid)
        inside = (hi > 0) & (hi < len(t))
        lo_i = np.clip(hi - 1, 0, len(t) - 1)
        hi_i = np.clip(hi, 0, len(t) - 1)
        gap = (t[hi_i] - t[lo_i]).astype(float)
        ok = exact | (inside & (gap <= max_gap_ms))
        keep &= ok
        w = np.where(gap > 0, (grid - t[lo_i]) / np.where(gap > 0, gap, 1.0), 0.0)
        w = np.clip(w, 0.0, 1.0)
        pos = tr.xy[lo_i] + w[:, None] * (tr.xy[hi_i] - tr.xy[lo_i])
        pos[exact] = tr.xy[hi_i[exact]]
        coords[i] = pos

    frames = []
    for j in np.flatnonzero(keep):
        positions = {tag: (float(coords[i, j, 0]), float(coords[i, j, 1])) for i, tag in enumerate(roster)}
        frames.append(Frame(int(grid[j]), positions))
    return frames
