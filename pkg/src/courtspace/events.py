"""Play-by-play events: parsing, nearest-frame join, period lookup.

CSV schema: header with ``t_ms``, ``kind`` and ``players`` columns (players
separated by ``;``); any other column lands in ``payload``. JSON schema: a
list of objects with the same keys, ``players`` as a list.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .errors import InputError, MalformedEvent, UnbalancedPeriods
from .ingest import Frame, _open_text


class EventKind(str, Enum):
    MADE_SHOT = "made_shot"
    MISSED_SHOT = "missed_shot"
    REBOUND = "rebound"
    FOUL = "foul"
    PASS = "pass"
    TIMEOUT = "timeout"
    PERIOD_START = "period_start"
    PERIOD_END = "period_end"
    OTHER = "other"


@dataclass(frozen=True)
class GameEvent:
    t_ms: int
    kind: EventKind
    players: tuple[str, ...] = ()
    payload: dict = field(default_factory=dict, compare=False, hash=False)
    raw_kind: str = ""

    def __post_init__(self):
        if self.t_ms < 0:
            raise ValueError("event t_ms must be >= 0")
        if not self.raw_kind:
            object.__setattr__(self, "raw_kind", self.kind.value)

    def to_dict(self) -> dict:
        return {"t_ms": self.t_ms, "kind": self.raw_kind, "players": list(self.players), **self.payload}


@dataclass(frozen=True)
class AnnotatedFrame:
    frame: Frame
    events: tuple[GameEvent, ...]


def _kind(text: str) -> tuple[EventKind, str]:
    raw = text.strip()
    key = raw.lower().replace("-", "_").replace(" ", "_")
    try:
        kind = EventKind(key)
    except ValueError:
        return EventKind.OTHER, raw
    if kind is EventKind.OTHER:
        return kind, raw
    return kind, key


def _event(record: dict, where: str) -> GameEvent:
    try:
        raw_t = record["t_ms"]
        kind_text = record["kind"]
    except KeyError as exc:
        raise MalformedEvent(where, f"missing field {exc}") from None
    try:
        t = int(raw_t) if not isinstance(raw_t, str) else int(float(raw_t.strip()))
    except (TypeError, ValueError):
        raise MalformedEvent(where, f"bad t_ms {raw_t!r}") from None
    if t < 0:
        raise MalformedEvent(where, "negative t_ms")
    if not isinstance(kind_text, str) or not kind_text.strip():
        raise MalformedEvent(where, "empty kind")
    players = record.get("players") or ()
    if isinstance(players, str):
        players = [p for p in (s.strip() for s in players.split(";")) if p]
    elif not isinstance(players, (list, tuple)):
        players = [players]
    kind, raw = _kind(kind_text)
    payload = {k: v for k, v in record.items() if k not in ("t_ms", "kind", "players")}
    return GameEvent(t, kind, tuple(str(p) for p in players), payload, raw)


def parse_events(source, format: str = "csv") -> list[GameEvent]:
    """Parse an event log; the result is stably sorted by time."""
    if format == "json":
        fh = _open_text(source)
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedEvent(f"json line {exc.lineno}", exc.msg) from None
        finally:
            if fh is not source:
                fh.close()
        if not isinstance(data, list):
            raise MalformedEvent("json root", "expected a list of events")
        events = []
        for i, rec in enumerate(data):
            if not isinstance(rec, dict):
                raise MalformedEvent(f"item {i}", "expected an object")
            events.append(_event(rec, f"item {i}"))
    elif format == "csv":
        fh = _open_text(source)
        try:
            reader = csv.DictReader(fh)
            events = []
            for rec in reader:
                if not any((v or "").strip() for v in rec.values() if isinstance(v, str)):
                    continue
                if None in rec:
                    raise MalformedEvent(f"line {reader.line_num}", "too many fields")
                clean = {k.strip(): (v.strip() if isinstance(v, str) else v) for k, v in rec.items() if k}
                clean = {k: v for k, v in clean.items() if v is not None and (v != "" or k in ("t_ms", "kind"))}
                events.append(_event(clean, f"line {reader.line_num}"))
        finally:
            if fh is not source:
                fh.close()
    else:
        raise InputError(f"unsupported event format {format!r}")
    events.sort(key=lambda e: e.t_ms)
    return events


def write_events_json(events: Sequence[GameEvent]) -> str:
    return json.dumps([e.to_dict() for e in events], indent=2) + "\n"


def nearest_frame_index(frame_times: Sequence[int], t: int, window_ms: float) -> int | None:
    """Index of the frame closest to ``t`` within ``window_ms``; ties go to the earlier frame."""
    j = bisect.bisect_left(frame_times, t)
    best = None
    for i in (j - 1, j):
        if 0 <= i < len(frame_times):
            d = abs(frame_times[i] - t)
            if d <= window_ms and (best is None or d < best[0]):
                best = (d, i)
    return None if best is None else best[1]


def join_events(
    frames: Sequence[Frame], events: Sequence[GameEvent], window_ms: float = 1000
) -> tuple[list[AnnotatedFrame], list[GameEvent]]:
    """Attach every event to its nearest frame within ``window_ms``.

    Both inputs must be time-sorted. Returns one :class:`AnnotatedFrame` per
    input frame plus the events that found no frame.
    """
    attached: list[list[GameEvent]] = [[] for _ in frames]
    unattached = []
    j = 0
    n = len(frames)
    for ev in events:
        # advance to the last frame at or before the event
        while j + 1 < n and frames[j + 1].t_ms <= ev.t_ms:
            j += 1
        best = None
        for i in (j, j + 1):
            if 0 <= i < n:
                d = abs(frames[i].t_ms - ev.t_ms)
                if d <= window_ms and (best is None or d < best[0]):
                    best = (d, i)
        if best is None:
            unattached.append(ev)
        else:
            attached[best[1]].append(ev)
    return [AnnotatedFrame(f, tuple(evs)) for f, evs in zip(frames, attached)], unattached


@dataclass(frozen=True)
class PeriodMap:
    """Step function from time to 1-based period number."""

    starts: tuple[int, ...] = ()

    def __call__(self, t_ms) -> int:
        return max(1, bisect.bisect_right(self.starts, t_ms))

    @property
    def n_periods(self) -> int:
        return max(1, len(self.starts))


def period_map(events: Sequence[GameEvent]) -> PeriodMap:
    """Periods from PeriodStart/PeriodEnd markers; none at all means one period for the whole game.

    Markers must alternate start/end; the last period may stay open.
    """
    starts = []
    open_period = False
    for ev in sorted(events, key=lambda e: e.t_ms):
        if ev.kind is EventKind.PERIOD_START:
            if open_period:
                raise UnbalancedPeriods(f"period_start at {ev.t_ms} ms while a period is open")
            starts.append(ev.t_ms)
            open_period = True
        elif ev.kind is EventKind.PERIOD_END:
            if not open_period:
                raise UnbalancedPeriods(f"period_end at {ev.t_ms} ms without a matching start")
            open_period = False
    return PeriodMap(tuple(starts))
