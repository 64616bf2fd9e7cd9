"""Offense/defense labelling from the team centroid, play debouncing, spacing summaries per label."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import Misaligned, MissingPeriod
from .geometry import convex_hull, mean_distance, pairwise_distances, polygon_area
from .ingest import AttackDirection, CourtSpec, Frame


class Label(str, Enum):
    OFFENSE = "Offense"
    DEFENSE = "Defense"


class Metric(str, Enum):
    MEAN_DISTANCE = "MeanDistance"
    HULL_AREA = "HullArea"


@dataclass(frozen=True)
class PlayLabel:
    t_ms: int
    label: Label


@dataclass(frozen=True)
class PlayInterval:
    """Half-open play interval ``[start_ms, end_ms)``."""

    start_ms: int
    end_ms: int
    label: Label

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms


@dataclass(frozen=True)
class SpacingSummary:
    label: Label
    metric: Metric
    min: float
    q1: float
    median: float
    mean: float
    q3: float
    max: float
    n: int

    def rows(self) -> list[tuple[str, float]]:
        return [
            ("Min", self.min),
            ("1st Qu.", self.q1),
            ("Median", self.median),
            ("Mean", self.mean),
            ("3rd Qu.", self.q3),
            ("Max", self.max),
        ]


def single_period(t_ms) -> int:
    return 1


def label_frame(frame: Frame, court: CourtSpec, period: int | None) -> Label:
    if period is None or period not in court.attack_direction:
        raise MissingPeriod(frame.t_ms)
    cx, _ = frame.centroid()
    half = court.half_line
    if court.attack_direction[period] is AttackDirection.TOWARD_POSITIVE_X:
        attacking = cx > half
    else:
        attacking = cx < half
    return Label.OFFENSE if attacking else Label.DEFENSE


def label_frames(
    frames: Iterable[Frame], court: CourtSpec | None = None, period_of: Callable[[int], int | None] = single_period
) -> list[PlayLabel]:
    """Offense when the centroid sits strictly inside the attacked half; the half line counts as Defense."""
    court = court or CourtSpec()
    return [PlayLabel(f.t_ms, label_frame(f, court, period_of(f.t_ms))) for f in frames]


def _runs(labels: Sequence[PlayLabel], end_ms: int) -> list[PlayInterval]:
    runs = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i].label != labels[start].label:
            stop = labels[i].t_ms if i < len(labels) else end_ms
            runs.append(PlayInterval(labels[start].t_ms, stop, labels[start].label))
            start = i
    return runs


def segment_plays(labels: Sequence[PlayLabel], min_duration_ms: int = 2000, step_ms: int | None = None) -> list[PlayInterval]:
    """Debounce per-frame labels into alternating play intervals.

    Each run lasts until the next run starts; the final run is closed one grid
    step (``step_ms``, by default the median label spacing) after the last
    label. Runs shorter than ``min_duration_ms`` are absorbed by the preceding
    interval (a short leading run by the following one).
    """
    labels = list(labels)
    if not labels:
        return []
    if step_ms is None:
        diffs = np.diff([p.t_ms for p in labels])
        step_ms = int(np.median(diffs)) if len(diffs) else 1
    step_ms = max(int(step_ms), 1)
    runs = _runs(labels, labels[-1].t_ms + step_ms)

    merged: list[PlayInterval] = []
    for run in runs:
        if merged and (run.duration_ms < min_duration_ms or run.label == merged[-1].label):
            prev = merged[-1]
            merged[-1] = PlayInterval(prev.start_ms, run.end_ms, prev.label)
        else:
            merged.append(run)
    if len(merged) > 1 and merged[0].duration_ms < min_duration_ms:
        first, second = merged[0], merged[1]
        merged[:2] = [PlayInterval(first.start_ms, second.end_ms, second.label)]
    return merged


def frame_metric(frame: Frame, metric: Metric) -> float:
    metric = Metric(metric)
    if metric is Metric.MEAN_DISTANCE:
        return mean_distance(pairwise_distances(frame))
    return polygon_area(convex_hull(frame.positions[t] for t in frame.tags))


def quantile(sorted_values: Sequence[float], q: float) -> float:
    """Linear interpolation between closest ranks (the usual type-7 rule)."""
    n = len(sorted_values)
    h = (n - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, n - 1)
    return sorted_values[lo] + (h - lo) * (sorted_values[hi] - sorted_values[lo])


def summarize_values(values: Iterable[float], label: Label, metric: Metric) -> SpacingSummary:
    v = sorted(float(x) for x in values)
    if not v:
        raise ValueError("no values to summarize")
    mean = math.fsum(v) / len(v)
    # keep min <= mean <= max under rounding
    mean = min(max(mean, v[0]), v[-1])
    return SpacingSummary(
        label=label,
        metric=Metric(metric),
        min=v[0],
        q1=quantile(v, 0.25),
        median=quantile(v, 0.5),
        mean=mean,
        q3=quantile(v, 0.75),
        max=v[-1],
        n=len(v),
    )


def spacing_summary(
    frames: Sequence[Frame], labels: Sequence[PlayLabel], metric: Metric = Metric.MEAN_DISTANCE
) -> dict[Label, SpacingSummary]:
    """Order statistics of ``metric`` per label; labels with no frames are omitted."""
    if len(frames) != len(labels):
        raise Misaligned(f"{len(frames)} frames vs {len(labels)} labels")
    buckets: dict[Label, list[float]] = {}
    for f, lab in zip(frames, labels):
        if f.t_ms != lab.t_ms:
            raise Misaligned(f"frame t={f.t_ms} paired with label t={lab.t_ms}")
        buckets.setdefault(lab.label, []).append(frame_metric(f, metric))
    return {lab: summarize_values(buckets[lab], lab, metric) for lab in (Label.OFFENSE, Label.DEFENSE) if lab in buckets}
