"""Synthetic tracking data with a known offense/defense script.

The generator alternates offensive and defensive plays. During offense the
five on-court players stand in the attacked half with a formation whose
mean pairwise distance equals ``offense_spacing``; during defense they sit
in their own half at ``defense_spacing``. Formations are flattened so
the hull area at that spacing hits ``offense_hull`` / ``defense_hull``. A sixth (bench) tag is sampled
along the sideline so the stream carries six tags like a real feed.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .geometry import convex_hull, polygon_area
from .ingest import CourtSpec, SensorSample
from .segmentation import Label

DEFAULT_TAGS = ("3", "7", "9", "12", "15", "23")
OFFENSE_SPACING = 7.25
DEFENSE_SPACING = 5.68
OFFENSE_HULL = 42.59
DEFENSE_HULL = 28.55


@dataclass(frozen=True)
class ScriptedPlay:
    start_ms: int
    end_ms: int
    label: Label


@dataclass(frozen=True)
class SyntheticMatch:
    samples: list
    plays: tuple
    tags: tuple
    court: CourtSpec


def _normalized(pts: np.ndarray) -> tuple[np.ndarray, float]:
    """Scale to unit mean pairwise distance; also return the resulting hull area."""
    pts = pts - pts.mean(axis=0)
    pts = pts / np.mean([np.linalg.norm(pts[i] - pts[j]) for i, j in combinations(range(len(pts)), 2)])
    return pts, polygon_area(convex_hull(pts))


def _unit_template(rng: np.random.Generator, n: int, jitter: float, area_ratio: float | None = None) -> np.ndarray:
    """Jittered ring with unit mean pairwise distance.

    With ``area_ratio`` the ring is squashed along y until its hull area
    (at unit spacing) equals that ratio, found by bisection.
    """
    ang = 2 * np.pi * np.arange(n) / n + rng.uniform(-jitter, jitter, n)
    rad = 1.0 + rng.uniform(-jitter, jitter, n)
    ring = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    pts, area = _normalized(ring)
    if area_ratio is None or area <= area_ratio:
        return pts
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = (lo + hi) / 2
        pts, area = _normalized(ring * [1.0, mid])
        lo, hi = (mid, hi) if area < area_ratio else (lo, mid)
    return pts


def synthetic_match(
    duration_s: float = 600.0,
    seed: int = 0,
    tags=DEFAULT_TAGS,
    on_court: int = 5,
    interval_ms: int = 162,
    samples_per_tag: int | None = None,
    play_s: tuple[float, float] = (12.0, 24.0),
    transition_s: float = 0.6,
    offense_spacing: float = OFFENSE_SPACING,
    defense_spacing: float = DEFENSE_SPACING,
    offense_hull: float | None = OFFENSE_HULL,
    defense_hull: float | None = DEFENSE_HULL,
    wobble_m: float = 0.4,
    noise_sd: float = 0.0,
    court: CourtSpec | None = None,
) -> SyntheticMatch:
    """Build the sample stream; the team attacks toward +x for the whole match."""
    court = court or CourtSpec()
    rng = np.random.default_rng(seed)
    tags = tuple(str(t) for t in tags)
    if samples_per_tag is None:
        samples_per_tag = int(duration_s * 1000 // interval_ms) + 1
    span_ms = (samples_per_tag - 1) * interval_ms + interval_ms

    starts, labels = [0], [Label.OFFENSE]
    while True:
        nxt = starts[-1] + int(rng.uniform(*play_s) * 1000)
        if nxt >= span_ms:
            break
        starts.append(nxt)
        labels.append(Label.DEFENSE if labels[-1] is Label.OFFENSE else Label.OFFENSE)
    starts_a = np.array(starts, dtype=np.int64)

    L, Wd = court.length_m, court.width_m
    centers, offsets = [], []
    for lab in labels:
        spacing = offense_spacing if lab is Label.OFFENSE else defense_spacing
        hull = offense_hull if lab is Label.OFFENSE else defense_hull
        cx = 0.75 * L if lab is Label.OFFENSE else 0.25 * L
        centers.append((cx + rng.uniform(-1.0, 1.0), Wd / 2 + rng.uniform(-1.0, 1.0)))
        theta = rng.uniform(0, 2 * np.pi)
        rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        offsets.append(_unit_template(rng, on_court, 0.2, hull / spacing**2 if hull else None) @ rot.T * spacing)
    centers = np.array(centers)
    offsets = np.array(offsets)

    wob_amp = rng.uniform(0.5, 1.0, (on_court, 2)) * wobble_m
    wob_per = rng.uniform(3.0, 7.0, (on_court, 2))
    wob_ph = rng.uniform(0, 2 * np.pi, (on_court, 2))

    samples = []
    for p, tag in enumerate(tags):
        t = p * 17 + np.arange(samples_per_tag, dtype=np.int64) * interval_ms
        if p < on_court:
            idx = np.searchsorted(starts_a, t, side="right") - 1
            prev = np.maximum(idx - 1, 0)
            alpha = np.clip((t - starts_a[idx]) / (transition_s * 1000.0), 0.0, 1.0)[:, None]
            alpha[idx == 0] = 1.0
            here = centers[idx] + offsets[idx, p]
            before = centers[prev] + offsets[prev, p]
            xy = (1 - alpha) * before + alpha * here
            ts = t[:, None] / 1000.0
            xy = xy + wob_amp[p] * np.sin(2 * np.pi * ts / wob_per[p] + wob_ph[p])
        else:
            xy = np.column_stack([0.5 * L + 2.0 * np.sin(t / 20000.0), np.full(len(t), -1.0)])
        if noise_sd > 0:
            xy = xy + rng.normal(0.0, noise_sd, xy.shape)
        samples.extend(SensorSample(tag, int(ti), float(x), float(y)) for ti, (x, y) in zip(t, xy))
    samples.sort(key=lambda s: (s.timestamp_ms, s.tag_id))

    ends = list(starts[1:]) + [span_ms]
    plays = tuple(ScriptedPlay(s, e, lab) for s, e, lab in zip(starts, ends, labels))
    return SyntheticMatch(samples, plays, tags, court)
