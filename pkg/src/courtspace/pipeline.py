"""End-to-end analysis: ingest, filter, frames, metrics, plays, phases, layouts, exports."""

from __future__ import annotations

import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import exporter
from .config import RunConfig
from .embedding import phase_layouts
from .errors import CourtspaceError, InputError, TooManyClusters
from .events import join_events, parse_events, period_map
from .geometry import hull_metrics, hull_series
from .ingest import build_trajectories, parse_sensor_log, resample_to_grid, stream_stats
from .kinematics import smooth_trajectories
from .phases import bd_td_curve, build_features, crosstab, kmeans, select_k
from .segmentation import Label, Metric, label_frames, segment_plays, spacing_summary, single_period

log = logging.getLogger(__name__)

SNAPSHOTS = 4


class StageError(Exception):
    """Failure inside one pipeline stage; ``cause`` is the original exception."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


@contextmanager
def stage(name: str):
    try:
        yield
    except StageError:
        raise
    except (CourtspaceError, OSError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise StageError(name, exc) from exc


@dataclass
class Analysis:
    config: RunConfig
    stats: object = None
    trajectories: dict = field(default_factory=dict)
    frames: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    plays: list = field(default_factory=list)
    summaries: dict = field(default_factory=dict)
    curve: list = field(default_factory=list)
    chosen_k: int | None = None
    model: object = None
    crosstab: object = None
    layouts: list = field(default_factory=list)
    events: list = field(default_factory=list)
    annotated: list = field(default_factory=list)
    unattached: list = field(default_factory=list)


def load_stage(cfg: RunConfig, analysis: Analysis) -> None:
    if not cfg.sensor_log:
        raise StageError("ingest", InputError("no sensor log given"))
    with stage("ingest"):
        samples = parse_sensor_log(cfg.sensor_log, columns=cfg.columns)
        analysis.trajectories = build_trajectories(samples)
        analysis.stats = stream_stats(analysis.trajectories)


def frames_stage(cfg: RunConfig, analysis: Analysis) -> None:
    trajectories = analysis.trajectories
    if not cfg.skip_kalman:
        with stage("kalman"):
            trajectories = smooth_trajectories(trajectories, cfg.kalman)
    with stage("resample"):
        analysis.frames = resample_to_grid(trajectories, cfg.grid_hz, cfg.max_gap_ms, cfg.roster)
        if not analysis.frames:
            raise InputError("no frame has every roster player covered; check roster and max_gap_ms")


def events_stage(cfg: RunConfig, analysis: Analysis):
    period_of = single_period
    if cfg.events:
        with stage("events"):
            analysis.events = parse_events(cfg.events, cfg.events_format)
            period_of = period_map(analysis.events)
            analysis.annotated, analysis.unattached = join_events(analysis.frames, analysis.events, cfg.window_ms)
    return period_of


def segment_stage(cfg: RunConfig, analysis: Analysis, period_of) -> None:
    with stage("segmentation"):
        analysis.labels = label_frames(analysis.frames, cfg.court, period_of)
        analysis.plays = segment_plays(analysis.labels, cfg.min_duration_ms, step_ms=round(1000 / cfg.grid_hz))
        analysis.summaries = {m: spacing_summary(analysis.frames, analysis.labels, m) for m in Metric}


def phases_stage(cfg: RunConfig, analysis: Analysis) -> None:
    with stage("phases"):
        features = build_features(analysis.frames)
        n = len(features)
        opts = dict(n_restarts=cfg.n_restarts, max_iter=cfg.max_iter)
        if cfg.k is not None:
            if cfg.k > n:
                raise TooManyClusters(cfg.k, n)
            model = kmeans(features, cfg.k, seed=cfg.seed, **opts)
            analysis.curve = [(cfg.k, model.bd_td)]
            analysis.chosen_k = cfg.k
        else:
            ks = [k for k in cfg.k_range if k <= n]
            if len(ks) < len(cfg.k_range):
                log.warning("k range truncated to %d frames", n)
            if not ks:
                raise TooManyClusters(min(cfg.k_range), n)
            analysis.curve = bd_td_curve(features, ks, seed=cfg.seed, **opts)
            analysis.chosen_k = select_k(analysis.curve, cfg.min_gain)
            model = kmeans(features, analysis.chosen_k, seed=cfg.seed, **opts)
        analysis.model = model
        analysis.crosstab = crosstab(model, analysis.labels)
    with stage("embedding"):
        analysis.layouts = phase_layouts(analysis.frames, model.assignments, model.k)


def run_analysis(cfg: RunConfig) -> Analysis:
    analysis = Analysis(cfg)
    load_stage(cfg, analysis)
    frames_stage(cfg, analysis)
    period_of = events_stage(cfg, analysis)
    segment_stage(cfg, analysis, period_of)
    phases_stage(cfg, analysis)
    return analysis


def snapshot_frames(frames, plays, label: Label, count: int = SNAPSHOTS) -> list:
    """``count`` frames spread evenly over the first play carrying ``label``."""
    for play in plays:
        if play.label is label:
            inside = [f for f in frames if play.start_ms <= f.t_ms < play.end_ms]
            if not inside:
                continue
            idx = np.linspace(0, len(inside) - 1, min(count, len(inside))).round().astype(int)
            return [inside[i] for i in sorted(set(idx))]
    return []


def write_hull_snapshots(analysis: Analysis, out: Path, spec: exporter.RenderSpec) -> list[Path]:
    paths = []
    for label, name in ((Label.OFFENSE, "offense"), (Label.DEFENSE, "defense")):
        for i, f in enumerate(snapshot_frames(analysis.frames, analysis.plays, label), start=1):
            paths.append(exporter.render_hull_svg(f, hull_metrics(f), spec, out / f"hull_{name}_{i}.svg"))
    return paths


def hull_series_csv(frames) -> str:
    lines = ["t_ms,area_m2,centroid_x,centroid_y,n_vertices"]
    for h in hull_series(frames):
        lines.append(
            f"{h.t_ms},{exporter.round3(h.area_m2):.3f},{exporter.round3(h.centroid[0]):.3f},"
            f"{exporter.round3(h.centroid[1]):.3f},{len(h.hull_vertices)}"
        )
    return "\n".join(lines) + "\n"


def write_analysis(analysis: Analysis, out: Path) -> None:
    cfg = analysis.config
    spec = exporter.RenderSpec(court=cfg.court, palette=exporter.tag_colors(analysis.frames[0].tags))
    exporter.write_report(analysis.summaries, analysis.crosstab, analysis.curve, out / "report.md", analysis.chosen_k)
    exporter.write_phase_model(analysis.model, analysis.layouts, out / "phase_model.json")
    exporter.render_mds_svg(analysis.layouts, analysis.crosstab, spec, out / "mds.svg")
    write_hull_snapshots(analysis, out, spec)
    exporter.export_motion_frames(analysis.frames, out / "motion_frames.json")
    exporter.write_text(out / "config.ini", cfg.to_ini())
    if cfg.events:
        exporter.write_json([e.to_dict() for e in analysis.unattached], out / "unattached_events.json")


@contextmanager
def atomic_directory(target):
    """Yield a scratch directory that replaces ``target`` only if the block succeeds."""
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=target.parent))
    try:
        yield tmp
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    old = None
    if target.exists():
        old = target.with_name(f".{target.name}.old")
        if old.exists():
            shutil.rmtree(old)
        os.replace(target, old)
    os.replace(tmp, target)
    os.chmod(target, 0o755)
    if old is not None:
        shutil.rmtree(old, ignore_errors=True)
