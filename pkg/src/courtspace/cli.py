"""Command-line front end.

Subcommands: summarize, analyze, phases, hulls, export-frames (plus
simulate, which writes a synthetic match for trying the others).
Exit codes: 0 success, 2 input error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import exporter
from .config import RunConfig, load_config, parse_k_range
from .errors import CourtspaceError, InputError, NumericError
from .ingest import write_sensor_log
from .pipeline import (
    Analysis,
    StageError,
    atomic_directory,
    events_stage,
    frames_stage,
    hull_series_csv,
    load_stage,
    phases_stage,
    run_analysis,
    segment_stage,
    stage,
    write_analysis,
    write_hull_snapshots,
)

log = logging.getLogger("courtspace")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", nargs="?", help="sensor log CSV (overrides the config file)")
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--events", help="play-by-play event log")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--grid-hz", type=float)
    common.add_argument("--k", type=int, help="force the number of clusters")
    common.add_argument("--k-range", help="cluster counts to scan, e.g. 1..12")
    common.add_argument("--min-gain", type=float)
    common.add_argument("--skip-kalman", action="store_true", default=None, help="input is already filtered")
    common.add_argument("--kf-accel-var", type=float, help="Kalman process noise (m^2/s^4)")
    common.add_argument("--kf-meas-var", type=float, help="Kalman measurement noise (m^2)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="courtspace", description="Player-tracking spacing and game-phase analysis.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("summarize", parents=[common], help="sampling statistics of a sensor log")
    sub.add_parser("analyze", parents=[common], help="full pipeline into an output directory")
    sub.add_parser("phases", parents=[common], help="BD/TD curve, chosen k, phase model JSON")
    sub.add_parser("hulls", parents=[common], help="hull snapshots and per-frame hull series")
    sub.add_parser("export-frames", parents=[common], help="motion-chart frame JSON")
    sim = sub.add_parser("simulate", help="write a synthetic match CSV")
    sim.add_argument("output", help="CSV path to write")
    sim.add_argument("--duration-s", type=float, default=600.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--noise-sd", type=float, default=0.0)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    kalman = cfg.kalman
    if args.kf_accel_var is not None or args.kf_meas_var is not None:
        kalman = replace(
            kalman,
            process_noise_accel=args.kf_accel_var if args.kf_accel_var is not None else kalman.process_noise_accel,
            measurement_noise=args.kf_meas_var if args.kf_meas_var is not None else kalman.measurement_noise,
        )
    return cfg.with_overrides(
        sensor_log=args.input,
        events=args.events,
        out_dir=args.out,
        seed=args.seed,
        grid_hz=args.grid_hz,
        k=args.k,
        k_range=parse_k_range(args.k_range) if args.k_range else None,
        min_gain=args.min_gain,
        skip_kalman=args.skip_kalman,
        kalman=kalman,
    )


def _require_out(cfg: RunConfig) -> Path:
    if not cfg.out_dir:
        raise StageError("config", InputError("an output directory is required (--out or [output] dir)"))
    return Path(cfg.out_dir)


def cmd_summarize(cfg: RunConfig) -> int:
    analysis = Analysis(cfg)
    load_stage(cfg, analysis)
    st = analysis.stats
    print(f"total samples: {st.total_samples}")
    print(f"players: {len(st.per_player_counts)}")
    for tag, count in st.per_player_counts.items():
        interval = st.mean_interval_ms.get(tag)
        shown = f"{interval:.1f} ms" if interval is not None else "n/a"
        print(f"  tag {tag}: {count} samples, mean interval {shown}")
    print(f"mean sampling interval: {st.mean_sampling_interval_ms:.1f} ms")
    print(f"span: {st.span_s:.1f} s")
    print(f"overall rate: {st.observed_rate_hz:.2f} samples/s")
    if cfg.out_dir:
        with stage("export"):
            payload = {
                "total_samples": st.total_samples,
                "per_player_counts": st.per_player_counts,
                "mean_interval_ms": {k: exporter.round3(v) for k, v in st.mean_interval_ms.items()},
                "mean_sampling_interval_ms": exporter.round3(st.mean_sampling_interval_ms),
                "observed_rate_hz": exporter.round3(st.observed_rate_hz),
                "span_s": exporter.round3(st.span_s),
            }
            exporter.write_json(payload, Path(cfg.out_dir) / "stream_stats.json")
    return EXIT_OK


def cmd_analyze(cfg: RunConfig) -> int:
    out = _require_out(cfg)
    analysis = run_analysis(cfg)
    with stage("export"), atomic_directory(out) as tmp:
        write_analysis(analysis, tmp)
    log.info("wrote %s", out)
    print(f"k = {analysis.chosen_k}, {len(analysis.frames)} frames, {len(analysis.plays)} plays -> {out}")
    return EXIT_OK


def cmd_phases(cfg: RunConfig) -> int:
    analysis = Analysis(cfg)
    load_stage(cfg, analysis)
    frames_stage(cfg, analysis)
    period_of = events_stage(cfg, analysis)
    segment_stage(cfg, analysis, period_of)
    phases_stage(cfg, analysis)
    print("k\tBD/TD")
    for k, r in analysis.curve:
        print(f"{k}\t{r:.4f}")
    print(f"chosen k: {analysis.chosen_k}")
    if cfg.out_dir:
        with stage("export"):
            exporter.write_phase_model(analysis.model, analysis.layouts, Path(cfg.out_dir) / "phase_model.json")
    return EXIT_OK


def cmd_hulls(cfg: RunConfig) -> int:
    out = _require_out(cfg)
    analysis = Analysis(cfg)
    load_stage(cfg, analysis)
    frames_stage(cfg, analysis)
    period_of = events_stage(cfg, analysis)
    segment_stage(cfg, analysis, period_of)
    with stage("export"):
        spec = exporter.RenderSpec(court=cfg.court, palette=exporter.tag_colors(analysis.frames[0].tags))
        paths = write_hull_snapshots(analysis, out, spec)
        exporter.write_text(out / "hull_series.csv", hull_series_csv(analysis.frames))
    print(f"{len(paths)} hull snapshots, {len(analysis.frames)} frames -> {out}")
    return EXIT_OK


def cmd_export_frames(cfg: RunConfig) -> int:
    out = _require_out(cfg)
    analysis = Analysis(cfg)
    load_stage(cfg, analysis)
    frames_stage(cfg, analysis)
    with stage("export"):
        exporter.export_motion_frames(analysis.frames, out / "motion_frames.json")
    print(f"{len(analysis.frames)} frames -> {out / 'motion_frames.json'}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .synthetic import synthetic_match

    match = synthetic_match(args.duration_s, seed=args.seed, noise_sd=args.noise_sd)
    exporter.write_text(args.output, write_sensor_log(match.samples))
    print(f"{len(match.samples)} samples, {len(match.plays)} scripted plays -> {args.output}")
    return EXIT_OK


COMMANDS = {
    "summarize": cmd_summarize,
    "analyze": cmd_analyze,
    "phases": cmd_phases,
    "hulls": cmd_hulls,
    "export-frames": cmd_export_frames,
}


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (NumericError, ArithmeticError)) and not isinstance(exc, InputError):
        return EXIT_NUMERIC
    return EXIT_INPUT


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        try:
            cfg = resolve_config(args)
        except (CourtspaceError, ValueError) as exc:
            raise StageError("config", exc) from exc
        return COMMANDS[args.command](cfg)
    except StageError as exc:
        print(f"error [{exc.stage}]: {exc.cause}", file=sys.stderr)
        return _exit_code(exc.cause)
    except (CourtspaceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
