"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""

import filecmp
import math
import re
import time
from pathlib import Path

import numpy as np
import pytest

from courtspace.cli import main
from courtspace.embedding import AvgDistanceMatrix, canonical_coords, classical_mds
from courtspace.events import EventKind, GameEvent, join_events
from courtspace.exporter import parse_report_table
from courtspace.geometry import convex_hull, polygon_area
from courtspace.ingest import Trajectory, write_sensor_log
from courtspace.kinematics import kalman_filter
from courtspace.phases import bd_td_curve, build_features, crosstab, kmeans, select_k
from courtspace.segmentation import Label, label_frames
from courtspace.synthetic import synthetic_match

from conftest import GOLDEN, UPDATE_GOLDENS, make_frame
from oracles import brute_force_hull, brute_nearest, exhaustive_two_partition, fan_area

TAGS = ["3", "7", "9", "12", "15"]


def test_c01_geometry_oracle(criterion):
    c = criterion(1, "convex hull and area match brute-force oracles on 1000 frames")
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    hull_ok = area_ok = 0
    for _ in range(1000):
        pts = [tuple(p) for p in rng.uniform(0, 28, (5, 2)).tolist()]
        hull = convex_hull(pts)
        hull_ok += [tuple(v) for v in hull] == brute_force_hull(pts)
        a, b = polygon_area(hull), fan_area(hull)
        area_ok += abs(a - b) <= 1e-9 * max(abs(b), 1e-300)
    elapsed = time.perf_counter() - start
    c.check(
        hull_ok == 1000 and area_ok == 1000 and elapsed < 5.0,
        f"hull {hull_ok}/1000, area {area_ok}/1000, {elapsed:.2f}s",
    )


def test_c02_kalman_improvement(criterion):
    c = criterion(2, "Kalman RMSE below raw in >=49/50 seeds, covariance symmetric")
    better, worst_asym = 0, 0.0
    t = np.arange(200) * 100
    truth = np.column_stack([t / 1000.0, np.full(200, 7.5)])
    for seed in range(50):
        z = truth + np.random.default_rng(seed).normal(0.0, 0.3, truth.shape)
        est = kalman_filter(Trajectory("1", t, z))
        filtered = np.array([e.position for e in est])
        raw = np.sqrt(((z - truth) ** 2).sum(axis=1).mean())
        filt = np.sqrt(((filtered - truth) ** 2).sum(axis=1).mean())
        better += filt < raw
        worst_asym = max(worst_asym, max(float(np.abs(e.covariance - e.covariance.T).max()) for e in est))
    c.check(better >= 49 and worst_asym < 1e-9, f"{better}/50 seeds improved, max asymmetry {worst_asym:.1e}")


def test_c03_kmeans_exhaustive(criterion):
    c = criterion(3, "two-blob k-means equals exhaustive optimum; BD+WD=TD; monotone objective")
    optimal = identity = 0
    worst_rel = 0.0
    monotone = True
    for inst in range(25):
        rng = np.random.default_rng(100 + inst)
        dim = 10
        a = rng.uniform(0, 20, dim)
        b = a + 15 * rng.choice([-1, 1], dim) / math.sqrt(dim)
        X = np.vstack([a + rng.normal(0, 0.5, (10, dim)), b + rng.normal(0, 0.5, (10, dim))])
        truth = np.repeat([0, 1], 10)
        best_wd, bits = exhaustive_two_partition(X)
        for k in (1, 2, 3):
            m = kmeans(X, k, seed=inst)
            worst_rel = max(worst_rel, abs(m.between + m.within - m.total) / m.total)
            monotone &= all(y <= x + 1e-12 * max(1.0, x) for x, y in zip(m.objective_history, m.objective_history[1:]))
            if k == 2:
                optimal += math.isclose(m.within, best_wd, rel_tol=1e-9)
                pairs = set(zip(m.assignments.tolist(), bits.tolist()))
                identity += len(pairs) == 2 and len(set(zip(m.assignments.tolist(), truth.tolist()))) == 2
    c.check(
        optimal == 25 and identity == 25 and worst_rel < 1e-9 and monotone,
        f"optimal {optimal}/25, partition match {identity}/25, max |BD+WD-TD|/TD {worst_rel:.1e}, monotone {monotone}",
    )


def separable_blobs(n_blobs, n_per=30, dim=10, seed=0):
    rng = np.random.default_rng(seed)
    centers = 10.0 * np.eye(dim)[:n_blobs]
    return np.vstack([ctr + rng.normal(0, 0.3, (n_per, dim)) for ctr in centers])


def test_c04_select_k(criterion):
    c = criterion(4, "select_k picks 3 and 5 on separable blob fixtures")
    chosen = {}
    for n in (3, 5):
        curve = bd_td_curve(separable_blobs(n, seed=n), range(1, 13), seed=0)
        chosen[n] = select_k(curve)
    c.check(chosen == {3: 3, 5: 5}, f"3-blob -> {chosen[3]}, 5-blob -> {chosen[5]}")


def _pair_d(P):
    return np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(axis=2))


def test_c05_mds_exact(criterion):
    c = criterion(5, "classical MDS exact on planar configs; canonical form rotation/reflection invariant")
    rng = np.random.default_rng(77)
    worst_d = worst_s = worst_inv = 0.0
    for _ in range(100):
        P = rng.uniform(-10, 10, (5, 2))
        d = _pair_d(P)
        layout = classical_mds(AvgDistanceMatrix(1, tuple(TAGS), d))
        rec = _pair_d(layout.coords)
        iu = np.triu_indices(5, 1)
        worst_d = max(worst_d, float((np.abs(rec[iu] - d[iu]) / d[iu]).max()))
        worst_s = max(worst_s, layout.stress)
        base = canonical_coords(layout.coords, TAGS)
        theta = rng.uniform(0, 2 * math.pi)
        R = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        if rng.random() < 0.5:
            R = R @ np.diag([1.0, -1.0])
        Q = P @ R.T + rng.uniform(-5, 5, 2)
        moved = canonical_coords(classical_mds(AvgDistanceMatrix(1, tuple(TAGS), _pair_d(Q))).coords, TAGS)
        moved_src = canonical_coords(Q, TAGS)
        scale = max(1.0, float(np.abs(base).max()))
        worst_inv = max(
            worst_inv,
            float(np.abs(moved - base).max()) / scale,
            float(np.abs(moved_src - canonical_coords(P, TAGS)).max()) / scale,
        )
    c.check(
        worst_d < 1e-9 and worst_s < 1e-9 and worst_inv < 1e-9,
        f"max rel distance error {worst_d:.1e}, max stress {worst_s:.1e}, max canonical drift {worst_inv:.1e}",
    )


def test_c06_table_structure(tmp_path, criterion):
    c = criterion(6, "calibrated match: offense > defense, means within 0.5 of targets, quantiles ordered")
    csv = tmp_path / "match.csv"
    csv.write_text(write_sensor_log(synthetic_match(600, seed=1, noise_sd=0.3).samples))
    start = time.perf_counter()
    code = main(["analyze", str(csv), "--out", str(tmp_path / "out")])
    elapsed = time.perf_counter() - start
    table = parse_report_table((tmp_path / "out" / "report.md").read_text())
    cols = {
        "dist_att": ("Average distances: attack", 7.25),
        "dist_def": ("Average distances: defence", 5.68),
        "hull_att": ("Convex hull area: attack", 42.59),
        "hull_def": ("Convex hull area: defence", 28.55),
    }
    means = {k: table[("Mean", col)] for k, (col, _) in cols.items()}
    within = all(abs(means[k] - target) <= 0.5 for k, (_, target) in cols.items())
    ordered = all(
        table[("Min", col)] <= table[("1st Qu.", col)] <= table[("Median", col)] <= table[("3rd Qu.", col)] <= table[("Max", col)]
        for col, _ in cols.values()
    )
    greater = means["dist_att"] > means["dist_def"] and means["hull_att"] > means["hull_def"]
    c.check(
        code == 0 and within and ordered and greater and elapsed < 10.0,
        ", ".join(f"{k} {v:.3f}" for k, v in means.items()) + f", ordered {ordered}, {elapsed:.2f}s",
    )


def test_c07_crosstab(criterion):
    c = criterion(7, "85/15 scripted crosstab reproduced; shares sum to 100")
    rng = np.random.default_rng(5)
    spread = np.array([[-6, -4], [5, -3], [6, 4], [-4, 5], [0, 0]], dtype=float)
    tight = np.array([[-2, -2], [2, -2], [2, 2], [-2, 2], [0, 1]], dtype=float)
    frames = []
    # each formation appears 85 times in one half and 15 times in the other
    plan = [(spread, 21.0)] * 85 + [(spread, 7.0)] * 15 + [(tight, 7.0)] * 85 + [(tight, 21.0)] * 15
    for i, (shape, cx) in enumerate(plan):
        pts = shape + [cx, 7.5] + rng.normal(0, 0.05, shape.shape)
        frames.append(make_frame(pts, t_ms=200 * i, tags=TAGS))
    labels = label_frames(frames)
    model = kmeans(build_features(frames), 2, seed=0)
    ct = crosstab(model, labels)
    mixes = sorted((r.offense_pct, r.defense_pct) for r in ct.rows)
    ok_mix = all(math.isclose(a, b, abs_tol=0.01) for got, want in zip(mixes, [(15, 85), (85, 15)]) for a, b in zip(got, want))
    total = sum(r.share_of_total for r in ct.rows)
    c.check(ok_mix and abs(total - 100.0) <= 1e-9, f"offense/defense % per cluster {mixes}, share sum {total!r}")


def test_c08_ingest_stats(tmp_path, capsys, criterion):
    c = criterion(8, "full-match summarize: rate in [36, 38] Hz, per-player interval in [161, 163] ms")
    csv = tmp_path / "full.csv"
    csv.write_text(write_sensor_log(synthetic_match(samples_per_tag=22277, seed=0).samples))
    code = main(["summarize", str(csv)])
    out = capsys.readouterr().out
    rate = float(re.search(r"overall rate: ([\d.]+)", out).group(1))
    intervals = [float(v) for v in re.findall(r"mean interval ([\d.]+) ms", out)]
    total = int(re.search(r"total samples: (\d+)", out).group(1))
    ok = code == 0 and 36 <= rate <= 38 and len(intervals) == 6 and all(161 <= v <= 163 for v in intervals)
    c.check(ok, f"{total} samples, rate {rate:.2f} Hz, intervals {sorted(set(intervals))} ms")


GOLDEN_RUN = GOLDEN / "analyze"


def test_c09_determinism_and_goldens(tmp_path, monkeypatch, criterion):
    c = criterion(9, "analyze is byte-deterministic and matches goldens")
    monkeypatch.chdir(tmp_path)
    Path("match.csv").write_text(write_sensor_log(synthetic_match(40, seed=3, noise_sd=0.2).samples))
    args = ["analyze", "match.csv", "--k-range", "1..4", "--seed", "0"]
    assert main(args + ["--out", "a"]) == 0
    assert main(args + ["--out", "b"]) == 0
    names = sorted(p.name for p in Path("a").iterdir())
    same_names = names == sorted(p.name for p in Path("b").iterdir())
    _, diff_ab, err_ab = filecmp.cmpfiles("a", "b", names, shallow=False)
    if UPDATE_GOLDENS:
        GOLDEN_RUN.mkdir(exist_ok=True)
        for old in GOLDEN_RUN.iterdir():
            old.unlink()
        for n in names:
            (GOLDEN_RUN / n).write_bytes((Path("a") / n).read_bytes())
    golden_names = sorted(p.name for p in GOLDEN_RUN.iterdir()) if GOLDEN_RUN.exists() else []
    _, diff_g, err_g = filecmp.cmpfiles("a", GOLDEN_RUN, names, shallow=False)
    unit_goldens = all((GOLDEN / n).exists() for n in ("hull.svg", "mds.svg", "report.md"))
    ok = same_names and not diff_ab and not err_ab and golden_names == names and not diff_g and not err_g and unit_goldens
    c.check(ok, f"{len(names)} files, run diff {diff_ab + err_ab}, golden diff {diff_g + err_g}")


def test_c10_event_join_oracle(criterion):
    c = criterion(10, "event join equals brute-force nearest search; every event accounted for once")
    rng = np.random.default_rng(10)
    matched = conserved = 0
    for _ in range(100):
        n_frames = int(rng.integers(1, 60))
        times = np.unique(rng.integers(2_000, 32_000, n_frames))
        frames = [make_frame([(i, 0) for i in range(5)], t_ms=int(t), tags=TAGS) for t in times]
        ev_times = np.sort(rng.integers(0, 34_000, int(rng.integers(0, 40))))
        # sprinkle exact midpoints to exercise the earlier-frame tie rule
        if len(times) > 1:
            mids = [(a + b) // 2 for a, b in zip(times, times[1:]) if (a + b) % 2 == 0]
            ev_times = np.sort(np.concatenate([ev_times, mids[:5]])).astype(int)
        events = [GameEvent(int(t), EventKind.OTHER, (), {"i": i}, "x") for i, t in enumerate(ev_times)]
        window = float(rng.choice([0, 100, 500, 1000]))
        annotated, unattached = join_events(frames, events, window)
        got = {}
        for fi, af in enumerate(annotated):
            for e in af.events:
                got.setdefault(e.payload["i"], []).append(fi)
        expect = {e.payload["i"]: brute_nearest(times.tolist(), e.t_ms, window) for e in events}
        matched += all(
            (got.get(i) == [fi]) if fi is not None else (i not in got) for i, fi in expect.items()
        )
        ids = sorted([i for i, v in got.items() for _ in v] + [e.payload["i"] for e in unattached])
        conserved += ids == list(range(len(events)))
    c.check(matched == 100 and conserved == 100, f"oracle match {matched}/100, conservation {conserved}/100")
