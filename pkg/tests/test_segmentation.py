import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from courtspace.errors import Misaligned, MissingPeriod
from courtspace.ingest import AttackDirection, CourtSpec, build_trajectories, resample_to_grid
from courtspace.segmentation import (
    Label,
    Metric,
    PlayLabel,
    frame_metric,
    label_frames,
    quantile,
    segment_plays,
    spacing_summary,
    summarize_values,
)
from courtspace.synthetic import synthetic_match

from conftest import make_frame

O, D = Label.OFFENSE, Label.DEFENSE


def team_at(cx, t_ms=0, spread=1.0):
    offs = [(0, 0), (spread, 0), (-spread, 0), (0, spread), (0, -spread)]
    return make_frame([(cx + a, 7.5 + b) for a, b in offs], t_ms=t_ms)


def test_label_attacking_half():
    (lab,) = label_frames([team_at(21.0)])
    assert lab.label is O
    (lab,) = label_frames([team_at(21.0)], CourtSpec(attack_direction={1: AttackDirection.TOWARD_NEGATIVE_X}))
    assert lab.label is D


def test_label_half_line_tie_is_defense():
    assert label_frames([team_at(14.0)])[0].label is D


def test_label_missing_period():
    with pytest.raises(MissingPeriod):
        label_frames([team_at(20.0)], CourtSpec(), period_of=lambda t: 2)
    with pytest.raises(MissingPeriod):
        label_frames([team_at(20.0)], CourtSpec(), period_of=lambda t: None)


def test_label_flips_at_scripted_crossings():
    # alternate halves every 20 s for 2 minutes on a 5 Hz grid
    frames = [team_at(21.0 if (t // 20_000) % 2 == 0 else 7.0, t_ms=t) for t in range(0, 120_000, 200)]
    labels = label_frames(frames)
    flips = [labels[i].t_ms for i in range(1, len(labels)) if labels[i].label != labels[i - 1].label]
    assert flips == [20_000, 40_000, 60_000, 80_000, 100_000]


def labels_from(spec, step=100):
    out, t = [], 0
    for label, dur in spec:
        for _ in range(dur // step):
            out.append(PlayLabel(t, label))
            t += step
    return out


def test_segment_all_offense():
    plays = segment_plays(labels_from([(O, 5000)]))
    assert len(plays) == 1 and plays[0].label is O


def test_segment_debounce():
    plays = segment_plays(labels_from([(O, 10_000), (D, 400), (O, 10_000)]), min_duration_ms=500)
    assert len(plays) == 1
    assert (plays[0].start_ms, plays[0].end_ms, plays[0].label) == (0, 20_400, O)


def test_segment_short_leading_run():
    plays = segment_plays(labels_from([(D, 300), (O, 5000), (D, 5000)]), min_duration_ms=1000)
    assert [p.label for p in plays] == [O, D]
    assert plays[0].start_ms == 0


def test_segment_six_scripted_plays():
    durations = [8000, 6000, 12_000, 5000, 9000, 7000]
    spec = [(O if i % 2 == 0 else D, d) for i, d in enumerate(durations)]
    # sprinkle a 400 ms flicker inside the third play
    labels = labels_from(spec, step=200)
    for i in range(100, 102):
        labels[i] = PlayLabel(labels[i].t_ms, D)
    plays = segment_plays(labels, min_duration_ms=2000)
    assert len(plays) == 6
    bounds = np.cumsum([0] + durations)
    for play, (start, end) in zip(plays, zip(bounds[:-1], bounds[1:])):
        assert abs(play.start_ms - start) <= 200 and abs(play.end_ms - end) <= 200


@given(st.lists(st.sampled_from([O, D]), min_size=1, max_size=80), st.integers(0, 3000))
@settings(max_examples=150, deadline=None)
def test_segment_covers_span(seq, min_dur):
    labels = [PlayLabel(i * 200, lab) for i, lab in enumerate(seq)]
    plays = segment_plays(labels, min_duration_ms=min_dur, step_ms=200)
    assert plays[0].start_ms == 0
    assert plays[-1].end_ms == labels[-1].t_ms + 200
    for a, b in zip(plays, plays[1:]):
        assert a.end_ms == b.start_ms
        assert a.label != b.label
    assert all(p.start_ms < p.end_ms for p in plays)


def test_quantiles_exact_ranks():
    s = summarize_values([3, 1, 5, 2, 4], O, Metric.MEAN_DISTANCE)
    assert (s.min, s.q1, s.median, s.mean, s.q3, s.max) == (1, 2, 3, 3, 4, 5)


def test_quantile_matches_numpy_linear():
    rng = np.random.default_rng(0)
    v = sorted(rng.normal(size=37))
    for q in (0.1, 0.25, 0.5, 0.75, 0.9):
        assert quantile(v, q) == pytest.approx(np.quantile(v, q, method="linear"), abs=1e-12)


def test_single_frame_class():
    f = team_at(20.0)
    (summ,) = spacing_summary([f], label_frames([f]), Metric.HULL_AREA).values()
    val = frame_metric(f, Metric.HULL_AREA)
    assert summ.min == summ.q1 == summ.median == summ.mean == summ.q3 == summ.max == val


def test_misaligned():
    frames = [team_at(20.0, t_ms=0), team_at(20.0, t_ms=200)]
    labels = label_frames(frames)
    with pytest.raises(Misaligned):
        spacing_summary(frames, labels[:1])
    with pytest.raises(Misaligned):
        spacing_summary(frames, [labels[1], labels[0]])


def test_calibrated_spacing_targets():
    match = synthetic_match(300, seed=4)
    frames = resample_to_grid(build_trajectories(match.samples), 5, 1000)
    labels = label_frames(frames)
    dist = spacing_summary(frames, labels, Metric.MEAN_DISTANCE)
    area = spacing_summary(frames, labels, Metric.HULL_AREA)
    assert dist[O].mean == pytest.approx(7.25, abs=0.5)
    assert dist[D].mean == pytest.approx(5.68, abs=0.5)
    assert dist[O].mean > dist[D].mean
    assert area[O].mean > area[D].mean


@given(st.lists(st.floats(0, 100), min_size=1, max_size=30), st.randoms())
@settings(max_examples=100, deadline=None)
def test_summary_permutation_and_monotone(values, rnd):
    s1 = summarize_values(values, O, Metric.HULL_AREA)
    shuffled = list(values)
    rnd.shuffle(shuffled)
    s2 = summarize_values(shuffled, O, Metric.HULL_AREA)
    assert (s1.min, s1.q1, s1.median, s1.q3, s1.max) == (s2.min, s2.q1, s2.median, s2.q3, s2.max)
    assert s1.mean == pytest.approx(s2.mean, rel=1e-12, abs=1e-12)
    assert s1.min <= s1.q1 <= s1.median <= s1.q3 <= s1.max
    assert s1.min <= s1.mean <= s1.max
    s3 = summarize_values(values + [s1.max + 1], O, Metric.HULL_AREA)
    assert s3.max > s1.max and s3.min == s1.min


@given(st.permutations(range(5)))
@settings(max_examples=30, deadline=None)
def test_labels_ignore_player_order(perm):
    pts = [(18, 3), (22, 11), (20, 7), (25, 5), (16, 9)]
    a = label_frames([make_frame(pts)])
    b = label_frames([make_frame([pts[i] for i in perm], tags=[str(i + 1) for i in perm])])
    assert a == b
