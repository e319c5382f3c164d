from __future__ import annotations

import pytest

from gazeprompt.behavior import BehaviorEvent, BehaviorKind
from gazeprompt.metrics import (
    PassageMetrics,
    ScrollSample,
    compute_metrics,
    detect_deviations,
    format_report,
    line_switch_times_ms,
    one_pass_times_ms,
    segment_scroll_events,
)
from gazeprompt.simulator import (
    GroundTruth,
    ReaderProfile,
    SweepRecord,
    make_passage_layout,
    simulate,
)
from gazeprompt.signal import run_offline
from gazeprompt.behavior import BehaviorEngine
from gazeprompt.types import Fixation, LineBox, PageLayout, WordBox, default_screen


def fx(cx, cy, onset, duration=200_000):
    return Fixation(cx=cx, cy=cy, onset=onset, duration=duration, sample_count=24)


def grid_layout(n_lines=10, words_per_line=5):
    lines = [LineBox(i, 100.0 + i * 62.0, 150.0 + i * 62.0, 100.0, 1900.0)
             for i in range(n_lines)]
    words = []
    wid = 0
    for ln in lines:
        for k in range(words_per_line):
            left = 100.0 + k * 350.0
            words.append(WordBox(wid, ln.line_id, left, left + 300.0, f"w{wid}"))
            wid += 1
    return PageLayout(1, lines, words)


def sweep_ev(line_id, at):
    return BehaviorEvent(BehaviorKind.SWITCH_RETURN_SWEEP, line_id=line_id, at=at)


class TestLineSwitchTime:
    def test_crafted_250ms_switch(self):
        layout = grid_layout(n_lines=3)
        y0, y1 = layout.lines[0].center_y, layout.lines[1].center_y
        fixations = [
            fx(1500.0, y0, onset=700_000, duration=300_000),   # ends at 1.0 s
            fx(200.0, y1, onset=1_250_000),                    # lands next line
            fx(350.0, y1, onset=1_500_000),                    # forward saccade
        ]
        times = line_switch_times_ms(fixations, layout)
        assert times == [250.0]

    def test_backward_landing_is_skipped(self):
        layout = grid_layout(n_lines=3)
        y0, y1 = layout.lines[0].center_y, layout.lines[1].center_y
        fixations = [
            fx(1500.0, y0, onset=0, duration=300_000),
            fx(600.0, y1, onset=400_000),       # followed by a backward saccade
            fx(200.0, y1, onset=700_000),       # the real landing
            fx(380.0, y1, onset=1_000_000),
        ]
        times = line_switch_times_ms(fixations, layout)
        assert times == [(700_000 - 300_000) / 1000.0]

    def test_deviation_landing_measures_to_target_line(self):
        layout = grid_layout(n_lines=4)
        y0, y1, y2 = (layout.lines[i].center_y for i in range(3))
        fixations = [
            fx(1500.0, y0, onset=0, duration=250_000),
            fx(200.0, y2, onset=350_000),       # overshoot to line 2
            fx(210.0, y1, onset=650_000),       # corrective to line 1
            fx(400.0, y1, onset=950_000),
        ]
        times = line_switch_times_ms(fixations, layout)
        assert times[0] == (650_000 - 250_000) / 1000.0


class TestDeviations:
    def test_injected_truth_magnitudes(self):
        truth = GroundTruth(sweeps=[
            SweepRecord(0, 1, 1, at=100),
            SweepRecord(1, 2, 3, at=200),    # magnitude 1
            SweepRecord(3, 4, 4, at=300),
            SweepRecord(4, 5, 7, at=400),    # magnitude 2
        ])
        events = [sweep_ev(1, 100), sweep_ev(3, 200), sweep_ev(4, 300),
                  sweep_ev(7, 400)]
        assert detect_deviations(events, truth) == [1, 2]

    def test_frequency_and_magnitude_from_truth(self):
        layout = grid_layout(n_lines=10)
        truth = GroundTruth(sweeps=[
            SweepRecord(0, 1, 2, at=100),    # magnitude 1
            SweepRecord(2, 3, 5, at=200),    # magnitude 2
        ])
        events = [sweep_ev(2, 100), sweep_ev(5, 200)]
        fixations = [fx(1500.0, layout.lines[0].center_y, onset=0)]
        m = compute_metrics(fixations, events, [], layout, truth=truth)
        assert m.deviation_count == 2
        assert m.deviation_frequency == pytest.approx(0.2)
        assert m.mean_deviation_magnitude_lines == pytest.approx(1.5)

    def test_heuristic_intent_without_truth(self):
        events = [
            BehaviorEvent(BehaviorKind.FOLLOWING, line_id=0, at=0),
            sweep_ev(1, 100),               # 0 -> 1: intended
            sweep_ev(3, 200),               # from 1, intended 2, landed 3
            BehaviorEvent(BehaviorKind.JUMP, line_id=2, at=300),
            sweep_ev(3, 400),               # from 2, intended 3: clean
        ]
        assert detect_deviations(events, None) == [1]


class TestOnePass:
    def test_first_pass_totals_and_revisits(self):
        layout = grid_layout(n_lines=2, words_per_line=5)
        words = layout.words_on_line(0)
        a, b = words[0], words[1]
        y = layout.lines[0].center_y
        fixations = [
            fx(a.center_x, y, onset=0, duration=250_000),
            fx(a.center_x + 40, y, onset=300_000, duration=200_000),
            fx(b.center_x, y, onset=600_000, duration=300_000),
            fx(a.center_x, y, onset=1_000_000, duration=400_000),  # revisit
        ]
        times = one_pass_times_ms(fixations, layout)
        assert times[a.word_id] == pytest.approx(450.0)
        assert times[b.word_id] == pytest.approx(300.0)

    def test_function_words_excluded_from_headline_max(self):
        lines = [LineBox(0, 100.0, 150.0, 100.0, 1900.0)]
        words = [WordBox(0, 0, 100.0, 400.0, "the", function_word=True),
                 WordBox(1, 0, 500.0, 900.0, "reindeer")]
        layout = PageLayout(1, lines, words)
        y = lines[0].center_y
        fixations = [fx(250.0, y, onset=0, duration=900_000),
                     fx(700.0, y, onset=1_000_000, duration=500_000)]
        m = compute_metrics(fixations, [], [], layout)
        assert m.one_pass_ms_by_word[0] == pytest.approx(900.0)
        assert m.max_one_pass_fixation_ms == pytest.approx(500.0)


class TestScrollSegmentation:
    def test_crafted_two_events(self):
        scrolls = [ScrollSample(t, 40.0)
                   for t in (0, 30_000, 60_000, 300_000, 330_000)]
        distances = segment_scroll_events(scrolls)
        assert distances == [120.0, 80.0]

    def test_boundary_gap_does_not_split(self):
        scrolls = [ScrollSample(0, 40.0), ScrollSample(100_000, 40.0)]
        assert segment_scroll_events(scrolls) == [80.0]
        scrolls = [ScrollSample(0, 40.0), ScrollSample(100_001, 40.0)]
        assert segment_scroll_events(scrolls) == [40.0, 40.0]

    def test_opposite_signs_cancel_within_event(self):
        scrolls = [ScrollSample(0, 40.0), ScrollSample(20_000, -30.0)]
        assert segment_scroll_events(scrolls) == [10.0]


class TestComputeMetrics:
    def test_empty_log_returns_zeros(self):
        layout = grid_layout()
        m = compute_metrics([], [], [], layout)
        assert m == PassageMetrics(
            mean_line_switch_time_ms=0.0, line_switch_count=0,
            deviation_count=0, deviation_frequency=0.0,
            mean_deviation_magnitude_lines=0.0,
            max_one_pass_fixation_ms=0.0, one_pass_ms_by_word={},
            scroll_event_count=0, mean_scroll_distance_px=0.0,
            data_loss_fraction=0.0)

    def test_missing_layout_is_fatal(self):
        with pytest.raises(ValueError):
            compute_metrics([], [], [], None)

    def test_replay_stability(self):
        layout = make_passage_layout(n_lines=6, seed=4)
        samples, truth = simulate(layout, ReaderProfile(
            seed=9, deviation_prob=0.4, hesitation_prob=0.1))
        fixations = run_offline(samples, default_screen())
        engine = BehaviorEngine(layout)
        events = [e for f in fixations for e in engine.push(f)]
        m1 = compute_metrics(fixations, events, [], layout, truth=truth)
        m2 = compute_metrics(fixations, events, [], layout, truth=truth)
        assert m1 == m2

    def test_simulator_deviations_recovered_exactly(self):
        layout = make_passage_layout(n_lines=12, seed=6)
        profile = ReaderProfile(seed=21, deviation_prob=0.6)
        samples, truth = simulate(layout, profile)
        fixations = run_offline(samples, default_screen())
        engine = BehaviorEngine(layout)
        events = [e for f in fixations for e in engine.push(f)]
        injected = [s.magnitude for s in truth.sweeps if s.deviated]
        assert injected
        # with ground truth
        m = compute_metrics(fixations, events, [], layout, truth=truth)
        assert m.deviation_count == len(injected)
        # heuristic agrees on zero-noise streams
        assert detect_deviations(events, None) == injected

    def test_scroll_samples_independent_of_other_metrics(self):
        layout = make_passage_layout(n_lines=5, seed=8)
        samples, truth = simulate(layout, ReaderProfile(seed=2))
        fixations = run_offline(samples, default_screen())
        engine = BehaviorEngine(layout)
        events = [e for f in fixations for e in engine.push(f)]
        scrolls = [ScrollSample(0, 50.0), ScrollSample(200_000, 30.0)]
        with_scroll = compute_metrics(fixations, events, scrolls, layout)
        without = compute_metrics(fixations, events, [], layout)
        assert with_scroll.scroll_event_count == 2
        assert without.scroll_event_count == 0
        assert with_scroll.mean_line_switch_time_ms == without.mean_line_switch_time_ms
        assert with_scroll.one_pass_ms_by_word == without.one_pass_ms_by_word

    def test_data_loss_fraction_from_counts(self):
        layout = grid_layout()
        fixations = [fx(1500.0, layout.lines[0].center_y, onset=0)]
        m = compute_metrics(fixations, [], [], layout, sample_counts=(100, 6))
        assert m.data_loss_fraction == pytest.approx(0.06)


def test_format_report_contains_all_measures():
    layout = grid_layout()
    fixations = [fx(1500.0, layout.lines[0].center_y, onset=0)]
    report = format_report(compute_metrics(fixations, [], [], layout), "demo")
    assert "line switch time" in report
    assert "deviation frequency" in report
    assert "scroll events" in report
