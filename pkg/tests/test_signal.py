from __future__ import annotations

import random

import pytest

from gazeprompt.signal import FixationDetector, SampleFilter, run_offline
from gazeprompt.types import EngineConfig, GazeSample, StreamOrderError, default_screen

HZ_STEP = 8333  # ~120 Hz in microseconds


def samples_at(points, t0=0, step=HZ_STEP, valid=None):
    out = []
    for i, (x, y) in enumerate(points):
        v = True if valid is None else valid[i]
        out.append(GazeSample(t=t0 + i * step, x=x, y=y, valid=v))
    return out


class TestSampleFilter:
    def test_constant_stream_unchanged(self):
        filt = SampleFilter(default_screen())
        for s in samples_at([(300.0, 300.0)] * 10):
            out = filt.push(s)
            assert out is not None
            assert (out.x, out.y) == (300.0, 300.0)

    def test_median_suppresses_spike(self):
        filt = SampleFilter(default_screen())
        emitted = [filt.push(s) for s in samples_at([(300, 100), (300, 500), (300, 102)])]
        # full window is {100, 500, 102}: emission for it is the median 102
        assert emitted[-1].y == 102
        # the spike value never survives filtering
        assert all(e.y != 500 for e in emitted if e is not None)

    def test_invalid_samples_dropped_and_gap_tracked(self):
        filt = SampleFilter(default_screen())
        sams = samples_at([(300, 300), (0, 0), (300, 300)], valid=[True, False, True])
        outs = [filt.push(s) for s in sams]
        assert outs[0] is not None
        assert outs[1] is None
        assert outs[2] is not None
        assert filt.state.n_invalid == 1
        assert filt.state.gap_us == 0  # reset by the trailing valid sample

    def test_velocity_cap_drops_teleport(self):
        filt = SampleFilter(default_screen())
        # ~8.3 ms between emissions allows roughly 350 px; a persistent
        # 2000 px teleport survives the median and must hit the cap
        outs = [filt.push(s) for s in samples_at(
            [(100.0, 100.0), (2100.0, 100.0), (2100.0, 100.0)])]
        assert outs[0] is not None and outs[0].x == 100.0
        assert outs[2] is None
        assert filt.state.n_outlier == 1
        # the cap widens with elapsed time, so the stream self-heals
        healed = [filt.push(s) for s in samples_at(
            [(2100.0, 100.0)] * 6, t0=3 * HZ_STEP)]
        assert healed[-1] is not None and healed[-1].x == 2100.0

    def test_saccade_sized_jump_passes(self):
        filt = SampleFilter(default_screen())
        a = GazeSample(t=0, x=400.0, y=300.0)
        b = GazeSample(t=HZ_STEP, x=700.0, y=300.0)  # 300 px, plausible saccade
        filt.push(a)
        assert filt.push(b) is not None

    def test_out_of_order_timestamp_raises(self):
        filt = SampleFilter(default_screen())
        filt.push(GazeSample(t=1000, x=1, y=1))
        with pytest.raises(StreamOrderError):
            filt.push(GazeSample(t=1000, x=1, y=1))


class TestFixationDetector:
    def test_cluster_emits_single_fixation(self):
        # 15 samples (~125 ms at 120 Hz) inside a 10 px cluster
        det = FixationDetector()
        pts = [(400.0 + (i % 3), 300.0 - (i % 2)) for i in range(15)]
        emitted = [det.push(s) for s in samples_at(pts)]
        assert all(e is None for e in emitted)
        fx = det.flush()
        assert fx is not None
        assert fx.sample_count == 15
        assert abs(fx.cx - 400.0) <= 2 and abs(fx.cy - 300.0) <= 2
        assert fx.duration == 14 * HZ_STEP

    def test_short_cluster_discarded(self):
        # 6 samples (~42 ms) then a 300 px jump: below min duration
        det = FixationDetector()
        pts = [(400.0, 300.0)] * 6 + [(700.0, 300.0)] * 20
        results = [det.push(s) for s in samples_at(pts)]
        assert all(r is None for r in results)  # first cluster was discarded
        fx = det.flush()
        assert fx is not None and fx.cx == 700.0
        assert det.n_discarded == 6

    def test_blink_gap_does_not_break_fixation(self):
        det = FixationDetector()
        first = samples_at([(400.0, 300.0)] * 10)
        # 50 ms hole, below the 75 ms blink-merge gap
        second = samples_at([(400.0, 300.0)] * 10, t0=first[-1].t + 50_000)
        for s in first + second:
            assert det.push(s) is None
        fx = det.flush()
        assert fx.sample_count == 20

    def test_long_gap_forces_close(self):
        det = FixationDetector()
        first = samples_at([(400.0, 300.0)] * 20)
        second = samples_at([(400.0, 300.0)] * 20, t0=first[-1].t + 200_000)
        outs = [det.push(s) for s in first + second]
        closed = [o for o in outs if o is not None]
        assert len(closed) == 1
        assert closed[0].sample_count == 20
        assert det.flush().sample_count == 20

    def test_fixations_ordered_and_non_overlapping(self):
        det = FixationDetector()
        fixes = []
        pts = ([(400.0, 300.0)] * 20 + [(600.0, 300.0)] * 20
               + [(800.0, 360.0)] * 20)
        for s in samples_at(pts):
            f = det.push(s)
            if f:
                fixes.append(f)
        tail = det.flush()
        if tail:
            fixes.append(tail)
        assert len(fixes) == 3
        for a, b in zip(fixes, fixes[1:]):
            assert a.onset + a.duration <= b.onset

    def test_scroll_translation_keeps_fixation_open(self):
        det = FixationDetector()
        # gaze follows content that shifts up 60 px mid-fixation
        first = samples_at([(400.0, 300.0)] * 15)
        for s in first:
            assert det.push(s) is None
        det.on_scroll(-60.0)
        second = samples_at([(400.0, 240.0)] * 15, t0=first[-1].t + HZ_STEP)
        for s in second:
            assert det.push(s) is None
        fx = det.flush()
        assert fx.sample_count == 30
        assert fx.cy == pytest.approx(240.0)


class TestStreamProperties:
    def _random_stream(self, rng, n):
        out = []
        t = 0
        x, y = 400.0, 300.0
        for _ in range(n):
            if rng.random() < 0.05:
                x = rng.uniform(50, 1870)
                y = rng.uniform(50, 1150)
            out.append(GazeSample(
                t=t,
                x=x + rng.gauss(0, 5),
                y=y + rng.gauss(0, 5),
                valid=rng.random() > 0.05,
            ))
            t += HZ_STEP + rng.randrange(0, 50)
        return out

    def test_online_equals_offline(self):
        geom = default_screen()
        cfg = EngineConfig()
        for seed in range(5):
            rng = random.Random(seed)
            stream = self._random_stream(rng, 3000)
            offline = run_offline(stream, geom, cfg)
            filt = SampleFilter(geom, cfg)
            det = FixationDetector(cfg)
            online = []
            for s in stream:
                f = filt.push(s)
                if f is None:
                    continue
                fx = det.push(f)
                if fx:
                    online.append(fx)
            tail = det.flush()
            if tail:
                online.append(tail)
            assert online == offline

    def test_sample_conservation(self):
        geom = default_screen()
        cfg = EngineConfig()
        rng = random.Random(7)
        stream = self._random_stream(rng, 5000)
        filt = SampleFilter(geom, cfg)
        det = FixationDetector(cfg)
        for s in stream:
            f = filt.push(s)
            if f is not None:
                det.push(f)
        det.flush()
        st = filt.state
        assert st.n_total == len(stream)
        accounted = (st.n_invalid + st.n_outlier
                     + det.n_in_fixations + det.n_discarded)
        assert accounted == st.n_total
