"""Online gaze-stream conditioning: noise/outlier filtering and real-time
fixation detection.

The filter and detector are streaming state machines, one pair per session.
Both are deterministic: running them sample-by-sample or over a buffered
stream produces identical output.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .types import (
    EngineConfig,
    Fixation,
    GazeSample,
    ScreenGeometry,
    StreamOrderError,
    degrees_to_px,
)


def _lower_median(values: list[float]) -> float:
    # For even window sizes (filter warm-up) take the lower middle element so
    # the output is always an observed sample value, never an invented mean.
    s = sorted(values)
    return s[(len(s) - 1) // 2]


@dataclass
class FilterState:
    """Ring buffer of recent valid samples plus gap bookkeeping."""

    window_size: int = 3
    window: deque = field(default_factory=deque)
    last_emitted: GazeSample | None = None
    last_t: int | None = None
    gap_us: int = 0
    n_total: int = 0
    n_invalid: int = 0
    n_outlier: int = 0


class SampleFilter:
    """Median filter + physiological velocity cap over a raw 120 Hz stream.

    Invalid samples are consumed into the gap accumulator and dropped. Valid
    samples are emitted as the per-axis median of the last ``median_window``
    valid samples. An emitted candidate whose displacement from the previous
    emission implies an eye velocity above ``max_eye_velocity_dps`` is
    dropped as an outlier.
    """

    def __init__(self, geom: ScreenGeometry, cfg: EngineConfig | None = None) -> None:
        cfg = cfg or EngineConfig()
        self.cfg = cfg
        self.state = FilterState(window_size=cfg.median_window)
        self.state.window = deque(maxlen=cfg.median_window)
        # small-angle px-per-degree; the cap scales linearly with the gap
        self._px_per_deg = degrees_to_px(1.0, "horizontal", geom)

    def push(self, s: GazeSample) -> GazeSample | None:
        st = self.state
        if st.last_t is not None and s.t <= st.last_t:
            raise StreamOrderError(
                f"timestamp {s.t} does not advance past {st.last_t}")
        st.last_t = s.t
        st.n_total += 1

        if not s.valid:
            st.n_invalid += 1
            if st.window:
                st.gap_us = s.t - st.window[-1].t
            return None
        st.gap_us = 0

        # stale window entries must not vote across a signal break
        if st.window and s.t - st.window[-1].t > self.cfg.blink_merge_gap_us:
            st.window.clear()
        st.window.append(s)
        xs = [w.x for w in st.window]
        ys = [w.y for w in st.window]
        out = GazeSample(t=s.t, x=_lower_median(xs), y=_lower_median(ys),
                         valid=True, eye=s.eye)

        prev = st.last_emitted
        if prev is not None:
            gap_s = (out.t - prev.t) / 1e6
            cap_px = self.cfg.max_eye_velocity_dps * gap_s * self._px_per_deg
            if ((out.x - prev.x) ** 2 + (out.y - prev.y) ** 2) ** 0.5 > cap_px:
                st.n_outlier += 1
                return None
        st.last_emitted = out
        return out

    def on_scroll(self, dy: float) -> None:
        """Translate filter memory when content scrolls; gaze that follows
        the content shifts with it, and stale window entries would otherwise
        smear the transition."""
        st = self.state
        st.window = deque((GazeSample(t=s.t, x=s.x, y=s.y + dy, valid=s.valid,
                                      eye=s.eye) for s in st.window),
                          maxlen=st.window.maxlen)
        if st.last_emitted is not None:
            le = st.last_emitted
            st.last_emitted = GazeSample(t=le.t, x=le.x, y=le.y + dy,
                                         valid=le.valid, eye=le.eye)


def filter_sample(s: GazeSample, st: SampleFilter) -> GazeSample | None:
    return st.push(s)


@dataclass
class FixationAccumulator:
    """Open sample set with a running dispersion window."""

    ts: list = field(default_factory=list)
    xs: list = field(default_factory=list)
    ys: list = field(default_factory=list)
    min_x: float = float("inf")
    max_x: float = float("-inf")
    min_y: float = float("inf")
    max_y: float = float("-inf")

    def add(self, s: GazeSample) -> None:
        self.ts.append(s.t)
        self.xs.append(s.x)
        self.ys.append(s.y)
        self.min_x = min(self.min_x, s.x)
        self.max_x = max(self.max_x, s.x)
        self.min_y = min(self.min_y, s.y)
        self.max_y = max(self.max_y, s.y)

    def dispersion_with(self, s: GazeSample) -> float:
        return ((max(self.max_x, s.x) - min(self.min_x, s.x))
                + (max(self.max_y, s.y) - min(self.min_y, s.y)))

    def translate(self, dy: float) -> None:
        """Shift the accumulated window vertically (scroll mid-fixation)."""
        self.ys = [y + dy for y in self.ys]
        self.min_y += dy
        self.max_y += dy

    @property
    def duration_us(self) -> int:
        return self.ts[-1] - self.ts[0] if self.ts else 0

    def __len__(self) -> int:
        return len(self.ts)


class FixationDetector:
    """Dispersion-threshold segmentation of a filtered sample stream.

    A sample joins the open accumulator while total dispersion
    (max_x - min_x) + (max_y - min_y) stays within the configured threshold;
    otherwise the accumulator closes. A closed accumulator becomes a Fixation
    when its duration reaches the minimum, else its samples are discarded as
    saccade samples. Validity gaps up to the blink-merge threshold do not
    break an open accumulator; longer gaps force-close it.
    """

    def __init__(self, cfg: EngineConfig | None = None) -> None:
        self.cfg = cfg or EngineConfig()
        self.acc: FixationAccumulator | None = None
        self.n_in_fixations = 0
        self.n_discarded = 0

    def push(self, s: GazeSample) -> Fixation | None:
        if self.acc is None or not len(self.acc):
            self.acc = FixationAccumulator()
            self.acc.add(s)
            return None

        gap = s.t - self.acc.ts[-1]
        if gap > self.cfg.blink_merge_gap_us:
            closed = self._close()
            self.acc = FixationAccumulator()
            self.acc.add(s)
            return closed

        if self.acc.dispersion_with(s) <= self.cfg.fixation_dispersion_px:
            self.acc.add(s)
            return None

        closed = self._close()
        self.acc = FixationAccumulator()
        self.acc.add(s)
        return closed

    def flush(self) -> Fixation | None:
        """Force-close the open accumulator at stream end."""
        closed = self._close()
        self.acc = None
        return closed

    def on_scroll(self, dy: float) -> None:
        if self.acc is not None:
            self.acc.translate(dy)

    def _close(self) -> Fixation | None:
        acc = self.acc
        if acc is None or not len(acc):
            return None
        n = len(acc)
        if acc.duration_us >= self.cfg.min_fixation_duration_us and n >= 2:
            self.n_in_fixations += n
            return Fixation(
                cx=sum(acc.xs) / n,
                cy=sum(acc.ys) / n,
                onset=acc.ts[0],
                duration=acc.duration_us,
                sample_count=n,
            )
        self.n_discarded += n
        return None


def detect_fixation(s: GazeSample, acc: FixationDetector) -> Fixation | None:
    return acc.push(s)


def run_offline(samples, geom: ScreenGeometry,
                cfg: EngineConfig | None = None) -> list[Fixation]:
    """Filter + detect over a buffered stream; reference for the streaming
    equivalence property."""
    cfg = cfg or EngineConfig()
    filt = SampleFilter(geom, cfg)
    det = FixationDetector(cfg)
    out: list[Fixation] = []
    for s in samples:
        f = filt.push(s)
        if f is None:
            continue
        fx = det.push(f)
        if fx is not None:
            out.append(fx)
    tail = det.flush()
    if tail is not None:
        out.append(tail)
    return out
