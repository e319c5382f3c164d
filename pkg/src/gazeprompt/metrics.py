"""Offline reading measures computed from session logs.

All computations are pure functions of their inputs (fixation log, behavior
events, scroll log, layout, optional ground truth), so a replayed session
reproduces its metrics exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

from .behavior import BehaviorEvent, BehaviorKind, assign_word, cast_vote
from .simulator import GroundTruth
from .types import EngineConfig, Fixation, PageLayout

log = logging.getLogger(__name__)

NON_BACKWARD_SLACK_PX = 10.0


@dataclass(frozen=True)
class ScrollSample:
    t: int           # microseconds
    dy: float        # signed scroll delta, px


@dataclass(frozen=True)
class PassageMetrics:
    mean_line_switch_time_ms: float
    line_switch_count: int
    deviation_count: int
    deviation_frequency: float            # deviations / line count
    mean_deviation_magnitude_lines: float
    max_one_pass_fixation_ms: float       # over content words
    one_pass_ms_by_word: dict[int, float]
    scroll_event_count: int
    mean_scroll_distance_px: float
    data_loss_fraction: float

    def to_dict(self) -> dict:
        d = dict(vars(self))
        d["one_pass_ms_by_word"] = {str(k): v
                                    for k, v in self.one_pass_ms_by_word.items()}
        return d


def _empty_metrics() -> PassageMetrics:
    return PassageMetrics(
        mean_line_switch_time_ms=0.0, line_switch_count=0,
        deviation_count=0, deviation_frequency=0.0,
        mean_deviation_magnitude_lines=0.0,
        max_one_pass_fixation_ms=0.0, one_pass_ms_by_word={},
        scroll_event_count=0, mean_scroll_distance_px=0.0,
        data_loss_fraction=0.0)


def landing_lines(fixations: list[Fixation], layout: PageLayout) -> list[int]:
    return [cast_vote(f, layout).landing_line for f in fixations]


def line_switch_times_ms(fixations: list[Fixation],
                         layout: PageLayout) -> list[float]:
    """Per-switch time: gap between the end of the last fixation on a line
    and the onset of the first next-line fixation that is followed by a
    non-backward saccade along that line."""
    lines = landing_lines(fixations, layout)
    times: list[float] = []
    i = 0
    n = len(fixations)
    while i < n:
        line = lines[i]
        # last fixation of this line's run
        j = i
        while j + 1 < n and lines[j + 1] == line:
            j += 1
        if j + 1 >= n:
            break
        depart = fixations[j]
        target = line + 1
        # first fixation landing on the next line, onwards from the run end,
        # that the reader actually settles on (next saccade is not backward)
        landing_idx = None
        for k in range(j + 1, n):
            if lines[k] != target:
                continue
            if k + 1 < n and fixations[k + 1].cx < fixations[k].cx - NON_BACKWARD_SLACK_PX:
                continue
            landing_idx = k
            break
        if landing_idx is not None:
            times.append((fixations[landing_idx].onset - depart.end) / 1000.0)
            i = landing_idx
        else:
            i = j + 1
    return times


def detect_deviations(events: list[BehaviorEvent],
                      truth: GroundTruth | None = None) -> list[int]:
    """Deviation magnitudes, one entry per deviated sweep.

    Intent comes from ground truth when available; the fallback heuristic
    assumes the reader always intends the line after the one they left.
    """
    sweeps = [e for e in events if e.kind == BehaviorKind.SWITCH_RETURN_SWEEP]
    magnitudes: list[int] = []
    if truth is not None:
        for ev, rec in zip(sweeps, truth.sweeps):
            if rec.deviated:
                magnitudes.append(rec.magnitude)
        return magnitudes

    current: int | None = None
    for e in events:
        if e.kind == BehaviorKind.SWITCH_RETURN_SWEEP:
            if current is not None and e.line_id != current + 1:
                magnitudes.append(abs(e.line_id - (current + 1)))
            current = e.line_id
        elif e.kind in (BehaviorKind.FOLLOWING, BehaviorKind.JUMP):
            current = e.line_id
    return magnitudes


def one_pass_times_ms(fixations: list[Fixation],
                      layout: PageLayout) -> dict[int, float]:
    """First-pass total fixation time per word id."""
    lines = landing_lines(fixations, layout)
    first_pass: dict[int, float] = {}
    seen: set[int] = set()
    open_word: int | None = None
    open_total = 0
    for fix, line in zip(fixations, lines):
        word = assign_word(fix, line, layout)
        wid = word.word_id if word is not None else None
        if wid != open_word:
            if open_word is not None and open_word not in first_pass:
                first_pass[open_word] = open_total / 1000.0
            open_word = wid
            open_total = 0
            if wid is not None and wid in seen:
                open_word = None      # revisit: first pass already recorded
            elif wid is not None:
                seen.add(wid)
        if open_word is not None:
            open_total += fix.duration
    if open_word is not None and open_word not in first_pass:
        first_pass[open_word] = open_total / 1000.0
    return first_pass


def segment_scroll_events(scrolls: list[ScrollSample],
                          pause_gap_us: int = 100_000) -> list[float]:
    """Split scroll deltas into events separated by pauses longer than the
    gap; each event's distance is the absolute summed delta."""
    if not scrolls:
        return []
    distances: list[float] = []
    acc = scrolls[0].dy
    for prev, cur in zip(scrolls, scrolls[1:]):
        if cur.t - prev.t > pause_gap_us:
            distances.append(abs(acc))
            acc = 0.0
        acc += cur.dy
    distances.append(abs(acc))
    return distances


def compute_metrics(fixations: list[Fixation],
                    events: list[BehaviorEvent],
                    scrolls: list[ScrollSample],
                    layout: PageLayout,
                    truth: GroundTruth | None = None,
                    sample_counts: tuple[int, int] | None = None,
                    cfg: EngineConfig | None = None) -> PassageMetrics:
    """All passage measures from time-ordered logs.

    sample_counts is (total, invalid) from the raw stream when available.
    """
    if layout is None:
        raise ValueError("layout is required")
    cfg = cfg or EngineConfig()
    if not fixations:
        log.warning("empty fixation log: returning all-zero metrics")
        return _empty_metrics()

    switch_times = line_switch_times_ms(fixations, layout)
    magnitudes = detect_deviations(events, truth)
    one_pass = one_pass_times_ms(fixations, layout)
    content = {wid: ms for wid, ms in one_pass.items()
               if not layout.word(wid).function_word}
    scroll_distances = segment_scroll_events(scrolls, cfg.scroll_pause_gap_us)

    total, invalid = sample_counts if sample_counts else (0, 0)
    return PassageMetrics(
        mean_line_switch_time_ms=(sum(switch_times) / len(switch_times)
                                  if switch_times else 0.0),
        line_switch_count=len(switch_times),
        deviation_count=len(magnitudes),
        deviation_frequency=len(magnitudes) / len(layout.lines),
        mean_deviation_magnitude_lines=(sum(magnitudes) / len(magnitudes)
                                        if magnitudes else 0.0),
        max_one_pass_fixation_ms=max(content.values(), default=0.0),
        one_pass_ms_by_word=one_pass,
        scroll_event_count=len(scroll_distances),
        mean_scroll_distance_px=(sum(scroll_distances) / len(scroll_distances)
                                 if scroll_distances else 0.0),
        data_loss_fraction=invalid / total if total else 0.0,
    )


def format_report(metrics: PassageMetrics, name: str = "passage") -> str:
    """Human-readable one-passage table."""
    rows = [
        ("line switch time (mean ms)", f"{metrics.mean_line_switch_time_ms:.1f}"),
        ("line switches measured", str(metrics.line_switch_count)),
        ("deviations", str(metrics.deviation_count)),
        ("deviation frequency (/line)", f"{metrics.deviation_frequency:.3f}"),
        ("deviation magnitude (mean lines)",
         f"{metrics.mean_deviation_magnitude_lines:.2f}"),
        ("max one-pass fixation (ms)", f"{metrics.max_one_pass_fixation_ms:.1f}"),
        ("scroll events", str(metrics.scroll_event_count)),
        ("scroll distance (mean px)", f"{metrics.mean_scroll_distance_px:.1f}"),
        ("data loss", f"{metrics.data_loss_fraction:.2%}"),
    ]
    width = max(len(r[0]) for r in rows)
    lines = [f"== {name} =="]
    lines += [f"  {label:<{width}}  {value}" for label, value in rows]
    return "\n".join(lines)
