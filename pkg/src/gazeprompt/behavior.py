"""Gaze behavior recognition over the fixation stream.

Three recognizers run per session:

* weighted-vote line identification over the latest fixations,
* line-switching classification (following / return-sweep / jump),
* one-pass difficult-word detection.

All threshold comparisons are strict: boundary values never trigger.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum

from .types import (
    EngineConfig,
    Fixation,
    NoLayoutError,
    PageLayout,
    ProtocolError,
    WordBox,
)

log = logging.getLogger(__name__)


class BehaviorKind(str, Enum):
    FOLLOWING = "following"
    SWITCH_RETURN_SWEEP = "switch_return_sweep"
    JUMP = "jump"
    DIFFICULT_WORD = "difficult_word"


class DwTrigger(str, Enum):
    DW0_FIRST_FIXATION = "DW0_first_fixation"
    DW1_REFIXATIONS = "DW1_refixations"
    DW2_TOTAL = "DW2_total"


@dataclass(frozen=True)
class BehaviorEvent:
    kind: BehaviorKind
    line_id: int
    at: int                             # microseconds
    word_id: int | None = None
    trigger: DwTrigger | None = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "line_id": self.line_id, "at": self.at}
        if self.word_id is not None:
            d["word_id"] = self.word_id
        if self.trigger is not None:
            d["trigger"] = self.trigger.value
        return d


@dataclass(frozen=True)
class LineVote:
    """One fixation's vote: its landing line and distance-derived weight."""

    landing_line: int
    weight: float
    normalized_distance: float


def cast_vote(fix: Fixation, layout: PageLayout) -> LineVote:
    """Landing line = smallest vertical distance to a line's center.

    The weight is 1 / (1 + |d|) with d the fixation's vertical offset from
    the landing line's center, normalized by half the line box height.
    """
    if not layout.lines:
        raise NoLayoutError("layout has no lines")
    best = min(layout.lines, key=lambda ln: (abs(fix.cy - ln.center_y), ln.line_id))
    half_h = best.height / 2.0
    d = (fix.cy - best.center_y) / half_h
    return LineVote(landing_line=best.line_id,
                    weight=1.0 / (1.0 + abs(d)),
                    normalized_distance=d)


def vote_totals(fixations: list[Fixation], layout: PageLayout) -> dict[int, float]:
    """Summed vote weight per landing line."""
    totals: dict[int, float] = {}
    for v in (cast_vote(f, layout) for f in fixations):
        totals[v.landing_line] = totals.get(v.landing_line, 0.0) + v.weight
    return totals


def identify_line(fixations: list[Fixation], layout: PageLayout) -> int:
    """Weighted vote over the given fixations (callers pass the latest <=3).

    Per-line weights are summed and the highest total wins; ties prefer the
    landing line of the most recent fixation, then earlier ones, then the
    smallest line id.
    """
    if not fixations:
        raise ValueError("need at least one fixation")
    votes = [cast_vote(f, layout) for f in fixations]
    totals: dict[int, float] = {}
    for v in votes:
        totals[v.landing_line] = totals.get(v.landing_line, 0.0) + v.weight
    best_total = max(totals.values())
    tied = [line for line, w in totals.items() if w == best_total]
    if len(tied) == 1:
        return tied[0]
    for v in reversed(votes):            # recency-biased tie break
        if v.landing_line in tied:
            return v.landing_line
    return min(tied)


def detect_return_sweep(prev: Fixation, nxt: Fixation, layout: PageLayout,
                        cfg: EngineConfig) -> bool:
    """Three criteria, all strict:

    1. leftward jump: prev.cx - nxt.cx beyond the horizontal threshold,
    2. landing in the left portion of the text block,
    3. landing at least one line box height below the launch fixation.
    """
    return (prev.cx - nxt.cx > cfg.t_ls0_px
            and nxt.cx < cfg.t_ls1_px(layout)
            and nxt.cy - prev.cy > cfg.t_ls2_px(layout))


class LineTracker:
    """Per-session line state machine fed completed fixations in order."""

    def __init__(self, layout: PageLayout, cfg: EngineConfig | None = None) -> None:
        self.cfg = cfg or EngineConfig()
        self.layout = layout
        self.window: deque[Fixation] = deque(maxlen=self.cfg.vote_window)
        self.current_line: int | None = None
        self.pending_line: int | None = None
        self.pending_count: int = 0
        self.prev_fixation: Fixation | None = None
        self.last_identified: int | None = None   # vote result of the last push
        self.stale_dropped = 0

    def push(self, fix: Fixation, layout_version: int | None = None) -> BehaviorEvent | None:
        """Classify the transition brought by one fixation.

        Fixations carrying a stale layout version are dropped (logged, not
        fatal): their coordinates belong to a screen state that no longer
        exists.
        """
        if layout_version is not None and layout_version != self.layout.layout_version:
            self.stale_dropped += 1
            self.last_identified = None
            log.warning("dropping fixation from layout v%s (active v%s)",
                        layout_version, self.layout.layout_version)
            return None

        prev = self.prev_fixation
        self.prev_fixation = fix

        if prev is not None and detect_return_sweep(prev, fix, self.layout, self.cfg):
            # the vote window restarts at the sweep's landing fixation
            self.window.clear()
            self.window.append(fix)
            self.current_line = identify_line(list(self.window), self.layout)
            self.last_identified = self.current_line
            self.pending_line = None
            self.pending_count = 0
            return BehaviorEvent(BehaviorKind.SWITCH_RETURN_SWEEP,
                                 line_id=self.current_line, at=fix.onset)

        self.window.append(fix)
        line = identify_line(list(self.window), self.layout)
        self.last_identified = line

        if self.current_line is None:
            self.current_line = line
            return BehaviorEvent(BehaviorKind.FOLLOWING, line_id=line, at=fix.onset)

        if line == self.current_line:
            self.pending_line = None
            self.pending_count = 0
            return BehaviorEvent(BehaviorKind.FOLLOWING, line_id=line, at=fix.onset)

        if line == self.pending_line:
            self.pending_count += 1
        else:
            self.pending_line = line
            self.pending_count = 1
        if self.pending_count >= self.cfg.jump_stability_count:
            self.current_line = line
            self.pending_line = None
            self.pending_count = 0
            return BehaviorEvent(BehaviorKind.JUMP, line_id=line, at=fix.onset)
        return None

    def on_layout_change(self, new_layout: PageLayout, scroll_dy: float,
                         line_id_map: dict[int, int] | None = None) -> None:
        """Adopt a new layout version.

        With a stable-identity map the tracked line survives the scroll and
        buffered fixations are translated along with the content; without
        one the tracker re-seeds from the next fixation.
        """
        if new_layout.layout_version != self.layout.layout_version + 1:
            raise ProtocolError(
                f"layout version must advance by 1: "
                f"{self.layout.layout_version} -> {new_layout.layout_version}")
        self.layout = new_layout
        if line_id_map is None:
            self.window.clear()
            self.current_line = None
            self.pending_line = None
            self.pending_count = 0
            self.prev_fixation = None
            self.last_identified = None
            return
        translated = [Fixation(cx=f.cx, cy=f.cy + scroll_dy, onset=f.onset,
                               duration=f.duration, sample_count=f.sample_count)
                      for f in self.window]
        self.window.clear()
        self.window.extend(translated)
        if self.prev_fixation is not None:
            f = self.prev_fixation
            self.prev_fixation = Fixation(cx=f.cx, cy=f.cy + scroll_dy, onset=f.onset,
                                          duration=f.duration, sample_count=f.sample_count)
        self.current_line = (line_id_map.get(self.current_line)
                             if self.current_line is not None else None)
        self.pending_line = (line_id_map.get(self.pending_line)
                             if self.pending_line is not None else None)
        self.last_identified = (line_id_map.get(self.last_identified)
                                if self.last_identified is not None else None)
        if self.pending_line is None:
            self.pending_count = 0


def assign_word(fix: Fixation, line_id: int, layout: PageLayout) -> WordBox | None:
    """Horizontal containment on the identified line; nearest word edge when
    the fixation falls between words, ties to the left word."""
    words = layout.words_on_line(line_id)
    if not words:
        return None
    for w in words:
        if w.left <= fix.cx <= w.right:
            return w

    def edge_distance(w: WordBox) -> float:
        if fix.cx < w.left:
            return w.left - fix.cx
        return fix.cx - w.right

    best = min(edge_distance(w) for w in words)
    candidates = [w for w in words if edge_distance(w) == best]
    return min(candidates, key=lambda w: w.left)


@dataclass
class WordPass:
    """Consecutive fixations on one word before gaze moves to another."""

    word_id: int
    first_fixation_duration: int
    total_duration: int
    refixation_count: int = 0
    fired: bool = False
    open: bool = True


class WordPassTracker:
    """One-pass difficult-word detection.

    A pass opens on the first fixation assigned to a word and closes when a
    fixation lands on a different word; a later revisit opens a fresh pass.
    At most one difficult-word event fires per pass, recording the earliest
    satisfied trigger.
    """

    def __init__(self, layout: PageLayout, cfg: EngineConfig | None = None) -> None:
        self.cfg = cfg or EngineConfig()
        self.layout = layout
        self.current: WordPass | None = None

    def push(self, fix: Fixation, line_id: int) -> BehaviorEvent | None:
        word = assign_word(fix, line_id, self.layout)
        if word is None:
            self.current = None
            return None

        if self.current is None or self.current.word_id != word.word_id:
            self.current = WordPass(word_id=word.word_id,
                                    first_fixation_duration=fix.duration,
                                    total_duration=fix.duration)
        else:
            self.current.refixation_count += 1
            self.current.total_duration += fix.duration

        if self.current.fired:
            return None
        trigger = self._check(self.current)
        if trigger is None:
            return None
        self.current.fired = True
        if self.cfg.stopword_suppression and word.function_word:
            return None
        return BehaviorEvent(BehaviorKind.DIFFICULT_WORD, line_id=word.line_id,
                             at=fix.end, word_id=word.word_id, trigger=trigger)

    def _check(self, wp: WordPass) -> DwTrigger | None:
        if wp.first_fixation_duration > self.cfg.t_dw0_us:
            return DwTrigger.DW0_FIRST_FIXATION
        if wp.refixation_count > self.cfg.t_dw1:
            return DwTrigger.DW1_REFIXATIONS
        if wp.total_duration > self.cfg.t_dw2_us:
            return DwTrigger.DW2_TOTAL
        return None

    def on_layout_change(self, new_layout: PageLayout,
                         word_id_map: dict[int, int] | None = None) -> None:
        self.layout = new_layout
        if self.current is None:
            return
        if word_id_map is None or self.current.word_id not in word_id_map:
            self.current = None
        else:
            self.current.word_id = word_id_map[self.current.word_id]


class BehaviorEngine:
    """Bundles the line tracker and word-pass tracker behind one feed."""

    def __init__(self, layout: PageLayout, cfg: EngineConfig | None = None) -> None:
        self.cfg = cfg or EngineConfig()
        self.layout = layout
        self.lines = LineTracker(layout, self.cfg)
        self.words = WordPassTracker(layout, self.cfg)

    def push(self, fix: Fixation, layout_version: int | None = None) -> list[BehaviorEvent]:
        events: list[BehaviorEvent] = []
        line_event = self.lines.push(fix, layout_version)
        if line_event is not None:
            events.append(line_event)
        # word passes follow the vote result, which tracks the physical line
        # even while a jump is still pending
        line = self.lines.last_identified
        if line is not None:
            word_event = self.words.push(fix, line)
            if word_event is not None:
                events.append(word_event)
        return events

    def on_layout_change(self, new_layout: PageLayout, scroll_dy: float = 0.0,
                         line_id_map: dict[int, int] | None = None,
                         word_id_map: dict[int, int] | None = None) -> None:
        self.lines.on_layout_change(new_layout, scroll_dy, line_id_map)
        self.words.on_layout_change(new_layout, word_id_map)
        self.layout = new_layout
