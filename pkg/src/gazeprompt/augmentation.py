"""Maps recognized behaviors to render directives for the reading UI.

The controller is a pure state machine over the session's behavior-event
stream. Invariants it maintains: at most one line augmentation and at most
one magnifier active at any time.
"""
from __future__ import annotations

import colorsys
import logging
from dataclasses import dataclass
from enum import Enum

from .behavior import BehaviorEvent, BehaviorKind
from .types import Fixation, PageLayout

log = logging.getLogger(__name__)

SPEAK_DEBOUNCE_US = 2_000_000
MAGNIFIER_HYSTERESIS_PX = 20.0
MAGNIFIER_GAP_PX = 10.0
UPPER_BORDER_FRACTION = 0.25


class LsMode(str, Enum):
    HIGHLIGHT = "highlight"
    ARROW = "arrow"
    OFF = "off"


class DwMode(str, Enum):
    MAGNIFY = "magnify"
    TTS = "tts"
    OFF = "off"


class AugmentKind(str, Enum):
    HIGHLIGHT_LINE = "highlight_line"
    ARROW_LINE = "arrow_line"
    MAGNIFY_WORD = "magnify_word"
    SPEAK_WORD = "speak_word"
    DISMISS_MAGNIFIER = "dismiss_magnifier"
    CLEAR_LINE = "clear_line"


@dataclass(frozen=True)
class Hsl:
    """Hue/lightness pair; saturation is pinned at 100%."""

    hue: float          # 0..360
    lightness: float    # 0..100

    def to_rgb(self) -> tuple[int, int, int]:
        r, g, b = colorsys.hls_to_rgb(self.hue / 360.0, self.lightness / 100.0, 1.0)
        return (round(r * 255), round(g * 255), round(b * 255))


YELLOW = Hsl(60.0, 50.0)    # RGB (255, 255, 0)
BLUE = Hsl(240.0, 50.0)     # RGB (0, 0, 255)


@dataclass(frozen=True)
class Viewport:
    top: float
    height: float


@dataclass(frozen=True)
class AugmentationConfig:
    ls_mode: LsMode = LsMode.HIGHLIGHT
    dw_mode: DwMode = DwMode.MAGNIFY
    ls_color: Hsl | None = None        # None = scheme default
    magnifier_scale: float = 3.0       # UI reports its max supported level
    background: str = "light"

    def resolved_ls_color(self) -> Hsl:
        if self.ls_color is not None:
            return self.ls_color
        if self.ls_mode == LsMode.ARROW:
            return BLUE if self.background == "light" else YELLOW
        return YELLOW if self.background == "light" else BLUE


@dataclass(frozen=True)
class AugmentationEvent:
    kind: AugmentKind
    at: int
    line_id: int | None = None
    word_id: int | None = None
    color: tuple[int, int, int] | None = None
    placement: str | None = None       # above | below, magnifier only

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value, "at": self.at}
        for key in ("line_id", "word_id", "placement"):
            val = getattr(self, key)
            if val is not None:
                d[key] = val
        if self.color is not None:
            d["color"] = list(self.color)
        return d


@dataclass(frozen=True)
class MagnifierState:
    word_id: int
    bounds: tuple[float, float, float, float]      # left, top, right, bottom
    word_box: tuple[float, float, float, float]


class AugmentationController:
    def __init__(self, cfg: AugmentationConfig | None = None) -> None:
        self.cfg = cfg or AugmentationConfig()
        self.active_line: int | None = None
        self.magnifier: MagnifierState | None = None
        self._last_spoken: dict[int, int] = {}     # word_id -> timestamp

    def on_behavior(self, ev: BehaviorEvent, layout: PageLayout,
                    viewport: Viewport | None = None,
                    layout_version: int | None = None) -> list[AugmentationEvent]:
        if layout_version is not None and layout_version != layout.layout_version:
            log.warning("dropping behavior event for stale layout v%s", layout_version)
            return []
        if ev.kind == BehaviorKind.DIFFICULT_WORD:
            return self._on_difficult_word(ev, layout, viewport)
        return self._on_line_event(ev)

    def _on_line_event(self, ev: BehaviorEvent) -> list[AugmentationEvent]:
        if self.cfg.ls_mode == LsMode.OFF:
            return []
        if ev.line_id == self.active_line:
            return []          # refresh only when the line changed
        out: list[AugmentationEvent] = []
        if self.active_line is not None:
            out.append(AugmentationEvent(AugmentKind.CLEAR_LINE, at=ev.at,
                                         line_id=self.active_line))
        kind = (AugmentKind.HIGHLIGHT_LINE if self.cfg.ls_mode == LsMode.HIGHLIGHT
                else AugmentKind.ARROW_LINE)
        out.append(AugmentationEvent(kind, at=ev.at, line_id=ev.line_id,
                                     color=self.cfg.resolved_ls_color().to_rgb()))
        self.active_line = ev.line_id
        return out

    def _on_difficult_word(self, ev: BehaviorEvent, layout: PageLayout,
                           viewport: Viewport | None) -> list[AugmentationEvent]:
        if self.cfg.dw_mode == DwMode.OFF or ev.word_id is None:
            return []
        if self.cfg.dw_mode == DwMode.TTS:
            last = self._last_spoken.get(ev.word_id)
            if last is not None and ev.at - last < SPEAK_DEBOUNCE_US:
                return []
            self._last_spoken[ev.word_id] = ev.at
            return [AugmentationEvent(AugmentKind.SPEAK_WORD, at=ev.at,
                                      word_id=ev.word_id, line_id=ev.line_id)]

        out: list[AugmentationEvent] = []
        if self.magnifier is not None:
            out.append(AugmentationEvent(AugmentKind.DISMISS_MAGNIFIER, at=ev.at,
                                         word_id=self.magnifier.word_id))
        word = layout.word(ev.word_id)
        line = layout.line(word.line_id)
        viewport = viewport or Viewport(top=0.0, height=1200.0)
        # below when the word's line sits near the upper border, else above
        near_top = line.top < viewport.top + UPPER_BORDER_FRACTION * viewport.height
        placement = "below" if near_top else "above"
        self.magnifier = MagnifierState(
            word_id=ev.word_id,
            bounds=self._magnifier_bounds(word, line, placement),
            word_box=(word.left, line.top, word.right, line.bottom),
        )
        out.append(AugmentationEvent(AugmentKind.MAGNIFY_WORD, at=ev.at,
                                     word_id=ev.word_id, line_id=ev.line_id,
                                     placement=placement))
        return out

    def _magnifier_bounds(self, word, line, placement: str):
        scale = self.cfg.magnifier_scale
        w = word.width * scale
        h = line.height * scale
        cx = word.center_x
        if placement == "above":
            bottom = line.top - MAGNIFIER_GAP_PX
            top = bottom - h
        else:
            top = line.bottom + MAGNIFIER_GAP_PX
            bottom = top + h
        return (cx - w / 2.0, top, cx + w / 2.0, bottom)

    def on_fixation(self, fix: Fixation) -> AugmentationEvent | None:
        """Dismiss the magnifier once gaze leaves both it and the source
        word, with a hysteresis margin against fixation jitter."""
        if self.magnifier is None:
            return None
        m = MAGNIFIER_HYSTERESIS_PX
        inside = any(
            (l - m) <= fix.cx <= (r + m) and (t - m) <= fix.cy <= (b + m)
            for (l, t, r, b) in (self.magnifier.bounds, self.magnifier.word_box))
        if inside:
            return None
        word_id = self.magnifier.word_id
        self.magnifier = None
        return AugmentationEvent(AugmentKind.DISMISS_MAGNIFIER, at=fix.onset,
                                 word_id=word_id)
