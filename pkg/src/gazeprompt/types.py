"""Shared vocabulary for the gaze engine: screen geometry, samples, fixations,
page layout and engine configuration.

All coordinates are screen pixels with the origin at the top-left corner and
y increasing downward. Timestamps are integer microseconds, monotone within a
session stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable


class Eye(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    AVERAGE = "average"

    @classmethod
    def from_code(cls, code: str) -> "Eye":
        try:
            return {"L": cls.LEFT, "R": cls.RIGHT, "A": cls.AVERAGE}[code]
        except KeyError:
            raise ValueError(f"unknown eye code {code!r}") from None

    @property
    def code(self) -> str:
        return {"left": "L", "right": "R", "average": "A"}[self.value]


class InvalidGeometryError(ValueError):
    pass


class StreamOrderError(RuntimeError):
    """Raised when a gaze stream delivers a non-increasing timestamp."""


class NoLayoutError(RuntimeError):
    pass


class UnderSampledError(RuntimeError):
    """A calibration/validation target received too few usable samples."""


class ProtocolError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScreenGeometry:
    """Physical display description used for pixel/degree conversion."""

    width_px: int
    height_px: int
    physical_width_cm: float
    physical_height_cm: float
    viewing_distance_cm: float

    def __post_init__(self) -> None:
        for name in ("width_px", "height_px", "physical_width_cm",
                     "physical_height_cm", "viewing_distance_cm"):
            if getattr(self, name) <= 0:
                raise InvalidGeometryError(f"{name} must be > 0")
        px_aspect = self.width_px / self.height_px
        cm_aspect = self.physical_width_cm / self.physical_height_cm
        if abs(px_aspect - cm_aspect) / cm_aspect > 0.01:
            raise InvalidGeometryError(
                f"pixel aspect {px_aspect:.4f} and physical aspect "
                f"{cm_aspect:.4f} disagree by more than 1%")

    @property
    def px_per_cm_x(self) -> float:
        return self.width_px / self.physical_width_cm

    @property
    def px_per_cm_y(self) -> float:
        return self.height_px / self.physical_height_cm


def default_screen(viewing_distance_cm: float = 65.0) -> ScreenGeometry:
    """24-inch 16:10 panel at 1920x1200, the geometry used throughout the
    demos and tests."""
    diag_cm = 24.0 * 2.54
    unit = math.hypot(16.0, 10.0)
    return ScreenGeometry(
        width_px=1920,
        height_px=1200,
        physical_width_cm=diag_cm * 16.0 / unit,
        physical_height_cm=diag_cm * 10.0 / unit,
        viewing_distance_cm=viewing_distance_cm,
    )


def px_to_degrees(offset_px: float, axis: str, geom: ScreenGeometry) -> float:
    """Visual angle in degrees subtended by an on-screen offset.

    axis is "horizontal" or "vertical"; the offset is measured from the
    screen-center gaze normal.
    """
    if geom.viewing_distance_cm <= 0:
        raise InvalidGeometryError("viewing distance must be > 0")
    cm = offset_px / _axis_px_per_cm(axis, geom)
    return math.degrees(math.atan(cm / geom.viewing_distance_cm))


def degrees_to_px(degrees: float, axis: str, geom: ScreenGeometry) -> float:
    """Inverse of px_to_degrees."""
    if geom.viewing_distance_cm <= 0:
        raise InvalidGeometryError("viewing distance must be > 0")
    cm = math.tan(math.radians(degrees)) * geom.viewing_distance_cm
    return cm * _axis_px_per_cm(axis, geom)


def _axis_px_per_cm(axis: str, geom: ScreenGeometry) -> float:
    if axis == "horizontal":
        return geom.px_per_cm_x
    if axis == "vertical":
        return geom.px_per_cm_y
    raise ValueError(f"axis must be 'horizontal' or 'vertical', got {axis!r}")


@dataclass(frozen=True)
class GazeSample:
    """One timestamped raw gaze point."""

    t: int                  # microseconds
    x: float
    y: float
    valid: bool = True
    eye: Eye = Eye.AVERAGE

    def clamped(self, geom: ScreenGeometry) -> "GazeSample":
        if not self.valid:
            return self
        return replace(
            self,
            x=min(max(self.x, 0.0), float(geom.width_px)),
            y=min(max(self.y, 0.0), float(geom.height_px)),
        )


@dataclass(frozen=True)
class Fixation:
    """A dispersion-stable gaze cluster."""

    cx: float
    cy: float
    onset: int              # microseconds
    duration: int           # microseconds
    sample_count: int

    @property
    def end(self) -> int:
        return self.onset + self.duration


@dataclass(frozen=True)
class LineBox:
    """Axis-aligned bounding box of one text line, top-to-bottom order."""

    line_id: int
    top: float
    bottom: float
    left: float
    right: float

    @property
    def center_y(self) -> float:
        return (self.top + self.bottom) / 2.0

    @property
    def height(self) -> float:
        return self.bottom - self.top


@dataclass(frozen=True)
class WordBox:
    word_id: int
    line_id: int
    left: float
    right: float
    text: str
    function_word: bool = False

    @property
    def center_x(self) -> float:
        return (self.left + self.right) / 2.0

    @property
    def width(self) -> float:
        return self.right - self.left


@dataclass(frozen=True)
class PageLayout:
    """Lines and words as boxes in screen space, versioned by scroll state."""

    layout_version: int
    lines: tuple[LineBox, ...]
    words: tuple[WordBox, ...]
    background: str = "light"   # light | dark

    def __init__(self, layout_version: int, lines: Iterable[LineBox],
                 words: Iterable[WordBox], background: str = "light") -> None:
        object.__setattr__(self, "layout_version", layout_version)
        object.__setattr__(self, "lines", tuple(lines))
        object.__setattr__(self, "words", tuple(words))
        object.__setattr__(self, "background", background)

    @property
    def text_left(self) -> float:
        return min(ln.left for ln in self.lines)

    @property
    def text_right(self) -> float:
        return max(ln.right for ln in self.lines)

    @property
    def text_width(self) -> float:
        return self.text_right - self.text_left

    @property
    def line_height(self) -> float:
        """Uniform glyph-box height shared by every line."""
        return self.lines[0].height

    def line(self, line_id: int) -> LineBox:
        for ln in self.lines:
            if ln.line_id == line_id:
                return ln
        raise KeyError(f"no line {line_id}")

    def word(self, word_id: int) -> WordBox:
        for w in self.words:
            if w.word_id == word_id:
                return w
        raise KeyError(f"no word {word_id}")

    def words_on_line(self, line_id: int) -> list[WordBox]:
        return [w for w in self.words if w.line_id == line_id]

    def translated(self, dy: float, layout_version: int | None = None) -> "PageLayout":
        """Copy with every box shifted vertically by dy (scroll reflow)."""
        version = self.layout_version + 1 if layout_version is None else layout_version
        return PageLayout(
            layout_version=version,
            lines=[replace(ln, top=ln.top + dy, bottom=ln.bottom + dy) for ln in self.lines],
            words=self.words,
            background=self.background,
        )


@dataclass(frozen=True)
class Violation:
    """One layout invariant violation; violations are data, not failures."""

    code: str
    message: str
    line_id: int | None = None
    word_id: int | None = None


def validate_layout(layout: PageLayout) -> list[Violation]:
    """Check every PageLayout invariant; an empty result means valid.

    The engine rejects a session layout on any non-empty result.
    """
    out: list[Violation] = []
    lines = layout.lines
    if not lines:
        out.append(Violation("empty", "layout has no lines"))
        return out

    ids = [ln.line_id for ln in lines]
    if ids != list(range(len(lines))):
        out.append(Violation("line_ids", f"line ids {ids} are not contiguous from 0"))

    for ln in lines:
        if ln.bottom <= ln.top:
            out.append(Violation("degenerate_line", f"line {ln.line_id} has bottom <= top",
                                 line_id=ln.line_id))
        if ln.right <= ln.left:
            out.append(Violation("degenerate_line", f"line {ln.line_id} has right <= left",
                                 line_id=ln.line_id))

    ordered = sorted(lines, key=lambda ln: ln.top)
    for a, b in zip(ordered, ordered[1:]):
        if b.top < a.bottom:
            out.append(Violation(
                "line_overlap",
                f"lines {a.line_id} and {b.line_id} overlap vertically",
                line_id=a.line_id))

    h0 = lines[0].height
    for ln in lines[1:]:
        if abs(ln.height - h0) > 0.5:
            out.append(Violation(
                "line_height",
                f"line {ln.line_id} height {ln.height:.2f} differs from "
                f"line 0 height {h0:.2f} by more than 0.5 px",
                line_id=ln.line_id))

    known_lines = {ln.line_id for ln in lines}
    seen_words: set[int] = set()
    for w in layout.words:
        if w.word_id in seen_words:
            out.append(Violation("word_id", f"word id {w.word_id} duplicated",
                                 word_id=w.word_id))
        seen_words.add(w.word_id)
        if w.line_id not in known_lines:
            out.append(Violation(
                "dangling_word",
                f"word {w.word_id} ({w.text!r}) references missing line {w.line_id}",
                line_id=w.line_id, word_id=w.word_id))
        if w.right <= w.left:
            out.append(Violation("degenerate_word", f"word {w.word_id} has right <= left",
                                 word_id=w.word_id))

    for line_id in known_lines:
        row = layout.words_on_line(line_id)
        for a, b in zip(row, row[1:]):
            if b.left < a.left:
                out.append(Violation(
                    "word_order",
                    f"words {a.word_id} and {b.word_id} on line {line_id} "
                    "are not ordered left-to-right",
                    line_id=line_id, word_id=b.word_id))

    return out


T_DW0_STEP_US = 50_000
T_DW2_STEP_US = 250_000


@dataclass(frozen=True)
class EngineConfig:
    """Recognition thresholds. Defaults are the shipped production values.

    The two duration thresholds for difficult-word detection are user
    adjustable in fixed steps (50 ms for t_dw0, 250 ms for t_dw2) and must
    stay quantized to those steps.
    """

    t_ls0_px: float = 500.0             # min leftward jump of a return sweep
    t_ls1_fraction: float = 1.0 / 3.0   # "left portion" as fraction of text width
    t_ls2_mode: str = "line_box_height"
    t_dw0_us: int = 500_000             # first-fixation duration threshold
    t_dw1: int = 4                      # refixation count threshold
    t_dw2_us: int = 1_500_000           # one-pass total duration threshold
    fixation_dispersion_px: float = 60.0
    min_fixation_duration_us: int = 100_000
    jump_stability_count: int = 3
    vote_window: int = 3
    scroll_pause_gap_us: int = 100_000
    stopword_suppression: bool = False
    # signal-stage knobs; defaults chosen for a 120 Hz stream
    median_window: int = 3
    blink_merge_gap_us: int = 75_000
    max_eye_velocity_dps: float = 1000.0

    def __post_init__(self) -> None:
        positive = (
            "t_ls0_px", "t_ls1_fraction", "t_dw0_us", "t_dw1", "t_dw2_us",
            "fixation_dispersion_px", "min_fixation_duration_us",
            "jump_stability_count", "scroll_pause_gap_us", "median_window",
            "blink_merge_gap_us", "max_eye_velocity_dps",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.vote_window < 1:
            raise ValueError("vote_window must be >= 1")
        if self.t_dw0_us % T_DW0_STEP_US:
            raise ValueError(f"t_dw0_us must be a multiple of {T_DW0_STEP_US} us")
        if self.t_dw2_us % T_DW2_STEP_US:
            raise ValueError(f"t_dw2_us must be a multiple of {T_DW2_STEP_US} us")
        if self.t_ls2_mode != "line_box_height":
            raise ValueError(f"unsupported t_ls2_mode {self.t_ls2_mode!r}")

    def t_ls1_px(self, layout: PageLayout) -> float:
        """Absolute x bound of the "left portion", measured from the text
        block's left edge (not screen x=0)."""
        return layout.text_left + self.t_ls1_fraction * layout.text_width

    def t_ls2_px(self, layout: PageLayout) -> float:
        return layout.line_height


# Fixed English stopword list used by layout producers to flag function
# words (articles, prepositions, pronouns, auxiliaries, conjunctions).
FUNCTION_WORDS = frozenset("""
a an the and or but nor so yet for of to in on at by from with about into
over after before under between through during above below up down out off
than as if then that this these those there here it its itself he him his
she her hers they them their theirs we us our ours you your yours i me my
mine who whom whose which what is am are was were be been being do does did
have has had will would shall should can could may might must not no
""".split())


def is_function_word(text: str) -> bool:
    return text.strip(".,;:!?\"'()[]").lower() in FUNCTION_WORDS
