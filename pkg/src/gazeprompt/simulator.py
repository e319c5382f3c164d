"""Synthetic reader: generates ground-truth-annotated 120 Hz gaze streams.

The simulator scripts a word-by-word reading session over a page layout,
then renders it to samples, applying noise, vertical drift and data loss as
the last step. Scripted events (return sweeps, deviations, jumps,
difficult-word passes) are constructed so that a correctly implemented
recognizer recovers them exactly on a zero-noise stream, which is what makes
the output usable as a test oracle.

Everything is deterministic under the profile seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .calibration import sweep_trajectories, target_layout
from .types import (
    EngineConfig,
    Eye,
    GazeSample,
    LineBox,
    PageLayout,
    ScreenGeometry,
    WordBox,
    default_screen,
    is_function_word,
)

SAMPLE_HZ = 120


def slot_us(n: int) -> int:
    """Timestamp of sample slot n on the exact 120 Hz grid."""
    return (n * 1_000_000) // SAMPLE_HZ


@dataclass(frozen=True)
class ReaderProfile:
    """Behavioral parameters of the synthetic reader."""

    fixation_ms_mean: float = 250.0
    fixation_ms_sd: float = 80.0
    fixation_ms_bounds: tuple[float, float] = (150.0, 450.0)
    saccade_len_words: tuple[int, int] = (1, 2)   # inclusive word step range
    saccade_gap_slots: int = 3                    # ~25 ms without samples
    sweep_gap_slots: int = 10                     # ~83 ms without samples
    refixation_prob: float = 0.1                  # benign 2-fixation passes
    hesitation_prob: float = 0.0                  # difficult-word injection
    deviation_prob: float = 0.0                   # sweep lands one line long
    noise_sd_px: float = 0.0
    drift_knots: tuple[tuple[float, float], ...] | None = None
    data_loss_rate: float = 0.0
    min_fixated_width_px: float = 70.0            # narrower words are skipped
    hard_word_min_width_px: float = 120.0         # refixation zigzag needs room
    seed: int = 0

    def drift_at(self, y: float) -> float:
        if not self.drift_knots:
            return 0.0
        ys = [k[0] for k in self.drift_knots]
        offs = [k[1] for k in self.drift_knots]
        return float(np.interp(y, ys, offs))


@dataclass(frozen=True)
class ScriptedFixation:
    index: int
    word_id: int
    line_id: int
    cx: float
    cy: float
    onset: int
    duration: int         # last-slot minus first-slot time, as detected

    @property
    def end(self) -> int:
        return self.onset + self.duration


@dataclass(frozen=True)
class SweepRecord:
    from_line: int
    target_line: int
    landed_line: int
    at: int               # landing fixation onset

    @property
    def deviated(self) -> bool:
        return self.landed_line != self.target_line

    @property
    def magnitude(self) -> int:
        return abs(self.landed_line - self.target_line)


@dataclass(frozen=True)
class JumpRecord:
    line_id: int
    at: int


@dataclass(frozen=True)
class DwRecord:
    word_id: int
    line_id: int
    trigger: str          # DW0_first_fixation | DW1_refixations | DW2_total
    at: int


@dataclass
class GroundTruth:
    fixations: list[ScriptedFixation] = field(default_factory=list)
    sweeps: list[SweepRecord] = field(default_factory=list)
    jumps: list[JumpRecord] = field(default_factory=list)
    difficult_words: list[DwRecord] = field(default_factory=list)
    scrolls: list[tuple[int, float]] = field(default_factory=list)
    sample_fixation_ids: list[int] = field(default_factory=list)

    def line_at(self, t_us: int) -> int | None:
        """Ground-truth line of the fixation covering (or latest before) t."""
        current = None
        for f in self.fixations:
            if f.onset > t_us:
                break
            current = f.line_id
        return current

    def to_dict(self) -> dict:
        return {
            "fixations": [vars(f) for f in self.fixations],
            "sweeps": [vars(s) for s in self.sweeps],
            "jumps": [vars(j) for j in self.jumps],
            "difficult_words": [vars(d) for d in self.difficult_words],
            "scrolls": [[t, dy] for t, dy in self.scrolls],
            "sample_fixation_ids": self.sample_fixation_ids,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        return cls(
            fixations=[ScriptedFixation(**f) for f in d["fixations"]],
            sweeps=[SweepRecord(**s) for s in d["sweeps"]],
            jumps=[JumpRecord(**j) for j in d["jumps"]],
            difficult_words=[DwRecord(**w) for w in d["difficult_words"]],
            scrolls=[(t, dy) for t, dy in d.get("scrolls", [])],
            sample_fixation_ids=list(d.get("sample_fixation_ids", [])),
        )


@dataclass(frozen=True)
class _Planned:
    """One scripted fixation before rendering."""

    word_id: int
    line_id: int
    x: float
    y: float
    start_slot: int
    n_slots: int

    @property
    def end_slot(self) -> int:
        return self.start_slot + self.n_slots - 1


def _ms_to_slots(ms: float) -> int:
    return max(2, int(round(ms * SAMPLE_HZ / 1000.0)))


class _Planner:
    def __init__(self, layout: PageLayout, profile: ReaderProfile,
                 rng: np.random.Generator, cfg: EngineConfig) -> None:
        self.layout = layout
        self.profile = profile
        self.rng = rng
        self.cfg = cfg
        self.plan: list[_Planned] = []
        self.truth = GroundTruth()
        self.slot = 0

    def fixatable(self, line_id: int) -> list[WordBox]:
        words = [w for w in self.layout.words_on_line(line_id)
                 if w.width >= self.profile.min_fixated_width_px]
        if not words:
            raise ValueError(f"line {line_id} has no fixatable words")
        return words

    def _duration_slots(self) -> int:
        lo, hi = self.profile.fixation_ms_bounds
        ms = float(np.clip(self.rng.normal(self.profile.fixation_ms_mean,
                                           self.profile.fixation_ms_sd), lo, hi))
        return _ms_to_slots(ms)

    def add_fixation(self, word: WordBox, x: float, gap_slots: int,
                     n_slots: int | None = None) -> _Planned:
        line = self.layout.line(word.line_id)
        start = self.slot + gap_slots if self.plan else 0
        p = _Planned(word_id=word.word_id, line_id=word.line_id,
                     x=x, y=line.center_y, start_slot=start,
                     n_slots=n_slots or self._duration_slots())
        self.plan.append(p)
        self.slot = p.end_slot + 1
        return p

    def read_word(self, word: WordBox, gap_slots: int) -> None:
        """Benign pass: one fixation, occasionally two on wide words."""
        wide = word.width >= self.profile.hard_word_min_width_px
        refix = wide and self.rng.random() < self.profile.refixation_prob
        if not refix:
            self.add_fixation(word, word.center_x, gap_slots)
            return
        # the two landing points must clear the dispersion window to
        # register as separate fixations
        self.add_fixation(word, word.center_x - 0.3 * word.width, gap_slots)
        self.add_fixation(word, word.center_x + 0.3 * word.width,
                          self.profile.saccade_gap_slots,
                          n_slots=_ms_to_slots(200.0))

    def hesitate(self, word: WordBox, gap_slots: int) -> None:
        """Difficult-word pass; picks a recipe that satisfies exactly one
        trigger strictly."""
        wide = word.width >= self.profile.hard_word_min_width_px
        choices = ["DW0_first_fixation"]
        if wide:
            choices += ["DW1_refixations", "DW2_total"]
        trigger = choices[int(self.rng.integers(len(choices)))]
        if trigger == "DW0_first_fixation":
            p = self.add_fixation(word, word.center_x, gap_slots,
                                  n_slots=_ms_to_slots(600.0))
            fired_at = p
        elif trigger == "DW1_refixations":
            # six short fixations: 5 refixations > 4, total well under T_DW2
            for i in range(6):
                x = word.center_x + (0.3 if i % 2 else -0.3) * word.width
                p = self.add_fixation(word, x, gap_slots if i == 0
                                      else self.profile.saccade_gap_slots,
                                      n_slots=_ms_to_slots(200.0))
            fired_at = p
        else:
            # four medium fixations: total ~1767 ms > T_DW2, each under T_DW0
            for i in range(4):
                x = word.center_x + (0.3 if i % 2 else -0.3) * word.width
                p = self.add_fixation(word, x, gap_slots if i == 0
                                      else self.profile.saccade_gap_slots,
                                      n_slots=_ms_to_slots(450.0))
            fired_at = p
        # the engine reports the event at the firing fixation's end
        self.truth.difficult_words.append(DwRecord(
            word_id=word.word_id, line_id=word.line_id, trigger=trigger,
            at=slot_us(fired_at.end_slot)))

    def read_line(self, line_id: int, start_word_index: int = 0) -> None:
        words = self.fixatable(line_id)
        i = start_word_index
        while i < len(words):
            word = words[i]
            gap = self.profile.saccade_gap_slots
            if (self.profile.hesitation_prob > 0
                    and self.rng.random() < self.profile.hesitation_prob):
                self.hesitate(word, gap)
            else:
                self.read_word(word, gap)
            if i == len(words) - 1:
                break
            step = int(self.rng.integers(self.profile.saccade_len_words[0],
                                         self.profile.saccade_len_words[1] + 1))
            i = min(i + step, len(words) - 1)

    def sweep_to(self, from_line: int, target: int) -> None:
        """Return sweep, optionally deviating one line past the target."""
        n_lines = len(self.layout.lines)
        deviate = (self.profile.deviation_prob > 0
                   and self.rng.random() < self.profile.deviation_prob
                   and target + 1 < n_lines
                   and len(self.fixatable(target)) >= 3)
        prev = self.plan[-1]
        if not deviate:
            landing_word = self.fixatable(target)[0]
            p = self.add_fixation(landing_word, landing_word.center_x,
                                  self.profile.sweep_gap_slots)
            self._assert_sweep_geometry(prev, p)
            self.truth.sweeps.append(SweepRecord(
                from_line=from_line, target_line=target, landed_line=target,
                at=slot_us(p.start_slot)))
            self.read_line(target, start_word_index=1)
            return

        landed = target + 1
        stray_word = self.fixatable(landed)[0]
        p = self.add_fixation(stray_word, stray_word.center_x,
                              self.profile.sweep_gap_slots)
        self._assert_sweep_geometry(prev, p)
        self.truth.sweeps.append(SweepRecord(
            from_line=from_line, target_line=target, landed_line=landed,
            at=slot_us(p.start_slot)))
        # corrective saccade up to the intended line; the tracker needs
        # three consistent votes there before committing a jump event
        words = self.fixatable(target)
        stabilizers = []
        for k in range(3):
            stabilizers.append(self.add_fixation(
                words[k], words[k].center_x, self.profile.saccade_gap_slots))
        self.truth.jumps.append(JumpRecord(
            line_id=target, at=slot_us(stabilizers[2].start_slot)))
        self.read_line(target, start_word_index=3)

    def _assert_sweep_geometry(self, prev: _Planned, landing: _Planned) -> None:
        dx = prev.x - landing.x
        dy = landing.y - prev.y
        if dx <= self.cfg.t_ls0_px:
            raise ValueError(
                f"layout too narrow for a detectable sweep: leftward jump "
                f"{dx:.0f} px <= {self.cfg.t_ls0_px:.0f} px")
        if landing.x >= self.cfg.t_ls1_px(self.layout):
            raise ValueError("sweep landing is not in the left portion")
        if dy <= self.cfg.t_ls2_px(self.layout):
            raise ValueError(
                f"line pitch {dy:.0f} px must exceed line box height "
                f"{self.cfg.t_ls2_px(self.layout):.0f} px for sweep detection")


def plan_session(layout: PageLayout, profile: ReaderProfile,
                 rng: np.random.Generator,
                 cfg: EngineConfig | None = None) -> tuple[list[_Planned], GroundTruth]:
    cfg = cfg or EngineConfig()
    if len(layout.lines) > 1:
        pitch = layout.lines[1].top - layout.lines[0].top
        if pitch <= cfg.fixation_dispersion_px:
            raise ValueError(
                f"line pitch {pitch:.0f} px must exceed the dispersion "
                f"threshold {cfg.fixation_dispersion_px:.0f} px or adjacent-"
                "line fixations merge")
    planner = _Planner(layout, profile, rng, cfg)
    n_lines = len(layout.lines)
    planner.read_line(0)
    for line_id in range(1, n_lines):
        planner.sweep_to(line_id - 1, line_id)
    return planner.plan, planner.truth


def _render(plan: list[_Planned], truth: GroundTruth, profile: ReaderProfile,
            rng: np.random.Generator) -> list[GazeSample]:
    samples: list[GazeSample] = []
    for idx, p in enumerate(plan):
        truth.fixations.append(ScriptedFixation(
            index=idx, word_id=p.word_id, line_id=p.line_id, cx=p.x, cy=p.y,
            onset=slot_us(p.start_slot),
            duration=slot_us(p.end_slot) - slot_us(p.start_slot)))
        drift = profile.drift_at(p.y)
        for slot in range(p.start_slot, p.end_slot + 1):
            x, y = p.x, p.y + drift
            if profile.noise_sd_px > 0:
                x += rng.normal(0.0, profile.noise_sd_px)
                y += rng.normal(0.0, profile.noise_sd_px)
            valid = True
            if profile.data_loss_rate > 0:
                valid = rng.random() >= profile.data_loss_rate
            samples.append(GazeSample(t=slot_us(slot), x=x, y=y, valid=valid,
                                      eye=Eye.AVERAGE))
            truth.sample_fixation_ids.append(idx)
    return samples


def simulate(layout: PageLayout, profile: ReaderProfile,
             cfg: EngineConfig | None = None) -> tuple[list[GazeSample], GroundTruth]:
    """Scripted reading session over the layout: samples plus ground truth."""
    rng = np.random.default_rng(profile.seed)
    plan, truth = plan_session(layout, profile, rng, cfg)
    samples = _render(plan, truth, profile, rng)
    return samples, truth


def simulate_sweep_session(kind: str, profile: ReaderProfile,
                           geom: ScreenGeometry | None = None,
                           duration_us: int = 4_000_000,
                           ) -> list[tuple[float, list[GazeSample]]]:
    """Pursuit samples along each line of a lines5/lines4 target layout."""
    geom = geom or default_screen()
    rng = np.random.default_rng(profile.seed)
    layout = target_layout(kind)
    out: list[tuple[float, list[GazeSample]]] = []
    slot = 0
    for traj in sweep_trajectories(layout, geom, duration_us=duration_us):
        start_slot = slot
        line_samples: list[GazeSample] = []
        drift = profile.drift_at(traj.y_px)
        while slot_us(slot) - slot_us(start_slot) <= duration_us:
            t_rel = slot_us(slot) - slot_us(start_slot)
            x, y = traj.position(t_rel)
            y += drift
            if profile.noise_sd_px > 0:
                x += rng.normal(0.0, profile.noise_sd_px)
                y += rng.normal(0.0, profile.noise_sd_px)
            valid = True
            if profile.data_loss_rate > 0:
                valid = rng.random() >= profile.data_loss_rate
            line_samples.append(GazeSample(t=slot_us(slot), x=x, y=y, valid=valid))
            slot += 1
        out.append((traj.y_px, line_samples))
        slot += 60   # half-second pause between lines
    return out


def scroll_while_reading_trace(layout: PageLayout, scroll_dy: float,
                               word_index: int = 2,
                               ) -> tuple[list[GazeSample], int, PageLayout]:
    """Reader steady on one word while the page scrolls mid-fixation.

    Returns (samples, scroll timestamp, post-scroll layout). Gaze follows the
    content, so samples after the scroll shift by scroll_dy; with correct
    accumulator translation the engine sees a single fixation and no jump.
    """
    word = layout.words[word_index]
    line = layout.line(word.line_id)
    x, y = word.center_x, line.center_y
    samples = []
    scroll_slot = 24
    for slot in range(48):
        dy = scroll_dy if slot >= scroll_slot else 0.0
        samples.append(GazeSample(t=slot_us(slot), x=x, y=y + dy))
    scroll_t = (slot_us(scroll_slot - 1) + slot_us(scroll_slot)) // 2
    return samples, scroll_t, layout.translated(scroll_dy)


def match_events(truth: GroundTruth, events, tol_us: int = 50_000) -> list[str]:
    """Compare recognized behavior events against the scripted ground truth.

    Identity sequences (kind, line, word, trigger) must match exactly; event
    timestamps may skew by a few sample periods because the causal median
    filter shifts cluster boundaries by up to one slot per transition.
    Returns a list of mismatch descriptions, empty when equivalent.
    """
    problems: list[str] = []
    sweeps = [e for e in events if e.kind.value == "switch_return_sweep"]
    jumps = [e for e in events if e.kind.value == "jump"]
    dws = [e for e in events if e.kind.value == "difficult_word"]

    if [e.line_id for e in sweeps] != [s.landed_line for s in truth.sweeps]:
        problems.append(
            f"sweep lines {[e.line_id for e in sweeps]} != "
            f"{[s.landed_line for s in truth.sweeps]}")
    else:
        for e, s in zip(sweeps, truth.sweeps):
            if abs(e.at - s.at) > tol_us:
                problems.append(f"sweep at {e.at} skewed from {s.at}")

    if [e.line_id for e in jumps] != [j.line_id for j in truth.jumps]:
        problems.append(
            f"jump lines {[e.line_id for e in jumps]} != "
            f"{[j.line_id for j in truth.jumps]}")
    else:
        for e, j in zip(jumps, truth.jumps):
            if abs(e.at - j.at) > tol_us:
                problems.append(f"jump at {e.at} skewed from {j.at}")

    got_dw = [(e.word_id, e.trigger.value) for e in dws]
    want_dw = [(d.word_id, d.trigger) for d in truth.difficult_words]
    if got_dw != want_dw:
        problems.append(f"difficult words {got_dw} != {want_dw}")
    else:
        for e, d in zip(dws, truth.difficult_words):
            if abs(e.at - d.at) > tol_us:
                problems.append(f"difficult word at {e.at} skewed from {d.at}")
    return problems


# ---------------------------------------------------------------------------
# Layout fixture generator


_WORD_SHAPES = [4, 6, 5, 7, 4, 8, 5, 6, 9, 5, 7, 4]
_FILLER = ["that", "with", "from", "were", "this", "have", "they", "been"]
_CONTENT = ["orchard", "lantern", "meadow", "harvest", "whisper", "granite",
            "thicket", "hollow", "ember", "saddle", "bramble", "copper",
            "maple", "cinder", "willow", "harbor", "tundra", "prairie"]


def make_passage_layout(n_lines: int = 8, font_px: float = 48.0,
                        screen: ScreenGeometry | None = None,
                        top: float = 120.0, left: float = 100.0,
                        line_spacing: float = 1.5, seed: int = 0,
                        version: int = 1, background: str = "light") -> PageLayout:
    """Deterministic multi-line passage layout for tests and demos.

    Word boxes use a simple average-glyph-width model; line boxes are the
    glyph extent with spacing applied between lines, so line pitch exceeds
    box height and adjacent-line sweeps are geometrically detectable.
    """
    screen = screen or default_screen()
    rng = np.random.default_rng(seed)
    char_px = 0.55 * font_px
    gap_px = 0.5 * font_px
    height = font_px
    pitch = font_px * line_spacing
    right_margin = screen.width_px - 100.0

    lines: list[LineBox] = []
    words: list[WordBox] = []
    wid = 0
    for li in range(n_lines):
        y0 = top + li * pitch
        x = left
        line_right = x
        while True:
            n_chars = _WORD_SHAPES[int(rng.integers(len(_WORD_SHAPES)))]
            w_px = n_chars * char_px
            if x + w_px > right_margin:
                break
            text = (_FILLER[int(rng.integers(len(_FILLER)))] if n_chars <= 4
                    else _CONTENT[int(rng.integers(len(_CONTENT)))])
            words.append(WordBox(word_id=wid, line_id=li, left=x, right=x + w_px,
                                 text=text, function_word=is_function_word(text)))
            line_right = x + w_px
            x += w_px + gap_px
            wid += 1
        lines.append(LineBox(line_id=li, top=y0, bottom=y0 + height,
                             left=left, right=line_right))
    # uniform line boxes: stretch every line's right edge to the widest
    widest = max(ln.right for ln in lines)
    lines = [replace(ln, right=widest) for ln in lines]
    return PageLayout(layout_version=version, lines=lines, words=words,
                      background=background)
