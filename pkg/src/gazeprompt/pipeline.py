"""The per-session recognition pipeline.

One ReadingPipeline per session wires the stages together:

    raw sample -> filter -> (drift correction) -> fixation detection
               -> behavior recognition -> augmentation

Per-sample wall-clock processing time is recorded so the latency contract
(p99 well under the 8.3 ms inter-sample budget) stays observable.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .augmentation import (
    AugmentationConfig,
    AugmentationController,
    AugmentationEvent,
    Viewport,
)
from .behavior import BehaviorEngine, BehaviorEvent
from .calibration import DriftProfile, correct_drift
from .metrics import ScrollSample, compute_metrics
from .signal import FixationDetector, SampleFilter
from .simulator import GroundTruth
from .types import EngineConfig, Fixation, GazeSample, PageLayout, ScreenGeometry


@dataclass
class PipelineOutput:
    """Everything produced while consuming one sample."""

    fixation: Fixation | None = None
    behavior: list[BehaviorEvent] = field(default_factory=list)
    augment: list[AugmentationEvent] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.fixation or self.behavior or self.augment)


class ReadingPipeline:
    def __init__(self, layout: PageLayout, geom: ScreenGeometry,
                 engine_cfg: EngineConfig | None = None,
                 aug_cfg: AugmentationConfig | None = None,
                 drift_profile: DriftProfile | None = None,
                 viewport: Viewport | None = None) -> None:
        self.geom = geom
        self.cfg = engine_cfg or EngineConfig()
        self.layout = layout
        self.drift_profile = drift_profile
        self.viewport = viewport or Viewport(top=0.0, height=float(geom.height_px))
        self.filter = SampleFilter(geom, self.cfg)
        self.detector = FixationDetector(self.cfg)
        self.behavior = BehaviorEngine(layout, self.cfg)
        self.augmenter = AugmentationController(aug_cfg)
        self.fixations: list[Fixation] = []
        self.events: list[BehaviorEvent] = []
        self.augments: list[AugmentationEvent] = []
        self.scrolls: list[ScrollSample] = []
        self.latencies_ns: list[int] = []
        self.samples_total = 0
        self.samples_invalid = 0

    def process_sample(self, s: GazeSample) -> PipelineOutput:
        start = time.perf_counter_ns()
        out = self._process(s)
        self.latencies_ns.append(time.perf_counter_ns() - start)
        return out

    def _process(self, s: GazeSample) -> PipelineOutput:
        self.samples_total += 1
        if not s.valid:
            self.samples_invalid += 1
        out = PipelineOutput()
        filtered = self.filter.push(s)
        if filtered is None:
            return out
        if self.drift_profile is not None:
            filtered = correct_drift(filtered, self.drift_profile)
        fixation = self.detector.push(filtered)
        if fixation is not None:
            self._consume_fixation(fixation, out)
        return out

    def _consume_fixation(self, fixation: Fixation, out: PipelineOutput) -> None:
        out.fixation = fixation
        self.fixations.append(fixation)
        events = self.behavior.push(fixation)
        out.behavior.extend(events)
        self.events.extend(events)
        dismiss = self.augmenter.on_fixation(fixation)
        if dismiss is not None:
            out.augment.append(dismiss)
        for ev in events:
            out.augment.extend(self.augmenter.on_behavior(
                ev, self.behavior.layout, viewport=self.viewport))
        self.augments.extend(out.augment)

    def reconfigure(self, engine_cfg: EngineConfig | None = None,
                    aug_cfg: AugmentationConfig | None = None) -> None:
        """Apply re-customized thresholds to the live stages."""
        if engine_cfg is not None:
            self.cfg = engine_cfg
            self.filter.cfg = engine_cfg
            self.detector.cfg = engine_cfg
            self.behavior.cfg = engine_cfg
            self.behavior.lines.cfg = engine_cfg
            self.behavior.words.cfg = engine_cfg
        if aug_cfg is not None:
            self.augmenter.cfg = aug_cfg

    def on_scroll(self, t_us: int, dy: float) -> None:
        self.scrolls.append(ScrollSample(t=t_us, dy=dy))

    def on_layout(self, new_layout: PageLayout, scroll_dy: float = 0.0,
                  line_id_map: dict[int, int] | None = None,
                  word_id_map: dict[int, int] | None = None) -> None:
        """Adopt a new layout version mid-session (scroll or reflow)."""
        if scroll_dy:
            self.filter.on_scroll(scroll_dy)
            self.detector.on_scroll(scroll_dy)
        self.behavior.on_layout_change(new_layout, scroll_dy,
                                       line_id_map, word_id_map)
        self.layout = new_layout

    def finish(self) -> PipelineOutput:
        """Flush the open accumulator at stream end."""
        out = PipelineOutput()
        tail = self.detector.flush()
        if tail is not None:
            self._consume_fixation(tail, out)
        return out

    def latency_percentiles_ms(self) -> dict[str, float]:
        if not self.latencies_ns:
            return {"p50": 0.0, "p99": 0.0, "max": 0.0}
        arr = np.asarray(self.latencies_ns, dtype=np.float64) / 1e6
        return {"p50": float(np.percentile(arr, 50)),
                "p99": float(np.percentile(arr, 99)),
                "max": float(arr.max())}

    def passage_metrics(self, truth: GroundTruth | None = None):
        return compute_metrics(self.fixations, self.events, self.scrolls,
                               self.layout, truth=truth,
                               sample_counts=(self.samples_total,
                                              self.samples_invalid),
                               cfg=self.cfg)


def run_stream(samples, layout: PageLayout, geom: ScreenGeometry,
               engine_cfg: EngineConfig | None = None,
               aug_cfg: AugmentationConfig | None = None,
               drift_profile: DriftProfile | None = None) -> ReadingPipeline:
    """Convenience: push an entire sample stream through a fresh pipeline."""
    pipe = ReadingPipeline(layout, geom, engine_cfg, aug_cfg, drift_profile)
    for s in samples:
        pipe.process_sample(s)
    pipe.finish()
    return pipe
