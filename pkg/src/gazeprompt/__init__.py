"""Real-time gaze-behavior recognition and reading augmentation.

The engine turns a 120 Hz gaze stream into fixations, recognizes reading
behaviors (line following, return sweeps, line jumps, difficult words) and
emits augmentation directives for a reading UI, with line-based vertical
drift correction and a synthetic-reader test oracle.
"""

from .augmentation import (
    AugmentKind,
    AugmentationConfig,
    AugmentationController,
    AugmentationEvent,
    DwMode,
    Hsl,
    LsMode,
    Viewport,
)
from .behavior import (
    BehaviorEngine,
    BehaviorEvent,
    BehaviorKind,
    DwTrigger,
    LineTracker,
    WordPassTracker,
    identify_line,
    vote_totals,
)
from .calibration import (
    DriftProfile,
    SweepTrajectory,
    TargetLayout,
    correct_drift,
    decide_apply_correction,
    fit_drift_profile,
    score_dot_validation,
    score_line_validation,
    select_eye,
    target_layout,
)
from .metrics import PassageMetrics, ScrollSample, compute_metrics, format_report
from .pipeline import ReadingPipeline, run_stream
from .signal import FixationDetector, SampleFilter, run_offline
from .simulator import (
    GroundTruth,
    ReaderProfile,
    make_passage_layout,
    simulate,
    simulate_sweep_session,
)
from .types import (
    EngineConfig,
    Eye,
    Fixation,
    GazeSample,
    LineBox,
    PageLayout,
    ScreenGeometry,
    WordBox,
    default_screen,
    degrees_to_px,
    px_to_degrees,
    validate_layout,
)

__version__ = "0.1.0"
