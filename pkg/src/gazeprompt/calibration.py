"""Calibration and validation support: target-presentation geometry,
validation scoring, dominant-eye selection, and line-based vertical drift
correction.

The vendor's dot-calibration regression runs inside the tracker; this module
owns everything around it: where targets go, how validation error is scored,
which eye's stream to keep, and how per-line vertical offsets are fitted and
applied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .types import (
    Eye,
    GazeSample,
    ScreenGeometry,
    UnderSampledError,
    px_to_degrees,
)

MIN_SAMPLES_PER_DOT = 30
MIN_SAMPLES_PER_LINE = 50
SWEEP_TRIM_FRACTION = 0.10   # pursuit onset/offset transients
DEFAULT_SWEEP_DURATION_US = 4_000_000


@dataclass(frozen=True)
class TargetLayout:
    """Calibration/validation target positions as screen fractions."""

    kind: str                       # dots14 | dots5 | lines5 | lines4
    targets: tuple[tuple[float, float], ...]
    target_radius_px: float = 20.0

    def points_px(self, geom: ScreenGeometry) -> list[tuple[float, float]]:
        return [(fx * geom.width_px, fy * geom.height_px) for fx, fy in self.targets]


def dots14_layout(target_radius_px: float = 20.0) -> TargetLayout:
    """14 dots in rows of 3-4-4-3, the densest grid the tracker accepts."""
    rows = [
        (0.10, (0.10, 0.50, 0.90)),
        (0.3667, (0.10, 0.3667, 0.6333, 0.90)),
        (0.6333, (0.10, 0.3667, 0.6333, 0.90)),
        (0.90, (0.10, 0.50, 0.90)),
    ]
    pts = [(x, y) for y, xs in rows for x in xs]
    return TargetLayout(kind="dots14", targets=tuple(pts),
                        target_radius_px=target_radius_px)


def dots5_layout(target_radius_px: float = 20.0) -> TargetLayout:
    """Five dots in an X: four near-corner points plus center."""
    pts = ((0.10, 0.10), (0.90, 0.10), (0.50, 0.50), (0.10, 0.90), (0.90, 0.90))
    return TargetLayout(kind="dots5", targets=pts, target_radius_px=target_radius_px)


def lines5_layout(target_radius_px: float = 20.0) -> TargetLayout:
    """Sweep lines at 10%..90% of screen height, 20% apart."""
    pts = tuple((0.5, y) for y in (0.1, 0.3, 0.5, 0.7, 0.9))
    return TargetLayout(kind="lines5", targets=pts, target_radius_px=target_radius_px)


def lines4_layout(target_radius_px: float = 20.0) -> TargetLayout:
    """Validation sweep lines at 20%..80%, offset from the calibrated five."""
    pts = tuple((0.5, y) for y in (0.2, 0.4, 0.6, 0.8))
    return TargetLayout(kind="lines4", targets=pts, target_radius_px=target_radius_px)


def target_layout(kind: str, target_radius_px: float = 20.0) -> TargetLayout:
    factory = {"dots14": dots14_layout, "dots5": dots5_layout,
               "lines5": lines5_layout, "lines4": lines4_layout}
    try:
        return factory[kind](target_radius_px)
    except KeyError:
        raise ValueError(f"unknown target layout kind {kind!r}") from None


def smoothstep(u: float) -> float:
    u = min(max(u, 0.0), 1.0)
    return u * u * (3.0 - 2.0 * u)


@dataclass(frozen=True)
class SweepTrajectory:
    """Horizontally moving pursuit target with ease-in-out timing."""

    y_px: float
    start_x: float
    end_x: float
    duration_us: int = DEFAULT_SWEEP_DURATION_US

    def position(self, t_us: int) -> tuple[float, float]:
        u = smoothstep(t_us / self.duration_us)
        return (self.start_x + (self.end_x - self.start_x) * u, self.y_px)


def sweep_trajectories(layout: TargetLayout, geom: ScreenGeometry,
                       margin_frac: float = 0.05,
                       duration_us: int = DEFAULT_SWEEP_DURATION_US) -> list[SweepTrajectory]:
    if layout.kind not in ("lines5", "lines4"):
        raise ValueError(f"{layout.kind} is not a sweep layout")
    left = margin_frac * geom.width_px
    right = (1.0 - margin_frac) * geom.width_px
    return [SweepTrajectory(y_px=fy * geom.height_px, start_x=left, end_x=right,
                            duration_us=duration_us)
            for _, fy in layout.targets]


@dataclass(frozen=True)
class DotValidationResult:
    mean_error_deg: float
    per_target_deg: tuple[float, ...]
    data_loss: float


def angular_offset_deg(dx_px: float, dy_px: float, geom: ScreenGeometry) -> float:
    """Angular distance for a screen offset, combining per-axis angles."""
    return math.hypot(px_to_degrees(dx_px, "horizontal", geom),
                      px_to_degrees(dy_px, "vertical", geom))


def score_dot_validation(samples_per_target: list[list[GazeSample]],
                         layout: TargetLayout,
                         geom: ScreenGeometry,
                         min_samples: int = MIN_SAMPLES_PER_DOT) -> DotValidationResult:
    """Mean angular distance between per-target gaze centroids and targets.

    Raises UnderSampledError naming the first target with fewer than
    ``min_samples`` valid samples. Also reports the invalid-sample fraction.
    """
    if len(samples_per_target) != len(layout.targets):
        raise ValueError(
            f"expected samples for {len(layout.targets)} targets, "
            f"got {len(samples_per_target)}")
    points = layout.points_px(geom)
    errors = []
    total = 0
    invalid = 0
    for idx, (samples, (tx, ty)) in enumerate(zip(samples_per_target, points)):
        valid = [s for s in samples if s.valid]
        total += len(samples)
        invalid += len(samples) - len(valid)
        if len(valid) < min_samples:
            raise UnderSampledError(
                f"target {idx} has {len(valid)} valid samples, need {min_samples}")
        cx = float(np.mean([s.x for s in valid]))
        cy = float(np.mean([s.y for s in valid]))
        errors.append(angular_offset_deg(cx - tx, cy - ty, geom))
    return DotValidationResult(
        mean_error_deg=float(np.mean(errors)),
        per_target_deg=tuple(errors),
        data_loss=invalid / total if total else 0.0,
    )


def select_eye(results: dict[Eye, float]) -> Eye:
    """Pick the stream with the lowest validation error.

    Ties prefer the averaged stream, then the right eye.
    """
    if not results:
        raise ValueError("no validated streams")
    preference = {Eye.AVERAGE: 0, Eye.RIGHT: 1, Eye.LEFT: 2}
    return min(results, key=lambda eye: (results[eye], preference[eye]))


@dataclass(frozen=True)
class DriftProfile:
    """Per-line mean vertical gaze offsets, signed, +down."""

    calibrated_line_ys: tuple[float, ...]
    per_line_offset: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.calibrated_line_ys) != len(self.per_line_offset):
            raise ValueError("line ys and offsets must have equal length")
        if len(self.calibrated_line_ys) < 2:
            raise ValueError("need at least 2 calibrated lines")
        ys = self.calibrated_line_ys
        if any(b <= a for a, b in zip(ys, ys[1:])):
            raise ValueError("calibrated line ys must be strictly increasing")

    def offset_at(self, y: float) -> float:
        """Linear interpolation between calibrated lines, clamped outside."""
        return float(np.interp(y, self.calibrated_line_ys, self.per_line_offset))

    @classmethod
    def zero(cls, line_ys=(0.0, 1.0)) -> "DriftProfile":
        return cls(tuple(line_ys), tuple(0.0 for _ in line_ys))

    def to_dict(self) -> dict:
        return {"calibrated_line_ys": list(self.calibrated_line_ys),
                "per_line_offset": list(self.per_line_offset)}

    @classmethod
    def from_dict(cls, d: dict) -> "DriftProfile":
        return cls(tuple(d["calibrated_line_ys"]), tuple(d["per_line_offset"]))


def _trim_sweep(samples: list[GazeSample],
                trim: float = SWEEP_TRIM_FRACTION) -> list[GazeSample]:
    """Drop invalid samples plus the first/last trim fraction of the sweep
    (pursuit onset/offset transients)."""
    valid = [s for s in samples if s.valid]
    if not valid:
        return []
    t0, t1 = valid[0].t, valid[-1].t
    span = t1 - t0
    lo = t0 + trim * span
    hi = t1 - trim * span
    return [s for s in valid if lo <= s.t <= hi]


def fit_drift_profile(per_line_sweeps: list[tuple[float, list[GazeSample]]],
                      min_samples: int = MIN_SAMPLES_PER_LINE) -> DriftProfile:
    """Mean vertical gaze offset from each swept line, one value per line."""
    if len(per_line_sweeps) < 2:
        raise ValueError("need sweeps for at least 2 lines")
    ys = []
    offsets = []
    for idx, (line_y, samples) in enumerate(per_line_sweeps):
        kept = _trim_sweep(samples)
        if len(kept) < min_samples:
            raise UnderSampledError(
                f"line {idx} (y={line_y}) retained {len(kept)} samples, "
                f"need {min_samples}")
        ys.append(line_y)
        offsets.append(float(np.mean([s.y for s in kept])) - line_y)
    order = np.argsort(ys)
    return DriftProfile(tuple(ys[i] for i in order), tuple(offsets[i] for i in order))


def correct_drift(s: GazeSample, profile: DriftProfile) -> GazeSample:
    """Vertical shear only: y is corrected by the interpolated offset, x and
    everything else pass through untouched."""
    if not s.valid:
        return s
    return replace(s, y=s.y - profile.offset_at(s.y))


def score_line_validation(per_line_sweeps: list[tuple[float, list[GazeSample]]],
                          profile: DriftProfile | None = None,
                          min_samples: int = MIN_SAMPLES_PER_LINE) -> float:
    """Mean |vertical offset| across validation sweep lines.

    With a profile, samples are drift-corrected before scoring, which is how
    the corrected validation pass is produced.
    """
    per_line = []
    for idx, (line_y, samples) in enumerate(per_line_sweeps):
        kept = _trim_sweep(samples)
        if len(kept) < min_samples:
            raise UnderSampledError(
                f"line {idx} (y={line_y}) retained {len(kept)} samples, "
                f"need {min_samples}")
        if profile is not None:
            kept = [correct_drift(s, profile) for s in kept]
        per_line.append(abs(float(np.mean([s.y for s in kept])) - line_y))
    return float(np.mean(per_line))


def decide_apply_correction(raw_error_px: float, corrected_error_px: float) -> bool:
    """Keep the correction only when it strictly improves validation error."""
    return corrected_error_px < raw_error_px
