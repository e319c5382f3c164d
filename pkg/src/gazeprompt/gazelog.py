"""File formats: gaze logs, layout files, ground truth, profiles, configs.

The gaze log is line-delimited UTF-8, one sample per line::

    #gazelog v1 hz=120
    8333,400.5,300.2,1,A

Parsing is total: any malformed line raises a positioned error. Emitting a
parsed canonical file reproduces it byte for byte.
"""
from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path
from typing import Iterable, TextIO

from .augmentation import AugmentationConfig, DwMode, Hsl, LsMode
from .simulator import GroundTruth, ReaderProfile
from .types import (
    EngineConfig,
    Eye,
    GazeSample,
    LineBox,
    PageLayout,
    WordBox,
)

GAZELOG_VERSION = 1


class GazeLogError(ValueError):
    def __init__(self, message: str, line_no: int | None = None) -> None:
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


def _fmt(value: float) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def emit_gaze_log(samples: Iterable[GazeSample], out: TextIO,
                  hz: int = 120) -> None:
    out.write(f"#gazelog v{GAZELOG_VERSION} hz={hz}\n")
    for s in samples:
        out.write(f"{s.t},{_fmt(s.x)},{_fmt(s.y)},{int(s.valid)},{s.eye.code}\n")


def parse_gaze_log(src: TextIO) -> tuple[list[GazeSample], int]:
    """Returns (samples, rate_hz)."""
    header = src.readline().rstrip("\n")
    if not header.startswith("#gazelog v"):
        raise GazeLogError("missing #gazelog header", line_no=1)
    try:
        version_part, hz_part = header[len("#gazelog v"):].split(" ")
        version = int(version_part)
        if not hz_part.startswith("hz="):
            raise ValueError
        hz = int(hz_part[3:])
    except ValueError:
        raise GazeLogError(f"malformed header {header!r}", line_no=1) from None
    if version != GAZELOG_VERSION:
        raise GazeLogError(f"unsupported gazelog version {version}", line_no=1)

    samples: list[GazeSample] = []
    for line_no, raw in enumerate(src, start=2):
        line = raw.rstrip("\n")
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise GazeLogError(f"expected 5 fields, got {len(parts)}", line_no)
        try:
            t = int(parts[0])
            x = float(parts[1])
            y = float(parts[2])
        except ValueError:
            raise GazeLogError(f"bad numeric field in {line!r}", line_no) from None
        if math.isnan(x) or math.isnan(y) or math.isinf(x) or math.isinf(y):
            raise GazeLogError(f"non-finite coordinate in {line!r}", line_no)
        if parts[3] not in ("0", "1"):
            raise GazeLogError(f"validity must be 0 or 1, got {parts[3]!r}", line_no)
        try:
            eye = Eye.from_code(parts[4])
        except ValueError:
            raise GazeLogError(f"unknown eye code {parts[4]!r}", line_no) from None
        samples.append(GazeSample(t=t, x=x, y=y, valid=parts[3] == "1", eye=eye))
    return samples, hz


def write_gaze_log(path: str | Path, samples: Iterable[GazeSample],
                   hz: int = 120) -> None:
    with open(path, "w", encoding="utf-8") as f:
        emit_gaze_log(samples, f, hz)


def read_gaze_log(path: str | Path) -> tuple[list[GazeSample], int]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_gaze_log(f)


# ---------------------------------------------------------------------------
# Layout files (JSON mirroring PageLayout)


def layout_to_dict(layout: PageLayout) -> dict:
    return {
        "layout_version": layout.layout_version,
        "background": layout.background,
        "lines": [{"line_id": ln.line_id, "top": ln.top, "bottom": ln.bottom,
                   "left": ln.left, "right": ln.right} for ln in layout.lines],
        "words": [{"word_id": w.word_id, "line_id": w.line_id, "left": w.left,
                   "right": w.right, "text": w.text,
                   "function_word": w.function_word} for w in layout.words],
    }


def layout_from_dict(d: dict) -> PageLayout:
    return PageLayout(
        layout_version=d["layout_version"],
        lines=[LineBox(**ln) for ln in d["lines"]],
        words=[WordBox(**w) for w in d["words"]],
        background=d.get("background", "light"),
    )


def write_layout(path: str | Path, layout: PageLayout) -> None:
    Path(path).write_text(json.dumps(layout_to_dict(layout), indent=1),
                          encoding="utf-8")


def read_layout(path: str | Path) -> PageLayout:
    return layout_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# Ground truth and reader profiles


def write_ground_truth(path: str | Path, truth: GroundTruth) -> None:
    Path(path).write_text(json.dumps(truth.to_dict()), encoding="utf-8")


def read_ground_truth(path: str | Path) -> GroundTruth:
    return GroundTruth.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def profile_to_dict(profile: ReaderProfile) -> dict:
    d = dataclasses.asdict(profile)
    if d["drift_knots"] is not None:
        d["drift_knots"] = [list(k) for k in d["drift_knots"]]
    d["fixation_ms_bounds"] = list(d["fixation_ms_bounds"])
    d["saccade_len_words"] = list(d["saccade_len_words"])
    return d


def profile_from_dict(d: dict) -> ReaderProfile:
    kw = dict(d)
    if kw.get("drift_knots") is not None:
        kw["drift_knots"] = tuple((float(y), float(off))
                                  for y, off in kw["drift_knots"])
    if "fixation_ms_bounds" in kw:
        kw["fixation_ms_bounds"] = tuple(kw["fixation_ms_bounds"])
    if "saccade_len_words" in kw:
        kw["saccade_len_words"] = tuple(kw["saccade_len_words"])
    return ReaderProfile(**kw)


def read_profile(path: str | Path) -> ReaderProfile:
    return profile_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# Engine / augmentation configuration


def engine_config_from_dict(d: dict) -> EngineConfig:
    return EngineConfig(**d)


def augmentation_config_from_dict(d: dict) -> AugmentationConfig:
    kw = dict(d)
    if "ls_mode" in kw:
        kw["ls_mode"] = LsMode(kw["ls_mode"])
    if "dw_mode" in kw:
        kw["dw_mode"] = DwMode(kw["dw_mode"])
    if kw.get("ls_color") is not None:
        c = kw["ls_color"]
        kw["ls_color"] = Hsl(float(c["hue"]), float(c["lightness"]))
    return AugmentationConfig(**kw)


def read_config(path: str | Path) -> tuple[EngineConfig, AugmentationConfig]:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    return (engine_config_from_dict(d.get("engine", {})),
            augmentation_config_from_dict(d.get("augmentation", {})))


# ---------------------------------------------------------------------------
# Sweep-session files for drift checking


def write_sweep_session(path: str | Path,
                        sweeps: list[tuple[float, list[GazeSample]]]) -> None:
    doc = {"sweeps": [{"y_px": y,
                       "samples": [[s.t, s.x, s.y, int(s.valid)] for s in samples]}
                      for y, samples in sweeps]}
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def read_sweep_session(path: str | Path) -> list[tuple[float, list[GazeSample]]]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    out = []
    for entry in doc["sweeps"]:
        samples = [GazeSample(t=int(t), x=float(x), y=float(y), valid=bool(v))
                   for t, x, y, v in entry["samples"]]
        out.append((float(entry["y_px"]), samples))
    return out
