"""Session lifecycle and wire protocol.

Messages are newline-delimited JSON envelopes on a full-duplex TCP socket
(default port 7327)::

    {"type": "<name>", "session": "<id>", "seq": <int>, "payload": {...}}

Client to engine types: hello, configure, layout, gaze, scroll, phase.
Engine to client types: targets, fixation_debug, behavior, augment, metrics,
error. Sequence numbers increase strictly per direction. Unknown types and
malformed payloads produce structured error messages without ending the
session; stream-order and protocol violations end it.

The protocol state machine (SessionCore) is transport-agnostic so that a
recorded session replays byte-identically without a socket.
"""
from __future__ import annotations

import json
import logging
import socket
import socketserver
import threading
import time
from dataclasses import dataclass, field
from enum import Enum

from .augmentation import AugmentationConfig
from .calibration import (
    DriftProfile,
    decide_apply_correction,
    fit_drift_profile,
    score_dot_validation,
    score_line_validation,
    select_eye,
    sweep_trajectories,
    target_layout,
)
from .gazelog import (
    augmentation_config_from_dict,
    engine_config_from_dict,
    layout_from_dict,
)
from .pipeline import ReadingPipeline
from .types import (
    EngineConfig,
    Eye,
    GazeSample,
    ScreenGeometry,
    StreamOrderError,
    default_screen,
    validate_layout,
)

log = logging.getLogger(__name__)

DEFAULT_PORT = 7327
MAX_LINE_BYTES = 1 << 20
STALL_TIMEOUT_S = 2.0

INBOUND_TYPES = {"hello", "configure", "layout", "gaze", "scroll", "phase"}


class Phase(str, Enum):
    CONFIGURING = "configuring"
    CALIBRATING = "calibrating"
    VALIDATING = "validating"
    READING = "reading"
    ENDED = "ended"


_PHASE_RANK = {Phase.CONFIGURING: 0, Phase.CALIBRATING: 1,
               Phase.VALIDATING: 1, Phase.READING: 2, Phase.ENDED: 3}


def encode(msg: dict) -> str:
    """Canonical single-line encoding used for logs and replay hashing."""
    return json.dumps(msg, sort_keys=True, separators=(",", ":"))


@dataclass
class SessionLogRecord:
    direction: str        # "in" | "out"
    line: str             # canonical message encoding
    wall_us: int = 0


@dataclass
class SessionLog:
    records: list[SessionLogRecord] = field(default_factory=list)

    def inbound_lines(self) -> list[str]:
        return [r.line for r in self.records if r.direction == "in"]

    def outbound_lines(self) -> list[str]:
        return [r.line for r in self.records if r.direction == "out"]

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for r in self.records:
                f.write(encode({"dir": r.direction, "wall_us": r.wall_us,
                                "msg": json.loads(r.line)}) + "\n")

    @classmethod
    def load(cls, path) -> "SessionLog":
        out = cls()
        with open(path, "r", encoding="utf-8") as f:
            for raw in f:
                raw = raw.strip()
                if not raw:
                    continue
                rec = json.loads(raw)
                out.records.append(SessionLogRecord(
                    direction=rec["dir"], line=encode(rec["msg"]),
                    wall_us=rec.get("wall_us", 0)))
        return out


class SessionCore:
    """One session's protocol state machine."""

    def __init__(self, geom: ScreenGeometry | None = None,
                 engine_cfg: EngineConfig | None = None,
                 aug_cfg: AugmentationConfig | None = None) -> None:
        self.geom = geom or default_screen()
        self.engine_cfg = engine_cfg or EngineConfig()
        self.aug_cfg = aug_cfg or AugmentationConfig()
        self.phase = Phase.CONFIGURING
        self.session_id: str | None = None
        self.pipeline: ReadingPipeline | None = None
        self.drift_profile: DriftProfile | None = None
        self.selected_eye: Eye | None = None
        self.validated = False
        self.skip_calibration = False
        self.stage: str | None = None
        self.dot_buckets: dict[tuple[int, str], list[GazeSample]] = {}
        self.line_buckets: dict[int, list[GazeSample]] = {}
        self.calibration_sweeps: list[tuple[float, list[GazeSample]]] = []
        self.in_seq = -1
        self.out_seq = -1
        self.log = SessionLog()
        self.ended = False

    # -- transport entry points ------------------------------------------

    def handle_line(self, raw: str) -> list[str]:
        """Consume one wire line, return outbound wire lines."""
        raw = raw.strip()
        if not raw:
            return []
        if len(raw.encode("utf-8", errors="replace")) > MAX_LINE_BYTES:
            return [self._emit(self._error("line_too_long",
                                           "message exceeds 1 MiB"))]
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError as e:
            return [self._emit(self._error("bad_json", f"unparseable line: {e}"))]
        if not isinstance(msg, dict):
            return [self._emit(self._error("bad_envelope",
                                           "envelope must be an object"))]
        self.log.records.append(SessionLogRecord("in", encode(msg),
                                                 time.time_ns() // 1000))
        return [self._emit(m) for m in self.handle(msg)]

    def handle(self, msg: dict) -> list[dict]:
        if self.ended:
            return [self._error("session_ended", "session already ended")]
        mtype = msg.get("type")
        seq = msg.get("seq")
        if not isinstance(seq, int) or seq <= self.in_seq:
            self.ended = True
            return [self._error("bad_seq",
                                f"seq must increase past {self.in_seq}, got {seq!r}")]
        self.in_seq = seq
        if msg.get("session") is not None:
            if self.session_id is None:
                self.session_id = str(msg["session"])
            elif str(msg["session"]) != self.session_id:
                return [self._error("bad_session", "session id changed mid-stream")]
        if mtype not in INBOUND_TYPES:
            return [self._error("unknown_type", f"unknown message type {mtype!r}")]
        payload = msg.get("payload") or {}
        if not isinstance(payload, dict):
            return [self._error("bad_payload", "payload must be an object")]
        handler = getattr(self, f"_on_{mtype}")
        try:
            return handler(payload)
        except StreamOrderError as e:
            self.ended = True
            return [self._error("stream_order", str(e))]
        except Exception as e:           # malformed payloads must not crash
            return [self._error("bad_payload", f"{type(e).__name__}: {e}")]

    # -- message handlers --------------------------------------------------

    def _on_hello(self, payload: dict) -> list[dict]:
        if "screen" in payload:
            s = payload["screen"]
            self.geom = ScreenGeometry(
                width_px=int(s["width_px"]), height_px=int(s["height_px"]),
                physical_width_cm=float(s["physical_width_cm"]),
                physical_height_cm=float(s["physical_height_cm"]),
                viewing_distance_cm=float(s["viewing_distance_cm"]))
        return []

    def _on_configure(self, payload: dict) -> list[dict]:
        if self.phase not in (Phase.CONFIGURING, Phase.READING):
            return [self._error("bad_phase",
                                f"configure not allowed in {self.phase.value}")]
        if "engine" in payload:
            base = {**_engine_dict(self.engine_cfg), **payload["engine"]}
            self.engine_cfg = engine_config_from_dict(base)
        if "augmentation" in payload:
            self.aug_cfg = augmentation_config_from_dict(payload["augmentation"])
        if "eye" in payload:
            self.selected_eye = Eye(payload["eye"])
        if payload.get("skip_calibration"):
            self.skip_calibration = True
        if self.pipeline is not None:
            self.pipeline.reconfigure(self.engine_cfg, self.aug_cfg)
        return []

    def _on_layout(self, payload: dict) -> list[dict]:
        layout = layout_from_dict(payload["layout"])
        violations = validate_layout(layout)
        if violations:
            return [self._error(
                "invalid_layout",
                "; ".join(v.message for v in violations[:10]))]
        if self.pipeline is None:
            self.pipeline = ReadingPipeline(
                layout, self.geom, self.engine_cfg, self.aug_cfg,
                drift_profile=self.drift_profile)
            return []
        maps = payload.get("line_id_map")
        line_map = ({int(k): int(v) for k, v in maps.items()}
                    if maps is not None else None)
        wmaps = payload.get("word_id_map")
        word_map = ({int(k): int(v) for k, v in wmaps.items()}
                    if wmaps is not None else None)
        self.pipeline.on_layout(layout, float(payload.get("scroll_dy", 0.0)),
                                line_map, word_map)
        return []

    def _on_gaze(self, payload: dict) -> list[dict]:
        sample = GazeSample(
            t=int(payload["t"]), x=float(payload["x"]), y=float(payload["y"]),
            valid=bool(payload.get("valid", True)),
            eye=Eye.from_code(payload["eye"]) if "eye" in payload else Eye.AVERAGE)
        if self.phase in (Phase.CALIBRATING, Phase.VALIDATING):
            if "target" in payload:
                key = (int(payload["target"]), payload.get("eye", "A"))
                self.dot_buckets.setdefault(key, []).append(sample)
                return []
            if "line" in payload:
                self.line_buckets.setdefault(int(payload["line"]), []).append(sample)
                return []
            return [self._error("bad_payload",
                                "calibration gaze needs a target or line index")]
        if self.phase != Phase.READING or self.pipeline is None:
            return [self._error("bad_phase",
                                f"gaze not accepted in {self.phase.value}")]
        out = self.pipeline.process_sample(sample)
        msgs: list[dict] = []
        if out.fixation is not None:
            f = out.fixation
            msgs.append(self._msg("fixation_debug", {
                "cx": f.cx, "cy": f.cy, "onset": f.onset,
                "duration": f.duration, "sample_count": f.sample_count}))
        for ev in out.behavior:
            msgs.append(self._msg("behavior", ev.to_dict()))
        for ev in out.augment:
            msgs.append(self._msg("augment", ev.to_dict()))
        return msgs

    def _on_scroll(self, payload: dict) -> list[dict]:
        if self.pipeline is not None:
            self.pipeline.on_scroll(int(payload["t"]), float(payload["dy"]))
        return []

    def _on_phase(self, payload: dict) -> list[dict]:
        target = Phase(payload["phase"])
        if not self._phase_allowed(target):
            self.ended = True
            return [self._error("bad_phase",
                                f"cannot move {self.phase.value} -> {target.value}")]
        closing = self._close_stage()
        if target == Phase.READING and not (self.validated or self.skip_calibration
                                            or payload.get("skip_calibration")):
            self.ended = True
            return [self._error("bad_phase",
                                "reading requires validation or an explicit skip")]
        if payload.get("skip_calibration"):
            self.skip_calibration = True
        self.phase = target
        out = list(closing)
        if target in (Phase.CALIBRATING, Phase.VALIDATING):
            stage = payload.get("stage") or (
                "dots14" if target == Phase.CALIBRATING else "dots5")
            self.stage = stage
            self.dot_buckets.clear()
            self.line_buckets.clear()
            out.append(self._targets_msg(stage))
        if target == Phase.ENDED:
            self.ended = True
            out.extend(self._final_metrics())
        return out

    # -- helpers -----------------------------------------------------------

    def _phase_allowed(self, target: Phase) -> bool:
        if self.phase == target:
            return True
        if self.phase == Phase.READING and target == Phase.CONFIGURING:
            return True
        return _PHASE_RANK[target] >= _PHASE_RANK[self.phase]

    def _targets_msg(self, stage: str) -> dict:
        layout = target_layout(stage)
        payload: dict = {
            "kind": stage,
            "points": [[x, y] for x, y in layout.targets],
            "radius_px": layout.target_radius_px,
        }
        if stage in ("lines5", "lines4"):
            payload["sweeps"] = [
                {"y_px": t.y_px, "start_x": t.start_x, "end_x": t.end_x,
                 "duration_us": t.duration_us}
                for t in sweep_trajectories(layout, self.geom)]
        return self._msg("targets", payload)

    def _close_stage(self) -> list[dict]:
        """Score whatever the finished calibration/validation stage collected."""
        out: list[dict] = []
        stage, self.stage = self.stage, None
        if stage in ("dots5", "dots14") and self.dot_buckets:
            out.extend(self._score_dots(stage))
        elif stage == "lines5" and self.line_buckets:
            layout = target_layout("lines5")
            self.calibration_sweeps = [
                (frac_y * self.geom.height_px, self.line_buckets.get(i, []))
                for i, (_, frac_y) in enumerate(layout.targets)]
        elif stage == "lines4" and self.line_buckets:
            out.extend(self._score_lines())
        self.dot_buckets.clear()
        self.line_buckets.clear()
        return out

    def _score_dots(self, stage: str) -> list[dict]:
        layout = target_layout(stage)
        n = len(layout.targets)
        per_eye: dict[Eye, float] = {}
        results = {}
        for eye_code in ("L", "R", "A"):
            buckets = [self.dot_buckets.get((i, eye_code), []) for i in range(n)]
            if not all(buckets):
                continue
            try:
                result = score_dot_validation(buckets, layout, self.geom)
            except Exception as e:
                return [self._error("under_sampled", str(e))]
            per_eye[Eye.from_code(eye_code)] = result.mean_error_deg
            results[eye_code] = result
        if not results:
            return [self._error("under_sampled", "no complete validation stream")]
        chosen = select_eye(per_eye)
        self.selected_eye = chosen
        self.validated = True
        best = results[chosen.code]
        return [self._msg("metrics", {
            "kind": "dot_validation",
            "mean_error_deg": best.mean_error_deg,
            "per_target_deg": list(best.per_target_deg),
            "data_loss": best.data_loss,
            "per_eye_deg": {e.value: err for e, err in per_eye.items()},
            "selected_eye": chosen.value,
        })]

    def _score_lines(self) -> list[dict]:
        layout = target_layout("lines4")
        sweeps = [(frac_y * self.geom.height_px, self.line_buckets.get(i, []))
                  for i, (_, frac_y) in enumerate(layout.targets)]
        try:
            raw = score_line_validation(sweeps)
        except Exception as e:
            return [self._error("under_sampled", str(e))]
        payload: dict = {"kind": "line_validation", "raw_px": raw}
        if self.calibration_sweeps:
            try:
                profile = fit_drift_profile(self.calibration_sweeps)
            except Exception as e:
                return [self._error("under_sampled", str(e))]
            corrected = score_line_validation(sweeps, profile)
            apply = decide_apply_correction(raw, corrected)
            payload.update(corrected_px=corrected, applied=apply,
                           profile=profile.to_dict())
            if apply:
                self.drift_profile = profile
                if self.pipeline is not None:
                    self.pipeline.drift_profile = profile
        self.validated = True
        return [self._msg("metrics", payload)]

    def _final_metrics(self) -> list[dict]:
        if self.pipeline is None:
            return []
        tail = self.pipeline.finish()
        out: list[dict] = []
        for ev in tail.behavior:
            out.append(self._msg("behavior", ev.to_dict()))
        for ev in tail.augment:
            out.append(self._msg("augment", ev.to_dict()))
        m = self.pipeline.passage_metrics()
        out.append(self._msg("metrics", {
            "kind": "passage",
            **m.to_dict(),
            # echo the active thresholds so UI edits are verifiable
            "engine_config": _engine_dict(self.pipeline.cfg),
        }))
        return out

    def _msg(self, mtype: str, payload: dict) -> dict:
        self.out_seq += 1
        return {"type": mtype, "session": self.session_id,
                "seq": self.out_seq, "payload": payload}

    def _error(self, code: str, message: str) -> dict:
        return self._msg("error", {"code": code, "message": message})

    def _emit(self, msg: dict) -> str:
        line = encode(msg)
        self.log.records.append(SessionLogRecord("out", line,
                                                 time.time_ns() // 1000))
        return line


def _engine_dict(cfg: EngineConfig) -> dict:
    import dataclasses
    return dataclasses.asdict(cfg)


def run_session(source, sink, geom: ScreenGeometry | None = None,
                engine_cfg: EngineConfig | None = None,
                aug_cfg: AugmentationConfig | None = None) -> SessionLog:
    """Drive a session from an iterable of wire lines to a sink callable.

    This is the transport-free core used by replay: identical inputs and
    configs produce an identical session log.
    """
    core = SessionCore(geom, engine_cfg, aug_cfg)
    for raw in source:
        for out in core.handle_line(raw):
            sink(out)
        if core.ended:
            break
    return core.log


def replay_session(log: SessionLog, geom: ScreenGeometry | None = None,
                   engine_cfg: EngineConfig | None = None,
                   aug_cfg: AugmentationConfig | None = None) -> SessionLog:
    """Re-run a recorded session's inbound lines through a fresh core."""
    outbound: list[str] = []
    return run_session(iter(log.inbound_lines()), outbound.append,
                       geom, engine_cfg, aug_cfg)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        core = SessionCore(geom=self.server.geom,
                           engine_cfg=self.server.engine_cfg,
                           aug_cfg=self.server.aug_cfg)
        self.connection.settimeout(STALL_TIMEOUT_S)
        stalled = False
        while not core.ended:
            try:
                raw = self.rfile.readline()
            except socket.timeout:
                if not stalled:
                    stalled = True
                    self._send(core._emit(core._error(
                        "stall", "no data for 2 s; session paused")))
                continue
            except (ConnectionError, OSError):
                break
            if not raw:
                break
            stalled = False
            try:
                text = raw.decode("utf-8", errors="replace")
            except Exception:
                continue
            for out in core.handle_line(text):
                if not self._send(out):
                    return
        if self.server.log_dir is not None and core.log.records:
            name = core.session_id or f"session-{time.time_ns()}"
            core.log.dump(self.server.log_dir / f"{name}.jsonl")

    def _send(self, line: str) -> bool:
        try:
            self.wfile.write(line.encode("utf-8") + b"\n")
            return True
        except (ConnectionError, OSError):
            return False


class GazeServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, port: int = DEFAULT_PORT,
                 geom: ScreenGeometry | None = None,
                 engine_cfg: EngineConfig | None = None,
                 aug_cfg: AugmentationConfig | None = None,
                 log_dir=None, host: str = "127.0.0.1") -> None:
        super().__init__((host, port), _Handler)
        self.geom = geom
        self.engine_cfg = engine_cfg
        self.aug_cfg = aug_cfg
        self.log_dir = log_dir

    def serve_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread
