"""Command-line interface.

Subcommands: serve, replay, simulate, metrics, drift-check. A default config
path can be supplied through the GAZEPROMPT_CONFIG environment variable.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from .augmentation import AugmentationConfig
from .calibration import (
    decide_apply_correction,
    fit_drift_profile,
    score_line_validation,
)
from .gazelog import (
    read_config,
    read_gaze_log,
    read_ground_truth,
    read_layout,
    read_profile,
    read_sweep_session,
    write_gaze_log,
    write_ground_truth,
    write_layout,
    write_sweep_session,
)
from .metrics import format_report
from .pipeline import run_stream
from .server import DEFAULT_PORT, GazeServer, SessionLog, replay_session
from .simulator import (
    ReaderProfile,
    make_passage_layout,
    simulate,
    simulate_sweep_session,
)
from .types import EngineConfig, default_screen

CONFIG_ENV = "GAZEPROMPT_CONFIG"


def _load_configs(path: str | None):
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return EngineConfig(), AugmentationConfig()
    return read_config(path)


def cmd_serve(args) -> int:
    engine_cfg, aug_cfg = _load_configs(args.config)
    log_dir = Path(args.log_dir) if args.log_dir else None
    if log_dir:
        log_dir.mkdir(parents=True, exist_ok=True)
    server = GazeServer(port=args.port, engine_cfg=engine_cfg, aug_cfg=aug_cfg,
                        log_dir=log_dir, host=args.host)
    # report the bound address: --port 0 lets the OS pick
    print(f"listening on {args.host}:{server.server_address[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def cmd_replay(args) -> int:
    engine_cfg, aug_cfg = _load_configs(args.config)
    if args.log.endswith(".jsonl"):
        session_log = SessionLog.load(args.log)
        replayed = replay_session(session_log, engine_cfg=engine_cfg,
                                  aug_cfg=aug_cfg)
        out_lines = replayed.outbound_lines()
        recorded = session_log.outbound_lines()
        if recorded:
            rec_hash = hashlib.sha256("\n".join(recorded).encode()).hexdigest()
            new_hash = hashlib.sha256("\n".join(out_lines).encode()).hexdigest()
            status = "match" if rec_hash == new_hash else "MISMATCH"
            print(f"outbound hash {new_hash[:16]} ({status})", file=sys.stderr)
    else:
        samples, _ = read_gaze_log(args.log)
        layout = read_layout(args.layout)
        pipe = run_stream(samples, layout, default_screen(), engine_cfg, aug_cfg)
        out_lines = ([json.dumps(e.to_dict(), sort_keys=True) for e in pipe.events]
                     + [json.dumps(e.to_dict(), sort_keys=True)
                        for e in pipe.augments])
    if args.out:
        Path(args.out).write_text("\n".join(out_lines) + "\n", encoding="utf-8")
    else:
        for line in out_lines:
            print(line)
    return 0


def cmd_simulate(args) -> int:
    profile = read_profile(args.profile) if args.profile else ReaderProfile()
    if args.seed is not None:
        profile = ReaderProfile(**{**vars(profile), "seed": args.seed})
    if args.sweep_session:
        sweeps = simulate_sweep_session(args.sweep_session, profile)
        write_sweep_session(args.out, sweeps)
        print(f"wrote {sum(len(s) for _, s in sweeps)} sweep samples to {args.out}")
        return 0
    if args.layout:
        layout = read_layout(args.layout)
    else:
        layout = make_passage_layout(n_lines=args.lines, seed=profile.seed)
        if args.layout_out:
            write_layout(args.layout_out, layout)
    samples, truth = simulate(layout, profile)
    write_gaze_log(args.out, samples)
    if args.truth_out:
        write_ground_truth(args.truth_out, truth)
    print(f"wrote {len(samples)} samples, {len(truth.fixations)} fixations, "
          f"{len(truth.sweeps)} sweeps to {args.out}")
    return 0


def cmd_metrics(args) -> int:
    engine_cfg, aug_cfg = _load_configs(args.config)
    samples, _ = read_gaze_log(args.log)
    layout = read_layout(args.layout)
    truth = read_ground_truth(args.truth) if args.truth else None
    pipe = run_stream(samples, layout, default_screen(), engine_cfg, aug_cfg)
    m = pipe.passage_metrics(truth)
    if args.json:
        print(json.dumps(m.to_dict(), indent=1, sort_keys=True))
    else:
        print(format_report(m, Path(args.log).stem))
        lat = pipe.latency_percentiles_ms()
        print(f"  latency p50/p99 (ms)              "
              f"{lat['p50']:.3f} / {lat['p99']:.3f}")
    return 0


def cmd_drift_check(args) -> int:
    calibration = read_sweep_session(args.sweeps)
    validation = read_sweep_session(args.lines)
    profile = fit_drift_profile(calibration)
    raw = score_line_validation(validation)
    corrected = score_line_validation(validation, profile)
    apply = decide_apply_correction(raw, corrected)
    print("per-line offsets:",
          ", ".join(f"{y:.0f}px: {o:+.2f}px"
                    for y, o in zip(profile.calibrated_line_ys,
                                    profile.per_line_offset)))
    print(f"validation |vertical offset|: raw {raw:.2f} px, "
          f"corrected {corrected:.2f} px")
    print(f"apply correction: {'yes' if apply else 'no'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gazeprompt",
        description="gaze-behavior recognition engine and reading-augmentation service")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the session server")
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--config", help=f"config JSON (default ${CONFIG_ENV})")
    p.add_argument("--log-dir", help="directory for session logs")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="re-run a recorded session or gaze log")
    p.add_argument("--log", required=True,
                   help="session log (.jsonl) or gaze log file")
    p.add_argument("--layout", help="layout JSON (gaze-log replay)")
    p.add_argument("--out", help="write outbound/event lines here")
    p.add_argument("--config")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("simulate", help="generate a synthetic reading session")
    p.add_argument("--profile", help="reader profile JSON")
    p.add_argument("--layout", help="layout JSON to read")
    p.add_argument("--lines", type=int, default=8,
                   help="line count for a generated layout")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="gaze log output path")
    p.add_argument("--truth-out", help="ground truth JSON output")
    p.add_argument("--layout-out", help="write the generated layout here")
    p.add_argument("--sweep-session", choices=["lines5", "lines4"],
                   help="generate calibration sweeps instead of reading")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("metrics", help="compute passage measures from a log")
    p.add_argument("--log", required=True, help="gaze log file")
    p.add_argument("--layout", required=True, help="layout JSON")
    p.add_argument("--truth", help="ground truth JSON")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--config")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("drift-check", help="fit and evaluate drift correction")
    p.add_argument("--sweeps", required=True,
                   help="calibration sweep-session JSON (5 lines)")
    p.add_argument("--lines", required=True,
                   help="validation sweep-session JSON (4 lines)")
    p.set_defaults(func=cmd_drift_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
