"""Driving a session over the wire protocol.

Every session speaks newline-delimited JSON envelopes:

    {"type": ..., "session": ..., "seq": ..., "payload": {...}}

This demo runs a complete session against an in-process SessionCore (the
same state machine the TCP server wraps): hello, skip calibration, send a
layout, stream gaze, and end. The outbound side carries fixation debug
records, behavior events, augmentation directives and the final passage
metrics.
"""
import json

from gazeprompt import ReaderProfile, make_passage_layout, simulate
from gazeprompt.gazelog import layout_to_dict
from gazeprompt.server import SessionCore, encode

layout = make_passage_layout(n_lines=4, seed=9)
samples, truth = simulate(layout, ReaderProfile(seed=2))

core = SessionCore()
seq = 0
outbound = []


def send(mtype, payload):
    global seq
    msg = {"type": mtype, "session": "demo", "seq": seq, "payload": payload}
    seq += 1
    for line in core.handle_line(encode(msg)):
        outbound.append(json.loads(line))


send("hello", {"client": "demo-script"})
send("phase", {"phase": "reading", "skip_calibration": True})
send("layout", {"layout": layout_to_dict(layout)})
for s in samples:
    send("gaze", {"t": s.t, "x": s.x, "y": s.y, "valid": s.valid,
                  "eye": s.eye.code})
send("phase", {"phase": "ended"})

by_type = {}
for msg in outbound:
    by_type.setdefault(msg["type"], []).append(msg)

print("outbound message counts:")
for mtype, msgs in sorted(by_type.items()):
    print(f"  {mtype:>15}: {len(msgs)}")

print("\nfirst behavior messages:")
for msg in by_type["behavior"][:5]:
    print(f"  {encode(msg)}")

final = by_type["metrics"][-1]["payload"]
print(f"\nfinal passage metrics: {final['line_switch_count']} switches, "
      f"mean switch time {final['mean_line_switch_time_ms']:.0f} ms, "
      f"data loss {final['data_loss_fraction']:.1%}")

sweeps = [m for m in by_type["behavior"]
          if m["payload"]["kind"] == "switch_return_sweep"]
assert len(sweeps) == len(truth.sweeps)
print(f"\nall {len(sweeps)} scripted sweeps arrived as wire messages")
