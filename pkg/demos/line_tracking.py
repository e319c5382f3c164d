"""Line identification and switching behaviors.

The line tracker votes over the latest three fixations (weight 1/(1+|d|),
d = normalized vertical distance to the landing line's center) and
classifies transitions: following a line, a return sweep to the next line,
or a jump that must stay stable for three fixations before it commits.

This run injects sweep deviations, so some sweeps land one line past their
target and the tracker has to recover with a corrective jump.
"""
from gazeprompt import (
    BehaviorEngine,
    BehaviorKind,
    ReaderProfile,
    default_screen,
    make_passage_layout,
    simulate,
)
from gazeprompt.signal import run_offline

layout = make_passage_layout(n_lines=8, seed=3)
profile = ReaderProfile(seed=12, deviation_prob=0.5)
samples, truth = simulate(layout, profile)

deviated = [s for s in truth.sweeps if s.deviated]
print(f"{len(truth.sweeps)} sweeps scripted, {len(deviated)} deviated:")
for s in deviated:
    print(f"  intended line {s.target_line}, landed on {s.landed_line}")

fixations = run_offline(samples, default_screen())
engine = BehaviorEngine(layout)
events = []

print("\nrecognized event stream (following events compressed):")
run = 0
for f in fixations:
    for ev in engine.push(f):
        events.append(ev)
        if ev.kind == BehaviorKind.FOLLOWING:
            run += 1
            continue
        if run:
            print(f"  following x{run}")
            run = 0
        print(f"  {ev.kind.value:>20} -> line {ev.line_id}  at {ev.at / 1e6:6.2f} s")
if run:
    print(f"  following x{run}")

got_sweeps = [e.line_id for e in events
              if e.kind == BehaviorKind.SWITCH_RETURN_SWEEP]
got_jumps = [e.line_id for e in events if e.kind == BehaviorKind.JUMP]
assert got_sweeps == [s.landed_line for s in truth.sweeps]
assert got_jumps == [j.line_id for j in truth.jumps]
print("\nevery scripted sweep and corrective jump was recognized, "
      "none invented")
