"""Reading measures from a recorded session.

The metrics module reproduces the study measures: line switching time,
deviation frequency and magnitude, maximum one-pass fixation time per word,
and scroll-event statistics, all as pure functions of the session logs.
"""
from gazeprompt import (
    ReaderProfile,
    compute_metrics,
    default_screen,
    format_report,
    make_passage_layout,
    run_stream,
    simulate,
)
from gazeprompt.metrics import ScrollSample

layout = make_passage_layout(n_lines=9, seed=14)
profile = ReaderProfile(seed=8, deviation_prob=0.3, hesitation_prob=0.1,
                        noise_sd_px=3.0, data_loss_rate=0.04)
samples, truth = simulate(layout, profile)

pipe = run_stream(samples, layout, default_screen())

# A scroll log from the UI: three quick wheel ticks, a pause, two more.
scrolls = [ScrollSample(t, -60.0)
           for t in (2_000_000, 2_040_000, 2_080_000, 3_500_000, 3_540_000)]

m = compute_metrics(pipe.fixations, pipe.events, scrolls, layout,
                    truth=truth,
                    sample_counts=(pipe.samples_total, pipe.samples_invalid))
print(format_report(m, "nine-line passage"))

injected = [s.magnitude for s in truth.sweeps if s.deviated]
print(f"\ninjected deviations: {injected} "
      f"(detected {m.deviation_count}, mean magnitude "
      f"{m.mean_deviation_magnitude_lines:.2f})")

slowest = sorted(m.one_pass_ms_by_word.items(), key=lambda kv: -kv[1])[:5]
print("\nslowest first-pass words:")
for wid, ms in slowest:
    print(f"  {layout.word(wid).text!r:>12}: {ms:6.0f} ms")
