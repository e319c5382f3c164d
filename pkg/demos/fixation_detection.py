"""From raw gaze samples to fixations.

A 120 Hz gaze stream is noisy and full of saccades. This walkthrough feeds a
synthetic reading session through the two signal stages (median filtering
with an outlier cap, then dispersion-threshold clustering) and shows what
survives at each step.
"""
from gazeprompt import ReaderProfile, default_screen, make_passage_layout, simulate
from gazeprompt.signal import FixationDetector, SampleFilter

# A three-line passage and a reader with a little sensor noise and a few
# percent data loss, the texture a real tracker produces.
layout = make_passage_layout(n_lines=3, seed=7)
profile = ReaderProfile(seed=7, noise_sd_px=4.0, data_loss_rate=0.03)
samples, truth = simulate(layout, profile)
print(f"stream: {len(samples)} samples over {samples[-1].t / 1e6:.1f} s")
print(f"scripted fixations: {len(truth.fixations)}")

# Stage 1: the filter drops invalid samples, medians out single-sample
# spikes, and rejects physiologically impossible jumps.
geom = default_screen()
filt = SampleFilter(geom)
det = FixationDetector()

fixations = []
for s in samples:
    cleaned = filt.push(s)
    if cleaned is None:
        continue
    fx = det.push(cleaned)
    if fx is not None:
        fixations.append(fx)
tail = det.flush()
if tail:
    fixations.append(tail)

st = filt.state
print(f"\nfilter: {st.n_invalid} invalid dropped, {st.n_outlier} outliers capped")
print(f"detector: {det.n_in_fixations} samples in fixations, "
      f"{det.n_discarded} discarded as saccades")

print(f"\ndetected {len(fixations)} fixations:")
print(f"{'onset ms':>9} {'dur ms':>7} {'cx':>7} {'cy':>7} {'samples':>8}")
for f in fixations[:12]:
    print(f"{f.onset / 1000:9.0f} {f.duration / 1000:7.0f} "
          f"{f.cx:7.1f} {f.cy:7.1f} {f.sample_count:8d}")
if len(fixations) > 12:
    print(f"... and {len(fixations) - 12} more")

# Every input sample is accounted for: conservation is a hard invariant.
accounted = st.n_invalid + st.n_outlier + det.n_in_fixations + det.n_discarded
assert accounted == st.n_total == len(samples)
print(f"\nconservation: {st.n_total} in = {st.n_invalid} invalid + "
      f"{st.n_outlier} outliers + {det.n_in_fixations} fixated + "
      f"{det.n_discarded} saccade")
