"""Line-based vertical drift correction, end to end.

Trackers drift vertically over a session. The calibration flow sweeps a
pursuit target along five horizontal lines (10%..90% of screen height),
measures the mean vertical gaze offset per line, and interpolates those
offsets across the screen. A four-line validation pass (20%..80%) decides
whether the correction actually helps.
"""
from gazeprompt import (
    ReaderProfile,
    decide_apply_correction,
    fit_drift_profile,
    score_line_validation,
    simulate_sweep_session,
)

# A reader whose tracker drifts: +8 px error at the top of the screen
# growing to +30 px at the bottom, with 2 px of sample noise.
knots = ((0.0, 8.0), (1200.0, 30.0))
profile = ReaderProfile(seed=4, drift_knots=knots, noise_sd_px=2.0)

calibration = simulate_sweep_session("lines5", profile)
validation = simulate_sweep_session("lines4", profile)

print("calibration sweeps (5 lines):")
for y, samples in calibration:
    print(f"  line at y={y:6.1f}: {len(samples)} samples")

profile_fit = fit_drift_profile(calibration)
print("\nfitted per-line offsets:")
for y, off in zip(profile_fit.calibrated_line_ys, profile_fit.per_line_offset):
    print(f"  y={y:6.1f}: {off:+6.2f} px  (injected {8.0 + 22.0 * y / 1200.0:+.2f})")

raw = score_line_validation(validation)
corrected = score_line_validation(validation, profile_fit)
apply = decide_apply_correction(raw, corrected)

print(f"\n4-line validation, mean |vertical offset|:")
print(f"  raw:       {raw:6.2f} px")
print(f"  corrected: {corrected:6.2f} px")
print(f"  apply the correction: {'yes' if apply else 'no'}")
assert apply and corrected < 0.1 * raw + 1.0
