"""Difficult-word detection and the augmentations it drives.

A word counts as difficult when, within one pass (consecutive fixations on
the word before gaze leaves it), any of three strict thresholds is crossed:
first fixation > 500 ms, more than 4 refixations, or total > 1500 ms.
The augmentation controller then magnifies the word or speaks it, depending
on configuration.
"""
from gazeprompt import (
    AugmentationConfig,
    DwMode,
    ReaderProfile,
    default_screen,
    make_passage_layout,
    simulate,
    run_stream,
)
from gazeprompt.augmentation import AugmentKind

layout = make_passage_layout(n_lines=10, seed=21)
profile = ReaderProfile(seed=31, hesitation_prob=0.18)
samples, truth = simulate(layout, profile)

print(f"scripted hesitations: {len(truth.difficult_words)}")
for d in truth.difficult_words:
    word = layout.word(d.word_id)
    print(f"  {word.text!r:>12} on line {d.line_id}: {d.trigger}")

# Run the whole pipeline with the magnifier enabled.
pipe = run_stream(samples, layout, default_screen(),
                  aug_cfg=AugmentationConfig(dw_mode=DwMode.MAGNIFY))

magnified = [a for a in pipe.augments if a.kind == AugmentKind.MAGNIFY_WORD]
dismissed = [a for a in pipe.augments if a.kind == AugmentKind.DISMISS_MAGNIFIER]
print(f"\nmagnifier events: {len(magnified)} shown, {len(dismissed)} dismissed")
for a in magnified:
    print(f"  magnify {layout.word(a.word_id).text!r} "
          f"({a.placement} the line) at {a.at / 1e6:.2f} s")

detected = {(d.word_id, d.trigger)
            for d in truth.difficult_words}
got = {(a.word_id,) for a in magnified}
assert {g[0] for g in got} == {d[0] for d in detected}
print("\nevery scripted hesitation produced exactly one magnifier")

# Same session with text-to-speech instead: the engine emits speak events
# and debounces repeats within 2 s.
pipe_tts = run_stream(samples, layout, default_screen(),
                      aug_cfg=AugmentationConfig(dw_mode=DwMode.TTS))
spoken = [a for a in pipe_tts.augments if a.kind == AugmentKind.SPEAK_WORD]
print(f"\nwith tts mode: {len(spoken)} speak events "
      f"({', '.join(layout.word(a.word_id).text for a in spoken[:6])}...)")
