// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { AugmentView, type Speaker } from "../src/augment.js";
import type { AugmentPayload, LayoutWire } from "../src/protocol.js";

function layoutFixture(): LayoutWire {
  const lines = Array.from({ length: 6 }, (_, i) => ({
    line_id: i, top: 100 + i * 72, bottom: 148 + i * 72, left: 80, right: 1500,
  }));
  const words = lines.map((l, i) => ({
    word_id: i, line_id: i, left: 200, right: 420,
    text: `word${i}`, function_word: false,
  }));
  return { layout_version: 1, background: "light", lines, words };
}

function ev(partial: Partial<AugmentPayload> & { kind: AugmentPayload["kind"] }): AugmentPayload {
  return { at: 0, ...partial };
}

describe("AugmentView", () => {
  let container: HTMLElement;
  let spoken: string[];
  let view: AugmentView;
  let layout: LayoutWire;

  beforeEach(() => {
    container = document.createElement("div");
    document.body.appendChild(container);
    spoken = [];
    const speaker: Speaker = { speak: (t) => spoken.push(t) };
    view = new AugmentView(container, speaker, 48);
    layout = layoutFixture();
  });

  it("renders the highlight with the exact configured color", () => {
    view.apply(ev({ kind: "highlight_line", line_id: 2, color: [255, 255, 0] }),
               layout, 1);
    const el = container.querySelector<HTMLElement>('[data-augment="line-highlight"]');
    expect(el).not.toBeNull();
    expect(el!.style.backgroundColor).toBe("rgb(255, 255, 0)");
    expect(el!.style.top).toBe("244px");
    expect(el!.style.height).toBe("48px");
  });

  it("keeps at most one line augmentation through an event storm", () => {
    for (let i = 0; i < 40; i++) {
      const line = i % 6;
      if (i % 7 === 0) view.apply(ev({ kind: "clear_line", line_id: line }), layout, 1);
      else view.apply(ev({ kind: "highlight_line", line_id: line,
                           color: [255, 255, 0] }), layout, 1);
      expect(view.visibleLineCount()).toBeLessThanOrEqual(1);
    }
  });

  it("clear then highlight sequences track the engine state", () => {
    view.apply(ev({ kind: "highlight_line", line_id: 4, color: [255, 255, 0] }),
               layout, 1);
    view.apply(ev({ kind: "clear_line", line_id: 4 }), layout, 1);
    view.apply(ev({ kind: "highlight_line", line_id: 5, color: [255, 255, 0] }),
               layout, 1);
    expect(view.activeLineId).toBe(5);
    expect(view.visibleLineCount()).toBe(1);
  });

  it("renders the arrow as a triangle before the line start", () => {
    view.apply(ev({ kind: "arrow_line", line_id: 1, color: [0, 0, 255] }),
               layout, 1);
    const el = container.querySelector<HTMLElement>('[data-augment="line-arrow"]');
    expect(el).not.toBeNull();
    expect(el!.style.borderLeft).toContain("rgb(0, 0, 255)");
    // 0.5 em gap (24 px at 48 px font) plus the arrow's own width
    expect(parseFloat(el!.style.left)).toBeLessThan(80 - 24);
  });

  it("magnifies above by default and below on request", () => {
    view.apply(ev({ kind: "magnify_word", word_id: 3, placement: "above" }),
               layout, 1);
    const above = container.querySelector<HTMLElement>('[data-augment="magnifier"]');
    const line3 = layout.lines[3]!;
    expect(parseFloat(above!.style.top)).toBeLessThan(line3.top);
    view.apply(ev({ kind: "magnify_word", word_id: 0, placement: "below" }),
               layout, 1);
    expect(view.visibleMagnifierCount()).toBe(1);   // old one dismissed
    const below = container.querySelector<HTMLElement>('[data-augment="magnifier"]');
    expect(parseFloat(below!.style.top)).toBeGreaterThan(layout.lines[0]!.bottom);
  });

  it("magnifier never exceeds the viewport width", () => {
    layout.words[2] = { ...layout.words[2]!, left: 100, right: 1450,
                        text: "pneumonoultramicroscopic" };
    view.apply(ev({ kind: "magnify_word", word_id: 2, placement: "above" }),
               layout, 1);
    const el = container.querySelector<HTMLElement>('[data-augment="magnifier"]');
    expect(parseFloat(el!.style.width)).toBeLessThanOrEqual(1500);
    expect(el!.style.overflowWrap).toBe("break-word");
  });

  it("dismisses the magnifier synchronously", () => {
    view.apply(ev({ kind: "magnify_word", word_id: 3, placement: "above" }),
               layout, 1);
    view.apply(ev({ kind: "dismiss_magnifier", word_id: 3 }), layout, 1);
    expect(view.visibleMagnifierCount()).toBe(0);
    expect(view.activeMagnifierWordId).toBeNull();
  });

  it("speaks the word once per event", () => {
    view.apply(ev({ kind: "speak_word", word_id: 4, line_id: 4 }), layout, 1);
    expect(spoken).toEqual(["word4"]);
    view.apply(ev({ kind: "speak_word", word_id: 4, line_id: 4 }), layout, 1);
    expect(spoken).toEqual(["word4", "word4"]);   // engine owns the debounce
  });

  it("ignores events for a stale layout version", () => {
    view.apply(ev({ kind: "highlight_line", line_id: 2, color: [255, 255, 0] }),
               layout, 2);
    expect(view.visibleLineCount()).toBe(0);
  });
});
