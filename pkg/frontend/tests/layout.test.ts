import { describe, expect, it } from "vitest";

import {
  buildLayout,
  CharWidthMeasurer,
  isFunctionWord,
  scrolledLayout,
} from "../src/layout.js";
import { defaultConfig } from "../src/view-config.js";

const OPTS = { viewportWidth: 1600, marginLeft: 80, marginTop: 60, lineSpacing: 1.5 };
const PASSAGE =
  "Lizzy lived next to a busy road and would often sit outside to watch " +
  "the reindeer wander past the orchard gate in the early morning light " +
  "while the lanterns flickered over the quiet meadow until dawn arrived";

function build(version = 1, scrollY = 0, cfg = defaultConfig()) {
  const built = buildLayout(PASSAGE, cfg, OPTS, new CharWidthMeasurer(),
                            version, scrollY);
  if (!built) throw new Error("expected a layout");
  return built;
}

describe("buildLayout", () => {
  it("produces contiguous non-overlapping uniform lines", () => {
    const { wire } = build();
    expect(wire.lines.length).toBeGreaterThan(2);
    wire.lines.forEach((l, i) => expect(l.line_id).toBe(i));
    const h0 = wire.lines[0]!.bottom - wire.lines[0]!.top;
    for (const l of wire.lines) {
      expect(l.bottom - l.top).toBeCloseTo(h0, 6);
      expect(l.right).toBeGreaterThan(l.left);
    }
    for (let i = 1; i < wire.lines.length; i++) {
      expect(wire.lines[i]!.top).toBeGreaterThanOrEqual(wire.lines[i - 1]!.bottom);
    }
  });

  it("orders words left to right with unique ids on their lines", () => {
    const { wire } = build();
    const ids = new Set(wire.words.map((w) => w.word_id));
    expect(ids.size).toBe(wire.words.length);
    const lineIds = new Set(wire.lines.map((l) => l.line_id));
    for (const w of wire.words) expect(lineIds.has(w.line_id)).toBe(true);
    for (const lid of lineIds) {
      const row = wire.words.filter((w) => w.line_id === lid);
      for (let i = 1; i < row.length; i++) {
        expect(row[i]!.left).toBeGreaterThan(row[i - 1]!.right);
      }
    }
  });

  it("flags function words", () => {
    expect(isFunctionWord("the")).toBe(true);
    expect(isFunctionWord("The")).toBe(true);
    expect(isFunctionWord("reindeer")).toBe(false);
    const { wire } = build();
    const the = wire.words.find((w) => w.text === "the");
    const reindeer = wire.words.find((w) => w.text === "reindeer");
    expect(the?.function_word).toBe(true);
    expect(reindeer?.function_word).toBe(false);
  });

  it("font size changes produce different boxes under a fresh version", () => {
    const small = build(1);
    const cfg = { ...defaultConfig(), fontSizePx: 64 };
    const large = buildLayout(PASSAGE, cfg, OPTS, new CharWidthMeasurer(), 2);
    expect(large!.wire.layout_version).toBe(2);
    expect(large!.wire.lines[0]!.bottom - large!.wire.lines[0]!.top)
      .toBeGreaterThan(small.wire.lines[0]!.bottom - small.wire.lines[0]!.top);
  });

  it("returns null for an empty passage", () => {
    expect(buildLayout("   ", defaultConfig(), OPTS, new CharWidthMeasurer()))
      .toBeNull();
  });
});

describe("scrolledLayout", () => {
  it("translates boxes by -dy with identity id maps and a version bump", () => {
    const built = build(3);
    const update = scrolledLayout(built, 72, 4);
    expect(update.layout.layout_version).toBe(4);
    expect(update.scroll_dy).toBe(-72);
    update.layout.lines.forEach((l, i) => {
      expect(l.top).toBeCloseTo(built.wire.lines[i]!.top - 72, 6);
      expect(l.bottom).toBeCloseTo(built.wire.lines[i]!.bottom - 72, 6);
    });
    for (const l of built.wire.lines) {
      expect(update.line_id_map![l.line_id]).toBe(l.line_id);
    }
    for (const w of built.wire.words) {
      expect(update.word_id_map![w.word_id]).toBe(w.word_id);
    }
  });
});
