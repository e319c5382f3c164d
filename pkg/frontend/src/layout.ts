/**
 * Passage layout: wraps words into lines, measures their boxes, and builds
 * the layout message the engine expects. Every reflow or scroll produces a
 * fresh layout_version; pure vertical scrolls translate the boxes and ship
 * identity id maps so the engine's trackers survive.
 */

import type { LayoutWire, LineBoxWire, WordBoxWire } from "./protocol.js";
import type { ViewConfig } from "./view-config.js";

const FUNCTION_WORDS = new Set((
  "a an the and or but nor so yet for of to in on at by from with about " +
  "into over after before under between through during above below up " +
  "down out off than as if then that this these those there here it its " +
  "he him his she her they them their we us our you your i me my who " +
  "whom whose which what is am are was were be been being do does did " +
  "have has had will would shall should can could may might must not no"
).split(/\s+/));

export function isFunctionWord(text: string): boolean {
  return FUNCTION_WORDS.has(text.replace(/^[^\w]+|[^\w]+$/g, "").toLowerCase());
}

/** Measures rendered word widths for a given font. */
export interface WordMeasurer {
  measure(text: string, fontSizePx: number, fontWeight: number): number;
}

/** Average-glyph-width model; the fallback when no canvas is available. */
export class CharWidthMeasurer implements WordMeasurer {
  constructor(private emFraction = 0.55) {}
  measure(text: string, fontSizePx: number): number {
    return Math.max(1, text.length) * this.emFraction * fontSizePx;
  }
}

/** Canvas 2D text metrics, exact for the active font. */
export class CanvasMeasurer implements WordMeasurer {
  private ctx: CanvasRenderingContext2D | null;
  constructor(doc: Document = document) {
    this.ctx = doc.createElement("canvas").getContext("2d");
  }
  measure(text: string, fontSizePx: number, fontWeight: number): number {
    if (!this.ctx) return new CharWidthMeasurer().measure(text, fontSizePx);
    this.ctx.font = `${fontWeight} ${fontSizePx}px sans-serif`;
    const w = this.ctx.measureText(text).width;
    return w > 0 ? w : new CharWidthMeasurer().measure(text, fontSizePx);
  }
}

export interface LayoutOptions {
  viewportWidth: number;
  marginLeft: number;
  marginTop: number;
  lineSpacing: number;     // pitch = fontSize * lineSpacing
}

export interface BuiltLayout {
  wire: LayoutWire;
  /** word_id -> box, for rendering */
  rects: Map<number, { left: number; top: number; width: number; height: number;
                       text: string; lineId: number }>;
  pitch: number;
}

/**
 * Wrap the passage into lines and produce wire boxes. Returns null for an
 * empty passage (the caller should disable input rather than send nothing).
 */
export function buildLayout(passage: string, cfg: ViewConfig,
                            opts: LayoutOptions, measurer: WordMeasurer,
                            version = 1, scrollY = 0): BuiltLayout | null {
  const tokens = passage.split(/\s+/).filter((w) => w.length > 0);
  if (tokens.length === 0) return null;

  const gap = 0.5 * cfg.fontSizePx;
  const height = cfg.fontSizePx;
  const pitch = cfg.fontSizePx * opts.lineSpacing;
  const rightEdge = opts.viewportWidth - opts.marginLeft;

  const lines: LineBoxWire[] = [];
  const words: WordBoxWire[] = [];
  const rects: BuiltLayout["rects"] = new Map();

  let lineId = 0;
  let x = opts.marginLeft;
  let lineRight = opts.marginLeft;
  let wordId = 0;
  const lineTop = () => opts.marginTop + lineId * pitch - scrollY;

  const closeLine = () => {
    lines.push({ line_id: lineId, top: lineTop(), bottom: lineTop() + height,
                 left: opts.marginLeft, right: lineRight });
    lineId += 1;
    x = opts.marginLeft;
    lineRight = opts.marginLeft;
  };

  for (const text of tokens) {
    const w = measurer.measure(text, cfg.fontSizePx, cfg.fontWeight);
    if (x + w > rightEdge && x > opts.marginLeft) closeLine();
    words.push({ word_id: wordId, line_id: lineId, left: x, right: x + w,
                 text, function_word: isFunctionWord(text) });
    rects.set(wordId, { left: x, top: lineTop(), width: w, height,
                        text, lineId });
    lineRight = x + w;
    x += w + gap;
    wordId += 1;
  }
  if (lineRight > opts.marginLeft) closeLine();

  // the engine requires one uniform box width per layout
  const widest = Math.max(...lines.map((l) => l.right));
  for (const l of lines) l.right = widest;

  return {
    wire: { layout_version: version, background: cfg.scheme, lines, words },
    rects,
    pitch,
  };
}

export interface LayoutUpdate {
  layout: LayoutWire;
  scroll_dy: number;
  line_id_map: Record<number, number> | null;
  word_id_map: Record<number, number> | null;
}

/** A pure vertical scroll: boxes translate by -dy, identities survive. */
export function scrolledLayout(prev: BuiltLayout, dy: number,
                               version: number): LayoutUpdate {
  const lines = prev.wire.lines.map((l) => (
    { ...l, top: l.top - dy, bottom: l.bottom - dy }));
  const lineMap: Record<number, number> = {};
  const wordMap: Record<number, number> = {};
  for (const l of prev.wire.lines) lineMap[l.line_id] = l.line_id;
  for (const w of prev.wire.words) wordMap[w.word_id] = w.word_id;
  return {
    layout: { ...prev.wire, layout_version: version, lines },
    scroll_dy: -dy,
    line_id_map: lineMap,
    word_id_map: wordMap,
  };
}

/** Render the passage as absolutely positioned word spans. */
export function renderPassage(container: HTMLElement, built: BuiltLayout,
                              cfg: ViewConfig): void {
  container.textContent = "";
  container.style.position = "relative";
  container.style.fontSize = `${cfg.fontSizePx}px`;
  container.style.fontWeight = String(cfg.fontWeight);
  for (const [wordId, r] of built.rects) {
    const span = container.ownerDocument.createElement("span");
    span.textContent = r.text;
    span.dataset.wordId = String(wordId);
    span.dataset.lineId = String(r.lineId);
    span.style.position = "absolute";
    span.style.left = `${r.left}px`;
    span.style.top = `${r.top}px`;
    span.style.width = `${r.width}px`;
    span.style.height = `${r.height}px`;
    container.appendChild(span);
  }
}
