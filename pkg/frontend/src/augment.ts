/**
 * Applies augmentation directives to the DOM.
 *
 * Mirrors the engine's state invariants: at most one line augmentation and
 * at most one magnifier are ever visible. Events referencing a stale layout
 * version are ignored. Speech uses the platform voice, once per event (the
 * engine already debounces repeats).
 */

import type { AugmentPayload, LayoutWire } from "./protocol.js";

const ARROW_GAP_EM = 0.5;
const MAGNIFIER_PADDING_EM = 0.5;

export interface Speaker {
  speak(text: string): void;
}

/** window.speechSynthesis when present, otherwise a silent stub. */
export function platformSpeaker(win: Window = window): Speaker {
  const synth = (win as Window & { speechSynthesis?: SpeechSynthesis }).speechSynthesis;
  if (!synth) return { speak: () => undefined };
  return {
    speak(text: string) {
      const utterance = new (win as unknown as {
        SpeechSynthesisUtterance: typeof SpeechSynthesisUtterance;
      }).SpeechSynthesisUtterance(text);
      synth.speak(utterance);
    },
  };
}

export class AugmentView {
  private lineEl: HTMLElement | null = null;
  private magnifierEl: HTMLElement | null = null;
  activeLineId: number | null = null;
  activeMagnifierWordId: number | null = null;
  spokenWords: string[] = [];

  constructor(private container: HTMLElement,
              private speaker: Speaker,
              private fontSizePx: number,
              private magnifierScale = 3.0) {}

  /** Apply one directive; stale layout versions are dropped. */
  apply(ev: AugmentPayload, layout: LayoutWire, activeVersion: number): void {
    if (layout.layout_version !== activeVersion) return;
    switch (ev.kind) {
      case "highlight_line":
        this.showLine(ev, layout, "highlight");
        break;
      case "arrow_line":
        this.showLine(ev, layout, "arrow");
        break;
      case "clear_line":
        this.clearLine();
        break;
      case "magnify_word":
        this.showMagnifier(ev, layout);
        break;
      case "dismiss_magnifier":
        this.dismissMagnifier();
        break;
      case "speak_word": {
        const word = layout.words.find((w) => w.word_id === ev.word_id);
        if (word) {
          this.spokenWords.push(word.text);
          this.speaker.speak(word.text);
        }
        break;
      }
    }
  }

  private showLine(ev: AugmentPayload, layout: LayoutWire,
                   style: "highlight" | "arrow"): void {
    const line = layout.lines.find((l) => l.line_id === ev.line_id);
    if (!line || ev.color === undefined) return;
    this.clearLine();
    const doc = this.container.ownerDocument;
    const el = doc.createElement("div");
    const [r, g, b] = ev.color;
    el.dataset.augment = style === "highlight" ? "line-highlight" : "line-arrow";
    el.dataset.lineId = String(ev.line_id);
    el.style.position = "absolute";
    const height = line.bottom - line.top;
    if (style === "highlight") {
      // background fill of the whole line box, behind the text
      el.style.left = `${line.left}px`;
      el.style.top = `${line.top}px`;
      el.style.width = `${line.right - line.left}px`;
      el.style.height = `${height}px`;
      el.style.backgroundColor = `rgb(${r}, ${g}, ${b})`;
      el.style.zIndex = "-1";
    } else {
      // solid triangle just before the first glyph
      const size = height / 2;
      el.style.left = `${line.left - ARROW_GAP_EM * this.fontSizePx - size}px`;
      el.style.top = `${line.top + height / 2 - size / 2}px`;
      el.style.width = "0";
      el.style.height = "0";
      el.style.borderTop = `${size / 2}px solid transparent`;
      el.style.borderBottom = `${size / 2}px solid transparent`;
      el.style.borderLeft = `${size}px solid rgb(${r}, ${g}, ${b})`;
    }
    this.container.appendChild(el);
    this.lineEl = el;
    this.activeLineId = ev.line_id ?? null;
  }

  private clearLine(): void {
    this.lineEl?.remove();
    this.lineEl = null;
    this.activeLineId = null;
  }

  private showMagnifier(ev: AugmentPayload, layout: LayoutWire): void {
    const word = layout.words.find((w) => w.word_id === ev.word_id);
    const line = word
      ? layout.lines.find((l) => l.line_id === word.line_id)
      : undefined;
    if (!word || !line) return;
    this.dismissMagnifier();
    const doc = this.container.ownerDocument;
    const el = doc.createElement("div");
    el.dataset.augment = "magnifier";
    el.dataset.wordId = String(ev.word_id);
    el.textContent = word.text;
    const viewportWidth = Math.max(...layout.lines.map((l) => l.right));
    const scaledFont = this.fontSizePx * this.magnifierScale;
    const pad = MAGNIFIER_PADDING_EM * scaledFont;
    const naturalWidth = (word.right - word.left) * this.magnifierScale + 2 * pad;
    const width = Math.min(naturalWidth, viewportWidth);   // never overflow
    const height = (line.bottom - line.top) * this.magnifierScale + 2 * pad;
    const cx = (word.left + word.right) / 2;
    const left = Math.max(0, Math.min(cx - width / 2, viewportWidth - width));
    el.style.position = "absolute";
    el.style.left = `${left}px`;
    el.style.top = ev.placement === "below"
      ? `${line.bottom + 10}px`
      : `${line.top - 10 - height}px`;
    el.style.width = `${width}px`;
    el.style.fontSize = `${scaledFont}px`;
    el.style.padding = `${pad}px`;
    el.style.overflowWrap = "break-word";    // overlong words wrap inside
    el.style.background = "white";
    el.style.border = "2px solid black";
    el.style.zIndex = "10";
    this.container.appendChild(el);
    this.magnifierEl = el;
    this.activeMagnifierWordId = ev.word_id ?? null;
  }

  private dismissMagnifier(): void {
    this.magnifierEl?.remove();
    this.magnifierEl = null;
    this.activeMagnifierWordId = null;
  }

  /** Count of visible line augmentations (invariant: 0 or 1). */
  visibleLineCount(): number {
    return this.container.querySelectorAll(
      '[data-augment="line-highlight"], [data-augment="line-arrow"]').length;
  }

  visibleMagnifierCount(): number {
    return this.container.querySelectorAll('[data-augment="magnifier"]').length;
  }
}
