/**
 * Calibration and validation target screens.
 *
 * Dot layouts render static discs; line layouts animate a pursuit target
 * that eases in and out (smoothstep) along each sweep, matching the
 * engine's trajectory timing so collected gaze aligns with what the engine
 * scores.
 */

import type { TargetsPayload } from "./protocol.js";

export function smoothstep(u: number): number {
  const c = Math.min(1, Math.max(0, u));
  return c * c * (3 - 2 * c);
}

export interface SweepSpec {
  y_px: number;
  start_x: number;
  end_x: number;
  duration_us: number;
}

/** Target position along a sweep at elapsed time t (microseconds). */
export function sweepPosition(sweep: SweepSpec, tUs: number): { x: number; y: number } {
  const u = smoothstep(tUs / sweep.duration_us);
  return { x: sweep.start_x + (sweep.end_x - sweep.start_x) * u, y: sweep.y_px };
}

export class CalibrationView {
  private dots: HTMLElement[] = [];
  private raf = 0;

  constructor(private container: HTMLElement,
              private screenWidth: number,
              private screenHeight: number) {}

  /** Render the target set; returns the dot elements for styling/tests. */
  show(targets: TargetsPayload): HTMLElement[] {
    this.clear();
    const doc = this.container.ownerDocument;
    for (const [fx, fy] of targets.points) {
      const dot = doc.createElement("div");
      dot.dataset.target = "dot";
      dot.style.position = "absolute";
      const r = targets.radius_px;
      dot.style.width = `${2 * r}px`;
      dot.style.height = `${2 * r}px`;
      dot.style.borderRadius = "50%";
      dot.style.background = "white";
      dot.style.border = "2px solid black";
      dot.style.left = `${fx * this.screenWidth - r}px`;
      dot.style.top = `${fy * this.screenHeight - r}px`;
      this.container.appendChild(dot);
      this.dots.push(dot);
    }
    return this.dots;
  }

  /**
   * Animate the dots along their sweeps one line at a time. onDone fires
   * after the last sweep finishes; onFrame reports the moving target's
   * position so the caller can tag outgoing gaze with the line index.
   */
  animateSweeps(targets: TargetsPayload,
                onFrame: (lineIndex: number, x: number, y: number) => void,
                onDone: () => void,
                now: () => number = () => performance.now()): void {
    const sweeps = targets.sweeps ?? [];
    if (sweeps.length === 0 || this.dots.length === 0) {
      onDone();
      return;
    }
    let index = 0;
    let startMs = now();
    const step = () => {
      const sweep = sweeps[index]!;
      const dot = this.dots[index]!;
      const tUs = (now() - startMs) * 1000;
      const pos = sweepPosition(sweep, tUs);
      dot.style.left = `${pos.x - targets.radius_px}px`;
      dot.style.top = `${pos.y - targets.radius_px}px`;
      onFrame(index, pos.x, pos.y);
      if (tUs >= sweep.duration_us) {
        index += 1;
        startMs = now();
        if (index >= sweeps.length) {
          onDone();
          return;
        }
      }
      this.raf = requestAnimationFrame(step);
    };
    this.raf = requestAnimationFrame(step);
  }

  clear(): void {
    if (this.raf) cancelAnimationFrame(this.raf);
    this.raf = 0;
    for (const d of this.dots) d.remove();
    this.dots = [];
  }
}
