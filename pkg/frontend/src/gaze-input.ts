/**
 * Mouse-as-gaze: resamples the pointer position on the tracker's 120 Hz
 * grid so the engine sees a realistic stream without hardware. Optional
 * synthetic noise and vertical drift make the drift-correction flow
 * demonstrable.
 */

import type { GazePayload } from "./protocol.js";

export const SAMPLE_HZ = 120;

export interface GazeInputOptions {
  noiseSdPx: number;
  driftPerPx: number;       // vertical drift as a fraction of y
  dataLossRate: number;
}

export class MouseAsGaze {
  private x = 0;
  private y = 0;
  private slot = 0;
  private timer: ReturnType<typeof setInterval> | null = null;
  opts: GazeInputOptions = { noiseSdPx: 0, driftPerPx: 0, dataLossRate: 0 };

  constructor(private emit: (sample: GazePayload) => void,
              private random: () => number = Math.random) {}

  pointerMoved(x: number, y: number): void {
    this.x = x;
    this.y = y;
  }

  /** Timestamp of sample slot n on the exact 120 Hz grid, microseconds. */
  slotUs(n: number): number {
    return Math.floor((n * 1_000_000) / SAMPLE_HZ);
  }

  /** Emit one sample for the current slot (the interval driver, exposed
   * separately so tests can step the clock deterministically). */
  tick(): GazePayload {
    let { x, y } = this;
    if (this.opts.noiseSdPx > 0) {
      x += this.gauss() * this.opts.noiseSdPx;
      y += this.gauss() * this.opts.noiseSdPx;
    }
    if (this.opts.driftPerPx !== 0) {
      y += this.opts.driftPerPx * this.y;
    }
    const sample: GazePayload = {
      t: this.slotUs(this.slot),
      x,
      y,
      valid: this.opts.dataLossRate <= 0 || this.random() >= this.opts.dataLossRate,
      eye: "A",
    };
    this.slot += 1;
    this.emit(sample);
    return sample;
  }

  start(): void {
    if (this.timer) return;
    this.timer = setInterval(() => this.tick(), 1000 / SAMPLE_HZ);
  }

  stop(): void {
    if (this.timer) clearInterval(this.timer);
    this.timer = null;
  }

  attach(el: HTMLElement): () => void {
    const onMove = (ev: MouseEvent) => this.pointerMoved(ev.clientX, ev.clientY);
    el.addEventListener("mousemove", onMove);
    this.start();
    return () => {
      el.removeEventListener("mousemove", onMove);
      this.stop();
    };
  }

  private gauss(): number {
    // Box-Muller from the injected uniform source
    const u = Math.max(this.random(), 1e-12);
    const v = this.random();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }
}
