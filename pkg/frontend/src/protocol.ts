/**
 * Wire protocol types and client (see ../docs/protocol.md for the schema).
 *
 * Messages are newline-delimited JSON envelopes. The client owns the
 * outbound sequence counter and dispatches inbound messages by type in
 * arrival (seq) order.
 */

export interface Envelope<T = string, P = unknown> {
  type: T;
  session: string | null;
  seq: number;
  payload: P;
}

export interface LineBoxWire {
  line_id: number;
  top: number;
  bottom: number;
  left: number;
  right: number;
}

export interface WordBoxWire {
  word_id: number;
  line_id: number;
  left: number;
  right: number;
  text: string;
  function_word: boolean;
}

export interface LayoutWire {
  layout_version: number;
  background: "light" | "dark";
  lines: LineBoxWire[];
  words: WordBoxWire[];
}

export interface GazePayload {
  t: number;
  x: number;
  y: number;
  valid: boolean;
  eye: "L" | "R" | "A";
  target?: number;
  line?: number;
}

export interface TargetsPayload {
  kind: "dots14" | "dots5" | "lines5" | "lines4";
  points: [number, number][];
  radius_px: number;
  sweeps?: { y_px: number; start_x: number; end_x: number; duration_us: number }[];
}

export interface BehaviorPayload {
  kind: "following" | "switch_return_sweep" | "jump" | "difficult_word";
  line_id: number;
  word_id?: number;
  trigger?: string;
  at: number;
}

export interface AugmentPayload {
  kind: "highlight_line" | "arrow_line" | "magnify_word" | "speak_word"
      | "dismiss_magnifier" | "clear_line";
  line_id?: number;
  word_id?: number;
  color?: [number, number, number];
  placement?: "above" | "below";
  at: number;
}

export interface ErrorPayload {
  code: string;
  message: string;
}

export type ServerMsg =
  | Envelope<"targets", TargetsPayload>
  | Envelope<"fixation_debug", { cx: number; cy: number; onset: number;
                                 duration: number; sample_count: number }>
  | Envelope<"behavior", BehaviorPayload>
  | Envelope<"augment", AugmentPayload>
  | Envelope<"metrics", Record<string, unknown> & { kind: string }>
  | Envelope<"error", ErrorPayload>;

/** Anything that can move wire lines: a WebSocket bridge or a raw socket. */
export interface Transport {
  send(line: string): void;
  onLine(cb: (line: string) => void): void;
  close(): void;
}

export type ServerHandler = (msg: ServerMsg) => void;

export class ProtocolClient {
  private seq = -1;
  private handlers: ServerHandler[] = [];

  constructor(private transport: Transport,
              readonly session: string = `ui-${Date.now()}`) {
    transport.onLine((line) => this.receive(line));
  }

  send(type: string, payload: unknown): void {
    this.seq += 1;
    this.transport.send(JSON.stringify(
      { type, session: this.session, seq: this.seq, payload }));
  }

  onMessage(cb: ServerHandler): void {
    this.handlers.push(cb);
  }

  private receive(line: string): void {
    let msg: ServerMsg;
    try {
      msg = JSON.parse(line) as ServerMsg;
    } catch {
      return; // not ours to crash on
    }
    for (const cb of this.handlers) cb(msg);
  }

  hello(screen?: { width_px: number; height_px: number; physical_width_cm: number;
                   physical_height_cm: number; viewing_distance_cm: number }): void {
    this.send("hello", screen ? { client: "reading-ui", screen } : { client: "reading-ui" });
  }

  close(): void {
    this.transport.close();
  }
}

/** Browser transport over the WebSocket bridge (see bridge.mjs). */
export function webSocketTransport(url: string): Transport {
  const ws = new WebSocket(url);
  let buffer = "";
  const listeners: ((line: string) => void)[] = [];
  const pending: string[] = [];
  ws.onopen = () => {
    for (const line of pending.splice(0)) ws.send(line + "\n");
  };
  ws.onmessage = (ev) => {
    buffer += typeof ev.data === "string" ? ev.data : "";
    let idx;
    while ((idx = buffer.indexOf("\n")) >= 0) {
      const line = buffer.slice(0, idx);
      buffer = buffer.slice(idx + 1);
      if (line.trim()) for (const cb of listeners) cb(line);
    }
  };
  return {
    send: (line) => {
      if (ws.readyState === WebSocket.OPEN) ws.send(line + "\n");
      else pending.push(line);
    },
    onLine: (cb) => listeners.push(cb),
    close: () => ws.close(),
  };
}
