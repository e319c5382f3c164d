/**
 * Browser entry: wires the protocol client, passage rendering, augmentation
 * view, customization panel and mouse-as-gaze input into a working reading
 * session against the engine (reached through the WebSocket bridge).
 */

import { AugmentView, platformSpeaker } from "./augment.js";
import { MouseAsGaze } from "./gaze-input.js";
import {
  buildLayout,
  CanvasMeasurer,
  renderPassage,
  scrolledLayout,
  type BuiltLayout,
} from "./layout.js";
import { ProtocolClient, webSocketTransport, type ServerMsg } from "./protocol.js";
import {
  defaultConfig,
  resolvedLsColor,
  setFontSize,
  setLsColor,
  stepDw0,
  stepDw2,
  toConfigurePayload,
  type ViewConfig,
} from "./view-config.js";

const PASSAGE =
  "Lizzy lived next to a busy road and would often sit outside to watch " +
  "the reindeer wander past the orchard gate in the early morning light. " +
  "Every harvest the meadow filled with lanterns and the whole village " +
  "gathered to read stories aloud until the embers faded into the dark.";

export function startApp(root: HTMLElement, bridgeUrl = "ws://127.0.0.1:7328"): void {
  const cfgState = { cfg: defaultConfig() };
  const client = new ProtocolClient(webSocketTransport(bridgeUrl));
  const page = root.querySelector<HTMLElement>("#page") ?? root;
  const view = new AugmentView(page, platformSpeaker(), cfgState.cfg.fontSizePx);

  let built: BuiltLayout | null = null;
  let version = 0;
  let scrollY = 0;

  const sendLayout = () => {
    version += 1;
    built = buildLayout(PASSAGE, cfgState.cfg,
                        { viewportWidth: page.clientWidth || 1600,
                          marginLeft: 80, marginTop: 60, lineSpacing: 1.5 },
                        new CanvasMeasurer(page.ownerDocument), version, scrollY);
    if (!built) return;
    renderPassage(page, built, cfgState.cfg);
    client.send("layout", { layout: built.wire });
  };

  const sendScroll = (dy: number) => {
    if (!built) return;
    scrollY += dy;
    version += 1;
    const update = scrolledLayout(built, dy, version);
    built = { ...built, wire: update.layout };
    renderPassage(page, built, cfgState.cfg);
    client.send("scroll", { t: Date.now() * 1000, dy });
    client.send("layout", update);
  };

  client.onMessage((msg: ServerMsg) => {
    if (msg.type === "augment" && built) {
      view.apply(msg.payload, built.wire, built.wire.layout_version);
    }
    if (msg.type === "error") {
      console.warn("engine error:", msg.payload.code, msg.payload.message);
    }
  });

  const reconfigure = (next: ViewConfig) => {
    cfgState.cfg = next;
    client.send("configure", toConfigurePayload(next));
    sendLayout();
  };

  wireControls(root, cfgState, reconfigure);

  const gaze = new MouseAsGaze((sample) => client.send("gaze", sample));
  gaze.attach(page);
  page.addEventListener("wheel", (ev) => sendScroll(ev.deltaY));

  client.hello();
  client.send("phase", { phase: "reading", skip_calibration: true });
  sendLayout();
}

function wireControls(root: HTMLElement,
                      state: { cfg: ViewConfig },
                      apply: (cfg: ViewConfig) => void): void {
  const byId = (id: string) => root.querySelector<HTMLElement>(`#${id}`);
  byId("font-up")?.addEventListener("click", () =>
    apply(setFontSize(state.cfg, state.cfg.fontSizePx + 4)));
  byId("font-down")?.addEventListener("click", () =>
    apply(setFontSize(state.cfg, state.cfg.fontSizePx - 4)));
  byId("dw0-up")?.addEventListener("click", () => apply(stepDw0(state.cfg, 1)));
  byId("dw0-down")?.addEventListener("click", () => apply(stepDw0(state.cfg, -1)));
  byId("dw2-up")?.addEventListener("click", () => apply(stepDw2(state.cfg, 1)));
  byId("dw2-down")?.addEventListener("click", () => apply(stepDw2(state.cfg, -1)));
  const hue = byId("ls-hue") as HTMLInputElement | null;
  const lightness = byId("ls-lightness") as HTMLInputElement | null;
  const onColor = () => {
    if (!hue || !lightness) return;
    apply(setLsColor(state.cfg, Number(hue.value), Number(lightness.value)));
    const [r, g, b] = resolvedLsColor(state.cfg);
    const swatch = byId("ls-swatch");
    if (swatch) swatch.style.backgroundColor = `rgb(${r}, ${g}, ${b})`;
  };
  hue?.addEventListener("input", onColor);
  lightness?.addEventListener("input", onColor);
}
