/**
 * Reader-facing customization state.
 *
 * Hard rules enforced here: the font size floor is 48 px, the two
 * difficult-word thresholds only move in their fixed steps (50 ms and
 * 250 ms), and the augmentation color picker exposes hue and lightness
 * only, with saturation pinned at 100%.
 */

export type Scheme = "light" | "dark";
export type LsMode = "highlight" | "arrow" | "off";
export type DwMode = "magnify" | "tts" | "off";

/** Hue 0-360, lightness 0-100; saturation is always 100. */
export interface HslColor {
  hue: number;
  lightness: number;
}

export interface ViewConfig {
  fontSizePx: number;
  fontWeight: number;
  scheme: Scheme;
  lsMode: LsMode;
  dwMode: DwMode;
  lsColor: HslColor | null;     // null = scheme default
  tDw0Us: number;
  tDw2Us: number;
}

export const MIN_FONT_PX = 48;
export const DW0_STEP_US = 50_000;
export const DW2_STEP_US = 250_000;

export function defaultConfig(): ViewConfig {
  return {
    fontSizePx: MIN_FONT_PX,
    fontWeight: 600,
    scheme: "light",
    lsMode: "highlight",
    dwMode: "magnify",
    lsColor: null,
    tDw0Us: 500_000,
    tDw2Us: 1_500_000,
  };
}

export function setFontSize(cfg: ViewConfig, px: number): ViewConfig {
  return { ...cfg, fontSizePx: Math.max(MIN_FONT_PX, Math.round(px)) };
}

/** Step a threshold up or down; the result is always an exact multiple. */
export function stepDw0(cfg: ViewConfig, direction: 1 | -1): ViewConfig {
  const next = cfg.tDw0Us + direction * DW0_STEP_US;
  return { ...cfg, tDw0Us: Math.max(DW0_STEP_US, next) };
}

export function stepDw2(cfg: ViewConfig, direction: 1 | -1): ViewConfig {
  const next = cfg.tDw2Us + direction * DW2_STEP_US;
  return { ...cfg, tDw2Us: Math.max(DW2_STEP_US, next) };
}

export function setLsColor(cfg: ViewConfig, hue: number, lightness: number): ViewConfig {
  return {
    ...cfg,
    lsColor: {
      hue: Math.min(360, Math.max(0, hue)),
      lightness: Math.min(100, Math.max(0, lightness)),
    },
  };
}

/** HSL with saturation fixed at 100% to 8-bit RGB. */
export function hslToRgb(color: HslColor): [number, number, number] {
  const h = ((color.hue % 360) + 360) % 360;
  const l = color.lightness / 100;
  const c = 1 - Math.abs(2 * l - 1);
  const x = c * (1 - Math.abs(((h / 60) % 2) - 1));
  const m = l - c / 2;
  const sextant = Math.floor(h / 60) % 6;
  const table: [number, number, number][] = [
    [c, x, 0], [x, c, 0], [0, c, x], [0, x, c], [x, 0, c], [c, 0, x],
  ];
  const [r, g, b] = table[sextant]!;
  return [Math.round((r + m) * 255), Math.round((g + m) * 255),
          Math.round((b + m) * 255)];
}

export const YELLOW: HslColor = { hue: 60, lightness: 50 };   // rgb(255,255,0)
export const BLUE: HslColor = { hue: 240, lightness: 50 };    // rgb(0,0,255)

/** Default augmentation color: high contrast against the page scheme. */
export function resolvedLsColor(cfg: ViewConfig): [number, number, number] {
  if (cfg.lsColor) return hslToRgb(cfg.lsColor);
  if (cfg.lsMode === "arrow") {
    return hslToRgb(cfg.scheme === "light" ? BLUE : YELLOW);
  }
  return hslToRgb(cfg.scheme === "light" ? YELLOW : BLUE);
}

/** Payload for the engine's configure message. */
export function toConfigurePayload(cfg: ViewConfig): Record<string, unknown> {
  return {
    engine: { t_dw0_us: cfg.tDw0Us, t_dw2_us: cfg.tDw2Us },
    augmentation: {
      ls_mode: cfg.lsMode,
      dw_mode: cfg.dwMode,
      ls_color: cfg.lsColor
        ? { hue: cfg.lsColor.hue, lightness: cfg.lsColor.lightness }
        : null,
      background: cfg.scheme,
    },
  };
}
