/**
 * A tiny retained scene: plots are built once as primitive lists, then
 * rendered to SVG (full styling, text included) or rasterized to PNG.
 * Everything is deterministic: fixed number formatting, no timestamps.
 */

export type Rgb = [number, number, number];

export interface Circle {
  kind: "circle";
  x: number;
  y: number;
  r: number;
  fill: Rgb;
}

export interface Line {
  kind: "line";
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  color: Rgb;
  width: number;
}

export interface Rect {
  kind: "rect";
  x: number;
  y: number;
  w: number;
  h: number;
  fill: Rgb;
  opacity?: number;
}

export interface Text {
  kind: "text";
  x: number;
  y: number;
  text: string;
  size: number;
  color: Rgb;
  anchor?: "start" | "middle" | "end";
}

export type Primitive = Circle | Line | Rect | Text;

export interface Scene {
  width: number;
  height: number;
  items: Primitive[];
}

export const BLUE: Rgb = [54, 100, 139];
export const RED: Rgb = [178, 34, 52];
export const GREY: Rgb = [90, 90, 90];
export const LIGHT: Rgb = [200, 200, 200];
export const BLACK: Rgb = [20, 20, 20];

/** Fixed 12-color band palette (golden-angle hue walk, precomputed). */
export function bandColor(index: number): Rgb {
  const hue = (index * 137.508) % 360;
  return hslToRgb(hue, 0.62, 0.45);
}

function hslToRgb(h: number, s: number, l: number): Rgb {
  const c = (1 - Math.abs(2 * l - 1)) * s;
  const x = c * (1 - Math.abs(((h / 60) % 2) - 1));
  const m = l - c / 2;
  let rgb: [number, number, number];
  if (h < 60) rgb = [c, x, 0];
  else if (h < 120) rgb = [x, c, 0];
  else if (h < 180) rgb = [0, c, x];
  else if (h < 240) rgb = [0, x, c];
  else if (h < 300) rgb = [x, 0, c];
  else rgb = [c, 0, x];
  return [
    Math.round((rgb[0] + m) * 255),
    Math.round((rgb[1] + m) * 255),
    Math.round((rgb[2] + m) * 255),
  ];
}

/** Maps data coordinates into a pixel viewport, y growing upward. */
export class Frame {
  constructor(
    readonly x0: number,
    readonly y0: number, // pixel top-left of the plotting area
    readonly w: number,
    readonly h: number,
    readonly xmin: number,
    readonly xmax: number,
    readonly ymin: number,
    readonly ymax: number
  ) {}

  px(x: number): number {
    return this.x0 + ((x - this.xmin) / (this.xmax - this.xmin)) * this.w;
  }

  py(y: number): number {
    return this.y0 + this.h - ((y - this.ymin) / (this.ymax - this.ymin)) * this.h;
  }
}

/** Round tick positions covering [lo, hi] (about `count` of them). */
export function ticks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / Math.max(count, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  let step = mag;
  for (const mult of [1, 2, 2.5, 5, 10]) {
    if (mag * mult >= step0) {
      step = mag * mult;
      break;
    }
  }
  const out: number[] = [];
  const first = Math.ceil(lo / step) * step;
  for (let v = first; v <= hi + 1e-12 * span; v += step) {
    out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return out;
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const av = Math.abs(v);
  if (av >= 0.01 && av < 10000) {
    return String(parseFloat(v.toPrecision(4)));
  }
  return v.toExponential(1);
}

/** Axes, tick marks and labels for a frame. */
export function axes(frame: Frame, xlabel: string, ylabel: string): Primitive[] {
  const items: Primitive[] = [];
  const bottom = frame.y0 + frame.h;
  items.push({ kind: "line", x1: frame.x0, y1: bottom, x2: frame.x0 + frame.w, y2: bottom, color: BLACK, width: 1 });
  items.push({ kind: "line", x1: frame.x0, y1: frame.y0, x2: frame.x0, y2: bottom, color: BLACK, width: 1 });
  for (const t of ticks(frame.xmin, frame.xmax, 8)) {
    const x = frame.px(t);
    items.push({ kind: "line", x1: x, y1: bottom, x2: x, y2: bottom + 5, color: BLACK, width: 1 });
    items.push({ kind: "text", x, y: bottom + 18, text: fmtTick(t), size: 11, color: BLACK, anchor: "middle" });
  }
  for (const t of ticks(frame.ymin, frame.ymax, 6)) {
    const y = frame.py(t);
    items.push({ kind: "line", x1: frame.x0 - 5, y1: y, x2: frame.x0, y2: y, color: BLACK, width: 1 });
    items.push({ kind: "text", x: frame.x0 - 8, y: y + 4, text: fmtTick(t), size: 11, color: BLACK, anchor: "end" });
    items.push({ kind: "line", x1: frame.x0, y1: y, x2: frame.x0 + frame.w, y2: y, color: LIGHT, width: 0.5 });
  }
  items.push({
    kind: "text",
    x: frame.x0 + frame.w / 2,
    y: frame.y0 + frame.h + 38,
    text: xlabel,
    size: 13,
    color: BLACK,
    anchor: "middle",
  });
  items.push({ kind: "text", x: 16, y: frame.y0 - 12, text: ylabel, size: 13, color: BLACK, anchor: "start" });
  return items;
}
