/** Figure builders: spectrum scatter and band-vs-momentum plots. */

import { writeFileSync } from "fs";
import {
  BandsPayload,
  Report,
  SpectrumPayload,
  loadBandsReport,
  loadSpectrumReport,
} from "./report";
import {
  BLACK,
  BLUE,
  Frame,
  GREY,
  Primitive,
  RED,
  Scene,
  axes,
  bandColor,
  fmtTick,
} from "./scene";
import { renderPng } from "./png";
import { renderSvg } from "./svg";

const WIDTH = 800;
const HEIGHT = 520;
const MARGIN = { left: 70, right: 25, top: 50, bottom: 55 };

function frameFor(xmin: number, xmax: number, ymin: number, ymax: number): Frame {
  return new Frame(
    MARGIN.left,
    MARGIN.top,
    WIDTH - MARGIN.left - MARGIN.right,
    HEIGHT - MARGIN.top - MARGIN.bottom,
    xmin,
    xmax,
    ymin,
    ymax
  );
}

export function spectrumScene(report: Report<SpectrumPayload>): Scene {
  const p = report.payload;
  const vals = p.eigenvalues;
  const ymax = Math.max(...vals) * 1.05 || 1;
  const ymin = Math.min(0, ...vals);
  const frame = frameFor(0, vals.length + 1, ymin, ymax);
  const items: Primitive[] = [];
  items.push(...axes(frame, "eigenvalue index", "eigenvalue"));
  const zero = frame.py(0);
  items.push({ kind: "line", x1: frame.x0, y1: zero, x2: frame.x0 + frame.w, y2: zero, color: GREY, width: 0.75 });
  vals.forEach((v, i) => {
    const highlighted = i < p.kernel_dim;
    items.push({
      kind: "circle",
      x: frame.px(i + 1),
      y: frame.py(v),
      r: highlighted ? 4.5 : 3,
      fill: highlighted ? RED : BLUE,
    });
  });
  items.push({
    kind: "text",
    x: frame.x0 + 10,
    y: MARGIN.top + 6,
    text: `kernel dimension ${p.kernel_dim} of ${p.S} (tolerance-counted zeros highlighted)`,
    size: 12,
    color: RED,
  });
  items.push({
    kind: "text",
    x: WIDTH / 2,
    y: 24,
    text: `correlation spectrum - n=${p.spec.n} ${p.spec.boundary} chain - ${p.source_id}`,
    size: 14,
    color: BLACK,
    anchor: "middle",
  });
  return { width: WIDTH, height: HEIGHT, items };
}

export function bandsScene(report: Report<BandsPayload>): Scene {
  const p = report.payload;
  const n = p.spec.n;
  const flat = p.lam.flat();
  const ymax = Math.max(...flat) * 1.08 || 1;
  const ymin = Math.min(0, ...flat);
  const frame = frameFor(-0.5, n - 0.5, ymin, ymax);
  const items: Primitive[] = [];
  items.push(...axes(frame, "momentum mode number j", "eigenvalue"));
  // gap shading between the configured consecutive bands
  const g = p.gap_report.band_index;
  if (p.gap_report.gap > 0 && g >= 1 && g < p.bands) {
    const lower = Math.max(...p.lam[g - 1]);
    const upper = Math.min(...p.lam[g]);
    const yTop = frame.py(upper);
    const yBot = frame.py(lower);
    items.push({
      kind: "rect",
      x: frame.x0,
      y: yTop,
      w: frame.w,
      h: yBot - yTop,
      fill: [255, 210, 140],
      opacity: 0.45,
    });
    items.push({
      kind: "text",
      x: frame.x0 + frame.w - 8,
      y: (yTop + yBot) / 2 + 4,
      text: `band gap ${fmtTick(p.gap_report.gap)} (bands ${g}-${g + 1})`,
      size: 12,
      color: [150, 90, 10],
      anchor: "end",
    });
  }
  p.lam.forEach((band, b) => {
    const color = bandColor(b);
    for (let j = 0; j + 1 < n; j++) {
      items.push({
        kind: "line",
        x1: frame.px(j),
        y1: frame.py(band[j]),
        x2: frame.px(j + 1),
        y2: frame.py(band[j + 1]),
        color,
        width: 1,
      });
    }
    for (let j = 0; j < n; j++) {
      items.push({ kind: "circle", x: frame.px(j), y: frame.py(band[j]), r: 3, fill: color });
    }
  });
  if (!(p.gap_report.gap > 0)) {
    items.push({
      kind: "text",
      x: frame.x0 + 10,
      y: MARGIN.top + 6,
      text: `no gap between bands ${g} and ${g + 1} (${fmtTick(p.gap_report.gap)})`,
      size: 12,
      color: GREY,
    });
  }
  items.push({
    kind: "text",
    x: WIDTH / 2,
    y: 24,
    text: `banded correlation spectrum - n=${n} - ${p.source_id}`,
    size: 14,
    color: BLACK,
    anchor: "middle",
  });
  return { width: WIDTH, height: HEIGHT, items };
}

function writeScene(scene: Scene, outPath: string): void {
  if (outPath.endsWith(".svg")) {
    writeFileSync(outPath, renderSvg(scene));
  } else if (outPath.endsWith(".png")) {
    writeFileSync(outPath, renderPng(scene));
  } else {
    throw new Error(`unsupported output format for ${outPath} (use .svg or .png)`);
  }
}

export function plotSpectrum(reportPath: string, outPath: string): void {
  writeScene(spectrumScene(loadSpectrumReport(reportPath)), outPath);
}

export function plotBands(reportPath: string, outPath: string): void {
  writeScene(bandsScene(loadBandsReport(reportPath)), outPath);
}
