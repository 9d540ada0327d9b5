/** Deterministic SVG rendering of a scene (fixed two-decimal coordinates). */

import { Primitive, Rgb, Scene } from "./scene";

function f(v: number): string {
  return v.toFixed(2);
}

function color(c: Rgb): string {
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function renderItem(item: Primitive): string {
  switch (item.kind) {
    case "line":
      return `<line x1="${f(item.x1)}" y1="${f(item.y1)}" x2="${f(item.x2)}" y2="${f(item.y2)}" stroke="${color(item.color)}" stroke-width="${f(item.width)}"/>`;
    case "circle":
      return `<circle cx="${f(item.x)}" cy="${f(item.y)}" r="${f(item.r)}" fill="${color(item.fill)}"/>`;
    case "rect": {
      const op = item.opacity === undefined ? "" : ` fill-opacity="${item.opacity}"`;
      return `<rect x="${f(item.x)}" y="${f(item.y)}" width="${f(item.w)}" height="${f(item.h)}" fill="${color(item.fill)}"${op}/>`;
    }
    case "text": {
      const anchor = item.anchor ?? "start";
      return `<text x="${f(item.x)}" y="${f(item.y)}" font-size="${item.size}" font-family="Helvetica, Arial, sans-serif" text-anchor="${anchor}" fill="${color(item.color)}">${esc(item.text)}</text>`;
    }
  }
}

export function renderSvg(scene: Scene): string {
  const body = scene.items.map(renderItem).join("\n  ");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" height="${scene.height}" viewBox="0 0 ${scene.width} ${scene.height}">\n` +
    `  <rect x="0" y="0" width="${scene.width}" height="${scene.height}" fill="white"/>\n` +
    `  ${body}\n</svg>\n`
  );
}
