// Minimal deterministic SVG output. Every figure goes through fmt() so the
// same inputs always produce byte-identical files; nothing here touches the
// clock or any RNG.

import { scaleLinear, scaleLog, type ScaleContinuousNumeric } from "d3-scale";

export type Scale = ScaleContinuousNumeric<number, number>;

export function fmt(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite coordinate ${x}`);
  const s = x.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export function escapeText(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function tag(name: string, attrs: Record<string, string | number>, body = ""): string {
  const parts = Object.entries(attrs).map(([k, v]) => `${k}="${v}"`);
  const open = `<${name}${parts.length ? " " + parts.join(" ") : ""}`;
  return body === "" ? `${open}/>` : `${open}>${body}</${name}>`;
}

export function polyline(xs: number[], ys: number[], style: Record<string, string | number>): string {
  const pts = xs.map((x, i) => `${fmt(x)},${fmt(ys[i])}`).join(" ");
  return tag("polyline", { points: pts, fill: "none", ...style });
}

export function document(width: number, height: number, body: string): string {
  const head =
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`;
  const bg = tag("rect", { x: 0, y: 0, width, height, fill: "#ffffff" });
  return `${head}\n${bg}\n${body}\n</svg>\n`;
}

// ── plot frame ──────────────────────────────────────────────────────────────

export interface Frame {
  x0: number; // left edge of the data rect
  y0: number; // top edge
  w: number;
  h: number;
}

export const MARGIN = { left: 64, right: 20, top: 28, bottom: 46 };

export function frameFor(width: number, height: number): Frame {
  return {
    x0: MARGIN.left,
    y0: MARGIN.top,
    w: width - MARGIN.left - MARGIN.right,
    h: height - MARGIN.top - MARGIN.bottom,
  };
}

export function makeScale(domain: [number, number], range: [number, number], log: boolean): Scale {
  if (log) {
    if (domain[0] <= 0 || domain[1] <= 0) {
      throw new Error("log axis needs strictly positive data");
    }
    return scaleLog().domain(domain).range(range).nice();
  }
  return scaleLinear().domain(domain).range(range).nice();
}

function tickLabel(v: number, log: boolean): string {
  if (log) {
    const e = Math.log10(v);
    // only decade ticks get labels on a log axis
    if (Math.abs(e - Math.round(e)) > 1e-9) return "";
    return `1e${Math.round(e)}`;
  }
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1).replace("e+", "e");
  return String(parseFloat(v.toPrecision(6)));
}

export function xAxis(frame: Frame, scale: Scale, log: boolean, label: string): string {
  const y = frame.y0 + frame.h;
  const out: string[] = [
    tag("line", { x1: fmt(frame.x0), y1: fmt(y), x2: fmt(frame.x0 + frame.w), y2: fmt(y), stroke: "#000" }),
  ];
  for (const t of scale.ticks(log ? 10 : 6)) {
    const px = scale(t);
    const lab = tickLabel(t, log);
    out.push(tag("line", { x1: fmt(px), y1: fmt(y), x2: fmt(px), y2: fmt(y + (lab ? 5 : 3)), stroke: "#000" }));
    if (lab) {
      out.push(
        tag("text", { x: fmt(px), y: fmt(y + 18), "text-anchor": "middle", "font-size": 11 }, escapeText(lab)),
      );
    }
  }
  out.push(
    tag(
      "text",
      { x: fmt(frame.x0 + frame.w / 2), y: fmt(y + 36), "text-anchor": "middle", "font-size": 12 },
      escapeText(label),
    ),
  );
  return out.join("\n");
}

export function yAxis(frame: Frame, scale: Scale, log: boolean, label: string): string {
  const out: string[] = [
    tag("line", { x1: fmt(frame.x0), y1: fmt(frame.y0), x2: fmt(frame.x0), y2: fmt(frame.y0 + frame.h), stroke: "#000" }),
  ];
  for (const t of scale.ticks(log ? 10 : 6)) {
    const py = scale(t);
    const lab = tickLabel(t, log);
    out.push(tag("line", { x1: fmt(frame.x0 - (lab ? 5 : 3)), y1: fmt(py), x2: fmt(frame.x0), y2: fmt(py), stroke: "#000" }));
    if (lab) {
      out.push(
        tag(
          "text",
          { x: fmt(frame.x0 - 8), y: fmt(py + 4), "text-anchor": "end", "font-size": 11 },
          escapeText(lab),
        ),
      );
    }
  }
  out.push(
    tag(
      "text",
      {
        x: fmt(14),
        y: fmt(frame.y0 + frame.h / 2),
        "text-anchor": "middle",
        "font-size": 12,
        transform: `rotate(-90 ${fmt(14)} ${fmt(frame.y0 + frame.h / 2)})`,
      },
      escapeText(label),
    ),
  );
  return out.join("\n");
}

export interface LegendEntry {
  label: string;
  color: string;
  dash?: string;
}

export function legend(frame: Frame, entries: LegendEntry[]): string {
  const out: string[] = [];
  let y = frame.y0 + 14;
  const x = frame.x0 + frame.w - 118;
  out.push(
    tag("rect", {
      x: fmt(x - 8),
      y: fmt(y - 12),
      width: 124,
      height: entries.length * 16 + 8,
      fill: "#ffffff",
      stroke: "#999",
      "stroke-width": 0.5,
    }),
  );
  for (const e of entries) {
    const line: Record<string, string | number> = {
      x1: fmt(x), y1: fmt(y), x2: fmt(x + 26), y2: fmt(y),
      stroke: e.color, "stroke-width": 1.5,
    };
    if (e.dash) line["stroke-dasharray"] = e.dash;
    out.push(tag("line", line));
    out.push(tag("text", { x: fmt(x + 32), y: fmt(y + 4), "font-size": 11 }, escapeText(e.label)));
    y += 16;
  }
  return out.join("\n");
}
