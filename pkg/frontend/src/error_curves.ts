import { schemeCategory10 } from "d3-scale-chromatic";
import type { ErrorRecord } from "./csv.js";
import {
  document, frameFor, legend, makeScale, polyline, tag, fmt, escapeText, xAxis, yAxis,
  type LegendEntry,
} from "./svg.js";

export interface ErrorCurveOptions {
  quantity: string;
  logx?: boolean;
  logy?: boolean; // default true, these are convergence plots
  title?: string;
  width?: number;
  height?: number;
}

const ESTIMATOR_ORDER = ["mc", "mscv", "mscv2", "mscvh2", "mlmc"];

export function estimatorLabel(name: string): string {
  return ESTIMATOR_ORDER.includes(name) ? name.toUpperCase() : name;
}

export function renderErrorCurves(records: ErrorRecord[], opts: ErrorCurveOptions): string {
  const width = opts.width ?? 560;
  const height = opts.height ?? 400;
  const logy = opts.logy ?? true;
  const logx = opts.logx ?? false;

  const rows = records.filter((r) => r.quantity === opts.quantity);
  if (rows.length === 0) {
    throw new Error(`no matching rows for quantity "${opts.quantity}"`);
  }

  const names = [...new Set(rows.map((r) => r.estimator))].sort((a, b) => {
    const ia = ESTIMATOR_ORDER.indexOf(a);
    const ib = ESTIMATOR_ORDER.indexOf(b);
    if (ia >= 0 && ib >= 0) return ia - ib;
    if (ia >= 0) return -1;
    if (ib >= 0) return 1;
    return a < b ? -1 : 1;
  });

  const frame = frameFor(width, height);
  const ts = rows.map((r) => r.time);
  const es = rows.map((r) => r.error);
  const sx = makeScale([Math.min(...ts), Math.max(...ts)], [frame.x0, frame.x0 + frame.w], logx);
  const sy = makeScale([Math.min(...es), Math.max(...es)], [frame.y0 + frame.h, frame.y0], logy);

  const body: string[] = [];
  const entries: LegendEntry[] = [];
  names.forEach((name, k) => {
    const mine = rows.filter((r) => r.estimator === name).sort((a, b) => a.time - b.time);
    const color = schemeCategory10[k % schemeCategory10.length];
    body.push(
      polyline(
        mine.map((r) => sx(r.time)),
        mine.map((r) => sy(r.error)),
        { stroke: color, "stroke-width": 1.5 },
      ),
    );
    for (const r of mine) {
      body.push(tag("circle", { cx: fmt(sx(r.time)), cy: fmt(sy(r.error)), r: 2.5, fill: color }));
    }
    entries.push({ label: estimatorLabel(name), color });
  });

  body.push(xAxis(frame, sx, logx, "t"));
  body.push(yAxis(frame, sy, logy, `relative error (${opts.quantity})`));
  body.push(legend(frame, entries));
  if (opts.title) {
    body.push(
      tag(
        "text",
        { x: fmt(frame.x0 + frame.w / 2), y: fmt(18), "text-anchor": "middle", "font-size": 13 },
        escapeText(opts.title),
      ),
    );
  }
  return document(width, height, body.join("\n"));
}
