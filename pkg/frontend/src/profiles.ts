import { schemeCategory10 } from "d3-scale-chromatic";
import type { MomentProfile } from "./csv.js";
import {
  document, frameFor, legend, makeScale, polyline, fmt, tag, escapeText, xAxis, yAxis,
  type LegendEntry,
} from "./svg.js";

export interface ProfileOptions {
  moments?: string[]; // which of rho,u1,u2,T to draw
  labels?: string[]; // one per input table, e.g. "kinetic" / "euler"
  title?: string;
  width?: number;
  height?: number;
}

const MOMENT_KEYS = ["rho", "u1", "u2", "T"] as const;
const DASHES = ["", "6 3", "2 2", "8 3 2 3"]; // one style per model

export function renderProfiles(tables: MomentProfile[], opts: ProfileOptions = {}): string {
  if (tables.length === 0) throw new Error("no matching rows");
  const width = opts.width ?? 560;
  const height = opts.height ?? 400;
  const moments = opts.moments ?? ["rho", "u1", "T"];
  for (const m of moments) {
    if (!MOMENT_KEYS.includes(m as any)) throw new Error(`unknown moment "${m}"`);
  }
  if (tables.length > DASHES.length) throw new Error("too many models to keep styles distinct");

  const frame = frameFor(width, height);
  const xs = tables.flatMap((t) => t.x);
  const vals = tables.flatMap((t) => moments.flatMap((m) => t[m as keyof MomentProfile] as number[]));
  const sx = makeScale([Math.min(...xs), Math.max(...xs)], [frame.x0, frame.x0 + frame.w], false);
  const sy = makeScale([Math.min(...vals), Math.max(...vals)], [frame.y0 + frame.h, frame.y0], false);

  const body: string[] = [];
  const entries: LegendEntry[] = [];
  moments.forEach((m, mi) => {
    const color = schemeCategory10[mi % schemeCategory10.length];
    tables.forEach((t, ti) => {
      const ys = t[m as keyof MomentProfile] as number[];
      const style: Record<string, string | number> = { stroke: color, "stroke-width": 1.5 };
      if (DASHES[ti]) style["stroke-dasharray"] = DASHES[ti];
      body.push(polyline(t.x.map((v) => sx(v)), ys.map((v) => sy(v)), style));
    });
    entries.push({ label: m, color });
  });
  tables.forEach((t, ti) => {
    if (tables.length < 2) return;
    const label = opts.labels?.[ti] ?? `model ${ti + 1}`;
    entries.push({ label, color: "#555", dash: DASHES[ti] || undefined });
  });

  body.push(xAxis(frame, sx, false, "x"));
  body.push(yAxis(frame, sy, false, "moments"));
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
