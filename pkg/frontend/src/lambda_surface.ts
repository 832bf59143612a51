import { interpolateViridis } from "d3-scale-chromatic";
import { at2, type FieldDump } from "./binary.js";
import { document, fmt, makeScale, tag, escapeText, xAxis, yAxis, type Frame } from "./svg.js";

export interface SurfaceOptions {
  vmax?: number; // axes run over [-vmax, vmax] when given, cell index otherwise
  title?: string;
  width?: number;
  height?: number;
}

/** Heatmap of a weight field over the 2D velocity grid. */
export function renderLambdaSurface(field: FieldDump, opts: SurfaceOptions = {}): string {
  if (field.dims.length !== 2) {
    throw new Error(`expected a rank-2 velocity field, got rank ${field.dims.length}`);
  }
  const [n1, n2] = field.dims;
  const width = opts.width ?? 560;
  const height = opts.height ?? 440;
  const frame: Frame = { x0: 64, y0: 28, w: width - 64 - 86, h: height - 28 - 46 };

  let lo = Infinity;
  let hi = -Infinity;
  for (const v of field.data) {
    if (!Number.isFinite(v)) throw new Error("field contains non-finite values");
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  // constant field: keep a sane color range so the surface renders flat
  const flat = hi - lo < 1e-300;
  const span = flat ? 1.0 : hi - lo;

  const axisLo = opts.vmax ? -opts.vmax : 0;
  const axisHi = opts.vmax ? opts.vmax : n1;
  const sx = makeScale([axisLo, axisHi], [frame.x0, frame.x0 + frame.w], false);
  const sy = makeScale([axisLo, axisHi], [frame.y0 + frame.h, frame.y0], false);

  const body: string[] = [];
  const cw = frame.w / n1;
  const ch = frame.h / n2;
  for (let i = 0; i < n1; i++) {
    for (let j = 0; j < n2; j++) {
      const t = flat ? 0.5 : (at2(field, i, j) - lo) / span;
      body.push(
        tag("rect", {
          x: fmt(frame.x0 + i * cw),
          y: fmt(frame.y0 + frame.h - (j + 1) * ch),
          width: fmt(cw + 0.05),
          height: fmt(ch + 0.05),
          fill: interpolateViridis(t),
        }),
      );
    }
  }

  // colorbar
  const cbX = frame.x0 + frame.w + 18;
  const steps = 48;
  for (let k = 0; k < steps; k++) {
    body.push(
      tag("rect", {
        x: fmt(cbX),
        y: fmt(frame.y0 + frame.h - ((k + 1) * frame.h) / steps),
        width: 14,
        height: fmt(frame.h / steps + 0.05),
        fill: interpolateViridis((k + 0.5) / steps),
      }),
    );
  }
  body.push(tag("rect", { x: fmt(cbX), y: fmt(frame.y0), width: 14, height: fmt(frame.h), fill: "none", stroke: "#000", "stroke-width": 0.5 }));
  const cbLabel = (v: number) => parseFloat(v.toPrecision(4)).toString();
  body.push(tag("text", { x: fmt(cbX + 18), y: fmt(frame.y0 + frame.h), "font-size": 10 }, escapeText(cbLabel(lo))));
  body.push(tag("text", { x: fmt(cbX + 18), y: fmt(frame.y0 + 8), "font-size": 10 }, escapeText(cbLabel(hi))));

  body.push(xAxis(frame, sx, false, opts.vmax ? "v1" : "cell"));
  body.push(yAxis(frame, sy, false, opts.vmax ? "v2" : "cell"));
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
