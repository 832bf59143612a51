// Figure driver: reads the solver's CSV / binary dumps and writes an SVG.
//
//   node dist/cli.js --in errors.csv --kind error_curves --quantity density --out fig.svg
//   node dist/cli.js --in kin.csv --in euler.csv --kind profiles --out fig.svg
//   node dist/cli.js --in lambda.bin --kind lambda_surface --vmax 10 --out fig.svg

import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";
import { parseArgs } from "node:util";
import { parseErrorRecords, parseMomentProfile } from "./csv.js";
import { readFieldDump } from "./binary.js";
import { renderErrorCurves } from "./error_curves.js";
import { renderProfiles } from "./profiles.js";
import { renderLambdaSurface } from "./lambda_surface.js";

const KINDS = ["error_curves", "profiles", "lambda_surface"] as const;

export function run(argv: string[]): string {
  const { values } = parseArgs({
    args: argv,
    options: {
      in: { type: "string", multiple: true },
      kind: { type: "string" },
      out: { type: "string" },
      quantity: { type: "string", default: "distribution" },
      logx: { type: "boolean", default: false },
      "linear-y": { type: "boolean", default: false },
      moments: { type: "string" },
      label: { type: "string", multiple: true },
      vmax: { type: "string" },
      title: { type: "string" },
    },
  });

  const inputs = values.in ?? [];
  if (inputs.length === 0) throw new Error("need at least one --in file");
  if (!values.kind || !KINDS.includes(values.kind as any)) {
    throw new Error(`--kind must be one of ${KINDS.join(", ")}`);
  }
  if (!values.out) throw new Error("need --out");

  let svg: string;
  if (values.kind === "error_curves") {
    const records = inputs.flatMap((p) => parseErrorRecords(readFileSync(p, "utf8"), basename(p)));
    svg = renderErrorCurves(records, {
      quantity: values.quantity!,
      logx: values.logx,
      logy: !values["linear-y"],
      title: values.title,
    });
  } else if (values.kind === "profiles") {
    const tables = inputs.map((p) => parseMomentProfile(readFileSync(p, "utf8"), basename(p)));
    svg = renderProfiles(tables, {
      moments: values.moments ? values.moments.split(",") : undefined,
      labels: values.label && values.label.length ? values.label : inputs.map((p) => basename(p, ".csv")),
      title: values.title,
    });
  } else {
    if (inputs.length !== 1) throw new Error("lambda_surface takes exactly one --in dump");
    const field = readFieldDump(readFileSync(inputs[0]), basename(inputs[0]));
    svg = renderLambdaSurface(field, {
      vmax: values.vmax ? Number(values.vmax) : undefined,
      title: values.title,
    });
  }

  writeFileSync(values.out, svg);
  return values.out;
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("cli.ts")) {
  try {
    const out = run(process.argv.slice(2));
    console.log(`wrote ${out}`);
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    process.exit(1);
  }
}
