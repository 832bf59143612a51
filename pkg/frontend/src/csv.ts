// CSV readers for the two table formats the solver CLI emits: error records
// (time,estimator,quantity,error,cost) and moment profiles (x,rho,u1,u2,T).
// Both are strict about headers so a renamed column fails loudly.

import Papa from "papaparse";

export interface ErrorRecord {
  time: number;
  estimator: string;
  quantity: string;
  error: number;
  cost: number;
}

export interface MomentProfile {
  x: number[];
  rho: number[];
  u1: number[];
  u2: number[];
  T: number[];
}

export const ERROR_COLUMNS = ["time", "estimator", "quantity", "error", "cost"] as const;
export const MOMENT_COLUMNS = ["x", "rho", "u1", "u2", "T"] as const;

function parseStrict(text: string, label: string): Papa.ParseResult<Record<string, string>> {
  const out = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (out.errors.length > 0) {
    const e = out.errors[0];
    throw new Error(`${label}: ${e.message} (row ${e.row ?? "?"})`);
  }
  return out;
}

function requireColumns(fields: string[] | undefined, wanted: readonly string[], label: string) {
  const have = new Set(fields ?? []);
  for (const col of wanted) {
    if (!have.has(col)) throw new Error(`${label}: missing column "${col}"`);
  }
}

function toNumber(raw: string, col: string, row: number, label: string): number {
  const v = Number(raw);
  if (raw === "" || raw === undefined || Number.isNaN(v)) {
    throw new Error(`${label}: bad number "${raw}" in column "${col}" (row ${row})`);
  }
  return v;
}

export function parseErrorRecords(text: string, label = "error csv"): ErrorRecord[] {
  const out = parseStrict(text, label);
  requireColumns(out.meta.fields, ERROR_COLUMNS, label);
  return out.data.map((row, i) => ({
    time: toNumber(row.time, "time", i, label),
    estimator: row.estimator,
    quantity: row.quantity,
    error: toNumber(row.error, "error", i, label),
    cost: toNumber(row.cost, "cost", i, label),
  }));
}

export function parseMomentProfile(text: string, label = "moment csv"): MomentProfile {
  const out = parseStrict(text, label);
  requireColumns(out.meta.fields, MOMENT_COLUMNS, label);
  const prof: MomentProfile = { x: [], rho: [], u1: [], u2: [], T: [] };
  out.data.forEach((row, i) => {
    prof.x.push(toNumber(row.x, "x", i, label));
    prof.rho.push(toNumber(row.rho, "rho", i, label));
    prof.u1.push(toNumber(row.u1, "u1", i, label));
    prof.u2.push(toNumber(row.u2, "u2", i, label));
    prof.T.push(toNumber(row.T, "T", i, label));
  });
  if (prof.x.length === 0) throw new Error(`${label}: no data rows`);
  return prof;
}
