import { describe, expect, it } from "vitest";
import { at2, readFieldDump } from "../src/binary.js";

function dump(dims: number[], values: number[]): Buffer {
  const buf = Buffer.alloc(4 + 4 * dims.length + 8 * values.length);
  buf.writeUInt32LE(dims.length, 0);
  dims.forEach((d, i) => buf.writeUInt32LE(d, 4 + 4 * i));
  values.forEach((v, i) => buf.writeDoubleLE(v, 4 + 4 * dims.length + 8 * i));
  return buf;
}

describe("readFieldDump", () => {
  it("round-trips a rank-2 field", () => {
    const field = readFieldDump(dump([2, 3], [1, 2, 3, 4, 5, 6]));
    expect(field.dims).toEqual([2, 3]);
    expect(at2(field, 1, 2)).toBe(6);
  });

  it("rejects a payload that does not match the dims", () => {
    expect(() => readFieldDump(dump([2, 3], [1, 2, 3, 4, 5]))).toThrow(/does not match dims \[2, 3\]/);
  });

  it("rejects an implausible rank", () => {
    const buf = dump([2], [0, 0]);
    buf.writeUInt32LE(99, 0);
    expect(() => readFieldDump(buf)).toThrow("implausible rank 99");
  });

  it("rejects a truncated header", () => {
    expect(() => readFieldDump(Buffer.from([1, 0]))).toThrow("truncated header");
  });
});
