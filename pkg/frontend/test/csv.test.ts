import { describe, expect, it } from "vitest";
import { parseErrorRecords, parseMomentProfile } from "../src/csv.js";

const GOOD = `time,estimator,quantity,error,cost
0.25,mc,density,0.01,1200
0.25,mscv,density,0.002,1450
0.5,mc,density,0.011,1200
`;

describe("parseErrorRecords", () => {
  it("reads the solver's error table", () => {
    const rows = parseErrorRecords(GOOD);
    expect(rows).toHaveLength(3);
    expect(rows[0]).toEqual({ time: 0.25, estimator: "mc", quantity: "density", error: 0.01, cost: 1200 });
  });

  it("names the missing column", () => {
    const text = GOOD.replace("quantity", "field");
    expect(() => parseErrorRecords(text)).toThrow('missing column "quantity"');
  });

  it("rejects non-numeric cells", () => {
    const text = GOOD.replace("0.002", "oops");
    expect(() => parseErrorRecords(text)).toThrow(/bad number "oops" in column "error"/);
  });
});

describe("parseMomentProfile", () => {
  it("reads column vectors", () => {
    const prof = parseMomentProfile("x,rho,u1,u2,T\n0,1,0,0,2\n0.5,0.8,0.1,0,1.9\n");
    expect(prof.x).toEqual([0, 0.5]);
    expect(prof.T).toEqual([2, 1.9]);
  });

  it("names the missing column", () => {
    expect(() => parseMomentProfile("x,rho,u1,u2\n0,1,0,0\n")).toThrow('missing column "T"');
  });

  it("rejects an empty table", () => {
    expect(() => parseMomentProfile("x,rho,u1,u2,T\n")).toThrow("no data rows");
  });
});
