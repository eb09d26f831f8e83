import { describe, expect, it } from "vitest";

import { concatTables, parseCsv, requireColumns, toNumber } from "../src/csv.js";

const METRICS = `method,axis,axis_value,metric,value,n,seed
dnn,mean_snr_db,30.0,mse,0.15,2400,1
dnn,mean_snr_db,15.0,mse,0.17,2400,1
maxbeam_dbf,mean_snr_db,30.0,mse,0.06,2400,1
`;

describe("parseCsv", () => {
  it("reads the harness metrics contract", () => {
    const t = parseCsv(METRICS, "metrics.csv");
    expect(t.columns).toEqual(["method", "axis", "axis_value", "metric", "value", "n", "seed"]);
    expect(t.rows).toHaveLength(3);
    expect(t.rows[0].method).toBe("dnn");
    expect(toNumber(t.rows[0].value, "value")).toBeCloseTo(0.15);
  });

  it("rejects a header-only file with a clear message", () => {
    expect(() => parseCsv("method,value\n", "x.csv")).toThrow(/empty data/);
  });

  it("rejects an empty file", () => {
    expect(() => parseCsv("", "x.csv")).toThrow(/empty file/);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1\n", "x.csv")).toThrow(/expected 2 cells/);
  });

  it("flags missing columns", () => {
    const t = parseCsv(METRICS, "m.csv");
    expect(() => requireColumns(t, ["bin_left"], "m.csv")).toThrow(/missing columns bin_left/);
  });

  it("flags non-numeric cells", () => {
    expect(() => toNumber("abc", "value")).toThrow(/non-numeric/);
  });
});

describe("concatTables", () => {
  it("joins tables with identical headers", () => {
    const a = parseCsv(METRICS, "a.csv");
    const b = parseCsv(METRICS, "b.csv");
    expect(concatTables([a, b]).rows).toHaveLength(6);
  });

  it("rejects mismatched headers", () => {
    const a = parseCsv(METRICS, "a.csv");
    const b = parseCsv("method,value\nx,1\n", "b.csv");
    expect(() => concatTables([a, b])).toThrow(/disagree on columns/);
  });
});
