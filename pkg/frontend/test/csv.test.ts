import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  parseRecordCsv,
  parseResultsCsv,
  parseTruthCsv,
  protocolsIn,
} from "../src/csv.js";

const fixture = (name: string) =>
  readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf8");

describe("results CSV", () => {
  it("parses the kappa sweep schema", () => {
    const rows = parseResultsCsv(fixture("kappa_results.csv"));
    expect(rows.length).toBe(8); // 4 points x 2 protocols
    expect(rows[0].axisName).toBe("kappa_mhz_sqrthz");
    expect(protocolsIn(rows)).toEqual(["non-tracking", "tracking"]);
    for (const r of rows) {
      expect(r.epsMhz).toBeGreaterThan(0);
      expect(r.nTraj).toBe(4);
    }
  });

  it("rejects a missing column", () => {
    const text = "axis_name,axis_value,protocol\nkappa_mhz_sqrthz,1,tracking\n";
    expect(() => parseResultsCsv(text)).toThrow(/missing column/);
  });

  it("rejects non-numeric values", () => {
    const ok = fixture("kappa_results.csv");
    const broken = ok.replace(/^(kappa_mhz_sqrthz,)[\d.]+/m, "$1oops");
    expect(() => parseResultsCsv(broken)).toThrow(/non-numeric/);
  });
});

describe("record and truth CSVs", () => {
  it("parses the estimate record", () => {
    const rows = parseRecordCsv(fixture("waveform_record.csv"));
    expect(rows.length).toBeGreaterThan(100);
    expect(rows[0].t).toBeGreaterThan(0);
    const ts = rows.map((r) => r.t);
    expect([...ts].sort((a, b) => a - b)).toEqual(ts);
  });

  it("parses the dense truth dump", () => {
    const rows = parseTruthCsv(fixture("waveform_truth.csv"));
    expect(rows.length).toBeGreaterThan(500);
    expect(rows[0].t).toBe(0);
    expect(Math.abs(rows[0].fHz)).toBeLessThan(25e6);
  });

  it("rejects empty files", () => {
    expect(() => parseTruthCsv("t_seconds,f_hz\n")).toThrow(/no data rows/);
  });
});
