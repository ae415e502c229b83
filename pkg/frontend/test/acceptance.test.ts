/**
 * Renders every figure kind from the backend acceptance-run outputs in
 * ../tests/_artifacts (produced by the backend acceptance suite). Skipped
 * when those artifacts have not been generated yet; the unit tests cover
 * the same code paths on small committed fixtures.
 */
import { existsSync, readFileSync, mkdirSync, writeFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { parseRecordCsv, parseResultsCsv, parseTruthCsv } from "../src/csv.js";
import {
  buildFidelity,
  buildOverhead,
  buildScaling,
  buildWaveform,
  renderSvg,
} from "../src/figures.js";

const artifactDir = new URL("../../tests/_artifacts/", import.meta.url);
const outDir = new URL("./figures/", artifactDir);

const path = (name: string) => new URL(name, artifactDir);
const have = (name: string) => existsSync(path(name));
const read = (name: string) => readFileSync(path(name), "utf8");

function save(name: string, svg: string): void {
  mkdirSync(outDir, { recursive: true });
  writeFileSync(new URL(name, outDir), svg);
}

describe.skipIf(!have("kappa_sweep.csv"))("acceptance-run scaling figure", () => {
  it("renders with the fitted power law", () => {
    const svg = renderSvg(
      buildScaling(parseResultsCsv(read("kappa_sweep.csv")), { fieldAxis: true }),
    );
    expect(svg.startsWith("<svg")).toBe(true);
    save("scaling.svg", svg);
  });
});

describe.skipIf(!have("overhead_sweep.csv"))("acceptance-run overhead figure", () => {
  it("renders eta vs overhead", () => {
    const svg = renderSvg(buildOverhead(parseResultsCsv(read("overhead_sweep.csv"))));
    expect(svg.startsWith("<svg")).toBe(true);
    save("overhead.svg", svg);
  });
});

describe.skipIf(!have("fidelity_sweep.csv"))("acceptance-run fidelity figure", () => {
  it("renders both protocols vs fidelity", () => {
    const svg = renderSvg(buildFidelity(parseResultsCsv(read("fidelity_sweep.csv"))));
    expect(svg.startsWith("<svg")).toBe(true);
    save("fidelity.svg", svg);
  });
});

describe.skipIf(!have("waveform_record.csv"))("acceptance-run waveform figure", () => {
  it("overlays truth and estimates", () => {
    const truth = have("waveform_truth.csv")
      ? parseTruthCsv(read("waveform_truth.csv"))
      : null;
    const svg = renderSvg(
      buildWaveform(parseRecordCsv(read("waveform_record.csv")), truth),
    );
    expect(svg.startsWith("<svg")).toBe(true);
    save("waveform.svg", svg);
  });
});
