#!/usr/bin/env node
/** figures <kind> --in <csv> --out <svg>: render sweep CSVs to images. */
import { readFileSync, writeFileSync } from "node:fs";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { parseRecordCsv, parseResultsCsv, parseTruthCsv } from "./csv.js";
import {
  FigureKind,
  FigureOptions,
  buildFidelity,
  buildOverhead,
  buildScaling,
  buildWaveform,
  renderSvg,
} from "./figures.js";
import { readFitJson } from "./fit.js";

const KINDS: FigureKind[] = ["scaling", "waveform", "overhead", "fidelity"];

export function renderFigureFile(argv: {
  kind: string;
  in: string;
  out: string;
  fit?: string;
  truth?: string;
  units: string;
  fieldAxis: boolean;
  width: number;
  height: number;
}): void {
  const kind = argv.kind as FigureKind;
  if (!KINDS.includes(kind)) {
    throw new Error(`unknown figure kind "${argv.kind}"; expected ${KINDS.join("|")}`);
  }
  const opts: FigureOptions = {
    hzUnits: argv.units === "hz",
    fieldAxis: argv.fieldAxis,
    fit: argv.fit ? readFitJson(readFileSync(argv.fit, "utf8")) : null,
  };
  const text = readFileSync(argv.in, "utf8");
  let option;
  switch (kind) {
    case "scaling":
      option = buildScaling(parseResultsCsv(text), opts);
      break;
    case "waveform": {
      const truth = argv.truth
        ? parseTruthCsv(readFileSync(argv.truth, "utf8"))
        : null;
      option = buildWaveform(parseRecordCsv(text), truth, opts);
      break;
    }
    case "overhead":
      option = buildOverhead(parseResultsCsv(text), opts);
      break;
    case "fidelity":
      option = buildFidelity(parseResultsCsv(text), opts);
      break;
  }
  writeFileSync(argv.out, renderSvg(option, argv.width, argv.height));
}

export function main(args: string[]): void {
  const argv = yargs(args)
    .command("$0 <kind>", "render a figure from fieldtrack CSV output", (y) =>
      y.positional("kind", {
        describe: `figure kind: ${KINDS.join(" | ")}`,
        type: "string",
        demandOption: true,
      }),
    )
    .option("in", {
      type: "string",
      demandOption: true,
      describe: "input CSV (results CSV, or estimate record for waveform)",
    })
    .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
    .option("fit", {
      type: "string",
      describe: "fit JSON from the backend to overlay (scaling only)",
    })
    .option("truth", {
      type: "string",
      describe: "dense truth CSV to overlay (waveform only)",
    })
    .option("units", {
      choices: ["mhz", "hz"] as const,
      default: "mhz",
      describe: "frequency unit for the error axes",
    })
    .option("field-axis", {
      type: "boolean",
      default: false,
      describe: "add magnetic-field axes (28 MHz/mT)",
    })
    .option("width", { type: "number", default: 840 })
    .option("height", { type: "number", default: 560 })
    .strict()
    .parseSync();
  renderFigureFile({
    kind: argv.kind as string,
    in: argv.in,
    out: argv.out,
    fit: argv.fit,
    truth: argv.truth,
    units: argv.units,
    fieldAxis: argv["field-axis"] as boolean,
    width: argv.width,
    height: argv.height,
  });
  console.log(`wrote ${argv.out}`);
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("figures")) {
  main(hideBin(process.argv));
}
