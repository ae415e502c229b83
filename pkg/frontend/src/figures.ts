/**
 * Figure builders: each produces an ECharts option from parsed sweep rows,
 * and renderSvg turns an option into a standalone SVG string (server-side,
 * no DOM). Styling is fixed so identical inputs give identical bytes.
 */
import * as echarts from "echarts";

type EChartsOption = echarts.EChartsOption;
type SeriesOption = echarts.SeriesOption;

import { RecordRow, ResultsRow, TruthRow, protocolsIn } from "./csv.js";
import { PowerLaw, fitPowerLaw, sampleCurve } from "./fit.js";
import { kappaToFieldUnits, mhzToMicrotesla, round3 } from "./units.js";

export type FigureKind = "scaling" | "waveform" | "overhead" | "fidelity";

export interface FigureOptions {
  /** Plot frequencies in Hz instead of the default MHz. */
  hzUnits?: boolean;
  /** Add magnetic-field axes (28 MHz/mT relabeling). */
  fieldAxis?: boolean;
  /** Fitted power law to overlay on the scaling figure. */
  fit?: PowerLaw | null;
}

const PROTOCOL_COLOR: Record<string, string> = {
  "non-tracking": "#1f5fa8",
  tracking: "#c43333",
};

const BASE_GRID = { left: 70, right: 70, top: 60, bottom: 55 };

function freqScale(opts: FigureOptions): { factor: number; unit: string } {
  return opts.hzUnits ? { factor: 1e6, unit: "Hz" } : { factor: 1, unit: "MHz" };
}

function groupBy<T, K extends string | number>(
  rows: T[],
  key: (row: T) => K,
): Map<K, T[]> {
  const out = new Map<K, T[]>();
  for (const row of rows) {
    const k = key(row);
    const bucket = out.get(k);
    if (bucket) bucket.push(row);
    else out.set(k, [row]);
  }
  return out;
}

/** eta per axis value; requires both protocols at every point. */
export function etaByAxis(rows: ResultsRow[]): Array<[number, number]> {
  const byValue = groupBy(rows, (r) => r.axisValue);
  const out: Array<[number, number]> = [];
  for (const [value, pts] of [...byValue.entries()].sort((a, b) => a[0] - b[0])) {
    const non = pts.find((p) => p.protocol === "non-tracking");
    const tr = pts.find((p) => p.protocol === "tracking");
    if (!non || !tr) {
      throw new Error(`axis value ${value}: need both protocols to form eta`);
    }
    if (tr.epsMhz <= 0) {
      throw new Error(`axis value ${value}: non-positive tracking error`);
    }
    out.push([value, non.epsMhz / tr.epsMhz]);
  }
  return out;
}

export function buildScaling(
  rows: ResultsRow[],
  opts: FigureOptions = {},
): EChartsOption {
  if (rows.some((r) => r.axisName !== "kappa_mhz_sqrthz")) {
    throw new Error("scaling figure expects a kappa sweep results CSV");
  }
  const { factor, unit } = freqScale(opts);
  const series: SeriesOption[] = [];
  const legend: string[] = [];
  for (const protocol of protocolsIn(rows)) {
    const pts = rows
      .filter((r) => r.protocol === protocol)
      .sort((a, b) => a.axisValue - b.axisValue)
      .map((r) => [r.axisValue, r.epsMhz * factor]);
    legend.push(protocol);
    series.push({
      name: protocol,
      type: "scatter",
      symbol: protocol === "tracking" ? "triangle" : "diamond",
      symbolSize: 9,
      itemStyle: { color: PROTOCOL_COLOR[protocol] ?? "#444" },
      data: pts,
    });
  }
  const xs = rows.map((r) => r.axisValue);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  let fit = opts.fit ?? null;
  if (fit === null) {
    const nonRows = rows.filter((r) => r.protocol === protocolsIn(rows)[0]);
    if (nonRows.length >= 3) {
      fit = fitPowerLaw(
        nonRows.map((r) => ({ x: r.axisValue, y: r.epsMhz, yerr: r.epsStderrMhz })),
      );
    }
  }
  if (fit) {
    const label = `fit: ${round3(fit.c * factor)} x^${round3(fit.exponent)}`;
    legend.push(label);
    series.push({
      name: label,
      type: "line",
      showSymbol: false,
      lineStyle: { color: "#666", width: 1.5, type: "dashed" },
      itemStyle: { color: "#666" },
      data: sampleCurve({ c: fit.c * factor, exponent: fit.exponent }, xMin, xMax),
    });
  }
  const option: EChartsOption = {
    animation: false,
    title: { text: "Waveform estimation error vs fluctuation level", left: "center" },
    legend: { data: legend, bottom: 0 },
    grid: BASE_GRID,
    xAxis: {
      type: "log",
      name: "kappa [MHz Hz^1/2]",
      nameLocation: "middle",
      nameGap: 28,
    },
    yAxis: {
      type: "log",
      name: `error [${unit}]`,
      nameLocation: "middle",
      nameGap: 52,
    },
    series,
  };
  if (opts.fieldAxis) {
    addFieldAxes(option, xMin, xMax);
  }
  return option;
}

function addFieldAxes(
  option: EChartsOption,
  xMin: number,
  xMax: number,
): void {
  // grey secondary axes: same decades, labels re-expressed in field units
  (option.xAxis as object[]) = [
    option.xAxis as object,
    {
      type: "log",
      position: "top",
      min: xMin / 2,
      max: xMax * 2,
      name: "kappa_B [mT Hz^1/2]",
      nameLocation: "middle",
      nameGap: 26,
      axisLine: { lineStyle: { color: "#888" } },
      axisLabel: {
        color: "#888",
        formatter: (value: number) => String(round3(kappaToFieldUnits(value))),
      },
      splitLine: { show: false },
    },
  ];
  (option.yAxis as object[]) = [
    option.yAxis as object,
    {
      type: "log",
      position: "right",
      name: "field error [uT]",
      nameLocation: "middle",
      nameGap: 52,
      axisLine: { lineStyle: { color: "#888" } },
      axisLabel: {
        color: "#888",
        formatter: (value: number) => String(round3(mhzToMicrotesla(value))),
      },
      splitLine: { show: false },
    },
  ];
}

export function buildWaveform(
  record: RecordRow[],
  truth: TruthRow[] | null = null,
  opts: FigureOptions = {},
): EChartsOption {
  if (record.length === 0) {
    throw new Error("empty estimate record");
  }
  const { factor, unit } = freqScale(opts);
  const toMhz = factor / 1e6; // stored values are Hz
  const truthData = truth
    ? truth.map((r) => [r.t * 1e3, r.fHz * toMhz])
    : record.map((r) => [r.t * 1e3, r.fTrueHz * toMhz]);
  const estimateData = record.map((r) => [r.t * 1e3, r.fHatHz * toMhz]);
  return {
    animation: false,
    title: { text: "Reconstructed waveform", left: "center" },
    legend: { data: ["true signal", "estimate"], bottom: 0 },
    grid: BASE_GRID,
    xAxis: {
      type: "value",
      name: "time [ms]",
      nameLocation: "middle",
      nameGap: 28,
    },
    yAxis: {
      type: "value",
      name: `frequency [${unit}]`,
      nameLocation: "middle",
      nameGap: 52,
      scale: true,
    },
    series: [
      {
        name: "true signal",
        type: "line",
        showSymbol: false,
        lineStyle: { color: "#b0b0b0", width: 1 },
        itemStyle: { color: "#b0b0b0" },
        data: truthData,
      },
      {
        name: "estimate",
        type: "line",
        step: "end", // zero-order hold between estimates
        showSymbol: false,
        lineStyle: { color: "#c43333", width: 1.5 },
        itemStyle: { color: "#c43333" },
        data: estimateData,
      },
    ],
  };
}

export function buildOverhead(
  rows: ResultsRow[],
  opts: FigureOptions = {},
): EChartsOption {
  if (rows.some((r) => r.axisName !== "toh_s")) {
    throw new Error("overhead figure expects an overhead sweep results CSV");
  }
  const etas = etaByAxis(rows).map(([toh, eta]) => [toh * 1e6, eta]);
  const { factor, unit } = freqScale(opts);
  const epsSeries = protocolsIn(rows).map((protocol): SeriesOption => ({
    name: protocol,
    type: "line",
    yAxisIndex: 0,
    symbol: protocol === "tracking" ? "triangle" : "diamond",
    symbolSize: 8,
    lineStyle: { color: PROTOCOL_COLOR[protocol] ?? "#444", width: 1 },
    itemStyle: { color: PROTOCOL_COLOR[protocol] ?? "#444" },
    data: rows
      .filter((r) => r.protocol === protocol)
      .sort((a, b) => a.axisValue - b.axisValue)
      .map((r) => [r.axisValue * 1e6, r.epsMhz * factor]),
  }));
  return {
    animation: false,
    title: { text: "Protocol performance vs measurement overhead", left: "center" },
    legend: { data: [...protocolsIn(rows), "eta"], bottom: 0 },
    grid: BASE_GRID,
    xAxis: {
      type: "value",
      name: "overhead [us]",
      nameLocation: "middle",
      nameGap: 28,
    },
    yAxis: [
      {
        type: "log",
        name: `error [${unit}]`,
        nameLocation: "middle",
        nameGap: 52,
      },
      {
        type: "value",
        name: "eta",
        position: "right",
        min: 0,
        nameLocation: "middle",
        nameGap: 36,
      },
    ],
    series: [
      ...epsSeries,
      {
        name: "eta",
        type: "line",
        yAxisIndex: 1,
        symbol: "circle",
        symbolSize: 8,
        lineStyle: { color: "#3d8f3d", width: 2 },
        itemStyle: { color: "#3d8f3d" },
        data: etas,
      },
    ],
  };
}

export function buildFidelity(
  rows: ResultsRow[],
  opts: FigureOptions = {},
): EChartsOption {
  if (rows.some((r) => r.axisName !== "xi0")) {
    throw new Error("fidelity figure expects a fidelity sweep results CSV");
  }
  const { factor, unit } = freqScale(opts);
  const etas = etaByAxis(rows);
  const subtitle = etas
    .map(([xi, eta]) => `eta(xi=${xi}) = ${round3(eta)}`)
    .join("    ");
  return {
    animation: false,
    title: {
      text: "Estimation error vs read-out fidelity",
      subtext: subtitle,
      left: "center",
    },
    legend: { data: protocolsIn(rows), bottom: 0 },
    grid: BASE_GRID,
    xAxis: {
      type: "value",
      name: "read-out fidelity xi0",
      nameLocation: "middle",
      nameGap: 28,
      min: "dataMin",
      max: "dataMax",
      inverse: true, // degrading fidelity left to right
    },
    yAxis: {
      type: "value",
      name: `error [${unit}]`,
      nameLocation: "middle",
      nameGap: 52,
      scale: true,
    },
    series: protocolsIn(rows).map((protocol): SeriesOption => ({
      name: protocol,
      type: "line",
      symbol: protocol === "tracking" ? "triangle" : "diamond",
      symbolSize: 9,
      lineStyle: { color: PROTOCOL_COLOR[protocol] ?? "#444", width: 1.5 },
      itemStyle: { color: PROTOCOL_COLOR[protocol] ?? "#444" },
      data: rows
        .filter((r) => r.protocol === protocol)
        .sort((a, b) => b.axisValue - a.axisValue)
        .map((r) => [r.axisValue, r.epsMhz * factor]),
    })),
  };
}

export function renderSvg(
  option: EChartsOption,
  width = 840,
  height = 560,
): string {
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width,
    height,
  });
  try {
    chart.setOption(option);
    return normalizeRendererIds(chart.renderToSVGString());
  } finally {
    chart.dispose();
  }
}

/**
 * The renderer numbers its internal ids and class names with process-wide
 * counters; renumber them by first appearance so identical inputs give
 * identical bytes.
 */
function normalizeRendererIds(svg: string): string {
  const seen = new Map<string, string>();
  return svg.replace(/zr\d+-[a-z]*-?\d+/g, (match) => {
    let mapped = seen.get(match);
    if (mapped === undefined) {
      mapped = `zr-x${seen.size}`;
      seen.set(match, mapped);
    }
    return mapped;
  });
}
