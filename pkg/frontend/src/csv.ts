/**
 * Parsers for the fieldtrack CSV schemas.
 *
 * Three files are consumed: sweep results (one row per point and protocol,
 * errors in MHz), single-trajectory estimate records, and dense truth dumps.
 */
import Papa from "papaparse";

export interface ResultsRow {
  axisName: string;
  axisValue: number;
  protocol: string;
  epsMhz: number;
  epsStderrMhz: number;
  nTraj: number;
  kUsed: number;
}

export interface RecordRow {
  t: number;
  fTrueHz: number;
  fHatHz: number;
  k: number;
  mu: number;
  theta: number;
  fomHz: number;
}

export interface TruthRow {
  t: number;
  fHz: number;
}

function rawRows(text: string, context: string): Record<string, string>[] {
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`${context}: ${first.message} (row ${first.row})`);
  }
  return parsed.data;
}

function requireColumns(
  rows: Record<string, string>[],
  columns: string[],
  context: string,
): void {
  if (rows.length === 0) {
    throw new Error(`${context}: no data rows`);
  }
  for (const col of columns) {
    if (!(col in rows[0])) {
      throw new Error(`${context}: missing column "${col}"`);
    }
  }
}

function num(value: string, column: string): number {
  // uncertainty columns may carry "inf" before the estimator has converged
  if (value === "inf") return Infinity;
  if (value === "-inf") return -Infinity;
  const v = Number(value);
  if (!Number.isFinite(v)) {
    throw new Error(`non-numeric value "${value}" in column "${column}"`);
  }
  return v;
}

export function parseResultsCsv(text: string): ResultsRow[] {
  const rows = rawRows(text, "results CSV");
  requireColumns(
    rows,
    ["axis_name", "axis_value", "protocol", "eps_mhz", "eps_stderr_mhz", "n_traj", "K_used"],
    "results CSV",
  );
  return rows.map((r) => ({
    axisName: r.axis_name,
    axisValue: num(r.axis_value, "axis_value"),
    protocol: r.protocol,
    epsMhz: num(r.eps_mhz, "eps_mhz"),
    epsStderrMhz: num(r.eps_stderr_mhz, "eps_stderr_mhz"),
    nTraj: num(r.n_traj, "n_traj"),
    kUsed: num(r.K_used, "K_used"),
  }));
}

export function parseRecordCsv(text: string): RecordRow[] {
  const rows = rawRows(text, "record CSV");
  requireColumns(
    rows,
    ["t_s", "f_true_hz", "f_hat_hz", "k", "mu", "theta_rad", "fom_hz"],
    "record CSV",
  );
  return rows.map((r) => ({
    t: num(r.t_s, "t_s"),
    fTrueHz: num(r.f_true_hz, "f_true_hz"),
    fHatHz: num(r.f_hat_hz, "f_hat_hz"),
    k: num(r.k, "k"),
    mu: num(r.mu, "mu"),
    theta: num(r.theta_rad, "theta_rad"),
    fomHz: num(r.fom_hz, "fom_hz"),
  }));
}

export function parseTruthCsv(text: string): TruthRow[] {
  const rows = rawRows(text, "truth CSV");
  requireColumns(rows, ["t_seconds", "f_hz"], "truth CSV");
  return rows.map((r) => ({
    t: num(r.t_seconds, "t_seconds"),
    fHz: num(r.f_hz, "f_hz"),
  }));
}

/** Distinct protocols present, in first-seen order. */
export function protocolsIn(rows: ResultsRow[]): string[] {
  const seen: string[] = [];
  for (const row of rows) {
    if (!seen.includes(row.protocol)) seen.push(row.protocol);
  }
  return seen;
}
