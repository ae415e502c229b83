/** Power laws: reading the backend's fit JSON, or refitting as a fallback. */

export interface PowerLaw {
  c: number;
  exponent: number;
}

export function readFitJson(text: string): PowerLaw {
  const doc = JSON.parse(text) as Record<string, unknown>;
  const c = doc.c;
  const exponent = doc.exponent;
  if (typeof c !== "number" || typeof exponent !== "number") {
    throw new Error('fit JSON must contain numeric "c" and "exponent"');
  }
  return { c, exponent };
}

export interface FitPoint {
  x: number;
  y: number;
  yerr?: number;
}

/**
 * Weighted least squares of log y on log x, matching the backend's fit:
 * weights (y/yerr)^2 when every point carries a positive error, else
 * unweighted.
 */
export function fitPowerLaw(points: FitPoint[]): PowerLaw {
  if (points.length < 3) {
    throw new Error(`need at least 3 points, got ${points.length}`);
  }
  for (const p of points) {
    if (p.x <= 0 || p.y <= 0) {
      throw new Error("x and y must be positive for a log-log fit");
    }
  }
  const weighted = points.every((p) => (p.yerr ?? 0) > 0);
  let sw = 0;
  let swx = 0;
  let swy = 0;
  let swxx = 0;
  let swxy = 0;
  for (const p of points) {
    const w = weighted ? (p.y / (p.yerr as number)) ** 2 : 1;
    const lx = Math.log(p.x);
    const ly = Math.log(p.y);
    sw += w;
    swx += w * lx;
    swy += w * ly;
    swxx += w * lx * lx;
    swxy += w * lx * ly;
  }
  const det = sw * swxx - swx * swx;
  if (Math.abs(det) < 1e-300) {
    throw new Error("degenerate fit: all x identical");
  }
  const intercept = (swxx * swy - swx * swxy) / det;
  const slope = (sw * swxy - swx * swy) / det;
  return { c: Math.exp(intercept), exponent: slope };
}

/** Sample the fitted curve with n log-spaced points across [xMin, xMax]. */
export function sampleCurve(
  law: PowerLaw,
  xMin: number,
  xMax: number,
  n = 64,
): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  const la = Math.log(xMin);
  const lb = Math.log(xMax);
  for (let i = 0; i < n; i++) {
    const x = Math.exp(la + ((lb - la) * i) / (n - 1));
    out.push([x, law.c * Math.pow(x, law.exponent)]);
  }
  return out;
}
