/**
 * Unit relabelings for the optional magnetic-field axes.
 *
 * An electron-spin sensor converts field to frequency through the
 * gyromagnetic ratio, about 28 MHz per mT, so the field axes are pure
 * rescalings of the frequency axes.
 */

export const GYROMAGNETIC_MHZ_PER_MT = 28;

/** Frequency error in MHz -> field error in microtesla. */
export function mhzToMicrotesla(mhz: number): number {
  return (mhz / GYROMAGNETIC_MHZ_PER_MT) * 1000;
}

/** Fluctuation level in MHz*Hz^(1/2) -> mT*Hz^(1/2). */
export function kappaToFieldUnits(kappaMhz: number): number {
  return kappaMhz / GYROMAGNETIC_MHZ_PER_MT;
}

export function round3(x: number): number {
  if (x === 0 || !Number.isFinite(x)) return x;
  const scale = Math.pow(10, 2 - Math.floor(Math.log10(Math.abs(x))));
  return Math.round(x * scale) / scale;
}
