/**
 * Reader for the solver's binary field dumps.
 *
 * Layout: one ASCII header line `llgfield v1 Nx Ny Nz ncomp`, then ncomp
 * consecutive blocks of little-endian float64 cell values with x varying
 * fastest, then y, then z.
 */

import { readFileSync } from "fs";

const MAGIC = "llgfield v1";

export interface FieldDump {
  nx: number;
  ny: number;
  nz: number;
  ncomp: number;
  /** component-major values; index via `at(c, i, j, k)` */
  data: Float64Array;
}

export function readField(path: string): FieldDump {
  const buffer = readFileSync(path);
  const newline = buffer.indexOf(0x0a);
  if (newline < 0) {
    throw new Error(`${path}:1: missing header line`);
  }
  const header = buffer.subarray(0, newline).toString("ascii");
  const parts = header.split(" ");
  if (parts.length !== 6 || `${parts[0]} ${parts[1]}` !== MAGIC) {
    throw new Error(`${path}:1: not a "${MAGIC}" dump (header "${header}")`);
  }
  const [nx, ny, nz, ncomp] = parts.slice(2).map((p) => Number(p));
  if (![nx, ny, nz, ncomp].every((v) => Number.isInteger(v) && v >= 1)) {
    throw new Error(`${path}:1: malformed header "${header}"`);
  }
  const payload = buffer.subarray(newline + 1);
  const expected = nx * ny * nz * ncomp * 8;
  if (payload.length !== expected) {
    throw new Error(`${path}: payload is ${payload.length} bytes, expected ${expected}`);
  }
  const data = new Float64Array(nx * ny * nz * ncomp);
  for (let i = 0; i < data.length; i++) {
    data[i] = payload.readDoubleLE(i * 8);
  }
  return { nx, ny, nz, ncomp, data };
}

export function at(field: FieldDump, c: number, i: number, j: number, k: number): number {
  const { nx, ny, nz } = field;
  return field.data[c * nx * ny * nz + k * nx * ny + j * nx + i];
}
