/**
 * Strict CSV reading for the solver's table outputs.
 *
 * Every table carries a documented header row; rows that fail to parse are
 * rejected with their 1-based line number so a truncated or hand-edited
 * file is caught immediately. Rows holding non-numeric status markers
 * (e.g. "failed" norms of a blown-up sweep entry) can be skipped by the
 * caller via the raw cell access.
 */

import { readFileSync } from "fs";

export interface CsvTable {
  path: string;
  header: string[];
  rows: string[][];
}

export function readCsv(path: string, expectedHeader?: string): CsvTable {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n").filter((line, i, all) => !(line === "" && i === all.length - 1));
  if (lines.length === 0) {
    throw new Error(`${path}:1: empty file`);
  }
  const header = lines[0].split(",");
  if (expectedHeader !== undefined && lines[0] !== expectedHeader) {
    throw new Error(`${path}:1: expected header "${expectedHeader}", got "${lines[0]}"`);
  }
  const rows: string[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new Error(`${path}:${i + 1}: expected ${header.length} columns, got ${cells.length}`);
    }
    rows.push(cells);
  }
  return { path, header, rows };
}

/** Numeric cell accessor; rejects non-numeric cells with their location. */
export function num(table: CsvTable, rowIndex: number, column: string): number {
  const col = table.header.indexOf(column);
  if (col < 0) {
    throw new Error(`${table.path}: no column "${column}"`);
  }
  const raw = table.rows[rowIndex][col];
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new Error(`${table.path}:${rowIndex + 2}: cell "${raw}" in column ${column} is not a number`);
  }
  return value;
}

/** True when every named column parses as a finite number in this row. */
export function rowIsNumeric(table: CsvTable, rowIndex: number, columns: string[]): boolean {
  return columns.every((column) => {
    const col = table.header.indexOf(column);
    return col >= 0 && Number.isFinite(Number(table.rows[rowIndex][col]));
  });
}

export function cell(table: CsvTable, rowIndex: number, column: string): string {
  const col = table.header.indexOf(column);
  if (col < 0) {
    throw new Error(`${table.path}: no column "${column}"`);
  }
  return table.rows[rowIndex][col];
}
