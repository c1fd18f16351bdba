#!/usr/bin/env node
/**
 * figures <kind> --in <path> [--in <path> ...] --out <image.svg>
 *
 * Renders one figure from solver CSV/field outputs. Inputs are read-only;
 * the output is overwritten idempotently.
 */

import { mkdirSync, writeFileSync } from "fs";
import { dirname } from "path";

import { KINDS, Kind, renderPlot } from "./plots.js";

function usage(): string {
  return `usage: figures <${KINDS.join("|")}> --in <path> [--in <path> ...] --out <image.svg>`;
}

export function main(argv: string[]): number {
  const args = [...argv];
  const kind = args.shift();
  if (kind === undefined || kind === "-h" || kind === "--help") {
    console.error(usage());
    return kind === undefined ? 2 : 0;
  }
  if (!(KINDS as readonly string[]).includes(kind)) {
    console.error(`error: unknown kind "${kind}"\n${usage()}`);
    return 2;
  }
  const inputs: string[] = [];
  let out: string | undefined;
  while (args.length > 0) {
    const flag = args.shift();
    if (flag === "--in") {
      const value = args.shift();
      if (value === undefined) {
        console.error("error: --in needs a path");
        return 2;
      }
      inputs.push(value);
    } else if (flag === "--out") {
      out = args.shift();
      if (out === undefined) {
        console.error("error: --out needs a path");
        return 2;
      }
    } else {
      console.error(`error: unknown argument "${flag}"\n${usage()}`);
      return 2;
    }
  }
  if (inputs.length === 0 || out === undefined) {
    console.error(`error: --in and --out are required\n${usage()}`);
    return 2;
  }
  try {
    const svg = renderPlot(kind as Kind, inputs);
    mkdirSync(dirname(out), { recursive: true });
    writeFileSync(out, svg);
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
  return 0;
}

import { fileURLToPath } from "url";

if (process.argv[1] && fileURLToPath(import.meta.url) === process.argv[1]) {
  process.exit(main(process.argv.slice(2)));
}
