import { execFileSync } from "child_process";
import { existsSync, mkdtempSync, readFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";

import { describe, expect, it } from "vitest";

import { num, readCsv } from "../src/csv.js";
import { at, readField } from "../src/field.js";
import { fitOrder } from "../src/fit.js";
import { KINDS, renderPlot } from "../src/plots.js";

const FIXTURES = join(__dirname, "fixtures");

const FIXTURE_INPUTS: Record<string, string[]> = {
  convergence: [join(FIXTURES, "accuracy.csv")],
  cpu_vs_error: [join(FIXTURES, "efficiency.csv")],
  energy_curves: [join(FIXTURES, "energy_alpha5.csv"), join(FIXTURES, "energy_alpha10.csv")],
  angle_map: [join(FIXTURES, "m_wall.field")],
  quiver: [join(FIXTURES, "m_wall.field")],
};

describe("golden fixtures", () => {
  it("parses the accuracy table", () => {
    const table = readCsv(FIXTURE_INPUTS.convergence[0], "scheme,k,h,linf,l2,h1");
    expect(table.rows.length).toBe(9); // three schemes, three points each
    expect(num(table, 0, "linf")).toBeGreaterThan(0);
  });

  it("parses field dumps with the documented layout", () => {
    const field = readField(join(FIXTURES, "m_uniform.field"));
    expect([field.nx, field.ny, field.nz, field.ncomp]).toEqual([24, 12, 2, 3]);
    expect(at(field, 0, 5, 3, 1)).toBe(1);
    expect(at(field, 1, 5, 3, 1)).toBe(0);
  });
});

describe("renderPlot", () => {
  for (const kind of KINDS) {
    it(`renders ${kind} from golden fixtures`, () => {
      const svg = renderPlot(kind, FIXTURE_INPUTS[kind]);
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
    });
  }

  it("is deterministic across renders", () => {
    for (const kind of KINDS) {
      expect(renderPlot(kind, FIXTURE_INPUTS[kind])).toBe(renderPlot(kind, FIXTURE_INPUTS[kind]));
    }
  });

  it("annotates convergence slopes that match the order fit to 2 decimals", () => {
    // slopes recomputed from the golden table must appear verbatim
    const table = readCsv(FIXTURE_INPUTS.convergence[0]);
    const points: Record<string, Array<[number, number]>> = {};
    table.rows.forEach((row, i) => {
      const scheme = row[0];
      (points[scheme] ??= []).push([num(table, i, "k"), num(table, i, "linf")]);
    });
    const svg = renderPlot("convergence", FIXTURE_INPUTS.convergence);
    for (const [scheme, pts] of Object.entries(points)) {
      const slope = fitOrder(pts).toFixed(2);
      expect(svg).toContain(`slope ${slope}`);
      expect(svg).toContain(`${scheme} (${slope})`);
    }
    // frozen cross-check against the solver-side fit of the same fixture
    expect(fitOrder(points["bdf3"]).toFixed(2)).toBe("2.95");
    expect(fitOrder(points["bdf1"]).toFixed(2)).toBe("1.00");
  });

  it("renders a constant angle map for the uniform e1 state", () => {
    const svg = renderPlot("angle_map", [join(FIXTURES, "m_uniform.field")]);
    // atan2(0, 1) = 0 everywhere: exactly one fill color in the map body
    const fills = new Set([...svg.matchAll(/hsl\([\d.]+, 75%, 52%\)/g)].map((m) => m[0]));
    // the colorbar contributes the full wheel; the map cells all share hue 180
    const mapColor = "hsl(180.0, 75%, 52%)";
    expect(svg).toContain(mapColor);
    const count = svg.split(mapColor).length - 1;
    expect(count).toBeGreaterThanOrEqual(24 * 12);
    expect(fills.size).toBeGreaterThan(1); // wheel present in the colorbar
  });

  it("rejects malformed CSV with the offending line number", () => {
    expect(() => renderPlot("convergence", [join(FIXTURES, "orders.csv")])).toThrowError(/:1:/);
  });
});

describe("cli", () => {
  const dist = join(__dirname, "..", "dist", "cli.js");
  const run = (args: string[]) => {
    try {
      execFileSync("node", [dist, ...args], { stdio: "pipe" });
      return 0;
    } catch (err: any) {
      return err.status as number;
    }
  };

  it.skipIf(!existsSync(dist))("renders every kind end to end", () => {
    const out = mkdtempSync(join(tmpdir(), "figures-"));
    for (const kind of KINDS) {
      const target = join(out, `${kind}.svg`);
      const args = [kind];
      for (const input of FIXTURE_INPUTS[kind]) {
        args.push("--in", input);
      }
      args.push("--out", target);
      expect(run(args)).toBe(0);
      expect(readFileSync(target, "utf8")).toContain("</svg>");
    }
  });

  it.skipIf(!existsSync(dist))("fails with a clear error on bad inputs", () => {
    expect(run(["convergence", "--in", join(FIXTURES, "orders.csv"), "--out", "/tmp/x.svg"])).toBe(1);
    expect(run(["no_such_kind", "--in", "x", "--out", "y"])).toBe(2);
  });
});
