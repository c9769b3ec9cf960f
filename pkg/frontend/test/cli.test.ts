import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterEach, describe, expect, it, vi } from "vitest";

import { main, parseArgs, runPlot, UsageError } from "../src/cli.js";
import { MissingColumnsError } from "../src/csv.js";

const ALPHA_CSV = new URL("./fixtures/alpha_sweep.csv", import.meta.url).pathname;
const RANK_CSV = new URL("./fixtures/rank_sweep.csv", import.meta.url).pathname;

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "kronplot-"));
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe("parseArgs", () => {
  it("parses a full invocation", () => {
    const spec = parseArgs([
      "--kind", "rank_grid", "--in", "a.csv", "--out", "b.svg", "--log-x",
    ]);
    expect(spec).toMatchObject({
      kind: "rank_grid", inputCsv: "a.csv", outputPath: "b.svg", logX: true,
    });
  });

  it("rejects unknown kinds", () => {
    expect(() =>
      parseArgs(["--kind", "pie", "--in", "a.csv", "--out", "b.svg"]),
    ).toThrow(UsageError);
  });

  it("requires the mandatory flags", () => {
    expect(() => parseArgs(["--kind", "rank_grid"])).toThrow(/required/);
  });

  it("rejects unknown flags", () => {
    expect(() => parseArgs(["--frobnicate"])).toThrow(UsageError);
  });
});

describe("runPlot", () => {
  it("renders the three-panel alpha sweep from a harness CSV", () => {
    const out = join(tempDir(), "fig2.svg");
    runPlot({
      kind: "alpha_sweep_triple", inputCsv: ALPHA_CSV, outputPath: out,
      logX: true, width: 900, height: 700,
    });
    const svg = readFileSync(out, "utf-8");
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain("misalignment");
    expect(svg).toContain("nuclear norm");
  });

  it("renders the rank grid from a harness CSV", () => {
    const out = join(tempDir(), "fig3.svg");
    runPlot({
      kind: "rank_grid", inputCsv: RANK_CSV, outputPath: out,
      logX: false, width: 800, height: 500,
    });
    expect(readFileSync(out, "utf-8")).toContain("construction rank");
  });

  it("renders the selected-alpha figure", () => {
    const out = join(tempDir(), "fig4.svg");
    runPlot({
      kind: "alpha_vs_rank", inputCsv: RANK_CSV, outputPath: out,
      logX: false, width: 800, height: 500,
    });
    expect(readFileSync(out, "utf-8").startsWith("<svg")).toBe(true);
  });

  it("re-rendering the same CSV is idempotent", () => {
    const dir = tempDir();
    const first = join(dir, "a.svg");
    const second = join(dir, "b.svg");
    const spec = {
      kind: "rank_grid" as const, inputCsv: RANK_CSV, outputPath: first,
      logX: false, width: 640, height: 480,
    };
    runPlot(spec);
    runPlot({ ...spec, outputPath: second });
    expect(readFileSync(first, "utf-8")).toBe(readFileSync(second, "utf-8"));
  });

  it("propagates named missing columns", () => {
    const dir = tempDir();
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "kind,method,r\nsummary,m,1\n");
    try {
      runPlot({
        kind: "rank_grid", inputCsv: bad, outputPath: join(dir, "x.svg"),
        logX: false, width: 100, height: 100,
      });
      expect.unreachable("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(MissingColumnsError);
      expect((err as Error).message).toContain("misalignment_db");
      expect((err as Error).message).toContain("alpha");
    }
  });
});

describe("main", () => {
  it("returns 0 on success", () => {
    const out = join(tempDir(), "ok.svg");
    const rc = main(["--kind", "rank_grid", "--in", RANK_CSV, "--out", out]);
    expect(rc).toBe(0);
    expect(readFileSync(out, "utf-8").startsWith("<svg")).toBe(true);
  });

  it("returns 2 and prints usage for bad arguments", () => {
    const stderr = vi.spyOn(process.stderr, "write").mockImplementation(() => true);
    expect(main(["--kind", "nope", "--in", "a", "--out", "b"])).toBe(2);
    expect(stderr.mock.calls.join("")).toContain("usage:");
  });

  it("returns 1 and names the columns for a contract violation", () => {
    const dir = tempDir();
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "kind,method\nsummary,m\n");
    const stderr = vi.spyOn(process.stderr, "write").mockImplementation(() => true);
    expect(main(["--kind", "rank_grid", "--in", bad, "--out", join(dir, "x.svg")])).toBe(1);
    expect(stderr.mock.calls.join("")).toContain("missing required columns");
    expect(stderr.mock.calls.join("")).toContain("misalignment_db");
  });

  it("returns 1 for an unreadable input file", () => {
    const stderr = vi.spyOn(process.stderr, "write").mockImplementation(() => true);
    expect(main(["--kind", "rank_grid", "--in", "/nonexistent.csv", "--out", "/tmp/x.svg"])).toBe(1);
    expect(stderr.mock.calls.join("")).toContain("plot:");
  });
});
