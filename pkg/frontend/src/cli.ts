#!/usr/bin/env node
/**
 * plot --kind <alpha_sweep_triple|rank_grid|alpha_vs_rank> --in <csv>
 *      --out <svg> [--log-x]
 *
 * Reads a sweep CSV, keeps the clean summary rows, and writes an SVG figure.
 */

import { readFileSync, realpathSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { MissingColumnsError, parseSweepCsv, summaryRows } from "./csv.js";
import { FIGURE_KINDS, buildFigure, type FigureKind } from "./figures.js";
import { renderToSvg } from "./render.js";

export class UsageError extends Error {}

export interface PlotSpec {
  kind: FigureKind;
  inputCsv: string;
  outputPath: string;
  logX: boolean;
  width: number;
  height: number;
}

const USAGE =
  "usage: plot --kind <" + FIGURE_KINDS.join("|") + "> --in <csv> --out <svg> " +
  "[--log-x] [--width N] [--height N]";

export function parseArgs(argv: string[]): PlotSpec {
  let kind: string | undefined;
  let input: string | undefined;
  let output: string | undefined;
  let logX = false;
  let width = 900;
  let height = 700;

  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) throw new UsageError(`${arg} needs a value\n${USAGE}`);
      return argv[i];
    };
    switch (arg) {
      case "--kind":
        kind = next();
        break;
      case "--in":
        input = next();
        break;
      case "--out":
        output = next();
        break;
      case "--log-x":
        logX = true;
        break;
      case "--width":
        width = Number(next());
        break;
      case "--height":
        height = Number(next());
        break;
      case "--help":
      case "-h":
        throw new UsageError(USAGE);
      default:
        throw new UsageError(`unknown argument ${arg}\n${USAGE}`);
    }
  }
  if (!kind || !input || !output) {
    throw new UsageError(`--kind, --in and --out are required\n${USAGE}`);
  }
  if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
    throw new UsageError(`unknown figure kind ${JSON.stringify(kind)}\n${USAGE}`);
  }
  if (!Number.isFinite(width) || !Number.isFinite(height) || width <= 0 || height <= 0) {
    throw new UsageError("--width and --height must be positive numbers");
  }
  return { kind: kind as FigureKind, inputCsv: input, outputPath: output, logX, width, height };
}

export function runPlot(spec: PlotSpec): void {
  const rows = summaryRows(parseSweepCsv(readFileSync(spec.inputCsv, "utf-8")));
  const option = buildFigure({ kind: spec.kind, rows, logX: spec.logX });
  const svg = renderToSvg(option, { width: spec.width, height: spec.height });
  writeFileSync(spec.outputPath, svg, "utf-8");
}

export function main(argv: string[]): number {
  try {
    runPlot(parseArgs(argv));
    return 0;
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`${err.message}\n`);
      return 2;
    }
    if (err instanceof MissingColumnsError) {
      process.stderr.write(`${err.message}\n`);
      return 1;
    }
    process.stderr.write(`plot: ${(err as Error).message}\n`);
    return 1;
  }
}

function invokedDirectly(): boolean {
  const entry = process.argv[1];
  if (!entry) return false;
  try {
    return import.meta.url === pathToFileURL(realpathSync(entry)).href;
  } catch {
    return false;
  }
}

if (invokedDirectly()) {
  process.exit(main(process.argv.slice(2)));
}
