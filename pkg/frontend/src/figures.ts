/**
 * Figure builders: each turns summary rows into an ECharts option object.
 *
 * - alpha_sweep_triple: misalignment / rank / nuclear norm vs alpha, three
 *   stacked panels sharing the alpha axis (one line per method/rank curve);
 * - rank_grid: misalignment vs construction rank, one line per method,
 *   full-rank baselines drawn as flat dashed references;
 * - alpha_vs_rank: selected alpha vs construction rank (log alpha axis).
 */

import type { SweepRow } from "./csv.js";

export const FIGURE_KINDS = ["alpha_sweep_triple", "rank_grid", "alpha_vs_rank"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureRequest {
  kind: FigureKind;
  rows: SweepRow[];
  logX: boolean;
}

const PALETTE = [
  "#3366cc", "#dc3912", "#ff9900", "#109618", "#990099",
  "#0099c6", "#dd4477", "#66aa00", "#b82e2e", "#316395",
];

function seriesLabel(row: SweepRow): string {
  return row.r > 0 ? `${row.method} (R=${row.r})` : row.method;
}

function groupBy<T>(items: T[], key: (item: T) => string): Map<string, T[]> {
  const groups = new Map<string, T[]>();
  for (const item of items) {
    const k = key(item);
    const bucket = groups.get(k);
    if (bucket) bucket.push(item);
    else groups.set(k, [item]);
  }
  return groups;
}

function logTickLabel(value: number): string {
  if (value === 0) return "0";
  const exp = Math.log10(Math.abs(value));
  if (Number.isInteger(exp)) {
    return `${value < 0 ? "-" : ""}1e${exp}`;
  }
  return value.toExponential(1);
}

function baseOption(title: string) {
  return {
    animation: false,
    backgroundColor: "#ffffff",
    color: PALETTE,
    title: { text: title, left: "center", textStyle: { fontSize: 14 } },
    legend: { bottom: 0, type: "plain" as const },
  };
}

export function buildAlphaSweepTriple(rows: SweepRow[], logX: boolean): object {
  const usable = rows.filter((r) => r.alpha !== null && r.misalignmentDb !== null);
  if (usable.length === 0) {
    throw new Error("no plottable summary rows for alpha_sweep_triple");
  }
  const panels: { field: (r: SweepRow) => number | null; name: string }[] = [
    { field: (r) => r.misalignmentDb, name: "misalignment [dB]" },
    { field: (r) => r.rankHat, name: "rank" },
    { field: (r) => r.nuclearNorm, name: "nuclear norm" },
  ];
  const groups = groupBy(usable, seriesLabel);
  const grids = [
    { left: 70, right: 30, top: 40, height: "22%" },
    { left: 70, right: 30, top: "40%", height: "22%" },
    { left: 70, right: 30, top: "70%", height: "22%" },
  ];
  const xAxes = panels.map((_, i) => ({
    gridIndex: i,
    type: logX ? ("log" as const) : ("value" as const),
    name: i === 2 ? "alpha" : "",
    nameLocation: "middle" as const,
    nameGap: 28,
    axisLabel: logX ? { formatter: logTickLabel } : {},
  }));
  const yAxes = panels.map((panel, i) => ({
    gridIndex: i,
    type: "value" as const,
    name: panel.name,
    scale: true,
  }));
  const series: object[] = [];
  for (const [label, group] of groups) {
    const sorted = [...group].sort((a, b) => a.alpha! - b.alpha!);
    panels.forEach((panel, i) => {
      series.push({
        name: label,
        type: "line",
        xAxisIndex: i,
        yAxisIndex: i,
        showSymbol: sorted.length < 3,
        data: sorted
          .filter((r) => panel.field(r) !== null)
          .map((r) => [r.alpha, panel.field(r)]),
      });
    });
  }
  return {
    ...baseOption("misalignment, rank, and nuclear norm vs alpha"),
    legend: { bottom: 0, data: [...groups.keys()] },
    grid: grids,
    xAxis: xAxes,
    yAxis: yAxes,
    series,
  };
}

function rankLineFigure(
  rows: SweepRow[],
  title: string,
  yName: string,
  yField: (r: SweepRow) => number | null,
  logY: boolean,
): object {
  const usable = rows.filter((r) => yField(r) !== null);
  if (usable.length === 0) {
    throw new Error(`no plottable summary rows for ${title}`);
  }
  const sweeping = usable.filter((r) => r.r > 0);
  const flat = usable.filter((r) => r.r === 0);
  const ranks = [...new Set(sweeping.map((r) => r.r))].sort((a, b) => a - b);
  const series: object[] = [];
  for (const [method, group] of groupBy(sweeping, (r) => r.method)) {
    const sorted = [...group].sort((a, b) => a.r - b.r);
    series.push({
      name: method,
      type: "line",
      showSymbol: true,
      data: sorted.map((r) => [r.r, yField(r)]),
    });
  }
  // rank-independent baselines span the whole rank range as dashed lines
  for (const [method, group] of groupBy(flat, (r) => r.method)) {
    const value = yField(group[0]);
    const span = ranks.length > 0 ? ranks : [0, 1];
    series.push({
      name: method,
      type: "line",
      lineStyle: { type: "dashed" },
      showSymbol: false,
      data: [span[0], span[span.length - 1]].map((r) => [r, value]),
    });
  }
  return {
    ...baseOption(title),
    grid: { left: 80, right: 30, top: 50, bottom: 80 },
    xAxis: {
      type: "value",
      name: "construction rank R",
      nameLocation: "middle",
      nameGap: 28,
      minInterval: 1,
    },
    yAxis: {
      type: logY ? "log" : "value",
      name: yName,
      scale: true,
      axisLabel: logY ? { formatter: logTickLabel } : {},
    },
    series,
  };
}

export function buildRankGrid(rows: SweepRow[]): object {
  return rankLineFigure(
    rows, "misalignment vs construction rank", "misalignment [dB]",
    (r) => r.misalignmentDb, false,
  );
}

export function buildAlphaVsRank(rows: SweepRow[]): object {
  return rankLineFigure(
    rows, "selected alpha vs construction rank", "alpha",
    (r) => r.alpha, true,
  );
}

export function buildFigure(request: FigureRequest): object {
  switch (request.kind) {
    case "alpha_sweep_triple":
      return buildAlphaSweepTriple(request.rows, request.logX);
    case "rank_grid":
      return buildRankGrid(request.rows);
    case "alpha_vs_rank":
      return buildAlphaVsRank(request.rows);
  }
}
