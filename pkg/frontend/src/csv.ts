/**
 * Reader for the sweep CSV contract:
 * kind,method,r,alpha,misalignment_db,rank_hat,nuclear_norm,seed,wall_time_s,error
 */

export const REQUIRED_COLUMNS = [
  "kind",
  "method",
  "r",
  "alpha",
  "misalignment_db",
  "rank_hat",
  "nuclear_norm",
  "seed",
  "wall_time_s",
  "error",
] as const;

export interface SweepRow {
  kind: string;
  method: string;
  r: number;
  alpha: number | null;
  misalignmentDb: number | null;
  rankHat: number | null;
  nuclearNorm: number | null;
  seed: number;
  wallTimeS: number | null;
  error: string;
}

export class MissingColumnsError extends Error {
  readonly missing: string[];

  constructor(missing: string[]) {
    super(`CSV is missing required columns: ${missing.join(", ")}`);
    this.missing = missing;
  }
}

function optionalNumber(field: string): number | null {
  if (field === "") return null;
  const value = Number(field);
  if (Number.isNaN(value)) {
    throw new Error(`not a number: ${JSON.stringify(field)}`);
  }
  return value;
}

export function parseSweepCsv(text: string): SweepRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("CSV is empty");
  }
  const header = lines[0].split(",").map((h) => h.trim());
  const missing = REQUIRED_COLUMNS.filter((col) => !header.includes(col));
  if (missing.length > 0) {
    throw new MissingColumnsError(missing);
  }
  const index = new Map(header.map((name, i) => [name, i]));
  const at = (fields: string[], name: string) => fields[index.get(name)!] ?? "";

  const rows: SweepRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const fields = lines[i].split(",");
    try {
      rows.push({
        kind: at(fields, "kind"),
        method: at(fields, "method"),
        r: Number(at(fields, "r")),
        alpha: optionalNumber(at(fields, "alpha")),
        misalignmentDb: optionalNumber(at(fields, "misalignment_db")),
        rankHat: optionalNumber(at(fields, "rank_hat")),
        nuclearNorm: optionalNumber(at(fields, "nuclear_norm")),
        seed: Number(at(fields, "seed")),
        wallTimeS: optionalNumber(at(fields, "wall_time_s")),
        error: at(fields, "error"),
      });
    } catch (err) {
      throw new Error(`CSV line ${i + 1}: ${(err as Error).message}`);
    }
  }
  return rows;
}

/** Clean summary rows only; detail rows and failed cells are not plotted. */
export function summaryRows(rows: SweepRow[]): SweepRow[] {
  return rows.filter((row) => row.kind === "summary" && row.error === "");
}
