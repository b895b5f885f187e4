// Strict readers for the solver's CSV schemas.

import { readFileSync } from "node:fs";

export interface Table {
  headers: string[];
  columns: Map<string, Float64Array>;
  rows: number;
}

/** Parse a numeric CSV with a single header line. Every data cell must be a
 * finite number except NaN placeholders (the solver writes rate columns as
 * "nan" on the first refinement level). */
export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length < 1) throw new Error("empty CSV");
  const headers = lines[0].split(",").map((h) => h.trim());
  const rows = lines.length - 1;
  const data = headers.map(() => new Float64Array(rows));
  for (let r = 0; r < rows; r++) {
    const cells = lines[r + 1].split(",");
    if (cells.length !== headers.length) {
      throw new Error(`row ${r + 2}: expected ${headers.length} cells, got ${cells.length}`);
    }
    for (let c = 0; c < headers.length; c++) {
      const v = Number(cells[c]);
      if (Number.isNaN(v) && cells[c].trim().toLowerCase() !== "nan") {
        throw new Error(`row ${r + 2}, column ${headers[c]}: not a number: ${cells[c]}`);
      }
      data[c][r] = v;
    }
  }
  const columns = new Map(headers.map((h, i) => [h, data[i]]));
  return { headers, columns, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"));
}

export interface Profile {
  x: Float64Array;
  fields: Map<string, Float64Array>;
  path: string;
}

/** Line-profile schema: column "x" plus one column per solution component. */
export function readProfile(path: string): Profile {
  const t = readCsv(path);
  const x = t.columns.get("x");
  if (!x) throw new Error(`${path}: profile CSV needs an "x" column`);
  const fields = new Map<string, Float64Array>();
  for (const h of t.headers) {
    if (h !== "x") fields.set(h, t.columns.get(h)!);
  }
  if (fields.size === 0) throw new Error(`${path}: no field columns`);
  return { x, fields, path };
}

export interface ConvergenceRow {
  h: number;
  dofs: number;
  err_L2: number;
  err_S: number;
}

/** Convergence-study schema: h, dofs, err_L2, err_S, rate_L2, rate_S, ... */
export function readConvergence(path: string): ConvergenceRow[] {
  const t = readCsv(path);
  for (const need of ["h", "dofs", "err_L2", "err_S"]) {
    if (!t.columns.has(need)) throw new Error(`${path}: missing column ${need}`);
  }
  const out: ConvergenceRow[] = [];
  for (let r = 0; r < t.rows; r++) {
    out.push({
      h: t.columns.get("h")![r],
      dofs: t.columns.get("dofs")![r],
      err_L2: t.columns.get("err_L2")![r],
      err_S: t.columns.get("err_S")![r],
    });
  }
  return out;
}
