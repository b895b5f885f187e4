// Observed-order tables from convergence CSVs.

import { writeFileSync } from "node:fs";

import { ConvergenceRow, readConvergence } from "./csv.js";

export interface RateEntry {
  h: number;
  dofs: number;
  err_L2: number;
  rate_L2: number | null;
  err_S: number;
  rate_S: number | null;
}

export function observedRates(rows: ConvergenceRow[]): RateEntry[] {
  if (rows.length < 2) throw new Error("need at least two refinement levels");
  return rows.map((r, i) => ({
    h: r.h,
    dofs: r.dofs,
    err_L2: r.err_L2,
    err_S: r.err_S,
    rate_L2: i === 0 ? null : Math.log2(rows[i - 1].err_L2 / r.err_L2),
    rate_S: i === 0 ? null : Math.log2(rows[i - 1].err_S / r.err_S),
  }));
}

export function formatRateTable(entries: RateEntry[]): string {
  const cols = ["h", "dofs", "err_L2", "rate_L2", "err_S", "rate_S"];
  const lines = [cols.map((c) => c.padStart(10)).join("  ")];
  for (const e of entries) {
    lines.push(
      [
        e.h.toExponential(3),
        String(e.dofs),
        e.err_L2.toExponential(3),
        e.rate_L2 === null ? "-" : e.rate_L2.toFixed(2),
        e.err_S.toExponential(3),
        e.rate_S === null ? "-" : e.rate_S.toFixed(2),
      ]
        .map((c) => c.padStart(10))
        .join("  "),
    );
  }
  return lines.join("\n");
}

function tableSvg(entries: RateEntry[]): string {
  const cols = ["h", "dofs", "err_L2", "rate_L2", "err_S", "rate_S"];
  const cw = 110;
  const rh = 26;
  const width = cols.length * cw + 20;
  const height = (entries.length + 1) * rh + 20;
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" font-family="monospace" font-size="13">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
  ];
  cols.forEach((c, j) => {
    parts.push(`<text x="${10 + j * cw}" y="${rh}" font-weight="bold">${c}</text>`);
  });
  entries.forEach((e, i) => {
    const vals = [
      e.h.toExponential(2),
      String(e.dofs),
      e.err_L2.toExponential(2),
      e.rate_L2 === null ? "-" : e.rate_L2.toFixed(2),
      e.err_S.toExponential(2),
      e.rate_S === null ? "-" : e.rate_S.toFixed(2),
    ];
    vals.forEach((v, j) => {
      parts.push(`<text x="${10 + j * cw}" y="${rh * (i + 2)}">${v}</text>`);
    });
  });
  parts.push("</svg>");
  return parts.join("\n");
}

export interface RateJob {
  input: string;               // convergence CSV
  textOutput?: string;
  svgOutput?: string;
}

export function rateTable(job: RateJob): RateEntry[] {
  const entries = observedRates(readConvergence(job.input));
  const text = formatRateTable(entries);
  if (job.textOutput) writeFileSync(job.textOutput, text + "\n");
  if (job.svgOutput) writeFileSync(job.svgOutput, tableSvg(entries));
  return entries;
}
