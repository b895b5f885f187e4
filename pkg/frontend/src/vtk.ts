// Reader for the solver's legacy ASCII VTK dumps plus a pseudocolor map.

import { readFileSync, writeFileSync } from "node:fs";

import { colorScale } from "./svg.js";

export interface VtkGrid {
  points: Float64Array;        // xyz triples
  cells: number[][];           // point ids per cell (VTK corner order first)
  cellTypes: number[];
  pointData: Map<string, Float64Array>;
}

export function parseVtk(text: string): VtkGrid {
  const lines = text.split(/\r?\n/);
  if (!lines[0]?.startsWith("# vtk DataFile")) throw new Error("not a legacy VTK file");
  let i = 0;
  const next = () => lines[i++] ?? "";
  const grid: VtkGrid = { points: new Float64Array(0), cells: [], cellTypes: [], pointData: new Map() };
  let nPoints = 0;
  while (i < lines.length) {
    const line = next().trim();
    if (line.startsWith("POINTS")) {
      nPoints = Number(line.split(/\s+/)[1]);
      const vals: number[] = [];
      while (vals.length < nPoints * 3) {
        for (const tok of next().trim().split(/\s+/)) if (tok) vals.push(Number(tok));
      }
      grid.points = Float64Array.from(vals);
    } else if (line.startsWith("CELLS")) {
      const nCells = Number(line.split(/\s+/)[1]);
      for (let c = 0; c < nCells; c++) {
        const toks = next().trim().split(/\s+/).map(Number);
        grid.cells.push(toks.slice(1, 1 + toks[0]));
      }
    } else if (line.startsWith("CELL_TYPES")) {
      const nCells = Number(line.split(/\s+/)[1]);
      for (let c = 0; c < nCells; c++) grid.cellTypes.push(Number(next().trim()));
    } else if (line.startsWith("SCALARS")) {
      const name = line.split(/\s+/)[1];
      next(); // LOOKUP_TABLE line
      const vals = new Float64Array(nPoints);
      let k = 0;
      while (k < nPoints) {
        for (const tok of next().trim().split(/\s+/)) if (tok) vals[k++] = Number(tok);
      }
      grid.pointData.set(name, vals);
    }
  }
  if (grid.points.length === 0 || grid.cells.length === 0) throw new Error("incomplete VTK grid");
  return grid;
}

export function readVtk(path: string): VtkGrid {
  return parseVtk(readFileSync(path, "utf8"));
}

export interface FieldMapJob {
  input: string;
  field: string;
  output: string;
  width?: number;
}

/** Flat-shaded pseudocolor map: one polygon per cell colored by the mean of
 * its corner values. */
export function fieldMap(job: FieldMapJob): string {
  const grid = readVtk(job.input);
  const data = grid.pointData.get(job.field);
  if (!data) {
    throw new Error(`field ${job.field} not present (have: ${[...grid.pointData.keys()].join(", ")})`);
  }
  let [xmin, xmax, ymin, ymax] = [Infinity, -Infinity, Infinity, -Infinity];
  for (let p = 0; p < grid.points.length / 3; p++) {
    xmin = Math.min(xmin, grid.points[3 * p]);
    xmax = Math.max(xmax, grid.points[3 * p]);
    ymin = Math.min(ymin, grid.points[3 * p + 1]);
    ymax = Math.max(ymax, grid.points[3 * p + 1]);
  }
  let vmin = Infinity;
  let vmax = -Infinity;
  for (const v of data) {
    vmin = Math.min(vmin, v);
    vmax = Math.max(vmax, v);
  }
  const W = job.width ?? 720;
  const H = Math.max(1, Math.round((W * (ymax - ymin)) / (xmax - xmin || 1)));
  const sx = (x: number) => ((x - xmin) / (xmax - xmin || 1)) * W;
  const sy = (y: number) => H - ((y - ymin) / (ymax - ymin || 1)) * H;
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H + 40}" font-family="sans-serif" font-size="12">`,
    `<rect width="${W}" height="${H + 40}" fill="white"/>`,
  ];
  for (const cell of grid.cells) {
    const corners = cell.slice(0, 4);               // corner ids lead in VTK order
    let mean = 0;
    for (const id of cell) mean += data[id];
    mean /= cell.length;
    const pts = corners
      .map((id) => `${sx(grid.points[3 * id])},${sy(grid.points[3 * id + 1])}`)
      .join(" ");
    parts.push(`<polygon points="${pts}" fill="${colorScale(mean, vmin, vmax)}" stroke="none"/>`);
  }
  parts.push(
    `<text x="8" y="${H + 24}">${job.field}: [${vmin.toPrecision(4)}, ${vmax.toPrecision(4)}]</text>`,
  );
  parts.push("</svg>");
  const svg = parts.join("\n");
  writeFileSync(job.output, svg);
  return svg;
}
