// Overlay line profiles from several scheme runs into one figure.

import { writeFileSync } from "node:fs";

import { readProfile } from "./csv.js";
import { LinePlot } from "./svg.js";

export interface ProfileJob {
  inputs: string[];            // profile CSV paths
  labels: string[];            // legend label per input, same order
  field?: string;              // column to plot; default: first field column
  output: string;              // SVG path
  yRange?: [number, number];
}

const GRID_TOL = 1e-12;

export function plotProfiles(job: ProfileJob): string {
  if (job.inputs.length < 1) throw new Error("need at least one profile CSV");
  if (job.labels.length !== job.inputs.length) {
    throw new Error(`got ${job.labels.length} labels for ${job.inputs.length} inputs`);
  }
  const profiles = job.inputs.map(readProfile);
  const ref = profiles[0];
  for (const p of profiles.slice(1)) {
    if (p.x.length !== ref.x.length) {
      throw new Error(`x-grid mismatch: ${p.path} has ${p.x.length} samples, ${ref.path} has ${ref.x.length}`);
    }
    for (let i = 0; i < ref.x.length; i++) {
      if (Math.abs(p.x[i] - ref.x[i]) > GRID_TOL * Math.max(1, Math.abs(ref.x[i]))) {
        throw new Error(`x-grid mismatch at sample ${i}: ${p.path} vs ${ref.path}`);
      }
    }
  }
  const field = job.field ?? [...ref.fields.keys()][0];
  const plot = new LinePlot();
  plot.yLabel = field;
  for (let k = 0; k < profiles.length; k++) {
    const col = profiles[k].fields.get(field);
    if (!col) throw new Error(`${profiles[k].path}: no column ${field}`);
    plot.addSeries(profiles[k].x, col, job.labels[k]);
  }
  if (job.yRange) plot.setYRange(job.yRange[0], job.yRange[1]);
  const svg = plot.render();
  writeFileSync(job.output, svg);
  return svg;
}
