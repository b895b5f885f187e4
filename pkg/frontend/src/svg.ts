// Tiny dependency-free SVG builder for line plots and color maps.

export interface Extent {
  min: number;
  max: number;
}

export const PALETTE = ["#0072bd", "#d95319", "#edb120", "#7e2f8e", "#77ac30", "#4dbeee"];

export function niceTicks(lo: number, hi: number, n = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / Math.max(n - 1, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((s) => span / s <= n) ?? candidates[candidates.length - 1];
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) ticks.push(v);
  return ticks;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(Math.round(v * 1e6) / 1e6);
}

export class LinePlot {
  width = 720;
  height = 480;
  margin = { left: 64, right: 16, top: 20, bottom: 44 };
  private series: { x: Float64Array; y: Float64Array; label: string; color: string }[] = [];
  private xExtent: Extent = { min: Infinity, max: -Infinity };
  private yExtent: Extent = { min: Infinity, max: -Infinity };
  xLabel = "x";
  yLabel = "";

  addSeries(x: Float64Array, y: Float64Array, label: string): void {
    const color = PALETTE[this.series.length % PALETTE.length];
    this.series.push({ x, y, label, color });
    for (const v of x) {
      this.xExtent.min = Math.min(this.xExtent.min, v);
      this.xExtent.max = Math.max(this.xExtent.max, v);
    }
    for (const v of y) {
      this.yExtent.min = Math.min(this.yExtent.min, v);
      this.yExtent.max = Math.max(this.yExtent.max, v);
    }
  }

  setYRange(min: number, max: number): void {
    this.yExtent = { min, max };
  }

  render(): string {
    const { left, right, top, bottom } = this.margin;
    const W = this.width - left - right;
    const H = this.height - top - bottom;
    const pad = 0.04 * (this.yExtent.max - this.yExtent.min || 1);
    const y0 = this.yExtent.min - pad;
    const y1 = this.yExtent.max + pad;
    const sx = (v: number) =>
      left + ((v - this.xExtent.min) / (this.xExtent.max - this.xExtent.min || 1)) * W;
    const sy = (v: number) => top + H - ((v - y0) / (y1 - y0)) * H;

    const parts: string[] = [];
    parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}" font-family="sans-serif" font-size="12">`,
    );
    parts.push(`<rect width="${this.width}" height="${this.height}" fill="white"/>`);
    for (const t of niceTicks(this.xExtent.min, this.xExtent.max)) {
      const X = sx(t);
      parts.push(`<line x1="${X}" y1="${top}" x2="${X}" y2="${top + H}" stroke="#eee"/>`);
      parts.push(`<text x="${X}" y="${top + H + 18}" text-anchor="middle">${fmt(t)}</text>`);
    }
    for (const t of niceTicks(y0, y1)) {
      const Y = sy(t);
      parts.push(`<line x1="${left}" y1="${Y}" x2="${left + W}" y2="${Y}" stroke="#eee"/>`);
      parts.push(`<text x="${left - 6}" y="${Y + 4}" text-anchor="end">${fmt(t)}</text>`);
    }
    parts.push(
      `<rect x="${left}" y="${top}" width="${W}" height="${H}" fill="none" stroke="#333"/>`,
    );
    for (const s of this.series) {
      const pts: string[] = [];
      for (let i = 0; i < s.x.length; i++) pts.push(`${sx(s.x[i])},${sy(s.y[i])}`);
      parts.push(
        `<polyline fill="none" stroke="${s.color}" stroke-width="1.5" points="${pts.join(" ")}"/>`,
      );
    }
    // legend, one row per series
    this.series.forEach((s, i) => {
      const Y = top + 14 + 18 * i;
      parts.push(
        `<line x1="${left + 10}" y1="${Y}" x2="${left + 38}" y2="${Y}" stroke="${s.color}" stroke-width="2" class="legend-line"/>`,
      );
      parts.push(`<text x="${left + 44}" y="${Y + 4}" class="legend-label">${s.label}</text>`);
    });
    parts.push(
      `<text x="${left + W / 2}" y="${this.height - 8}" text-anchor="middle">${this.xLabel}</text>`,
    );
    if (this.yLabel) {
      parts.push(
        `<text x="14" y="${top + H / 2}" text-anchor="middle" transform="rotate(-90 14 ${top + H / 2})">${this.yLabel}</text>`,
      );
    }
    parts.push("</svg>");
    return parts.join("\n");
  }
}

/** Linear blue->white->red color scale used by the field maps. */
export function colorScale(v: number, lo: number, hi: number): string {
  const t = Math.min(1, Math.max(0, (v - lo) / (hi - lo || 1)));
  const mix = (a: number, b: number, s: number) => Math.round(a + (b - a) * s);
  const stops: [number, number, number][] = [
    [33, 102, 172],
    [247, 247, 247],
    [178, 24, 43],
  ];
  const s = t * 2;
  const [c0, c1] = s < 1 ? [stops[0], stops[1]] : [stops[1], stops[2]];
  const f = s < 1 ? s : s - 1;
  return `rgb(${mix(c0[0], c1[0], f)},${mix(c0[1], c1[1], f)},${mix(c0[2], c1[2], f)})`;
}
