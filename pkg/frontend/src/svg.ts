/**
 * Dependency-free SVG chart primitives: line plots (optionally log-y),
 * dense heatmaps, and a grid layout for multi-panel figures. Everything
 * is plain string assembly; output is a standalone .svg document.
 */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color?: string;
}

export interface LinePlotOptions {
  title?: string;
  xLabel?: string;
  yLabel?: string;
  logY?: boolean;
  width?: number;
  height?: number;
}

export interface HeatmapOptions {
  title?: string;
  xLabel?: string;
  yLabel?: string;
  width?: number;
  height?: number;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN = { left: 58, right: 16, top: 28, bottom: 42 };

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function finiteExtent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo > hi) {
    lo = 0;
    hi = 1;
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

/** tick positions at 1/2/5 multiples covering [lo, hi] */
export function niceTicks(lo: number, hi: number, count = 5): number[] {
  const span = hi - lo;
  const rawStep = span / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = mag;
  for (const mult of [1, 2, 5, 10]) {
    if (mag * mult >= rawStep) {
      step = mag * mult;
      break;
    }
  }
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step) {
    ticks.push(Math.abs(t) < 1e-12 * span ? 0 : t);
  }
  return ticks;
}

function fmtTick(value: number, step?: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (step !== undefined && step > 0) {
    // enough digits to distinguish neighbouring ticks of a zoomed axis
    const decimals = Math.max(0, -Math.floor(Math.log10(step)) + 1);
    if (abs >= 1e5 || abs < 1e-4 || decimals > 8) {
      const sig = Math.max(1, Math.min(12, Math.ceil(Math.log10(abs / step)) + 1));
      return value.toExponential(sig - 1).replace("+", "");
    }
    return value.toFixed(Math.min(decimals, 10));
  }
  if (abs >= 1e4 || abs < 1e-2) return value.toExponential(0).replace("+", "");
  return String(Math.round(value * 1e6) / 1e6);
}

/** inner drawing of a line chart; exported for panel composition */
export function linePlotBody(
  series: Series[],
  opts: LinePlotOptions,
  width: number,
  height: number,
): string {
  const logY = opts.logY ?? false;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const xs = series.flatMap((s) => s.x);
  const [x0, x1] = finiteExtent(xs);
  const tY = (v: number) => (logY ? Math.log10(v) : v);
  const ys = series.flatMap((s) => s.y.filter((v) => Number.isFinite(v) && (!logY || v > 0)));
  const [y0, y1] = finiteExtent(ys.map(tY));

  const px = (v: number) => MARGIN.left + ((v - x0) / (x1 - x0)) * plotW;
  const py = (v: number) => MARGIN.top + plotH - ((tY(v) - y0) / (y1 - y0)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="white" stroke="#888"/>`,
  );
  const xTicks = niceTicks(x0, x1);
  const xStep = xTicks.length > 1 ? xTicks[1] - xTicks[0] : x1 - x0;
  for (const t of xTicks) {
    const x = px(t);
    parts.push(`<line x1="${x}" y1="${MARGIN.top + plotH}" x2="${x}" y2="${MARGIN.top + plotH + 4}" stroke="#444"/>`);
    parts.push(
      `<text x="${x}" y="${MARGIN.top + plotH + 16}" font-size="10" text-anchor="middle">${fmtTick(t, xStep)}</text>`,
    );
  }
  const yTicks = logY
    ? niceTicks(Math.floor(y0), Math.ceil(y1), Math.min(6, Math.ceil(y1) - Math.floor(y0) + 1))
    : niceTicks(y0, y1);
  const yStep = yTicks.length > 1 ? yTicks[1] - yTicks[0] : y1 - y0;
  for (const t of yTicks) {
    if (t < y0 - 1e-12 || t > y1 + 1e-12) continue;
    const y = MARGIN.top + plotH - ((t - y0) / (y1 - y0)) * plotH;
    parts.push(`<line x1="${MARGIN.left - 4}" y1="${y}" x2="${MARGIN.left}" y2="${y}" stroke="#444"/>`);
    const label = logY ? `1e${fmtTick(t)}` : fmtTick(t, yStep);
    parts.push(`<text x="${MARGIN.left - 7}" y="${y + 3}" font-size="10" text-anchor="end">${label}</text>`);
  }
  series.forEach((s, idx) => {
    const color = s.color ?? PALETTE[idx % PALETTE.length];
    const points: string[] = [];
    for (let i = 0; i < s.x.length; i++) {
      const yv = s.y[i];
      if (!Number.isFinite(yv) || (logY && yv <= 0)) continue;
      points.push(`${px(s.x[i]).toFixed(2)},${py(yv).toFixed(2)}`);
    }
    parts.push(
      `<polyline fill="none" stroke="${color}" stroke-width="1.3" points="${points.join(" ")}"/>`,
    );
    if (series.length > 1) {
      const ly = MARGIN.top + 14 + idx * 14;
      const lx = MARGIN.left + plotW - 130;
      parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 18}" y2="${ly - 4}" stroke="${color}" stroke-width="2"/>`);
      parts.push(`<text x="${lx + 22}" y="${ly}" font-size="10">${esc(s.label)}</text>`);
    }
  });
  if (opts.title) {
    parts.push(
      `<text x="${width / 2}" y="16" font-size="12" text-anchor="middle" font-weight="bold">${esc(opts.title)}</text>`,
    );
  }
  if (opts.xLabel) {
    parts.push(
      `<text x="${MARGIN.left + plotW / 2}" y="${height - 8}" font-size="11" text-anchor="middle">${esc(opts.xLabel)}</text>`,
    );
  }
  if (opts.yLabel) {
    const y = MARGIN.top + plotH / 2;
    parts.push(
      `<text x="14" y="${y}" font-size="11" text-anchor="middle" transform="rotate(-90 14 ${y})">${esc(opts.yLabel)}</text>`,
    );
  }
  return parts.join("\n");
}

export function svgDocument(body: string, width: number, height: number): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="sans-serif">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n${body}\n</svg>\n`
  );
}

export function linePlot(series: Series[], opts: LinePlotOptions = {}): string {
  const width = opts.width ?? 640;
  const height = opts.height ?? 420;
  return svgDocument(linePlotBody(series, opts, width, height), width, height);
}

/** panels laid out row-major on a fixed grid */
export function panelGrid(
  panels: { series: Series[]; opts: LinePlotOptions }[],
  columns: number,
  panelWidth = 320,
  panelHeight = 240,
): string {
  const rows = Math.ceil(panels.length / columns);
  const parts: string[] = [];
  panels.forEach((panel, i) => {
    const cx = (i % columns) * panelWidth;
    const cy = Math.floor(i / columns) * panelHeight;
    parts.push(
      `<g class="panel" transform="translate(${cx},${cy})">\n` +
        linePlotBody(panel.series, panel.opts, panelWidth, panelHeight) +
        `\n</g>`,
    );
  });
  return svgDocument(parts.join("\n"), columns * panelWidth, rows * panelHeight);
}

// compact diverging-free sequential colormap (dark blue -> yellow)
const STOPS: [number, number, number][] = [
  [68, 1, 84],
  [59, 82, 139],
  [33, 145, 140],
  [94, 201, 98],
  [253, 231, 37],
];

export function colormap(t: number): string {
  const clamped = Math.min(1, Math.max(0, t));
  const pos = clamped * (STOPS.length - 1);
  const i = Math.min(STOPS.length - 2, Math.floor(pos));
  const frac = pos - i;
  const rgb = STOPS[i].map((c, k) => Math.round(c + frac * (STOPS[i + 1][k] - c)));
  return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
}

/** z indexed [yi][xi]; cell edges derived from midpoints of the axes */
export function heatmap(
  xValues: number[],
  yValues: number[],
  z: number[][],
  opts: HeatmapOptions = {},
): string {
  const width = opts.width ?? 640;
  const height = opts.height ?? 480;
  const plotW = width - MARGIN.left - MARGIN.right - 44; // room for colorbar
  const plotH = height - MARGIN.top - MARGIN.bottom;
  const [x0, x1] = finiteExtent(xValues);
  const [y0, y1] = finiteExtent(yValues);
  let zLo = Infinity;
  let zHi = -Infinity;
  for (const row of z) {
    for (const v of row) {
      if (Number.isFinite(v)) {
        if (v < zLo) zLo = v;
        if (v > zHi) zHi = v;
      }
    }
  }
  if (zLo > zHi) {
    zLo = 0;
    zHi = 1;
  }
  if (zLo === zHi) zHi = zLo + 1;

  const px = (v: number) => MARGIN.left + ((v - x0) / (x1 - x0 || 1)) * plotW;
  const py = (v: number) => MARGIN.top + plotH - ((v - y0) / (y1 - y0 || 1)) * plotH;
  const edges = (vals: number[]): number[] => {
    const e = [vals[0] - (vals[1] - vals[0]) / 2];
    for (let i = 0; i < vals.length - 1; i++) e.push((vals[i] + vals[i + 1]) / 2);
    e.push(vals[vals.length - 1] + (vals[vals.length - 1] - vals[vals.length - 2]) / 2);
    return e;
  };
  const xe = xValues.length > 1 ? edges(xValues) : [x0 - 0.5, x1 + 0.5];
  const ye = yValues.length > 1 ? edges(yValues) : [y0 - 0.5, y1 + 0.5];

  const parts: string[] = [];
  for (let yi = 0; yi < yValues.length; yi++) {
    for (let xi = 0; xi < xValues.length; xi++) {
      const v = z[yi][xi];
      const t = (v - zLo) / (zHi - zLo);
      const xa = px(xe[xi]);
      const xb = px(xe[xi + 1]);
      const ya = py(ye[yi + 1]);
      const yb = py(ye[yi]);
      parts.push(
        `<rect class="cell" x="${xa.toFixed(2)}" y="${ya.toFixed(2)}" width="${(xb - xa).toFixed(2)}" ` +
          `height="${(yb - ya).toFixed(2)}" fill="${colormap(t)}"/>`,
      );
    }
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#444"/>`,
  );
  for (const t of niceTicks(x0, x1)) {
    parts.push(
      `<text x="${px(t)}" y="${MARGIN.top + plotH + 16}" font-size="10" text-anchor="middle">${fmtTick(t)}</text>`,
    );
  }
  for (const t of niceTicks(y0, y1)) {
    parts.push(`<text x="${MARGIN.left - 7}" y="${py(t) + 3}" font-size="10" text-anchor="end">${fmtTick(t)}</text>`);
  }
  // colorbar
  const cbX = MARGIN.left + plotW + 14;
  const nCb = 32;
  for (let i = 0; i < nCb; i++) {
    const ya = MARGIN.top + plotH - ((i + 1) / nCb) * plotH;
    parts.push(
      `<rect x="${cbX}" y="${ya.toFixed(2)}" width="12" height="${(plotH / nCb + 0.5).toFixed(2)}" fill="${colormap((i + 0.5) / nCb)}"/>`,
    );
  }
  parts.push(`<text x="${cbX + 16}" y="${MARGIN.top + 8}" font-size="9">${fmtTick(zHi)}</text>`);
  parts.push(`<text x="${cbX + 16}" y="${MARGIN.top + plotH}" font-size="9">${fmtTick(zLo)}</text>`);
  if (opts.title) {
    parts.push(
      `<text x="${width / 2}" y="16" font-size="12" text-anchor="middle" font-weight="bold">${esc(opts.title)}</text>`,
    );
  }
  if (opts.xLabel) {
    parts.push(
      `<text x="${MARGIN.left + plotW / 2}" y="${height - 8}" font-size="11" text-anchor="middle">${esc(opts.xLabel)}</text>`,
    );
  }
  if (opts.yLabel) {
    const yMid = MARGIN.top + plotH / 2;
    parts.push(
      `<text x="14" y="${yMid}" font-size="11" text-anchor="middle" transform="rotate(-90 14 ${yMid})">${esc(opts.yLabel)}</text>`,
    );
  }
  return svgDocument(parts.join("\n"), width, height);
}
