/**
 * Figure builders over the documented run outputs. Pure CSV readers:
 * nothing here recomputes physics or depends on the solver package.
 *
 * Inputs per run directory:
 *   norms.csv          step,time,l2_A,l2_eps,mass,momentum,kinetic_energy,potential_energy
 *   snapshot_<n>.csv   x,v,f rows (x outer, v inner)
 */

import * as fs from "fs";
import * as path from "path";

import { EmptyInput, parseCsv, requireColumn, Table } from "./csv";
import { heatmap, linePlot, panelGrid, Series } from "./svg";

export type FigureKind = "snapshots" | "phase_space" | "energy_history" | "norm_history";

export interface PlotSpec {
  inputDir: string;
  figure: FigureKind;
  outFile: string;
  logScale?: boolean;
  /** phase_space only: snapshot step to show (default: latest) */
  step?: number;
}

/** reference panel times of the published advection figure */
const PREFERRED_SNAPSHOT_STEPS = [0, 30, 45, 60, 75, 90];

function readTable(dir: string, name: string): Table {
  const file = path.join(dir, name);
  if (!fs.existsSync(file)) {
    throw new EmptyInput(file);
  }
  return parseCsv(fs.readFileSync(file, "utf8"), file);
}

export function listSnapshotSteps(dir: string): number[] {
  const steps: number[] = [];
  for (const name of fs.readdirSync(dir)) {
    const match = /^snapshot_(\d+)\.csv$/.exec(name);
    if (match) steps.push(Number(match[1]));
  }
  steps.sort((a, b) => a - b);
  return steps;
}

function chooseSnapshotSteps(available: number[]): number[] {
  if (PREFERRED_SNAPSHOT_STEPS.every((s) => available.includes(s))) {
    return PREFERRED_SNAPSHOT_STEPS;
  }
  if (available.length <= 6) return available;
  // spread six picks across what exists, keeping first and last
  const picks = new Set<number>();
  for (let i = 0; i < 6; i++) {
    picks.add(available[Math.round((i * (available.length - 1)) / 5)]);
  }
  return [...picks].sort((a, b) => a - b);
}

function stepTimes(dir: string): Map<number, number> {
  const byStep = new Map<number, number>();
  try {
    const norms = readTable(dir, "norms.csv");
    const steps = requireColumn(norms, "step");
    const times = requireColumn(norms, "time");
    steps.forEach((s, i) => byStep.set(s, times[i]));
  } catch {
    // snapshots can still be labeled by step index
  }
  return byStep;
}

/** f(v) profile at the first spatial cell of a snapshot table */
function velocityProfile(table: Table): { v: number[]; f: number[] } {
  const x = requireColumn(table, "x");
  const v = requireColumn(table, "v");
  const f = requireColumn(table, "f");
  const x0 = x[0];
  const vv: number[] = [];
  const ff: number[] = [];
  for (let i = 0; i < x.length && x[i] === x0; i++) {
    vv.push(v[i]);
    ff.push(f[i]);
  }
  return { v: vv, f: ff };
}

export function renderSnapshots(dir: string): string {
  const available = listSnapshotSteps(dir);
  if (available.length === 0) {
    throw new EmptyInput(`${dir}/snapshot_*.csv`);
  }
  const times = stepTimes(dir);
  const panels = chooseSnapshotSteps(available).map((step) => {
    const table = readTable(dir, `snapshot_${step}.csv`);
    const { v, f } = velocityProfile(table);
    const t = times.get(step);
    const title = t !== undefined ? `t = ${Number(t.toFixed(6))}` : `step ${step}`;
    const series: Series[] = [{ label: "f", x: v, y: f }];
    return { series, opts: { title, xLabel: "v", yLabel: "f(v)" } };
  });
  return panelGrid(panels, 2);
}

export function renderPhaseSpace(dir: string, step?: number): string {
  const available = listSnapshotSteps(dir);
  if (available.length === 0) {
    throw new EmptyInput(`${dir}/snapshot_*.csv`);
  }
  const chosen = step !== undefined ? step : available[available.length - 1];
  if (!available.includes(chosen)) {
    throw new EmptyInput(`${dir}/snapshot_${chosen}.csv`);
  }
  const table = readTable(dir, `snapshot_${chosen}.csv`);
  const xs = requireColumn(table, "x");
  const vs = requireColumn(table, "v");
  const fs_ = requireColumn(table, "f");
  const xUnique = [...new Set(xs)];
  const vUnique = [...new Set(vs)];
  const xIndex = new Map(xUnique.map((val, i) => [val, i]));
  const vIndex = new Map(vUnique.map((val, i) => [val, i]));
  const z: number[][] = vUnique.map(() => xUnique.map(() => NaN));
  for (let i = 0; i < fs_.length; i++) {
    z[vIndex.get(vs[i])!][xIndex.get(xs[i])!] = fs_[i];
  }
  const t = stepTimes(dir).get(chosen);
  const title = `phase space f(x, v)` + (t !== undefined ? ` at t = ${Number(t.toFixed(6))}` : ` at step ${chosen}`);
  return heatmap(xUnique, vUnique, z, { title, xLabel: "x", yLabel: "v" });
}

export function renderEnergyHistory(dir: string, logScale = false): string {
  const norms = readTable(dir, "norms.csv");
  const time = requireColumn(norms, "time");
  const pe = requireColumn(norms, "potential_energy");
  return linePlot([{ label: "potential energy", x: time, y: pe }], {
    title: "potential energy history",
    xLabel: "t",
    yLabel: logScale ? "log PE" : "PE",
    logY: logScale,
  });
}

export function renderNormHistory(dir: string, logScale = false): string {
  const norms = readTable(dir, "norms.csv");
  const time = requireColumn(norms, "time");
  const series: Series[] = [
    { label: "l2_A", x: time, y: requireColumn(norms, "l2_A") },
    { label: "l2_A + eps|U|^2", x: time, y: requireColumn(norms, "l2_eps") },
  ];
  return linePlot(series, {
    title: "quadratic norm history",
    xLabel: "t",
    yLabel: "norm",
    logY: logScale,
  });
}

export function render(spec: PlotSpec): void {
  let svg: string;
  switch (spec.figure) {
    case "snapshots":
      svg = renderSnapshots(spec.inputDir);
      break;
    case "phase_space":
      svg = renderPhaseSpace(spec.inputDir, spec.step);
      break;
    case "energy_history":
      svg = renderEnergyHistory(spec.inputDir, spec.logScale ?? false);
      break;
    case "norm_history":
      svg = renderNormHistory(spec.inputDir, spec.logScale ?? false);
      break;
    default:
      throw new Error(`unknown figure kind '${spec.figure as string}'`);
  }
  fs.mkdirSync(path.dirname(path.resolve(spec.outFile)), { recursive: true });
  fs.writeFileSync(spec.outFile, svg);
}
