#!/usr/bin/env node
/**
 * plots snapshots|phase|energy|norms --in DIR --out FILE [--log] [--step N]
 *
 * Exit codes: 0 success, 1 input-data error (EmptyInput / MissingColumn),
 * 2 usage error.
 */

import { EmptyInput, MissingColumn } from "./csv";
import { FigureKind, render } from "./figures";

const FIGURES: Record<string, FigureKind> = {
  snapshots: "snapshots",
  phase: "phase_space",
  energy: "energy_history",
  norms: "norm_history",
};

const USAGE = "usage: plots snapshots|phase|energy|norms --in DIR --out FILE [--log] [--step N]";

export function main(argv: string[]): number {
  if (argv.length === 0 || !(argv[0] in FIGURES)) {
    console.error(USAGE);
    return 2;
  }
  const figure = FIGURES[argv[0]];
  let inputDir: string | undefined;
  let outFile: string | undefined;
  let logScale = false;
  let step: number | undefined;
  for (let i = 1; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--in") {
      inputDir = argv[++i];
    } else if (arg === "--out") {
      outFile = argv[++i];
    } else if (arg === "--log") {
      logScale = true;
    } else if (arg === "--step") {
      step = Number(argv[++i]);
      if (!Number.isInteger(step)) {
        console.error(`--step expects an integer, got '${argv[i]}'`);
        return 2;
      }
    } else {
      console.error(`unknown argument '${arg}'\n${USAGE}`);
      return 2;
    }
  }
  if (!inputDir || !outFile) {
    console.error(USAGE);
    return 2;
  }
  try {
    render({ inputDir, figure, outFile, logScale, step });
  } catch (err) {
    if (err instanceof MissingColumn || err instanceof EmptyInput) {
      console.error(`${err.name}: ${err.message}`);
      return 1;
    }
    throw err;
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
