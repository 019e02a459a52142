import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { main } from "../src/cli";

let dir: string;

beforeEach(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "plots-cli-"));
  vi.spyOn(console, "error").mockImplementation(() => {});
});

afterEach(() => {
  fs.rmSync(dir, { recursive: true, force: true });
  vi.restoreAllMocks();
});

function writeNorms(withPe: boolean): void {
  const header = withPe
    ? "step,time,l2_A,l2_eps,mass,momentum,kinetic_energy,potential_energy"
    : "step,time,l2_A,l2_eps,mass,momentum,kinetic_energy";
  const rows = [0, 1, 2].map((s) => {
    const base = `${s},${s * 0.1},0.5,0.5,1.3,0,0.6`;
    return withPe ? `${base},${1e-3 * (s + 1)}` : base;
  });
  fs.writeFileSync(path.join(dir, "norms.csv"), [header, ...rows].join("\n") + "\n");
}

describe("plots CLI", () => {
  it("renders the energy history and exits 0", () => {
    writeNorms(true);
    const out = path.join(dir, "pe.svg");
    expect(main(["energy", "--in", dir, "--out", out, "--log"])).toBe(0);
    expect(fs.existsSync(out)).toBe(true);
  });

  it("exits 2 on usage errors", () => {
    expect(main([])).toBe(2);
    expect(main(["scatter", "--in", dir, "--out", "x.svg"])).toBe(2);
    expect(main(["energy", "--in", dir])).toBe(2);
    expect(main(["energy", "--in", dir, "--out", "x.svg", "--bogus"])).toBe(2);
    expect(main(["phase", "--in", dir, "--out", "x.svg", "--step", "1.5"])).toBe(2);
  });

  it("exits 1 with the documented error on missing columns", () => {
    writeNorms(false);
    expect(main(["energy", "--in", dir, "--out", path.join(dir, "pe.svg")])).toBe(1);
    const message = (console.error as unknown as ReturnType<typeof vi.fn>).mock.calls.at(-1)![0];
    expect(String(message)).toContain("MissingColumn");
  });

  it("exits 1 when the input directory has no data", () => {
    expect(main(["snapshots", "--in", dir, "--out", path.join(dir, "s.svg")])).toBe(1);
  });
});
