import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { ColumnSpec, TrainingData, toCsv } from "../src/dataset.js";
import { cliCommand } from "../src/train.js";

export function cli(args: string[]): string {
  const [command, ...prefix] = cliCommand();
  return execFileSync(command, [...prefix, ...args], { encoding: "utf-8" });
}

export function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "ctrboost-frontend-test-"));
}

/** Tiny deterministic PRNG so fixtures match across runs without numpy. */
export function lcg(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state * 1664525 + 1013904223) >>> 0;
    return state / 2 ** 32;
  };
}

export interface Fixture {
  data: TrainingData;
  columns: ColumnSpec[];
}

/** CTR-shaped fixture: one high-ish-cardinality id, one context, one numeric. */
export function makeFixture(n: number, seed: number): Fixture {
  const rand = lcg(seed);
  const user: string[] = [];
  const context: string[] = [];
  const hour: number[] = [];
  const target: number[] = [];
  for (let i = 0; i < n; i++) {
    const u = Math.floor(rand() * 25);
    const c = rand() < 0.5 ? "mobile" : "web";
    const h = Math.floor(rand() * 24) + (rand() < 0.05 ? NaN : 0);
    const logit = (u % 5) * 0.4 - 0.8 + (c === "mobile" ? 0.5 : -0.5);
    user.push(`u${u}`);
    context.push(c);
    hour.push(h);
    target.push(rand() < 1 / (1 + Math.exp(-logit)) ? 1 : 0);
  }
  const columns: ColumnSpec[] = [
    { name: "user", kind: "categorical", values: user },
    { name: "context", kind: "categorical", values: context },
    { name: "hour", kind: "numerical", values: hour },
  ];
  return { data: { columns, target, targetName: "click" }, columns };
}

export interface CliModelArtifacts {
  modelPath: string;
  dataPath: string;
  predictions: Float64Array;
}

/** Train + predict through the CLI on a fixture; returns the golden artifacts. */
export function trainViaCli(
  fixture: Fixture,
  dir: string,
  opts: { encoder?: string; seed?: number; config?: Record<string, unknown> } = {},
): CliModelArtifacts {
  const { csv, schemaHint } = toCsv(fixture.data);
  const dataPath = join(dir, "data.csv");
  const hintPath = join(dir, "schema.txt");
  const modelPath = join(dir, "model.bin");
  const predsPath = join(dir, "preds.csv");
  const configPath = join(dir, "config.json");
  writeFileSync(dataPath, csv);
  writeFileSync(hintPath, schemaHint);
  writeFileSync(configPath, JSON.stringify(opts.config ?? { n_trees: 25, early_stopping_rounds: 5, max_depth: 4 }));
  cli([
    "train",
    "--data", dataPath,
    "--schema", hintPath,
    "--config", configPath,
    "--encoder", opts.encoder ?? "native_passthrough",
    "--seed", String(opts.seed ?? 0),
    "--out", modelPath,
  ]);
  cli(["predict", "--data", dataPath, "--schema", hintPath, "--model", modelPath, "--out", predsPath]);
  return { modelPath, dataPath, predictions: readPredictionsCsv(predsPath) };
}

export function readPredictionsCsv(path: string): Float64Array {
  const lines = readFileSync(path, "utf-8").trim().split("\n");
  const out = new Float64Array(lines.length - 1);
  for (let i = 1; i < lines.length; i++) {
    const [rowId, prob] = lines[i].split(",");
    out[Number(rowId)] = Number(prob);
  }
  return out;
}

export function maxAbsDiff(a: Float64Array, b: Float64Array): number {
  if (a.length !== b.length) throw new Error(`length mismatch ${a.length} vs ${b.length}`);
  let worst = 0;
  for (let i = 0; i < a.length; i++) worst = Math.max(worst, Math.abs(a[i] - b[i]));
  return worst;
}
