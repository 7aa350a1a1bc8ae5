/** Training through the engine CLI: buffers out, model file back in. */

import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { TrainingData, toCsv } from "./dataset.js";
import { CtrBoostError } from "./errors.js";
import { ModelHandle } from "./handle.js";
import { parseModel } from "./model.js";

const GBDT_KEYS = new Set([
  "n_trees",
  "learning_rate",
  "max_depth",
  "lam",
  "gamma",
  "min_child_weight",
  "max_bins",
  "early_stopping_rounds",
  "seed",
]);
const ENCODER_KEYS = new Set(["mode", "smoothing", "k_folds", "n_permutations"]);
const ENCODER_MODES = new Set(["label", "target", "kfold_target", "ordered_ts", "native_passthrough"]);

export interface TrainOptions {
  /** argv prefix for the engine CLI; defaults to $CTRBOOST_CLI or ["ctrboost"]. */
  cli?: string[];
  keepArtifacts?: boolean;
}

export function cliCommand(opts?: TrainOptions): string[] {
  if (opts?.cli && opts.cli.length > 0) return opts.cli;
  const env = process.env.CTRBOOST_CLI;
  if (env && env.trim() !== "") return env.trim().split(/\s+/);
  return ["ctrboost"];
}

export function runCli(args: string[], opts?: TrainOptions): string {
  const [command, ...prefix] = cliCommand(opts);
  try {
    return execFileSync(command, [...prefix, ...args], { encoding: "utf-8" });
  } catch (err) {
    const stderr = (err as { stderr?: string }).stderr ?? String(err);
    throw new CtrBoostError("ERR_CLI", `engine CLI failed: ${stderr.trim()}`);
  }
}

function splitConfig(config: Record<string, unknown>): {
  gbdt: Record<string, unknown>;
  encoderMode: string;
} {
  const gbdt: Record<string, unknown> = {};
  let encoderMode = "native_passthrough";
  for (const [key, value] of Object.entries(config)) {
    if (GBDT_KEYS.has(key)) {
      gbdt[key] = value;
    } else if (key === "mode") {
      if (typeof value !== "string" || !ENCODER_MODES.has(value)) {
        throw new CtrBoostError("ERR_CONFIG", `invalid encoder mode ${JSON.stringify(value)}`);
      }
      encoderMode = value;
    } else if (ENCODER_KEYS.has(key)) {
      throw new CtrBoostError(
        "ERR_CONFIG",
        `encoder option '${key}' is not configurable over this surface; only 'mode' is`,
      );
    } else {
      throw new CtrBoostError("ERR_CONFIG", `unknown config key '${key}'`);
    }
  }
  return { gbdt, encoderMode };
}

/**
 * Train a model on column buffers via the engine CLI and load the result.
 *
 * The config map takes engine training keys (n_trees, learning_rate, ...)
 * plus `mode` for the categorical encoder; an empty map means engine
 * defaults. Unknown keys are rejected.
 */
export function train(
  data: TrainingData,
  config: Record<string, unknown> = {},
  seed = 0,
  opts?: TrainOptions,
): ModelHandle {
  const { gbdt, encoderMode } = splitConfig(config);
  const workDir = mkdtempSync(join(tmpdir(), "ctrboost-client-"));
  try {
    const { csv, schemaHint } = toCsv(data);
    const dataPath = join(workDir, "train.csv");
    const hintPath = join(workDir, "schema.txt");
    const configPath = join(workDir, "gbdt.json");
    const modelPath = join(workDir, "model.bin");
    writeFileSync(dataPath, csv);
    writeFileSync(hintPath, schemaHint);
    writeFileSync(configPath, JSON.stringify(gbdt));
    runCli(
      [
        "train",
        "--data", dataPath,
        "--schema", hintPath,
        "--config", configPath,
        "--encoder", encoderMode,
        "--seed", String(seed),
        "--out", modelPath,
      ],
      opts,
    );
    return new ModelHandle(parseModel(readFileSync(modelPath)));
  } finally {
    if (!opts?.keepArtifacts) {
      rmSync(workDir, { recursive: true, force: true });
    }
  }
}
