/** Node client for ctrboost models: native file inference, CLI-backed training. */

import { readFileSync } from "node:fs";
import { ModelHandle } from "./handle.js";
import { parseModel } from "./model.js";

export { CtrBoostError, type ErrorCode } from "./errors.js";
export {
  type CategoricalColumn,
  type ColumnSpec,
  type NumericColumn,
  type TrainingData,
  toCsv,
} from "./dataset.js";
export {
  FORMAT_VERSION,
  MAGIC,
  parseModel,
  type ColumnMeta,
  type EncoderState,
  type ParsedModel,
  type Tree,
} from "./model.js";
export { predictParsed } from "./predict.js";
export { ModelHandle } from "./handle.js";
export { cliCommand, runCli, train, type TrainOptions } from "./train.js";

/** Load an engine-produced model file into a handle. */
export function load(path: string): ModelHandle {
  return new ModelHandle(parseModel(readFileSync(path)));
}
