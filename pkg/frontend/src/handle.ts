/** Lifetime-managed reference to a loaded model. */

import { writeFileSync } from "node:fs";
import { ColumnSpec } from "./dataset.js";
import { CtrBoostError } from "./errors.js";
import { ParsedModel } from "./model.js";
import { predictParsed } from "./predict.js";

export class ModelHandle {
  private model: ParsedModel | null;

  constructor(model: ParsedModel) {
    this.model = model;
  }

  private live(): ParsedModel {
    if (this.model === null) {
      throw new CtrBoostError("ERR_RELEASED", "model handle has been released");
    }
    return this.model;
  }

  get released(): boolean {
    return this.model === null;
  }

  /** Number of trees in the ensemble. */
  get nTrees(): number {
    return this.live().trees.length;
  }

  get metadata(): Record<string, unknown> {
    return this.live().meta;
  }

  get config(): Record<string, unknown> {
    return this.live().config;
  }

  predict(columns: ColumnSpec[]): Float64Array {
    return predictParsed(this.live(), columns);
  }

  /** Write the model file; bytes are the engine's canonical serialization. */
  save(path: string): void {
    writeFileSync(path, this.live().bytes);
  }

  /** Invalidate the handle. Releasing twice is an error, not a crash. */
  release(): void {
    if (this.model === null) {
      throw new CtrBoostError("ERR_RELEASED", "model handle released twice");
    }
    this.model = null;
  }
}
