/** Native inference over a parsed model: identical routing and arithmetic
 * to the engine (see MODEL_FORMAT.md routing rules). */

import {
  CategoricalColumn,
  ColumnSpec,
  NumericColumn,
  categoryStrings,
  columnLength,
} from "./dataset.js";
import { CtrBoostError } from "./errors.js";
import { EncoderColumn, NODE_CATEGORICAL, NODE_LEAF, NODE_NUMERIC, ParsedModel } from "./model.js";

const RAW_CLIP = 40.0;

function sigmoid(raw: number): number {
  const clipped = Math.max(-RAW_CLIP, Math.min(RAW_CLIP, raw));
  return 1.0 / (1.0 + Math.exp(-clipped));
}

/** Apply-time encoded value per fit-dictionary code, plus the unseen fallback. */
function encoderValueTable(col: EncoderColumn, mode: string, smoothing: number, prior: number) {
  const n = col.dictionary.length;
  const values = new Float64Array(n);
  let fallback: number;
  if (mode === "label") {
    for (let c = 0; c < n; c++) values[c] = c;
    fallback = n;
  } else {
    for (let c = 0; c < n; c++) {
      if (smoothing === 0.0) {
        values[c] = col.counts[c] > 0 ? col.sums[c] / col.counts[c] : prior;
      } else {
        values[c] = (col.sums[c] + smoothing * prior) / (col.counts[c] + smoothing);
      }
    }
    fallback = prior;
  }
  return { values, fallback };
}

function asNumericArray(values: NumericColumn): ArrayLike<number> {
  return values;
}

interface BoundFeature {
  kind: "numeric" | "categorical";
  numeric?: ArrayLike<number>;
  codes?: Int32Array; // fit-dictionary codes; -1 = unseen
}

function bindColumns(model: ParsedModel, columns: ColumnSpec[], nRows: number): Map<number, BoundFeature> {
  const byName = new Map(columns.map((c) => [c.name, c]));
  const encoderCols = new Map((model.encoder?.columns ?? []).map((c) => [c.name, c]));
  const bound = new Map<number, BoundFeature>();

  model.schema.forEach((meta, index) => {
    if (meta.kind === "target") return;
    const input = byName.get(meta.name);
    if (input === undefined) {
      throw new CtrBoostError("ERR_SCHEMA", `dataset is missing feature column '${meta.name}'`);
    }
    if (columnLength(input.values) !== nRows) {
      throw new CtrBoostError(
        "ERR_SCHEMA",
        `column '${meta.name}' has ${columnLength(input.values)} rows, expected ${nRows}`,
      );
    }
    if (meta.kind === "numerical") {
      if (input.kind === "categorical") {
        const enc = model.encoder;
        const encCol = encoderCols.get(meta.name);
        if (!enc || !encCol) {
          throw new CtrBoostError(
            "ERR_SCHEMA",
            `column '${meta.name}' is categorical but the model expects numerical values and embeds no encoder for it`,
          );
        }
        const { values, fallback } = encoderValueTable(encCol, enc.mode, enc.smoothing, enc.prior);
        const lookup = new Map(encCol.dictionary.map((entry, code) => [entry, code]));
        const strings = categoryStrings(input.values as CategoricalColumn, nRows);
        const encoded = new Float64Array(nRows);
        for (let i = 0; i < nRows; i++) {
          const code = lookup.get(strings[i]);
          encoded[i] = code === undefined ? fallback : values[code];
        }
        bound.set(index, { kind: "numeric", numeric: encoded });
      } else {
        bound.set(index, { kind: "numeric", numeric: asNumericArray(input.values as NumericColumn) });
      }
      return;
    }
    // native categorical feature: translate apply strings into fit codes
    if (input.kind !== "categorical") {
      throw new CtrBoostError("ERR_SCHEMA", `column '${meta.name}' must be categorical for this model`);
    }
    const fitDict = model.dictionaries.get(meta.name);
    if (fitDict === undefined) {
      throw new CtrBoostError("ERR_FORMAT", `model has no dictionary for categorical column '${meta.name}'`);
    }
    const lookup = new Map(fitDict.map((entry, code) => [entry, code]));
    const strings = categoryStrings(input.values as CategoricalColumn, nRows);
    const codes = new Int32Array(nRows);
    for (let i = 0; i < nRows; i++) {
      const code = lookup.get(strings[i]);
      codes[i] = code === undefined ? -1 : code;
    }
    bound.set(index, { kind: "categorical", codes });
  });
  return bound;
}

export function predictParsed(model: ParsedModel, columns: ColumnSpec[]): Float64Array {
  const nRows = columns.length > 0 ? columnLength(columns[0].values) : 0;
  const out = new Float64Array(nRows);
  if (nRows === 0) return out;
  const bound = bindColumns(model, columns, nRows);

  for (let i = 0; i < nRows; i++) {
    let acc = 0.0;
    for (const tree of model.trees) {
      let node = 0;
      for (;;) {
        const n = tree.nodes[node];
        if (n.kind === NODE_LEAF) {
          acc += n.weight;
          break;
        }
        const feature = bound.get(n.feature);
        if (feature === undefined) {
          throw new CtrBoostError("ERR_FORMAT", `tree references unbound feature index ${n.feature}`);
        }
        let goLeft: boolean;
        if (n.kind === NODE_NUMERIC) {
          const v = Number(feature.numeric![i]);
          goLeft = Number.isNaN(v) ? n.defaultLeft : v <= n.threshold;
        } else if (n.kind === NODE_CATEGORICAL) {
          const code = feature.codes![i];
          goLeft = code < 0 ? n.defaultLeft : n.leftCats!.has(code);
        } else {
          throw new CtrBoostError("ERR_FORMAT", `unknown node kind ${n.kind}`);
        }
        node = goLeft ? n.left : n.right;
      }
    }
    out[i] = sigmoid(model.baseScore + model.learningRate * acc);
  }
  return out;
}
