/**
 * Binary model-file parser (format version 1; see docs/MODEL_FORMAT.md in
 * the engine repository for the byte layout).
 */

import { createHash } from "node:crypto";
import { CtrBoostError } from "./errors.js";

export const MAGIC = "CTRBOOST";
export const FORMAT_VERSION = 1;
const CHECKSUM_BYTES = 8;

export type ColumnKind = "categorical" | "numerical" | "target";

export interface ColumnMeta {
  name: string;
  kind: ColumnKind;
  cardinality: number;
}

export const NODE_LEAF = 0;
export const NODE_NUMERIC = 1;
export const NODE_CATEGORICAL = 2;

export interface TreeNode {
  kind: number;
  weight: number;
  feature: number; // schema column index
  bin: number;
  threshold: number;
  leftCats: Set<number> | null;
  defaultLeft: boolean;
  left: number;
  right: number;
}

export interface Tree {
  nodes: TreeNode[];
}

export interface FeatureBins {
  column: string;
  edges: Float64Array;
}

export type EncoderMode = "label" | "target" | "kfold_target" | "ordered_ts" | "native_passthrough";

const ENCODER_MODES: EncoderMode[] = ["label", "target", "kfold_target", "ordered_ts", "native_passthrough"];

export interface EncoderColumn {
  name: string;
  dictionary: string[];
  sums: Float64Array;
  counts: Float64Array;
}

export interface EncoderState {
  mode: EncoderMode;
  smoothing: number;
  kFolds: number;
  nPermutations: number;
  seed: number;
  prior: number;
  columns: EncoderColumn[];
}

export interface ParsedModel {
  baseScore: number;
  learningRate: number;
  trees: Tree[];
  schema: ColumnMeta[];
  dictionaries: Map<string, string[]>;
  bins: FeatureBins[];
  encoder: EncoderState | null;
  config: Record<string, unknown>;
  meta: Record<string, unknown>;
  bytes: Buffer; // canonical engine-produced file contents
}

class Reader {
  private pos = 0;

  constructor(private readonly buf: Buffer, private readonly section: string) {}

  private need(n: number): number {
    if (this.pos + n > this.buf.length) {
      throw new CtrBoostError("ERR_FORMAT", `model file truncated inside section '${this.section}'`);
    }
    const at = this.pos;
    this.pos += n;
    return at;
  }

  u8(): number {
    return this.buf.readUInt8(this.need(1));
  }

  u16(): number {
    return this.buf.readUInt16LE(this.need(2));
  }

  u32(): number {
    return this.buf.readUInt32LE(this.need(4));
  }

  u64(): number {
    const v = this.buf.readBigUInt64LE(this.need(8));
    if (v > BigInt(Number.MAX_SAFE_INTEGER)) {
      throw new CtrBoostError("ERR_FORMAT", `u64 value ${v} exceeds the safe integer range`);
    }
    return Number(v);
  }

  i64(): number {
    return Number(this.buf.readBigInt64LE(this.need(8)));
  }

  f64(): number {
    return this.buf.readDoubleLE(this.need(8));
  }

  text16(): string {
    const len = this.u16();
    const at = this.need(len);
    return this.buf.toString("utf-8", at, at + len);
  }

  text32(): string {
    const len = this.u32();
    const at = this.need(len);
    return this.buf.toString("utf-8", at, at + len);
  }

  f64Array(n: number): Float64Array {
    const out = new Float64Array(n);
    for (let i = 0; i < n; i++) out[i] = this.f64();
    return out;
  }

  u64Array(n: number): Float64Array {
    const out = new Float64Array(n);
    for (let i = 0; i < n; i++) out[i] = this.u64();
    return out;
  }

  i32Array(n: number): Int32Array {
    const out = new Int32Array(n);
    for (let i = 0; i < n; i++) out[i] = this.buf.readInt32LE(this.need(4));
    return out;
  }
}

const KINDS: ColumnKind[] = ["categorical", "numerical", "target"];

function parseSections(data: Buffer): Map<string, Buffer> {
  if (data.length < MAGIC.length + 8 + CHECKSUM_BYTES) {
    throw new CtrBoostError("ERR_FORMAT", "model file truncated: shorter than the fixed header");
  }
  if (data.toString("ascii", 0, MAGIC.length) !== MAGIC) {
    throw new CtrBoostError("ERR_FORMAT", `bad magic bytes; not a ${MAGIC} model file`);
  }
  const version = data.readUInt32LE(MAGIC.length);
  if (version !== FORMAT_VERSION) {
    throw new CtrBoostError(
      "ERR_VERSION",
      `unsupported model format version ${version} (expected ${FORMAT_VERSION})`,
    );
  }
  const body = data.subarray(0, data.length - CHECKSUM_BYTES);
  const trailer = data.subarray(data.length - CHECKSUM_BYTES);
  const digest = createHash("sha256").update(body).digest().subarray(0, CHECKSUM_BYTES);
  if (!digest.equals(trailer)) {
    throw new CtrBoostError("ERR_CHECKSUM", "checksum mismatch: model file is corrupt");
  }
  const nSections = data.readUInt32LE(MAGIC.length + 4);
  const tableStart = MAGIC.length + 8;
  const sections = new Map<string, Buffer>();
  for (let i = 0; i < nSections; i++) {
    const entry = tableStart + i * 24;
    if (entry + 24 > body.length) {
      throw new CtrBoostError("ERR_FORMAT", "model file truncated inside the section table");
    }
    const name = data.toString("ascii", entry, entry + 8).replace(/\0+$/, "");
    const offset = Number(data.readBigUInt64LE(entry + 8));
    const length = Number(data.readBigUInt64LE(entry + 16));
    if (offset + length > body.length) {
      throw new CtrBoostError("ERR_FORMAT", `section '${name}' extends past the end of the file`);
    }
    sections.set(name, data.subarray(offset, offset + length));
  }
  return sections;
}

function requireSection(sections: Map<string, Buffer>, name: string): Buffer {
  const blob = sections.get(name);
  if (blob === undefined) {
    throw new CtrBoostError("ERR_FORMAT", `model file is missing the '${name}' section`);
  }
  return blob;
}

export function parseModel(data: Buffer): ParsedModel {
  const sections = parseSections(data);

  let r = new Reader(requireSection(sections, "schema"), "schema");
  const schema: ColumnMeta[] = [];
  const nCols = r.u32();
  for (let i = 0; i < nCols; i++) {
    const name = r.text16();
    const kind = KINDS[r.u8()];
    const cardinality = r.u32();
    if (kind === undefined) {
      throw new CtrBoostError("ERR_FORMAT", `unknown column kind for '${name}'`);
    }
    schema.push({ name, kind, cardinality });
  }

  r = new Reader(requireSection(sections, "dicts"), "dicts");
  const dictionaries = new Map<string, string[]>();
  const nDicts = r.u32();
  for (let i = 0; i < nDicts; i++) {
    const name = r.text16();
    const n = r.u32();
    const entries: string[] = new Array(n);
    for (let j = 0; j < n; j++) entries[j] = r.text32();
    dictionaries.set(name, entries);
  }

  r = new Reader(requireSection(sections, "config"), "config");
  const config = JSON.parse(r.text32()) as Record<string, unknown>;

  r = new Reader(requireSection(sections, "bins"), "bins");
  const bins: FeatureBins[] = [];
  const nBins = r.u32();
  for (let i = 0; i < nBins; i++) {
    const column = r.text16();
    bins.push({ column, edges: r.f64Array(r.u32()) });
  }

  r = new Reader(requireSection(sections, "encoder"), "encoder");
  let encoder: EncoderState | null = null;
  if (r.u8() === 1) {
    const mode = ENCODER_MODES[r.u8()];
    if (mode === undefined) {
      throw new CtrBoostError("ERR_FORMAT", "unknown encoder mode");
    }
    const smoothing = r.f64();
    const kFolds = r.u32();
    const nPermutations = r.u32();
    const seed = r.i64();
    const prior = r.f64();
    const columns: EncoderColumn[] = [];
    const n = r.u32();
    for (let i = 0; i < n; i++) {
      const name = r.text16();
      const nCodes = r.u32();
      const dictionary: string[] = new Array(nCodes);
      for (let j = 0; j < nCodes; j++) dictionary[j] = r.text32();
      const sums = r.f64Array(nCodes);
      const counts = r.u64Array(nCodes);
      columns.push({ name, dictionary, sums, counts });
    }
    encoder = { mode, smoothing, kFolds, nPermutations, seed, prior, columns };
  }

  r = new Reader(requireSection(sections, "trees"), "trees");
  const baseScore = r.f64();
  const learningRate = r.f64();
  const trees: Tree[] = [];
  const nTrees = r.u32();
  for (let t = 0; t < nTrees; t++) {
    const nNodes = r.u32();
    const nodes: TreeNode[] = new Array(nNodes);
    for (let i = 0; i < nNodes; i++) {
      const kind = r.u8();
      if (kind === NODE_LEAF) {
        nodes[i] = {
          kind,
          weight: r.f64(),
          feature: -1,
          bin: -1,
          threshold: NaN,
          leftCats: null,
          defaultLeft: true,
          left: -1,
          right: -1,
        };
        continue;
      }
      if (kind !== NODE_NUMERIC && kind !== NODE_CATEGORICAL) {
        throw new CtrBoostError("ERR_FORMAT", `unknown node kind ${kind}`);
      }
      const feature = r.u32();
      let bin = -1;
      let threshold = NaN;
      let leftCats: Set<number> | null = null;
      if (kind === NODE_NUMERIC) {
        bin = r.u32();
        threshold = r.f64();
      } else {
        leftCats = new Set(r.i32Array(r.u32()));
      }
      const defaultLeft = r.u8() === 1;
      const left = r.u32();
      const right = r.u32();
      nodes[i] = { kind, weight: 0, feature, bin, threshold, leftCats, defaultLeft, left, right };
    }
    trees.push({ nodes });
  }

  r = new Reader(requireSection(sections, "meta"), "meta");
  const meta = JSON.parse(r.text32()) as Record<string, unknown>;

  return { baseScore, learningRate, trees, schema, dictionaries, bins, encoder, config, meta, bytes: Buffer.from(data) };
}
