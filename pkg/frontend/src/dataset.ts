/** Column buffers crossing into the engine, and the CSV bridge for training. */

import { CtrBoostError } from "./errors.js";

export type NumericColumn = Float64Array | number[];

/** Categorical data: raw strings, or pre-coded values with their dictionary. */
export type CategoricalColumn = string[] | { codes: Int32Array | number[]; dictionary: string[] };

export interface ColumnSpec {
  name: string;
  kind: "numerical" | "categorical";
  values: NumericColumn | CategoricalColumn;
}

export interface TrainingData {
  columns: ColumnSpec[];
  target: NumericColumn;
  targetName?: string;
}

export function columnLength(values: NumericColumn | CategoricalColumn): number {
  if (Array.isArray(values) || values instanceof Float64Array) return values.length;
  return values.codes.length;
}

/** Raw category string per row (decodes coded buffers through their dictionary). */
export function categoryStrings(values: CategoricalColumn, nRows: number): string[] {
  if (Array.isArray(values)) return values;
  const out: string[] = new Array(nRows);
  for (let i = 0; i < nRows; i++) {
    const code = values.codes[i];
    const entry = values.dictionary[code];
    if (entry === undefined) {
      throw new CtrBoostError("ERR_SCHEMA", `categorical code ${code} outside its dictionary (row ${i})`);
    }
    out[i] = entry;
  }
  return out;
}

function csvEscape(cell: string): string {
  return /[",\n]/.test(cell) ? '"' + cell.replace(/"/g, '""') + '"' : cell;
}

function numericCell(v: number): string {
  if (Number.isNaN(v)) return "";
  // round-trip-exact float formatting; the engine parses with full precision
  return String(v);
}

export function validateShape(data: TrainingData): number {
  const nRows = data.target.length;
  if (nRows === 0) {
    throw new CtrBoostError("ERR_SCHEMA", "training data has zero rows");
  }
  const seen = new Set<string>();
  for (const col of data.columns) {
    if (seen.has(col.name)) {
      throw new CtrBoostError("ERR_SCHEMA", `duplicate column name '${col.name}'`);
    }
    seen.add(col.name);
    const len = columnLength(col.values);
    if (len !== nRows) {
      throw new CtrBoostError("ERR_SCHEMA", `column '${col.name}' has ${len} rows, target has ${nRows}`);
    }
  }
  return nRows;
}

/** Render training data as the engine's CSV + schema-hint pair. */
export function toCsv(data: TrainingData): { csv: string; schemaHint: string } {
  const nRows = validateShape(data);
  const targetName = data.targetName ?? "label";
  if (data.columns.some((c) => c.name === targetName)) {
    throw new CtrBoostError("ERR_SCHEMA", `target name '${targetName}' collides with a feature column`);
  }
  const header = [...data.columns.map((c) => c.name), targetName];
  const materialized = data.columns.map((col) => {
    if (col.kind === "numerical") {
      return { kind: "numerical" as const, values: col.values as NumericColumn };
    }
    return { kind: "categorical" as const, strings: categoryStrings(col.values as CategoricalColumn, nRows) };
  });
  const lines = [header.map(csvEscape).join(",")];
  for (let i = 0; i < nRows; i++) {
    const cells: string[] = [];
    for (const col of materialized) {
      cells.push(col.kind === "numerical" ? numericCell(Number(col.values[i])) : csvEscape(col.strings[i]));
    }
    const y = Number(data.target[i]);
    if (y !== 0 && y !== 1) {
      throw new CtrBoostError("ERR_SCHEMA", `target value ${y} at row ${i} is not binary`);
    }
    cells.push(String(y));
    lines.push(cells.join(","));
  }
  const hint = [
    ...data.columns.map((c) => `${c.name} = ${c.kind}`),
    `${targetName} = target`,
  ].join("\n");
  return { csv: lines.join("\n") + "\n", schemaHint: hint + "\n" };
}
