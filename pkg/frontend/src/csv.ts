import { readFileSync } from "node:fs";

export interface Table {
  columns: string[];
  data: Map<string, number[]>;
  rows: number;
}

/** Parse a simple numeric CSV with a header row. */
export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const data = new Map<string, number[]>(columns.map((c) => [c, []]));
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new Error(`row ${i + 1}: expected ${columns.length} fields, got ${parts.length}`);
    }
    for (let j = 0; j < columns.length; j++) {
      const v = Number(parts[j]);
      if (!Number.isFinite(v)) {
        throw new Error(`row ${i + 1}, column '${columns[j]}': not a number: ${parts[j]}`);
      }
      data.get(columns[j])!.push(v);
    }
  }
  return { columns, data, rows: lines.length - 1 };
}

export function readCsv(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new Error(`cannot read CSV '${path}': ${(err as Error).message}`);
  }
  try {
    return parseCsv(text);
  } catch (err) {
    throw new Error(`${path}: ${(err as Error).message}`);
  }
}

/** Parse a headerless numeric matrix CSV. */
export function readMatrixCsv(path: string): number[][] {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new Error(`cannot read CSV '${path}': ${(err as Error).message}`);
  }
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new Error(`${path}: empty CSV`);
  }
  return lines.map((l, i) => {
    const row = l.split(",").map(Number);
    if (row.some((v) => !Number.isFinite(v))) {
      throw new Error(`${path}: row ${i + 1} contains non-numeric data`);
    }
    return row;
  });
}
