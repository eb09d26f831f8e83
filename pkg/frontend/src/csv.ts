/**
 * Reader for the harness result CSVs.  The files are plain comma-separated
 * text without quoting; the first line is the header.  A header-only file is
 * a hard error everywhere ("empty data"), because a figure with no series is
 * always a pipeline mistake upstream.
 */

import { readFileSync } from "node:fs";

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

export function parseCsv(text: string, source = "<string>"): Table {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  if (lines.length === 0) {
    throw new Error(`${source}: empty file`);
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  if (columns.some((c) => c.length === 0)) {
    throw new Error(`${source}: malformed header '${lines[0]}'`);
  }
  const rows: Record<string, string>[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new Error(
        `${source}:${i + 1}: expected ${columns.length} cells, found ${cells.length}`,
      );
    }
    const row: Record<string, string> = {};
    columns.forEach((c, j) => (row[c] = cells[j].trim()));
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new Error(`${source}: empty data (header-only CSV)`);
  }
  return { columns, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf-8"), path);
}

/** Concatenate tables that share a header (multi-input recipes). */
export function concatTables(tables: Table[]): Table {
  const [first, ...rest] = tables;
  for (const t of rest) {
    if (t.columns.join(",") !== first.columns.join(",")) {
      throw new Error(
        `input CSVs disagree on columns: ${first.columns} vs ${t.columns}`,
      );
    }
  }
  return { columns: first.columns, rows: tables.flatMap((t) => t.rows) };
}

export function requireColumns(table: Table, needed: string[], source: string): void {
  const missing = needed.filter((c) => !table.columns.includes(c));
  if (missing.length > 0) {
    throw new Error(`${source}: missing columns ${missing.join(", ")}`);
  }
}

export function toNumber(value: string, column: string): number {
  const x = Number(value);
  if (!Number.isFinite(x)) {
    throw new Error(`non-numeric value '${value}' in column ${column}`);
  }
  return x;
}
