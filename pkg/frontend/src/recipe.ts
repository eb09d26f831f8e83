/**
 * Figure recipes: a small JSON document naming the input CSV(s), the figure
 * kind, how to group series, axis labels and the output path.
 */

import { readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";

export type FigureKind = "line" | "histogram" | "cdf";

export interface FigureRecipe {
  /** one CSV or several sharing the same header */
  input: string[];
  kind: FigureKind;
  /** column whose values become the series (default: method) */
  seriesColumn: string;
  /** line kind only: keep rows whose `metric` column equals this */
  metric?: string;
  xLabel: string;
  yLabel: string;
  title?: string;
  logY: boolean;
  output: string;
  width: number;
  height: number;
}

const KINDS: FigureKind[] = ["line", "histogram", "cdf"];

/** Metrics whose line figures default to a log y-axis (error curves span decades). */
const LOG_Y_METRICS = new Set(["mse", "p_out"]);

export function parseRecipe(doc: unknown, baseDir = "."): FigureRecipe {
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new Error("recipe must be a JSON object");
  }
  const d = doc as Record<string, unknown>;

  const rawInput = d.input;
  let input: string[];
  if (typeof rawInput === "string") {
    input = [rawInput];
  } else if (Array.isArray(rawInput) && rawInput.every((v) => typeof v === "string")) {
    input = rawInput as string[];
  } else {
    throw new Error("recipe.input must be a CSV path or a list of CSV paths");
  }
  if (input.length === 0) {
    throw new Error("recipe.input must name at least one CSV");
  }
  input = input.map((p) => resolve(baseDir, p));

  const kind = d.kind;
  if (typeof kind !== "string" || !KINDS.includes(kind as FigureKind)) {
    throw new Error(`recipe.kind must be one of ${KINDS.join(", ")}`);
  }

  const output = d.output;
  if (typeof output !== "string" || output.length === 0) {
    throw new Error("recipe.output must be the output image path");
  }

  const metric = typeof d.metric === "string" ? d.metric : undefined;
  const logY =
    typeof d.log_y === "boolean"
      ? d.log_y
      : kind === "line" && metric !== undefined && LOG_Y_METRICS.has(metric);

  const width = typeof d.width === "number" ? Math.round(d.width) : 800;
  const height = typeof d.height === "number" ? Math.round(d.height) : 500;
  if (width < 200 || height < 150 || width > 4000 || height > 4000) {
    throw new Error(`recipe width/height out of range: ${width}x${height}`);
  }

  return {
    input,
    kind: kind as FigureKind,
    seriesColumn: typeof d.series_column === "string" ? d.series_column : "method",
    metric,
    xLabel: typeof d.x_label === "string" ? d.x_label : "",
    yLabel: typeof d.y_label === "string" ? d.y_label : "",
    title: typeof d.title === "string" ? d.title : undefined,
    logY,
    output: resolve(baseDir, output),
    width,
    height,
  };
}

export function loadRecipe(path: string): FigureRecipe {
  let doc: unknown;
  try {
    doc = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new Error(`cannot read recipe ${path}: ${(err as Error).message}`);
  }
  return parseRecipe(doc, dirname(path));
}
