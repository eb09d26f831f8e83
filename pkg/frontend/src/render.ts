/**
 * Recipe execution: read the CSV contract for the figure kind, group rows
 * into one series per method, draw, and write the PNG.  Inputs are never
 * modified, so re-running a recipe is idempotent.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import { ChartSpec, Series, drawChart } from "./chart.js";
import { Table, concatTables, readCsv, requireColumns, toNumber } from "./csv.js";
import { encodePng } from "./png.js";
import { FigureRecipe } from "./recipe.js";

function groupBySeries(table: Table, column: string): Map<string, Record<string, string>[]> {
  const groups = new Map<string, Record<string, string>[]>();
  for (const row of table.rows) {
    const key = row[column];
    if (!groups.has(key)) groups.set(key, []);
    groups.get(key)!.push(row);
  }
  return groups;
}

function lineSeries(table: Table, recipe: FigureRecipe): Series[] {
  requireColumns(table, [recipe.seriesColumn, "axis_value", "metric", "value"], "line input");
  let rows = table.rows;
  if (recipe.metric !== undefined) {
    rows = rows.filter((r) => r.metric === recipe.metric);
    if (rows.length === 0) {
      throw new Error(`empty data: no rows with metric '${recipe.metric}'`);
    }
  }
  const series: Series[] = [];
  for (const [label, group] of groupBySeries({ columns: table.columns, rows }, recipe.seriesColumn)) {
    const points = group
      .map((r) => ({ x: toNumber(r.axis_value, "axis_value"), y: toNumber(r.value, "value") }))
      .sort((a, b) => a.x - b.x);
    series.push({ label, points });
  }
  return series;
}

function histogramSeries(table: Table, recipe: FigureRecipe): Series[] {
  requireColumns(table, [recipe.seriesColumn, "bin_left", "bin_right", "mass"],
    "histogram input");
  const series: Series[] = [];
  for (const [label, group] of groupBySeries(table, recipe.seriesColumn)) {
    const bins = group
      .map((r) => ({
        left: toNumber(r.bin_left, "bin_left"),
        right: toNumber(r.bin_right, "bin_right"),
        mass: toNumber(r.mass, "mass"),
      }))
      .sort((a, b) => a.left - b.left);
    // step outline: start on the floor, step across each bin, end on the floor
    const points = [{ x: bins[0].left, y: 0 }];
    for (const b of bins) {
      points.push({ x: b.left, y: b.mass });
      points.push({ x: b.right, y: b.mass });
    }
    points.push({ x: bins[bins.length - 1].right, y: 0 });
    series.push({ label, points });
  }
  return series;
}

function cdfSeries(table: Table, recipe: FigureRecipe): Series[] {
  requireColumns(table, [recipe.seriesColumn, "value", "fraction"], "cdf input");
  const series: Series[] = [];
  for (const [label, group] of groupBySeries(table, recipe.seriesColumn)) {
    const points = group
      .map((r) => ({ x: toNumber(r.value, "value"), y: toNumber(r.fraction, "fraction") }))
      .sort((a, b) => a.x - b.x);
    for (let i = 1; i < points.length; i++) {
      if (points[i].y < points[i - 1].y - 1e-12) {
        throw new Error(`cdf fractions for '${label}' are not nondecreasing`);
      }
    }
    series.push({ label, points });
  }
  return series;
}

export function buildChartSpec(recipe: FigureRecipe, table: Table): ChartSpec {
  let series: Series[];
  if (recipe.kind === "line") {
    series = lineSeries(table, recipe);
  } else if (recipe.kind === "histogram") {
    series = histogramSeries(table, recipe);
  } else {
    series = cdfSeries(table, recipe);
  }
  series.sort((a, b) => (a.label < b.label ? -1 : a.label > b.label ? 1 : 0));
  return {
    kind: recipe.kind,
    series,
    xLabel: recipe.xLabel,
    yLabel: recipe.yLabel,
    title: recipe.title,
    logY: recipe.logY,
    width: recipe.width,
    height: recipe.height,
  };
}

/** Run one recipe end to end; returns the labels drawn (one per method). */
export function render(recipe: FigureRecipe): string[] {
  const table = concatTables(recipe.input.map((p) => readCsv(p)));
  requireColumns(table, [recipe.seriesColumn], "input");
  const spec = buildChartSpec(recipe, table);
  const raster = drawChart(spec);
  mkdirSync(dirname(recipe.output), { recursive: true });
  writeFileSync(recipe.output, encodePng(raster.width, raster.height, raster.data));
  return spec.series.map((s) => s.label);
}
