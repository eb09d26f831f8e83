/**
 * Chart drawing on the software raster: shared axes/legend machinery plus
 * the three figure kinds (line sweeps, step histograms, step CDFs).
 */

import { BLACK, PALETTE, Raster } from "./raster.js";
import { textWidth } from "./font.js";

export interface Series {
  label: string;
  /** line: (x, y) points; histogram: bin steps; cdf: (value, fraction) */
  points: { x: number; y: number }[];
}

export interface ChartSpec {
  kind: "line" | "histogram" | "cdf";
  series: Series[];
  xLabel: string;
  yLabel: string;
  title?: string;
  logY: boolean;
  width: number;
  height: number;
}

interface Frame {
  left: number;
  top: number;
  right: number;
  bottom: number;
}

function niceTicks(lo: number, hi: number, target = 6): number[] {
  if (!(hi > lo)) {
    const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.5 : 0.5;
    return niceTicks(lo - pad, hi + pad, target);
  }
  const rawStep = (hi - lo) / target;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= rawStep) {
      step = m * mag;
      break;
    }
  }
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * step; t += step) {
    ticks.push(Math.abs(t) < 1e-12 * step ? 0 : t);
  }
  return ticks;
}

function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(lo - 1e-9); e <= Math.floor(hi + 1e-9); e++) {
    ticks.push(e);
  }
  if (ticks.length === 0) {
    ticks.push(Math.round((lo + hi) / 2));
  }
  return ticks;
}

function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 10000 || a < 0.001) {
    return v.toExponential(0).replace("e", "E");
  }
  const s = v.toPrecision(3);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

function formatLogTick(exponent: number): string {
  return `1E${exponent}`;
}

export function drawChart(spec: ChartSpec): Raster {
  if (spec.series.length === 0) {
    throw new Error("empty data: no series to draw");
  }
  for (const s of spec.series) {
    if (s.points.length === 0) {
      throw new Error(`empty data: series '${s.label}' has no points`);
    }
  }
  const raster = new Raster(spec.width, spec.height);
  const frame: Frame = {
    left: 78,
    top: spec.title ? 40 : 24,
    right: spec.width - 24,
    bottom: spec.height - 52,
  };

  // collect data extents; on a log axis only positive values survive
  let xs: number[] = [];
  let ys: number[] = [];
  for (const s of spec.series) {
    for (const p of s.points) {
      xs.push(p.x);
      if (!spec.logY || p.y > 0) ys.push(spec.logY ? Math.log10(p.y) : p.y);
    }
  }
  if (ys.length === 0) {
    throw new Error("no positive values to draw on a log y-axis");
  }
  let xLo = Math.min(...xs);
  let xHi = Math.max(...xs);
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  if (xHi === xLo) {
    xLo -= 0.5;
    xHi += 0.5;
  }
  if (yHi === yLo) {
    yLo -= 0.5;
    yHi += 0.5;
  }
  const yPad = 0.05 * (yHi - yLo);
  yLo -= yPad;
  yHi += yPad;

  const px = (x: number) =>
    Math.round(frame.left + ((x - xLo) / (xHi - xLo)) * (frame.right - frame.left));
  const py = (yv: number) =>
    Math.round(frame.bottom - ((yv - yLo) / (yHi - yLo)) * (frame.bottom - frame.top));
  const toY = (v: number) => (spec.logY ? Math.log10(v) : v);

  // gridlines and ticks
  const xTicks = niceTicks(xLo, xHi);
  const yTicks = spec.logY ? decadeTicks(yLo, yHi) : niceTicks(yLo, yHi);
  for (const t of xTicks) {
    const x = px(t);
    raster.line(x, frame.top, x, frame.bottom, [235, 235, 235]);
    raster.line(x, frame.bottom, x, frame.bottom + 4, BLACK);
    raster.textCentered(x, frame.bottom + 8, formatTick(t), BLACK);
  }
  for (const t of yTicks) {
    const y = py(t);
    raster.line(frame.left, y, frame.right, y, [235, 235, 235]);
    raster.line(frame.left - 4, y, frame.left, y, BLACK);
    const label = spec.logY ? formatLogTick(t) : formatTick(t);
    raster.text(frame.left - 8 - textWidth(label), y - 3, label, BLACK);
  }

  // frame
  raster.line(frame.left, frame.top, frame.right, frame.top, BLACK);
  raster.line(frame.left, frame.bottom, frame.right, frame.bottom, BLACK);
  raster.line(frame.left, frame.top, frame.left, frame.bottom, BLACK);
  raster.line(frame.right, frame.top, frame.right, frame.bottom, BLACK);

  // series
  spec.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = s.points
      .filter((p) => !spec.logY || p.y > 0)
      .map((p) => ({ x: px(p.x), y: py(toY(p.y)) }));
    if (pts.length === 0) return;
    if (spec.kind === "line") {
      for (let j = 1; j < pts.length; j++) {
        raster.line(pts[j - 1].x, pts[j - 1].y, pts[j].x, pts[j].y, color, 2);
      }
      for (const p of pts) raster.marker(p.x, p.y, color);
    } else {
      // histogram and cdf are step curves: horizontal run, vertical riser
      for (let j = 1; j < pts.length; j++) {
        raster.line(pts[j - 1].x, pts[j - 1].y, pts[j].x, pts[j - 1].y, color, 2);
        raster.line(pts[j].x, pts[j - 1].y, pts[j].x, pts[j].y, color, 2);
      }
    }
  });

  // labels and legend
  if (spec.title) {
    raster.textCentered((frame.left + frame.right) / 2, 12, spec.title, BLACK, 2);
  }
  raster.textCentered((frame.left + frame.right) / 2, spec.height - 22, spec.xLabel, BLACK);
  raster.text(6, Math.max(frame.top - 16, 2), spec.yLabel, BLACK);
  const legendX = frame.left + 10;
  let legendY = frame.top + 8;
  spec.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    raster.fillRect(legendX, legendY, 14, 8, color);
    raster.text(legendX + 20, legendY, s.label, BLACK);
    legendY += 14;
  });
  return raster;
}
