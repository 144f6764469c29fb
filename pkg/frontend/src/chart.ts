import type { Snapshot } from "./types.js";

export interface ChartPoint {
  x: number;
  y: number;
  block: number;
  logE: number;
}

export interface ChartGeometry {
  width: number;
  height: number;
  points: ChartPoint[];
  path: string;
  thresholdY: number;
  thresholdLogE: number;
  yMin: number;
  yMax: number;
}

/** Map the trajectory onto pixel space with a log-scale evidence axis
 * (linear in log E). The threshold line sits at log(1/alpha). */
export function chartGeometry(
  trajectory: Array<[number, number]>,
  alpha: number,
  width = 640,
  height = 240,
): ChartGeometry {
  const thresholdLogE = Math.log(1 / alpha);
  const logs = trajectory.map(([, logE]) => logE);
  const yMin = Math.min(0, thresholdLogE, ...logs) - 0.5;
  const yMax = Math.max(0, thresholdLogE, ...logs) + 0.5;
  const lastBlock = Math.max(1, ...trajectory.map(([block]) => block));
  const xOf = (block: number) => (block / lastBlock) * (width - 20) + 10;
  const yOf = (logE: number) =>
    height - ((logE - yMin) / (yMax - yMin)) * (height - 20) - 10;
  const points = trajectory.map(([block, logE]) => ({
    x: xOf(block),
    y: yOf(logE),
    block,
    logE,
  }));
  const start = { x: xOf(0), y: yOf(0) };
  const path = [start, ...points]
    .map((p, i) => `${i === 0 ? "M" : "L"}${p.x.toFixed(2)},${p.y.toFixed(2)}`)
    .join(" ");
  return {
    width,
    height,
    points,
    path,
    thresholdY: yOf(thresholdLogE),
    thresholdLogE,
    yMin,
    yMax,
  };
}

export function chartSvg(snapshot: Snapshot, width = 640, height = 240): string {
  const geometry = chartGeometry(snapshot.trajectory, snapshot.alpha, width, height);
  const marks = geometry.points
    .map((p) => `<circle cx="${p.x.toFixed(2)}" cy="${p.y.toFixed(2)}" r="2.5" />`)
    .join("");
  return [
    `<svg viewBox="0 0 ${width} ${height}" role="img" aria-label="evidence trajectory">`,
    `<line class="threshold" x1="0" x2="${width}" y1="${geometry.thresholdY.toFixed(2)}" y2="${geometry.thresholdY.toFixed(2)}" />`,
    `<path class="trajectory" d="${geometry.path}" fill="none" />`,
    marks,
    `</svg>`,
  ].join("");
}
