// Level-set polylines for the constraint ellipses c = gamma*(delta^2 - 0.5 e'Pe).
// The client receives raw (gamma, delta, P, center, a, b) and derives its own
// outlines, matching the geometry the server simulates.

import type { BarrierGeometry } from "./protocol.js";

export interface Eig2 {
  values: [number, number]; // ascending
  vectors: [[number, number], [number, number]]; // columns, unit length
}

/** Eigendecomposition of a symmetric 2x2 matrix, closed form. */
export function symEig2(P: [[number, number], [number, number]]): Eig2 {
  const a = P[0][0];
  const b = P[0][1];
  const c = P[1][1];
  const tr = a + c;
  const disc = Math.sqrt(Math.max(0, (a - c) * (a - c) + 4 * b * b));
  const l1 = (tr - disc) / 2;
  const l2 = (tr + disc) / 2;
  let v1: [number, number];
  if (Math.abs(b) > 1e-300) {
    v1 = [l1 - c, b];
  } else if (a <= c) {
    v1 = [1, 0];
  } else {
    v1 = [0, 1];
  }
  const n1 = Math.hypot(v1[0], v1[1]);
  v1 = [v1[0] / n1, v1[1] / n1];
  const v2: [number, number] = [-v1[1], v1[0]];
  return { values: [l1, l2], vectors: [v1, v2] };
}

/**
 * Polyline of the level set {c(z) = level}; empty when the level set is
 * (the quadratic level 0.5 e'Pe would have to be negative).
 */
export function levelSetPolyline(
  bar: BarrierGeometry,
  level: number,
  n = 128,
): Array<[number, number]> {
  const q = bar.delta * bar.delta - bar.gamma * level;
  if (q <= 0) return [];
  const { values, vectors } = symEig2(bar.P);
  const r1 = Math.sqrt((2 * q) / values[0]);
  const r2 = Math.sqrt((2 * q) / values[1]);
  const pts: Array<[number, number]> = [];
  for (let k = 0; k <= n; k++) {
    const s = (2 * Math.PI * k) / n;
    const e1 = r1 * Math.cos(s);
    const e2 = r2 * Math.sin(s);
    pts.push([
      bar.center[0] + vectors[0][0] * e1 + vectors[1][0] * e2,
      bar.center[1] + vectors[0][1] * e1 + vectors[1][1] * e2,
    ]);
  }
  return pts;
}

/** Barrier value at a position, for client-side margin display. */
export function evalBarrier(bar: BarrierGeometry, z: [number, number]): number {
  const e0 = z[0] - bar.center[0];
  const e1 = z[1] - bar.center[1];
  const q =
    0.5 *
    (e0 * (bar.P[0][0] * e0 + bar.P[0][1] * e1) +
      e1 * (bar.P[1][0] * e0 + bar.P[1][1] * e1));
  return bar.gamma * (bar.delta * bar.delta - q);
}
