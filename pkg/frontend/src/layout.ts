/** Client-side force-directed layout, seeded per graph version so the
 * same graph always lands in the same arrangement. Presentation only —
 * no model math happens here. */

import { mulberry32 } from "./rng.js";
import type { GraphEdge } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

export function layoutGraph(
  nodeIds: number[],
  edges: GraphEdge[],
  seed: number,
  iterations = 150,
): Map<number, Point> {
  const n = nodeIds.length;
  const rand = mulberry32(seed);
  const index = new Map<number, number>();
  nodeIds.forEach((id, i) => index.set(id, i));
  const px = new Float64Array(n);
  const py = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    px[i] = rand() * 2 - 1;
    py[i] = rand() * 2 - 1;
  }
  const pairs: [number, number][] = [];
  for (const { u, v } of edges) {
    const a = index.get(u);
    const b = index.get(v);
    if (a !== undefined && b !== undefined) pairs.push([a, b]);
  }

  const area = 4;
  const k = Math.sqrt(area / Math.max(n, 1));
  let temperature = 0.5;
  const dx = new Float64Array(n);
  const dy = new Float64Array(n);

  for (let it = 0; it < iterations; it++) {
    dx.fill(0);
    dy.fill(0);
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let ddx = px[i] - px[j];
        let ddy = py[i] - py[j];
        let d2 = ddx * ddx + ddy * ddy;
        if (d2 < 1e-8) {
          ddx = (rand() - 0.5) * 1e-3;
          ddy = (rand() - 0.5) * 1e-3;
          d2 = ddx * ddx + ddy * ddy;
        }
        const rep = (k * k) / d2;
        dx[i] += ddx * rep;
        dy[i] += ddy * rep;
        dx[j] -= ddx * rep;
        dy[j] -= ddy * rep;
      }
    }
    for (const [a, b] of pairs) {
      const ddx = px[a] - px[b];
      const ddy = py[a] - py[b];
      const dist = Math.sqrt(ddx * ddx + ddy * ddy) + 1e-9;
      const att = (dist * dist) / k / dist;
      dx[a] -= ddx * att;
      dy[a] -= ddy * att;
      dx[b] += ddx * att;
      dy[b] += ddy * att;
    }
    for (let i = 0; i < n; i++) {
      const norm = Math.sqrt(dx[i] * dx[i] + dy[i] * dy[i]) + 1e-9;
      const step = Math.min(norm, temperature);
      px[i] += (dx[i] / norm) * step;
      py[i] += (dy[i] / norm) * step;
    }
    temperature *= 0.97;
  }

  const out = new Map<number, Point>();
  nodeIds.forEach((id, i) => out.set(id, { x: px[i], y: py[i] }));
  return out;
}
