import { describe, expect, it } from "vitest";

import { layoutGraph } from "../src/layout.js";

const ring = (n: number) =>
  Array.from({ length: n }, (_, i) => ({ u: i, v: (i + 1) % n }));

describe("layoutGraph", () => {
  it("is deterministic for a given seed", () => {
    const ids = [0, 1, 2, 3, 4, 5];
    const a = layoutGraph(ids, ring(6), 7);
    const b = layoutGraph(ids, ring(6), 7);
    for (const id of ids) {
      expect(a.get(id)).toEqual(b.get(id));
    }
  });

  it("differs across seeds (one layout per graph version)", () => {
    const ids = [0, 1, 2, 3, 4, 5];
    const a = layoutGraph(ids, ring(6), 1);
    const b = layoutGraph(ids, ring(6), 2);
    const moved = ids.some(
      (id) =>
        Math.abs(a.get(id)!.x - b.get(id)!.x) > 1e-9 ||
        Math.abs(a.get(id)!.y - b.get(id)!.y) > 1e-9,
    );
    expect(moved).toBe(true);
  });

  it("places every node at finite coordinates", () => {
    const ids = Array.from({ length: 20 }, (_, i) => i);
    const pts = layoutGraph(ids, ring(20), 3);
    expect(pts.size).toBe(20);
    for (const p of pts.values()) {
      expect(Number.isFinite(p.x)).toBe(true);
      expect(Number.isFinite(p.y)).toBe(true);
    }
  });

  it("pulls connected nodes closer than the average pair", () => {
    const ids = Array.from({ length: 24 }, (_, i) => i);
    // two cliques joined by a single bridge
    const edges: { u: number; v: number }[] = [];
    for (const base of [0, 12]) {
      for (let i = 0; i < 12; i++) {
        for (let j = i + 1; j < 12; j++) {
          edges.push({ u: base + i, v: base + j });
        }
      }
    }
    edges.push({ u: 0, v: 12 });
    const pts = layoutGraph(ids, edges, 5, 300);
    const dist = (a: number, b: number) =>
      Math.hypot(
        pts.get(a)!.x - pts.get(b)!.x,
        pts.get(a)!.y - pts.get(b)!.y,
      );
    let intra = 0;
    let inter = 0;
    let nIntra = 0;
    let nInter = 0;
    for (let i = 0; i < 24; i++) {
      for (let j = i + 1; j < 24; j++) {
        const sameClique = (i < 12) === (j < 12);
        if (sameClique) {
          intra += dist(i, j);
          nIntra++;
        } else {
          inter += dist(i, j);
          nInter++;
        }
      }
    }
    expect(intra / nIntra).toBeLessThan(inter / nInter);
  });

  it("ignores edges pointing at unknown node ids", () => {
    const pts = layoutGraph([0, 1], [{ u: 0, v: 99 }], 1);
    expect(pts.size).toBe(2);
  });
});
