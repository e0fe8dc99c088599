import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

type FetchResponse = { ok: boolean; status: number; body: unknown };

function mockFetch(
  handler: (url: string, init?: RequestInit) => FetchResponse,
): void {
  vi.stubGlobal(
    "fetch",
    vi.fn(async (url: string, init?: RequestInit) => {
      const res = handler(url, init);
      return {
        ok: res.ok,
        status: res.status,
        json: async () => res.body,
      };
    }),
  );
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ApiClient errors", () => {
  it("turns structured error payloads into ApiError", async () => {
    mockFetch(() => ({
      ok: false,
      status: 404,
      body: { error: { code: "missing-node", message: "node 9 missing" } },
    }));
    const client = new ApiClient();
    await expect(client.getNode("s", 9)).rejects.toMatchObject({
      name: "ApiError",
      code: "missing-node",
      status: 404,
    });
  });

  it("sends edits as JSON POST bodies", async () => {
    let captured: { url: string; init?: RequestInit } | null = null;
    mockFetch((url, init) => {
      captured = { url, init };
      return {
        ok: true,
        status: 200,
        body: { graph_version: 1, changed_predictions: [] },
      };
    });
    const client = new ApiClient();
    await client.postEdit("s1", { kind: "add_edge", u: 1, v: 2 });
    expect(captured!.url).toBe("/sessions/s1/edits");
    expect(captured!.init?.method).toBe("POST");
    expect(JSON.parse(captured!.init?.body as string)).toEqual({
      kind: "add_edge",
      u: 1,
      v: 2,
    });
  });
});

describe("pollJob", () => {
  it("polls until done and resolves with the result", async () => {
    const states = ["queued", "running", "done"];
    let calls = 0;
    mockFetch(() => {
      const state = states[Math.min(calls++, states.length - 1)];
      return {
        ok: true,
        status: 200,
        body: {
          id: "j1",
          kind: "explain",
          state,
          progress: calls / states.length,
          ...(state === "done" ? { result: { center: 3 } } : {}),
        },
      };
    });
    const client = new ApiClient("", 1);
    const seen: number[] = [];
    const result = await client.pollJob<{ center: number }>("j1", (p) =>
      seen.push(p),
    );
    expect(result).toEqual({ center: 3 });
    expect(calls).toBe(3);
    expect(seen.length).toBe(3);
  });

  it("rejects with the job's error code when it fails", async () => {
    mockFetch(() => ({
      ok: true,
      status: 200,
      body: {
        id: "j2",
        kind: "train",
        state: "failed",
        progress: 0.5,
        error: { code: "non-finite-loss", message: "diverged" },
      },
    }));
    const client = new ApiClient("", 1);
    await expect(client.pollJob("j2")).rejects.toMatchObject({
      code: "non-finite-loss",
    });
  });

  it("rejects cancelled jobs", async () => {
    mockFetch(() => ({
      ok: true,
      status: 200,
      body: { id: "j3", kind: "tsne", state: "cancelled", progress: 0 },
    }));
    const client = new ApiClient("", 1);
    await expect(client.pollJob("j3")).rejects.toMatchObject({
      code: "cancelled",
    });
  });
});

describe("explain", () => {
  it("returns cached explanations without polling", async () => {
    mockFetch((url) => {
      expect(url).toBe("/sessions/s1/explain");
      return {
        ok: true,
        status: 200,
        body: { graph_version: 0, center: 4, top_edges: [] },
      };
    });
    const client = new ApiClient();
    const expl = await client.explain("s1", 4);
    expect(expl.center).toBe(4);
  });

  it("follows the job handle when the result is not cached", async () => {
    let polled = false;
    mockFetch((url) => {
      if (url === "/sessions/s1/explain") {
        return {
          ok: true,
          status: 200,
          body: {
            job: { id: "j9", kind: "explain", state: "queued", progress: 0 },
          },
        };
      }
      polled = true;
      expect(url).toBe("/jobs/j9");
      return {
        ok: true,
        status: 200,
        body: {
          id: "j9",
          kind: "explain",
          state: "done",
          progress: 1,
          result: { graph_version: 0, center: 4 },
        },
      };
    });
    const client = new ApiClient("", 1);
    const expl = await client.explain("s1", 4);
    expect(polled).toBe(true);
    expect(expl.center).toBe(4);
  });
});
