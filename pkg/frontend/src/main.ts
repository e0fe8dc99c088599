/** Bootstraps the dashboard: session controls, the perturb-observe-
 * explain loop, and coordinated re-rendering from one ViewState. */

import { ApiClient, ApiError } from "./api.js";
import { Store } from "./state.js";
import type { EditOp } from "./types.js";
import {
  CanvasHit,
  renderAttentionPanel,
  renderBanner,
  renderExplanationPanel,
  renderFeaturePanel,
  renderGraph,
  renderInfoPanel,
  renderJobs,
  renderNeighborPanel,
  renderScatter,
} from "./render.js";

const api = new ApiClient();
const store = new Store();

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

let graphHit: CanvasHit = { nodeAt: () => null };
let scatterHit: CanvasHit = { nodeAt: () => null };

function showError(err: unknown): void {
  const message =
    err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
  store.update({ banner: message });
  setTimeout(() => {
    if (store.get().banner === message) store.update({ banner: null });
  }, 6000);
}

function trackJob(kind: string): (fraction: number) => void {
  return (fraction) => {
    const jobs = new Map(store.get().pendingJobs);
    if (fraction >= 1) jobs.delete(kind);
    else jobs.set(kind, fraction);
    store.update({ pendingJobs: jobs });
  };
}

function clearJob(kind: string): void {
  const jobs = new Map(store.get().pendingJobs);
  jobs.delete(kind);
  store.update({ pendingJobs: jobs });
}

async function refreshGraph(): Promise<void> {
  const { sessionId } = store.get();
  if (!sessionId) return;
  const graph = await api.getGraph(sessionId);
  store.acceptVersioned(graph.graph_version, { graph });
  const method = store.get().embeddingMethod;
  const version = store.get().graphVersion;
  api
    .embeddings(sessionId, method, trackJob("t-SNE"))
    .then((emb) => {
      clearJob("t-SNE");
      store.acceptVersioned(emb.graph_version, { embedding: emb });
    })
    .catch((err) => {
      clearJob("t-SNE");
      if (store.get().graphVersion === version) showError(err);
    });
}

async function selectNode(id: number): Promise<void> {
  const state = store.get();
  if (!state.sessionId) return;
  store.update({
    selection: { kind: "node", id },
    explanation: null,
    attention: null,
  });
  try {
    const info = await api.getNode(state.sessionId, id);
    store.acceptVersioned(info.graph_version, { nodeInfo: info });
    if (state.arch === "gat") {
      const att = await api.getAttention(state.sessionId, id);
      store.acceptVersioned(att.graph_version, { attention: att });
    }
  } catch (err) {
    showError(err);
  }
}

async function explainSelected(): Promise<void> {
  const state = store.get();
  if (!state.sessionId || state.selection.kind !== "node") return;
  const node = state.selection.id;
  try {
    const expl = await api.explain(
      state.sessionId,
      node,
      {},
      trackJob("explain"),
    );
    clearJob("explain");
    store.acceptVersioned(expl.graph_version, { explanation: expl });
  } catch (err) {
    clearJob("explain");
    showError(err);
  }
}

async function dispatchEdit(op: EditOp): Promise<void> {
  const state = store.get();
  if (!state.sessionId) return;
  const hadExplanation =
    state.explanation !== null && state.selection.kind === "node";
  try {
    const res = await api.postEdit(state.sessionId, op);
    store.enterVersion(res.graph_version, res.changed_predictions);
    await refreshGraph();
    if (state.selection.kind === "node") {
      await selectNode(state.selection.id);
      if (hadExplanation) await explainSelected();
    }
  } catch (err) {
    showError(err); // state unchanged on failure
  }
}

async function resetSession(): Promise<void> {
  const state = store.get();
  if (!state.sessionId) return;
  try {
    const res = await api.reset(state.sessionId);
    store.enterVersion(res.graph_version, []);
    store.update({ selection: { kind: "none" }, nodeInfo: null });
    await refreshGraph();
  } catch (err) {
    showError(err);
  }
}

async function startSession(): Promise<void> {
  const dataset = $<HTMLSelectElement>("dataset-select").value;
  const model = $<HTMLSelectElement>("model-select").value;
  try {
    const handle = await api.createSession(dataset, model);
    store.startSession(handle.session_id, handle.arch);
    await refreshGraph();
  } catch (err) {
    showError(err);
  }
}

function readId(id: string): number | null {
  const raw = $<HTMLInputElement>(id).value.trim();
  if (!/^\d+$/.test(raw)) return null;
  return Number(raw);
}

function wireControls(): void {
  $("create-session").addEventListener("click", () => void startSession());
  $("reset-session").addEventListener("click", () => void resetSession());
  $("explain-btn").addEventListener("click", () => void explainSelected());

  $("add-edge-btn").addEventListener("click", () => {
    const u = readId("edge-u");
    const v = readId("edge-v");
    if (u === null || v === null) return showError("enter two node ids");
    void dispatchEdit({ kind: "add_edge", u, v });
  });
  $("remove-edge-btn").addEventListener("click", () => {
    const u = readId("edge-u");
    const v = readId("edge-v");
    if (u === null || v === null) return showError("enter two node ids");
    void dispatchEdit({ kind: "remove_edge", u, v });
  });
  $("remove-node-btn").addEventListener("click", () => {
    const state = store.get();
    if (state.selection.kind !== "node") {
      return showError("select a node first");
    }
    void dispatchEdit({ kind: "remove_node", node: state.selection.id });
  });
  $("add-node-btn").addEventListener("click", () => {
    const state = store.get();
    const template = $<HTMLSelectElement>("node-template").value;
    if (template === "copy_of") {
      if (state.selection.kind !== "node") {
        return showError("select a template node first");
      }
      void dispatchEdit({
        kind: "add_node",
        feature_source: "copy_of",
        node: state.selection.id,
      });
    } else {
      void dispatchEdit({ kind: "add_node", feature_source: "zeros" });
    }
  });

  $<HTMLSelectElement>("projection-select").addEventListener(
    "change",
    (ev) => {
      const method = (ev.target as HTMLSelectElement).value as
        | "pca"
        | "tsne";
      store.update({ embeddingMethod: method, embedding: null });
      void refreshGraph();
    },
  );

  const graphCanvas = $<HTMLCanvasElement>("graph-canvas");
  graphCanvas.addEventListener("click", (ev) => {
    const rect = graphCanvas.getBoundingClientRect();
    const id = graphHit.nodeAt(ev.clientX - rect.left, ev.clientY - rect.top);
    if (id !== null) void selectNode(id);
  });
  const scatterCanvas = $<HTMLCanvasElement>("scatter-canvas");
  scatterCanvas.addEventListener("click", (ev) => {
    const rect = scatterCanvas.getBoundingClientRect();
    const id = scatterHit.nodeAt(
      ev.clientX - rect.left,
      ev.clientY - rect.top,
    );
    if (id !== null) void selectNode(id);
  });
}

async function populateCatalog(): Promise<void> {
  const [{ datasets }, { models }] = await Promise.all([
    api.listDatasets(),
    api.listModels(),
  ]);
  const dsSelect = $<HTMLSelectElement>("dataset-select");
  dsSelect.replaceChildren(
    ...datasets.map((d) => new Option(`${d.name} (${d.num_nodes})`, d.name)),
  );
  const modelSelect = $<HTMLSelectElement>("model-select");
  modelSelect.replaceChildren(
    ...models.map((m) => new Option(`${m.name} [${m.arch}]`, m.name)),
  );
}

function renderAll(): void {
  const state = store.get();
  graphHit = renderGraph($<HTMLCanvasElement>("graph-canvas"), state);
  scatterHit = renderScatter($<HTMLCanvasElement>("scatter-canvas"), state);
  renderInfoPanel($("info-panel"), state);
  renderNeighborPanel($("neighbor-panel"), state, (id) =>
    void selectNode(id),
  );
  renderFeaturePanel($("feature-panel"), state);
  renderExplanationPanel($("explanation-panel"), state);
  renderAttentionPanel($("attention-panel"), state, () => {
    store.update({
      attentionDirection:
        store.get().attentionDirection === "assigns"
          ? "receives"
          : "assigns",
    });
  });
  renderBanner($("banner"), state);
  renderJobs($("jobs"), state);
}

export function boot(): void {
  store.subscribe(renderAll);
  wireControls();
  populateCatalog().catch(showError);
  renderAll();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
