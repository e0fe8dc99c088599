"""HTTP/JSON API over datasets, training jobs, sessions, explanations,
projections, and edits. The JSON contract is documented in docs/api.md."""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .dataset import load_dataset
from .errors import (ComputeError, DataFormatError, GnnScopeError,
                     NotFoundError, ValidationError)
from .explain import ExplainConfig, extract_attention, run_gnn_explainer
from .models import ModelConfig, load_weights, save_weights
from .projection import pca_project, tsne_project
from .session import EditOp, Session
from .training import Cancelled, TrainConfig, train_model

_STATUS = {
    "not-found": 404, "missing-node": 404, "missing-edge": 404,
    "unknown-session": 404, "unknown-job": 404, "model-not-gat": 404,
    "cancelled": 409, "duplicate-edge": 409,
    "compute-error": 500, "divergence": 500, "non-finite-loss": 500,
}


def _status_for(code):
    return _STATUS.get(code, 400)


@dataclass
class Job:
    id: str
    kind: str                      # train | explain | tsne
    state: str = "queued"          # queued -> running -> done|failed|cancelled
    progress: float = 0.0
    result: dict | None = None
    error: str | None = None
    error_code: str | None = None
    cancel_event: threading.Event = field(default_factory=threading.Event)

    def to_dict(self):
        d = {"id": self.id, "kind": self.kind, "state": self.state,
             "progress": round(self.progress, 4)}
        if self.result is not None:
            d["result"] = self.result
        if self.error is not None:
            d["error"] = {"code": self.error_code, "message": self.error}
        return d


class JobRegistry:
    def __init__(self, max_concurrent=2):
        self.jobs: dict[str, Job] = {}
        self.semaphore = threading.Semaphore(max_concurrent)
        self.lock = threading.Lock()

    def submit(self, kind, fn) -> Job:
        job = Job(id=uuid.uuid4().hex[:12], kind=kind)
        with self.lock:
            self.jobs[job.id] = job

        def run():
            with self.semaphore:
                if job.cancel_event.is_set():
                    job.state = "cancelled"
                    return
                job.state = "running"
                try:
                    job.result = fn(job)
                    job.state = "done"
                    job.progress = 1.0
                except Cancelled:
                    job.state = "cancelled"
                except GnnScopeError as e:
                    job.state = "failed"
                    job.error = str(e)
                    job.error_code = e.code
                except Exception as e:   # keep the pool alive
                    job.state = "failed"
                    job.error = str(e)
                    job.error_code = "internal-error"

        threading.Thread(target=run, daemon=True).start()
        return job

    def get(self, job_id) -> Job:
        job = self.jobs.get(job_id)
        if job is None:
            raise NotFoundError(f"unknown job {job_id}", code="unknown-job")
        return job

    def cancel(self, job_id) -> Job:
        job = self.get(job_id)
        if job.state in ("queued", "running"):
            job.cancel_event.set()
            if job.state == "queued":
                job.state = "cancelled"
        return job


def _coerce(overrides, key, typ, default):
    try:
        return typ(overrides.get(key, default))
    except (TypeError, ValueError):
        raise ValidationError(f"field {key!r} must be a {typ.__name__}",
                              code="invalid-input")


def _require(payload, key, typ=None):
    if not isinstance(payload, dict) or key not in payload:
        raise ValidationError(f"missing field {key!r}", code="invalid-input")
    val = payload[key]
    if typ is not None and not isinstance(val, typ):
        raise ValidationError(f"field {key!r} has wrong type",
                              code="invalid-input")
    return val


def create_app(data_dir, model_dir, static_dir=None,
               max_concurrent_jobs=2) -> FastAPI:
    data_dir = Path(data_dir)
    model_dir = Path(model_dir)
    for d in (data_dir, model_dir):
        if not d.is_dir():
            raise ValidationError(f"directory {d} does not exist",
                                  code="missing-dir")
    app = FastAPI(title="gnnscope", docs_url=None, redoc_url=None)
    jobs = JobRegistry(max_concurrent_jobs)
    sessions: dict[str, Session] = {}
    datasets_cache: dict[str, object] = {}

    @app.exception_handler(GnnScopeError)
    async def on_error(request: Request, exc: GnnScopeError):
        return JSONResponse(
            status_code=_status_for(exc.code),
            content={"error": {"code": exc.code, "message": str(exc)}})

    @app.exception_handler(RequestValidationError)
    async def on_validation(request: Request, exc):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "invalid-input", "message": str(exc)}})

    def get_dataset(name):
        path = data_dir / f"{name}.gnnds"
        if not path.exists():
            raise NotFoundError(f"unknown dataset {name!r}", code="not-found")
        if name not in datasets_cache:
            datasets_cache[name] = load_dataset(path)
        return datasets_cache[name]

    def get_session(sid) -> Session:
        s = sessions.get(sid)
        if s is None:
            raise NotFoundError(f"unknown session {sid}",
                                code="unknown-session")
        return s

    # -- catalog --------------------------------------------------------

    @app.get("/datasets")
    def list_datasets():
        out = []
        for p in sorted(data_dir.glob("*.gnnds")):
            ds = get_dataset(p.stem)
            out.append({"name": p.stem, "num_nodes": ds.num_nodes,
                        "num_features": ds.num_features,
                        "num_classes": ds.num_classes,
                        "num_edges": len(ds.edges),
                        "class_names": list(ds.class_names)})
        return {"datasets": out}

    @app.get("/models")
    def list_models():
        out = []
        for p in sorted(model_dir.glob("*.gnnw")):
            _, cfg = load_weights(p)
            out.append({"name": p.stem, "arch": cfg.arch,
                        "in_dim": cfg.in_dim, "hidden_dim": cfg.hidden_dim,
                        "num_classes": cfg.num_classes,
                        "heads_layer1": cfg.heads_layer1})
        return {"models": out}

    # -- training jobs --------------------------------------------------

    @app.post("/train")
    def start_train(payload: dict = Body(...)):
        name = _require(payload, "dataset", str)
        arch = _require(payload, "arch", str)
        ds = get_dataset(name)
        tc = payload.get("train_config", {})
        mc = payload.get("model_config", {})
        if not isinstance(tc, dict) or not isinstance(mc, dict):
            raise ValidationError("config overrides must be objects",
                                  code="invalid-input")
        tcfg = TrainConfig(
            epochs_max=_coerce(tc, "epochs_max", int, 300),
            lr=_coerce(tc, "lr", float, 0.005),
            weight_decay=_coerce(tc, "weight_decay", float, 5e-4),
            patience=_coerce(tc, "patience", int, 20),
            seed=_coerce(tc, "seed", int, 0))
        config = ModelConfig(
            arch=arch, in_dim=ds.num_features,
            hidden_dim=_coerce(mc, "hidden_dim", int,
                               16 if arch == "gcn" else 8),
            num_classes=ds.num_classes,
            heads_layer1=_coerce(mc, "heads_layer1", int, 8),
            dropout_rate=_coerce(mc, "dropout_rate", float, 0.5),
            seed=_coerce(tc, "seed", int, 0))

        def work(job):
            def progress(epoch, total):
                job.progress = epoch / total
            params, report = train_model(
                ds, config, tcfg, progress=progress,
                should_cancel=job.cancel_event.is_set)
            out_name = payload.get("out_name", f"{name}-{arch}")
            save_weights(params, config, model_dir / f"{out_name}.gnnw")
            return {"model": out_name, "report": report.to_dict()}

        return jobs.submit("train", work).to_dict()

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        return jobs.get(job_id).to_dict()

    @app.delete("/jobs/{job_id}")
    def cancel_job(job_id: str):
        return jobs.cancel(job_id).to_dict()

    # -- sessions -------------------------------------------------------

    @app.post("/sessions")
    def create_session(payload: dict = Body(...)):
        ds = get_dataset(_require(payload, "dataset", str))
        model_name = _require(payload, "model", str)
        path = model_dir / f"{model_name}.gnnw"
        if not path.exists():
            raise NotFoundError(f"unknown model {model_name!r}",
                                code="not-found")
        params, config = load_weights(path)
        s = Session(ds, params, config)
        sessions[s.id] = s
        return {"session_id": s.id, "graph_version": s.graph_version,
                "dataset": payload["dataset"], "model": model_name,
                "arch": config.arch}

    @app.delete("/sessions/{sid}")
    def delete_session(sid: str):
        get_session(sid)
        del sessions[sid]
        return {"deleted": sid}

    @app.post("/sessions/{sid}/reset")
    def reset_session(sid: str):
        s = get_session(sid)
        s.reset()
        return {"session_id": sid, "graph_version": s.graph_version}

    @app.get("/sessions/{sid}/graph")
    def get_graph(sid: str):
        s = get_session(sid)
        nodes = [{"id": nid, "true_class": s.true_class(nid),
                  "predicted_class": int(s.latest_inference.predicted[row])}
                 for nid, row in sorted(s.row_of.items())]
        return {"graph_version": s.graph_version, "nodes": nodes,
                "edges": [{"u": u, "v": v} for u, v in sorted(s.edges)],
                "class_names": list(s.dataset.class_names)}

    @app.get("/sessions/{sid}/nodes/{nid}")
    def get_node(sid: str, nid: int):
        s = get_session(sid)
        summary = s.neighbor_summary(nid)
        row = s.node_feature_row(nid)
        nz = np.flatnonzero(row)
        return {
            "graph_version": s.graph_version, "id": nid,
            "true_class": s.true_class(nid),
            "predicted_class": s.predicted_class(nid),
            "log_probs": [float(x) for x in
                          s.latest_inference.log_probs[s.row_of[nid]]],
            "nonzero_features": [
                {"index": int(i),
                 "name": (s.dataset.feature_names[i]
                          if s.dataset.feature_names else f"f{i}"),
                 "value": float(row[i])} for i in nz[:200]],
            "neighbors": summary.to_dict()["neighbors"],
        }

    @app.get("/sessions/{sid}/embeddings")
    def get_embeddings(sid: str, method: str = "pca"):
        s = get_session(sid)
        version = s.graph_version
        if method == "pca":
            key = (version, "pca")
            if key not in s.caches:
                res = pca_project(s.latest_inference.embeddings)
                s.caches[key] = {"graph_version": version,
                                 "node_ids": list(s.row_ids),
                                 **res.to_dict()}
            return s.caches[key]
        if method == "tsne":
            key = (version, "tsne")
            if key in s.caches:
                return s.caches[key]
            emb = s.latest_inference.embeddings
            node_ids = list(s.row_ids)

            def work(job):
                def progress(it, total):
                    job.progress = it / total
                perplexity = min(30.0, max(2.0, (len(node_ids) - 1) / 3 - 1))
                res = tsne_project(emb, perplexity=perplexity,
                                   progress=progress,
                                   should_cancel=job.cancel_event.is_set)
                payload = {"graph_version": version, "node_ids": node_ids,
                           **res.to_dict()}
                s.caches[key] = payload
                return payload

            return {"job": jobs.submit("tsne", work).to_dict(),
                    "graph_version": version}
        raise ValidationError(f"unknown projection method {method!r}; "
                              "available: pca, tsne", code="invalid-input")

    @app.post("/sessions/{sid}/explain")
    def explain_node(sid: str, payload: dict = Body(...)):
        s = get_session(sid)
        node = _require(payload, "node", int)
        s._require_node(node)
        overrides = payload.get("config", {})
        if not isinstance(overrides, dict):
            raise ValidationError("config overrides must be an object",
                                  code="invalid-input")
        cfg = ExplainConfig(
            epochs=_coerce(overrides, "epochs", int, 100),
            lr=_coerce(overrides, "lr", float, 0.01),
            edge_size_coeff=_coerce(overrides, "edge_size_coeff", float,
                                    0.005),
            edge_entropy_coeff=_coerce(overrides, "edge_entropy_coeff",
                                       float, 1.0),
            feat_size_coeff=_coerce(overrides, "feat_size_coeff", float, 1.0),
            feat_entropy_coeff=_coerce(overrides, "feat_entropy_coeff",
                                       float, 0.1),
            top_k_edges=_coerce(overrides, "top_k_edges", int, 10),
            top_k_features=_coerce(overrides, "top_k_features", int, 10),
            seed=_coerce(overrides, "seed", int, 0))
        version = s.graph_version
        key = (version, "explain", node, cfg)
        if key in s.caches:
            return s.caches[key]
        ids, feats, edges = s.working_arrays()
        row_of = {nid: r for r, nid in enumerate(ids)}

        def work(job):
            expl = run_gnn_explainer(
                s.params, s.config, feats, edges, len(ids), row_of[node],
                cfg, feature_names=s.dataset.feature_names)
            d = expl.to_dict()
            # translate row indices back to session node ids
            d["center"] = node
            d["edges"] = [[ids[u], ids[v]] for u, v in d["edges"]]
            for e in d["top_edges"]:
                e["src"], e["dst"] = ids[e["src"]], ids[e["dst"]]
            payload = {"graph_version": version, **d}
            s.caches[key] = payload
            return payload

        return {"job": jobs.submit("explain", work).to_dict(),
                "graph_version": version}

    @app.get("/sessions/{sid}/attention/{nid}")
    def get_attention(sid: str, nid: int):
        s = get_session(sid)
        s._require_node(nid)
        if s.config.arch != "gat":
            raise NotFoundError("attention is only available for GAT models",
                                code="model-not-gat")
        summary = extract_attention(s.latest_inference, s.row_of[nid])
        d = summary.to_dict()
        d["center"] = nid
        for side in ("assigns", "receives"):
            for entry in d[side]:
                entry["neighbor"] = s.row_ids[entry["neighbor"]]
        d["graph_version"] = s.graph_version
        return d

    @app.post("/sessions/{sid}/edits")
    def post_edit(sid: str, payload: dict = Body(...)):
        s = get_session(sid)
        op = EditOp.from_dict(payload)
        changed = s.apply_edit(op)
        return {"graph_version": s.graph_version,
                "changed_predictions": [
                    {"id": nid, "old": old, "new": new}
                    for nid, old, new in changed]}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="ui")
    return app


def serve(port=8000, data_dir="data", model_dir="models", static_dir=None,
          max_concurrent_jobs=2):
    import uvicorn
    app = create_app(data_dir, model_dir, static_dir, max_concurrent_jobs)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="info")
