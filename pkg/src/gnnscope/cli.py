"""Headless driver: training, evaluation, explanation, projection export,
scripted what-if probes, dataset conversion, and the HTTP server.

Exit codes: 0 ok, 2 usage, 3 data error, 4 compute error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dataset import convert_planetoid, load_dataset
from .errors import ComputeError, DataFormatError, GnnScopeError
from .explain import ExplainConfig, run_gnn_explainer
from .models import ModelConfig, load_weights, save_weights
from .projection import pca_project, tsne_project
from .training import TrainConfig, evaluate, infer, train_model

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_COMPUTE = 4


def _write_jsonl(path, records):
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")


def read_jsonl(path):
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def _cmd_train(args):
    ds = load_dataset(args.dataset)
    config = ModelConfig(
        arch=args.arch, in_dim=ds.num_features,
        hidden_dim=args.hidden_dim
        if args.hidden_dim else (16 if args.arch == "gcn" else 8),
        num_classes=ds.num_classes, heads_layer1=args.heads,
        dropout_rate=args.dropout, seed=args.seed)
    tcfg = TrainConfig(epochs_max=args.epochs, lr=args.lr,
                       weight_decay=args.weight_decay,
                       patience=args.patience, seed=args.seed)
    params, report = train_model(ds, config, tcfg)
    save_weights(params, config, args.out)
    if args.report:
        recs = [{"type": "train_report", **{k: v for k, v in
                 report.to_dict().items()
                 if k not in ("train_loss", "val_accuracy")}}]
        recs += [{"type": "epoch", "epoch": i + 1, "train_loss": l,
                  "val_accuracy": a}
                 for i, (l, a) in enumerate(zip(report.train_loss,
                                                report.val_accuracy))]
        _write_jsonl(args.report, recs)
    print(json.dumps({"best_val_accuracy": report.best_val_accuracy,
                      "test_accuracy": report.test_accuracy,
                      "epochs_run": report.epochs_run,
                      "weights": str(args.out)}))


def _cmd_evaluate(args):
    ds = load_dataset(args.dataset)
    params, config = load_weights(args.model)
    out = {}
    for split in ("train", "val", "test"):
        mask = getattr(ds, f"{split}_mask")
        if mask.any():
            out[split] = evaluate(params, config, ds, split)
    print(json.dumps(out))


def _cmd_explain(args):
    ds = load_dataset(args.dataset)
    params, config = load_weights(args.model)
    cfg = ExplainConfig(epochs=args.epochs, top_k_edges=args.top_k,
                        top_k_features=args.top_k, seed=args.seed)
    expl = run_gnn_explainer(params, config, ds.features, ds.edges,
                             ds.num_nodes, args.node, cfg,
                             feature_names=ds.feature_names)
    d = expl.to_dict()
    recs = [{"type": "explanation", "center": d["center"],
             "predicted_class": d["predicted_class"],
             "final_loss": d["loss_trace"][-1]}]
    recs += [{"type": "top_edge", **e} for e in d["top_edges"]]
    recs += [{"type": "top_feature", **fr} for fr in d["top_features"]]
    _write_jsonl(args.out, recs)
    print(json.dumps({"center": d["center"], "report": str(args.out)}))


def _cmd_project(args):
    ds = load_dataset(args.dataset)
    params, config = load_weights(args.model)
    result = infer(params, config, ds.features, ds.edges, ds.num_nodes)
    if args.method == "pca":
        proj = pca_project(result.embeddings)
    else:
        proj = tsne_project(result.embeddings, perplexity=args.perplexity,
                            iters=args.iters, seed=args.seed)
    _write_jsonl(args.out, [
        {"id": i, "x": float(x), "y": float(y)}
        for i, (x, y) in enumerate(proj.coords)])
    print(json.dumps({"method": args.method, "coords": str(args.out),
                      "diagnostics": {
                          k: v for k, v in proj.to_dict()["diagnostics"].items()
                          if k != "kl_trace"}}))


def find_single_edge_flip(ds, params, config, max_nodes=None, stop_at=1):
    """Scan misclassified nodes for an incident-edge removal that corrects
    the prediction. Yields (node, (u, v), old_class, new_class)."""
    base = infer(params, config, ds.features, ds.edges, ds.num_nodes)
    wrong = np.flatnonzero(base.predicted != ds.labels)
    if max_nodes is not None:
        wrong = wrong[:max_nodes]
    hits = []
    edges = [tuple(e) for e in ds.edges]
    for node in wrong:
        incident = [e for e in edges if node in e]
        for e in incident:
            reduced = np.array([x for x in edges if x != e], dtype=np.int64)
            res = infer(params, config, ds.features, reduced, ds.num_nodes)
            if res.predicted[node] == ds.labels[node]:
                hits.append((int(node), e, int(base.predicted[node]),
                             int(res.predicted[node])))
                break
        if len(hits) >= stop_at:
            break
    return hits


class _UsageError(Exception):
    pass


def _cmd_probe(args):
    if not args.find_single_edge_flip and not args.script:
        raise _UsageError("probe needs --script or --find-single-edge-flip")
    ds = load_dataset(args.dataset)
    params, config = load_weights(args.model)
    recs = []
    if args.find_single_edge_flip:
        hits = find_single_edge_flip(ds, params, config,
                                     max_nodes=args.max_nodes)
        for node, (u, v), old, new in hits:
            recs.append({"type": "single_edge_flip", "node": node,
                         "removed_edge": [int(u), int(v)],
                         "old_class": old, "new_class": new,
                         "true_class": int(ds.labels[node]),
                         "class_names": [ds.class_names[old],
                                         ds.class_names[new]]})
        if not hits:
            recs.append({"type": "single_edge_flip", "found": False})
    else:
        from .session import EditOp, Session
        script = json.loads(Path(args.script).read_text())
        sess = Session(ds, params, config)
        for raw in script["ops"]:
            op = EditOp.from_dict(raw)
            changed = sess.apply_edit(op)
            recs.append({"type": "edit", "op": op.to_dict(),
                         "graph_version": sess.graph_version,
                         "changed_predictions": [
                             {"id": n, "old": o, "new": w}
                             for n, o, w in changed]})
    _write_jsonl(args.report, recs)
    print(json.dumps({"report": str(args.report), "findings": len(recs)}))


def _cmd_convert(args):
    ds = convert_planetoid(args.raw_dir, args.name, args.out)
    print(json.dumps({"name": ds.name, "num_nodes": ds.num_nodes,
                      "num_features": ds.num_features,
                      "num_classes": ds.num_classes,
                      "num_edges": len(ds.edges), "out": str(args.out)}))


def _cmd_serve(args):
    from .service import serve
    serve(port=args.port, data_dir=args.data_dir, model_dir=args.model_dir,
          static_dir=args.static_dir,
          max_concurrent_jobs=args.max_concurrent_jobs)


def build_parser():
    p = argparse.ArgumentParser(prog="gnnscope")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a model and save weights")
    t.add_argument("--dataset", required=True)
    t.add_argument("--arch", choices=["gcn", "gat"], required=True)
    t.add_argument("--lr", type=float, default=0.005)
    t.add_argument("--weight-decay", type=float, default=5e-4)
    t.add_argument("--patience", type=int, default=20)
    t.add_argument("--epochs", type=int, default=300)
    t.add_argument("--hidden-dim", type=int, default=None)
    t.add_argument("--heads", type=int, default=8)
    t.add_argument("--dropout", type=float, default=0.5)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True)
    t.add_argument("--report", default=None)
    t.set_defaults(fn=_cmd_train)

    e = sub.add_parser("evaluate", help="print split accuracies")
    e.add_argument("--dataset", required=True)
    e.add_argument("--model", required=True)
    e.set_defaults(fn=_cmd_evaluate)

    x = sub.add_parser("explain", help="explain one node's prediction")
    x.add_argument("--dataset", required=True)
    x.add_argument("--model", required=True)
    x.add_argument("--node", type=int, required=True)
    x.add_argument("--top-k", type=int, default=10)
    x.add_argument("--epochs", type=int, default=100)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--out", required=True)
    x.set_defaults(fn=_cmd_explain)

    pr = sub.add_parser("project", help="export 2D embedding coordinates")
    pr.add_argument("--dataset", required=True)
    pr.add_argument("--model", required=True)
    pr.add_argument("--method", choices=["pca", "tsne"], default="pca")
    pr.add_argument("--perplexity", type=float, default=30.0)
    pr.add_argument("--iters", type=int, default=1000)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--out", required=True)
    pr.set_defaults(fn=_cmd_project)

    pb = sub.add_parser("probe", help="scripted what-if probes")
    pb.add_argument("--dataset", required=True)
    pb.add_argument("--model", required=True)
    pb.add_argument("--script", default=None,
                    help="JSON file with an ops list")
    pb.add_argument("--find-single-edge-flip", action="store_true")
    pb.add_argument("--max-nodes", type=int, default=None)
    pb.add_argument("--report", required=True)
    pb.set_defaults(fn=_cmd_probe)

    cv = sub.add_parser("convert", help="public Planetoid files -> container")
    cv.add_argument("--raw-dir", required=True)
    cv.add_argument("--name", required=True)
    cv.add_argument("--out", required=True)
    cv.set_defaults(fn=_cmd_convert)

    sv = sub.add_parser("serve", help="run the HTTP service")
    sv.add_argument("--port", type=int, default=8000)
    sv.add_argument("--data-dir", default="data")
    sv.add_argument("--model-dir", default="models")
    sv.add_argument("--static-dir", default=None)
    sv.add_argument("--max-concurrent-jobs", type=int, default=2)
    sv.set_defaults(fn=_cmd_serve)
    return p


def run_cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        args.fn(args)
        return 0
    except _UsageError as e:
        print(json.dumps({"error": {"code": "usage", "message": str(e)}}),
              file=sys.stderr)
        return EXIT_USAGE
    except ComputeError as e:
        print(json.dumps({"error": {"code": e.code, "message": str(e)}}),
              file=sys.stderr)
        return EXIT_COMPUTE
    except (DataFormatError, GnnScopeError) as e:
        print(json.dumps({"error": {"code": e.code, "message": str(e)}}),
              file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as e:
        print(json.dumps({"error": {"code": "not-found", "message": str(e)}}),
              file=sys.stderr)
        return EXIT_DATA


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
