"""Drive the HTTP service end to end in-process: train a model through a
job, open a session, edit the graph, request an explanation, and read
GAT attention."""

import tempfile
import time
from pathlib import Path

from fastapi.testclient import TestClient

from gnnscope import export_dataset
from gnnscope.service import create_app

from _common import community_dataset


def wait(client, job_id):
    while True:
        body = client.get(f"/jobs/{job_id}").json()
        if body["state"] in ("done", "failed", "cancelled"):
            return body
        time.sleep(0.05)


def main():
    with tempfile.TemporaryDirectory() as tmp:
        data_dir = Path(tmp) / "data"
        model_dir = Path(tmp) / "models"
        data_dir.mkdir()
        model_dir.mkdir()
        export_dataset(community_dataset(), data_dir / "communities.gnnds")
        app = create_app(data_dir, model_dir)

        with TestClient(app) as client:
            print("datasets:", client.get("/datasets").json())

            for arch in ("gcn", "gat"):
                job = client.post("/train", json={
                    "dataset": "communities", "arch": arch,
                    "model_config": {"hidden_dim": 8 if arch == "gcn" else 4,
                                     "heads_layer1": 4,
                                     "dropout_rate": 0.2},
                    "train_config": {"seed": 1, "epochs_max": 200,
                                     "patience": 30}}).json()
                done = wait(client, job["id"])
                report = done["result"]["report"]
                print(f"trained {arch}: test accuracy "
                      f"{report['test_accuracy']:.3f} in "
                      f"{report['epochs_run']} epochs")

            sid = client.post("/sessions", json={
                "dataset": "communities",
                "model": "communities-gcn"}).json()["session_id"]
            info = client.get(f"/sessions/{sid}/nodes/0").json()
            print(f"\nnode 0: predicted class {info['predicted_class']}, "
                  f"{len(info['neighbors'])} neighbors")

            nbr = info["neighbors"][0]["id"]
            diff = client.post(f"/sessions/{sid}/edits", json={
                "kind": "remove_edge", "u": 0, "v": nbr}).json()
            print(f"removed edge (0, {nbr}): version "
                  f"{diff['graph_version']}, "
                  f"{len(diff['changed_predictions'])} predictions changed")
            client.post(f"/sessions/{sid}/edits", json={
                "kind": "add_edge", "u": 0, "v": nbr})

            job = client.post(f"/sessions/{sid}/explain", json={
                "node": 0, "config": {"epochs": 50}}).json()["job"]
            result = wait(client, job["id"])["result"]
            top = result["top_edges"][0]
            print(f"explanation for node 0: top edge "
                  f"({top['src']}, {top['dst']}) score {top['score']:.3f}")

            gat_sid = client.post("/sessions", json={
                "dataset": "communities",
                "model": "communities-gat"}).json()["session_id"]
            att = client.get(f"/sessions/{gat_sid}/attention/0").json()
            print("\nGAT attention node 0 assigns to its neighborhood:")
            for entry in att["assigns"][:5]:
                print(f"  -> node {entry['neighbor']:3d}  "
                      f"mean {entry['mean']:.3f}")

            # structured errors, never a stack trace
            r = client.post(f"/sessions/{sid}/edits",
                            json={"kind": "add_edge", "u": 0, "v": 0})
            print(f"\nself-loop rejected with HTTP {r.status_code}: "
                  f"{r.json()['error']}")


if __name__ == "__main__":
    main()
