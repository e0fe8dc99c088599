"""Computation subgraphs, mask optimization, attention extraction, top-k."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnnscope import (ExplainConfig, extract_attention,
                      extract_computation_subgraph, forward, infer,
                      run_gnn_explainer, top_k_summary)
from gnnscope.errors import ValidationError

from conftest import sbm_dataset
from motif import (motif_explain_config, pick_explainable_center,
                   planted_motif_dataset, train_motif_gcn)


class TestComputationSubgraph:
    def test_isolated_node(self):
        sub = extract_computation_subgraph(np.zeros((0, 2), np.int64), 3, 1)
        np.testing.assert_array_equal(sub.nodes, [1])
        assert sub.edges.size == 0
        assert sub.local_center == 0

    def test_path_two_hops(self):
        edges = [(0, 1), (1, 2), (2, 3), (3, 4)]
        sub = extract_computation_subgraph(edges, 5, 2)
        np.testing.assert_array_equal(sub.nodes, [0, 1, 2, 3, 4])
        # directed edges, both directions
        assert len(sub.edges) == 8

    def test_two_hop_boundary(self):
        edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]
        sub = extract_computation_subgraph(edges, 6, 1)
        np.testing.assert_array_equal(sub.nodes, [0, 1, 2, 3])
        # edge (3,4) leaves the node set and is excluded
        assert not any(4 in e for e in sub.edges)

    def test_matches_brute_force_bfs(self, sbm):
        # independent oracle: dense boolean adjacency powers
        n = sbm.num_nodes
        A = np.zeros((n, n), bool)
        for u, v in sbm.edges:
            A[u, v] = A[v, u] = True
        for center in (0, 17, 60, 119):
            reach = np.zeros(n, bool)
            reach[center] = True
            frontier = reach.copy()
            for _ in range(2):
                frontier = (A[frontier].any(axis=0)) & ~reach
                reach |= frontier
            sub = extract_computation_subgraph(sbm.edges, n, center)
            np.testing.assert_array_equal(sub.nodes, np.flatnonzero(reach))
            expected_edges = {(u, v) for u in sub.nodes for v in sub.nodes
                             if A[u, v]}
            assert {tuple(e) for e in sub.edges} == expected_edges

    def test_invalid_node(self):
        with pytest.raises(ValidationError) as e:
            extract_computation_subgraph([(0, 1)], 2, 5)
        assert e.value.code == "invalid-node"

    def test_deterministic_ordering(self):
        edges = [(2, 0), (0, 1), (1, 2)]
        a = extract_computation_subgraph(edges, 3, 0)
        b = extract_computation_subgraph(list(reversed(edges)), 3, 0)
        np.testing.assert_array_equal(a.nodes, b.nodes)
        np.testing.assert_array_equal(a.edges, b.edges)


class TestTopK:
    def test_tie_break_ascending_index(self):
        assert [i for i, _ in top_k_summary([0.2, 0.9, 0.9], 2)] == [1, 2]

    def test_k_larger_than_items(self):
        assert len(top_k_summary([0.1, 0.2], 10)) == 2

    def test_all_equal_ascending(self):
        assert [i for i, _ in top_k_summary([0.5] * 4, 4)] == [0, 1, 2, 3]

    def test_names_attached(self):
        out = top_k_summary([0.1, 0.9], 1, names=["a", "b"])
        assert out == [(1, "b", 0.9)]

    def test_invalid_k(self):
        with pytest.raises(ValidationError):
            top_k_summary([0.5], 0)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=30),
           st.integers(1, 10))
    def test_sorted_descending_and_bounded(self, scores, k):
        out = top_k_summary(scores, k)
        assert len(out) == min(k, len(scores))
        vals = [s for _, s in out]
        assert vals == sorted(vals, reverse=True)
        # each reported score matches its index
        for i, s in out:
            assert s == scores[i]


@pytest.fixture(scope="module")
def motif():
    ds, planted = planted_motif_dataset()
    params, config, report = train_motif_gcn(ds)
    center = pick_explainable_center(ds, planted, params, config)
    return ds, planted, params, config, center


class TestGnnExplainer:
    def test_identity_recovery_with_saturated_masks(self, sbm, sbm_gcn):
        """Mask logits driven to +inf (sigmoid -> 1) reproduce the unmasked
        log-probabilities of the center within 1e-5."""
        from gnnscope.autodiff import Tensor
        from gnnscope.explain import (_entry_mask_index,
                                      _restricted_adjacency,
                                      extract_computation_subgraph)
        from gnnscope.models import gcn_graph

        params, config, _ = sbm_gcn
        center = 3
        base = infer(params, config, sbm.features, sbm.edges, sbm.num_nodes)
        sub = extract_computation_subgraph(sbm.edges, sbm.num_nodes, center)
        local = sub.local_edges()
        adj = _restricted_adjacency(sbm.edges, sbm.num_nodes, sub)
        mask_idx = _entry_mask_index(adj.rows, adj.cols, local)
        big = 1.0 / (1.0 + np.exp(-40.0))          # sigmoid of a huge logit
        entry_w = np.concatenate([np.full(len(local), big), [1.0]])[mask_idx]
        x_sub = sbm.features[sub.nodes].astype(np.float64) * big
        pt = {k: Tensor(v) for k, v in params.arrays.items()}
        lp, _ = gcn_graph(pt, Tensor(x_sub), adj, config, mode="eval",
                          edge_weights=entry_w)
        np.testing.assert_allclose(lp.value[sub.local_center],
                                   base.log_probs[center], atol=1e-5)

    def test_mask_ranges_and_shapes(self, sbm, sbm_gcn):
        params, config, _ = sbm_gcn
        cfg = ExplainConfig(epochs=5, seed=0)
        expl = run_gnn_explainer(params, config, sbm.features, sbm.edges,
                                 sbm.num_nodes, 10, cfg)
        assert ((expl.edge_mask >= 0) & (expl.edge_mask <= 1)).all()
        assert ((expl.feature_mask >= 0) & (expl.feature_mask <= 1)).all()
        assert expl.feature_mask.shape == (sbm.num_features,)
        assert len(expl.edge_mask) == len(expl.edges)
        assert len(expl.loss_trace) == 5

    def test_determinism(self, sbm, sbm_gcn):
        params, config, _ = sbm_gcn
        cfg = ExplainConfig(epochs=10, seed=4)
        a = run_gnn_explainer(params, config, sbm.features, sbm.edges,
                              sbm.num_nodes, 7, cfg)
        b = run_gnn_explainer(params, config, sbm.features, sbm.edges,
                              sbm.num_nodes, 7, cfg)
        np.testing.assert_array_equal(a.edge_mask, b.edge_mask)
        np.testing.assert_array_equal(a.feature_mask, b.feature_mask)
        assert a.loss_trace == b.loss_trace

    def test_loss_descends(self, sbm, sbm_gcn):
        params, config, _ = sbm_gcn
        expl = run_gnn_explainer(params, config, sbm.features, sbm.edges,
                                 sbm.num_nodes, 25,
                                 ExplainConfig(epochs=100, seed=0))
        assert expl.loss_trace[-1] <= expl.loss_trace[0]

    def test_gat_explainer_runs(self, sbm, sbm_gat):
        params, config, _ = sbm_gat
        expl = run_gnn_explainer(params, config, sbm.features, sbm.edges,
                                 sbm.num_nodes, 12,
                                 ExplainConfig(epochs=10, seed=0))
        assert ((expl.edge_mask >= 0) & (expl.edge_mask <= 1)).all()
        assert expl.loss_trace[-1] <= expl.loss_trace[0] + 1e-9

    def test_invalid_center(self, sbm, sbm_gcn):
        params, config, _ = sbm_gcn
        with pytest.raises(ValidationError) as e:
            run_gnn_explainer(params, config, sbm.features, sbm.edges,
                              sbm.num_nodes, 10_000)
        assert e.value.code == "invalid-node"

    def test_motif_oracle_smoke(self, motif):
        """Three seeds of the full 25-run acceptance oracle."""
        ds, planted, params, config, center = motif
        signal = planted[center]
        for seed in range(3):
            expl = run_gnn_explainer(params, config, ds.features, ds.edges,
                                     ds.num_nodes, center,
                                     motif_explain_config(seed),
                                     feature_names=ds.feature_names)
            (u, v), _ = expl.top_edges[0]
            assert {u, v} == {center, signal}
            assert expl.top_features[0][0] == 0

    def test_sparsity_monotonicity(self, motif):
        """10x the edge-size coefficient must not increase total edge mask."""
        ds, planted, params, config, center = motif
        def total(coeff):
            expl = run_gnn_explainer(
                params, config, ds.features, ds.edges, ds.num_nodes, center,
                ExplainConfig(epochs=200, edge_size_coeff=coeff, seed=0))
            return expl.edge_mask.sum()
        low, high = total(0.2), total(2.0)
        assert high <= low * 1.05

    def test_explainer_mask_gradients(self):
        """Finite-difference check of the full explainer objective w.r.t.
        mask logits on a small fixture."""
        from gnnscope import ModelConfig, TrainConfig, train_model
        from gnnscope import autodiff as ad
        from gnnscope.autodiff import Tensor
        from gnnscope.explain import _entropy, _entry_mask_index
        from gnnscope.models import gcn_graph
        from gnnscope.numerics import (build_normalized_adjacency,
                                       finite_difference_check)

        rng = np.random.default_rng(0)
        n, f = 8, 4
        x = rng.normal(size=(n, f))
        edges = np.array([[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 6],
                          [6, 7], [0, 7], [1, 5]])
        config = ModelConfig("gcn", in_dim=f, hidden_dim=3, num_classes=2,
                             dropout_rate=0.0, seed=0)
        from gnnscope import init_params
        params = init_params(config)
        pt = {k: Tensor(v) for k, v in params.arrays.items()}
        adj = build_normalized_adjacency(edges, n)
        directed = np.vstack([edges, edges[:, ::-1]])
        mask_idx = _entry_mask_index(adj.rows, adj.cols, directed)
        target = 0
        cfg = ExplainConfig()

        def loss_fn(p):
            el = Tensor(p[0], requires_grad=True)
            fl = Tensor(p[1], requires_grad=True)
            m_e, m_f = ad.sigmoid(el), ad.sigmoid(fl)
            padded = ad.concat([m_e, Tensor(np.ones(1))], axis=0)
            w = ad.gather_rows(padded, mask_idx)
            xm = Tensor(x) * ad.reshape(m_f, (1, -1))
            lp, _ = gcn_graph(pt, xm, adj, config, mode="eval",
                              edge_weights=w)
            loss = ad.tsum(-ad.gather_nd(lp, [2], [target])) \
                + cfg.edge_size_coeff * ad.tsum(m_e) \
                + cfg.edge_entropy_coeff * ad.tmean(_entropy(m_e)) \
                + cfg.feat_size_coeff * ad.tsum(m_f) * (1.0 / f) \
                + cfg.feat_entropy_coeff * ad.tmean(_entropy(m_f))
            loss.backward()
            return float(loss.value), [el.grad, fl.grad]

        rep = finite_difference_check(
            loss_fn, [rng.normal(0, 0.1, len(directed)),
                      rng.normal(0, 0.1, f)], eps=1e-5, tolerance=1e-4)
        assert rep.passed, rep


class TestAttention:
    def test_assigns_sum_to_one(self, sbm, sbm_gat):
        params, config, _ = sbm_gat
        res = infer(params, config, sbm.features, sbm.edges, sbm.num_nodes)
        summary = extract_attention(res, 5)
        per_head = np.array([ph for _, ph, _ in summary.assigns])
        np.testing.assert_allclose(per_head.sum(axis=0), 1.0, atol=1e-6)
        # self-attention entry present
        assert any(n == 5 for n, _, _ in summary.assigns)

    def test_isolated_node_self_score_one(self, sbm_gat):
        params, config, _ = sbm_gat
        x = np.zeros((3, config.in_dim), np.float32)
        res = infer(params, config, x, np.zeros((0, 2), np.int64), 3)
        summary = extract_attention(res, 1)
        assert len(summary.assigns) == 1
        n, ph, mean = summary.assigns[0]
        assert n == 1
        np.testing.assert_allclose(ph, 1.0)
        assert mean == 1.0

    def test_gcn_raises_model_not_gat(self, sbm, sbm_gcn):
        params, config, _ = sbm_gcn
        res = infer(params, config, sbm.features, sbm.edges, sbm.num_nodes)
        with pytest.raises(ValidationError) as e:
            extract_attention(res, 0)
        assert e.value.code == "model-not-gat"

    def test_receives_direction(self, sbm, sbm_gat):
        params, config, _ = sbm_gat
        res = infer(params, config, sbm.features, sbm.edges, sbm.num_nodes)
        summary = extract_attention(res, 5)
        receive_ids = [n for n, _, _ in summary.receives]
        assign_ids = [n for n, _, _ in summary.assigns]
        # the neighborhoods are symmetric even if scores are not
        assert sorted(receive_ids) == sorted(assign_ids)
