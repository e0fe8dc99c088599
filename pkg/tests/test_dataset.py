"""Container format round-trips, validation errors, and split generation."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnnscope import (GraphDataset, SplitSpec, build_dataset, export_dataset,
                      load_dataset, make_random_split)
from gnnscope.errors import DataFormatError, ValidationError

from conftest import sbm_dataset, two_node_dataset


def dataset_equal(a: GraphDataset, b: GraphDataset):
    assert a.name == b.name
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.edges, b.edges)
    np.testing.assert_array_equal(a.labels, b.labels)
    np.testing.assert_array_equal(a.train_mask, b.train_mask)
    np.testing.assert_array_equal(a.val_mask, b.val_mask)
    np.testing.assert_array_equal(a.test_mask, b.test_mask)
    assert a.class_names == b.class_names
    assert a.feature_names == b.feature_names


class TestBuildAndValidate:
    def test_minimal_dataset(self):
        ds = two_node_dataset()
        assert ds.num_nodes == 2
        assert ds.num_classes == 2
        np.testing.assert_array_equal(ds.edges, [[0, 1]])

    def test_edges_canonicalized(self):
        ds = build_dataset("t", np.zeros((4, 1), np.float32),
                           [(3, 1), (1, 3), (2, 2), (0, 2)],
                           [0, 0, 0, 0], [True] * 4, [False] * 4,
                           [False] * 4, ["a"])
        # self-loop dropped, duplicates merged, u < v
        np.testing.assert_array_equal(ds.edges, [[0, 2], [1, 3]])

    def test_index_out_of_range(self):
        with pytest.raises(ValidationError) as e:
            build_dataset("t", np.zeros((3, 1), np.float32), [(0, 99)],
                          [0, 0, 0], [False] * 3, [False] * 3, [False] * 3,
                          ["a"])
        assert e.value.code == "index-out-of-range"
        assert "99" in str(e.value)

    def test_overlapping_masks_names_node(self):
        with pytest.raises(DataFormatError) as e:
            build_dataset("t", np.zeros((3, 1), np.float32), [],
                          [0, 0, 0], [False, True, False],
                          [False, True, False], [False] * 3, ["a"])
        assert e.value.code == "overlapping-masks"
        assert "1" in str(e.value)

    def test_split_label_out_of_range(self):
        with pytest.raises(ValidationError):
            build_dataset("t", np.zeros((2, 1), np.float32), [],
                          [0, 5], [True, True], [False] * 2, [False] * 2,
                          ["a", "b"])


class TestContainerFormat:
    def test_round_trip_fixture(self, tmp_path):
        ds = two_node_dataset()
        p = tmp_path / "pair.gnnds"
        export_dataset(ds, p)
        dataset_equal(ds, load_dataset(p))

    def test_reexport_byte_identical(self, tmp_path):
        ds = sbm_dataset(seed=3)
        p1, p2 = tmp_path / "a.gnnds", tmp_path / "b.gnnds"
        export_dataset(ds, p1)
        export_dataset(load_dataset(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.gnnds"
        p.write_bytes(b"NOTADS" + b"\x00" * 40)
        with pytest.raises(DataFormatError) as e:
            load_dataset(p)
        assert e.value.code == "bad-magic"

    def test_truncated_reports_offset(self, tmp_path):
        ds = two_node_dataset()
        p = tmp_path / "t.gnnds"
        export_dataset(ds, p)
        data = p.read_bytes()
        p.write_bytes(data[: len(data) // 2])
        with pytest.raises(DataFormatError) as e:
            load_dataset(p)
        assert e.value.code == "truncated-file"
        assert "offset" in str(e.value)

    def test_edge_out_of_range_in_file(self, tmp_path):
        ds = two_node_dataset()
        p = tmp_path / "t.gnnds"
        export_dataset(ds, p)
        data = bytearray(p.read_bytes())
        # locate the single edge pair (u32 0, u32 1) after the feature block
        needle = struct.pack("<II", 0, 1)
        idx = data.rindex(needle)
        data[idx:idx + 8] = struct.pack("<II", 0, 999999)
        p.write_bytes(bytes(data))
        with pytest.raises(DataFormatError) as e:
            load_dataset(p)
        assert e.value.code == "index-out-of-range"
        assert "999999" in str(e.value)

    def test_unwritable_path(self):
        with pytest.raises(DataFormatError) as e:
            export_dataset(two_node_dataset(), "/no/such/dir/x.gnnds")
        assert e.value.code == "io-error"

    @settings(max_examples=25, deadline=None)
    @given(st.data())
    def test_round_trip_random_datasets(self, tmp_path_factory, data):
        n = data.draw(st.integers(1, 12))
        f = data.draw(st.integers(1, 5))
        c = data.draw(st.integers(1, 4))
        rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
        feats = rng.normal(size=(n, f)).astype(np.float32)
        edges = [(int(a), int(b)) for a, b in
                 rng.integers(0, n, size=(data.draw(st.integers(0, 20)), 2))
                 if a != b]
        labels = rng.integers(0, c, size=n)
        masks = rng.integers(0, 4, size=n)   # 0 none, 1/2/3 one split each
        ds = build_dataset(
            "rand", feats, edges, labels, masks == 1, masks == 2, masks == 3,
            [f"c{i}" for i in range(c)],
            feature_names=[f"feat{i}" for i in range(f)]
            if data.draw(st.booleans()) else None)
        p = tmp_path_factory.mktemp("rt") / "ds.gnnds"
        export_dataset(ds, p)
        dataset_equal(ds, load_dataset(p))
        # canonical edge property survives the round trip
        loaded = load_dataset(p)
        if loaded.edges.size:
            assert (loaded.edges[:, 0] < loaded.edges[:, 1]).all()
            assert len(np.unique(loaded.edges, axis=0)) == len(loaded.edges)


class TestRandomSplit:
    def test_deterministic(self):
        ds = sbm_dataset(per_class=40)
        spec = SplitSpec(train_per_class=5, val_size=20, test_size=30, seed=7)
        a = make_random_split(ds, spec)
        b = make_random_split(ds, spec)
        np.testing.assert_array_equal(a.train_mask, b.train_mask)
        np.testing.assert_array_equal(a.val_mask, b.val_mask)
        np.testing.assert_array_equal(a.test_mask, b.test_mask)

    def test_split_sizes(self):
        ds = sbm_dataset(per_class=40, num_classes=3)
        out = make_random_split(
            ds, SplitSpec(train_per_class=5, val_size=20, test_size=30,
                          seed=0))
        assert out.train_mask.sum() == 15
        assert out.val_mask.sum() == 20
        assert out.test_mask.sum() == 30
        for c in range(3):
            assert (out.train_mask & (out.labels == c)).sum() == 5
        # disjointness
        assert not (out.train_mask & out.val_mask).any()
        assert not (out.val_mask & out.test_mask).any()

    def test_insufficient_class_population(self):
        ds = build_dataset("tiny", np.zeros((6, 1), np.float32), [],
                           [0, 0, 0, 1, 1, 1], [False] * 6, [False] * 6,
                           [False] * 6, ["a", "b"])
        with pytest.raises(ValidationError) as e:
            make_random_split(ds, SplitSpec(train_per_class=4, val_size=1,
                                            test_size=1, seed=0))
        assert e.value.code == "insufficient-class-population"
        assert "class 0" in str(e.value)

    def test_unsupported_kind(self):
        with pytest.raises(ValidationError):
            make_random_split(sbm_dataset(), SplitSpec(kind="planetoid-file"))
