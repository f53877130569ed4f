import math
import os

import numpy as np
import pytest

from basconv.datasets import (UbiGraph, build_ubi_graph, load_prepared, save_prepared, split_within_basket,
                              subsample_training)
from basconv.utils.errors import ArtifactNotFoundError, ConfigurationError
from conftest import random_graph


def test_every_basket_is_partitioned(tiny_graph):
    split = split_within_basket(tiny_graph, train_frac=0.8, seed=42)
    for b in range(tiny_graph.n_baskets):
        items = tiny_graph.items_of_basket(b)
        train = split.train_graph.items_of_basket(b)
        heldout = split.heldout[b]
        assert len(np.intersect1d(train, heldout)) == 0
        np.testing.assert_array_equal(np.union1d(train, heldout), items)
        # ceil(0.8 * n) repaired so both sides keep an item
        assert len(train) == min(max(math.ceil(0.8 * len(items)), 1), len(items) - 1)


def test_split_is_seeded(small_graph):
    a = split_within_basket(small_graph, seed=3)
    b = split_within_basket(small_graph, seed=3)
    assert (a.train_graph.basket_items != b.train_graph.basket_items).nnz == 0
    for basket in a.heldout:
        np.testing.assert_array_equal(a.heldout[basket], b.heldout[basket])


def test_single_item_basket_is_rejected(tiny_log):
    graph = build_ubi_graph(tiny_log, min_basket_size=1)
    with pytest.raises(ConfigurationError) as excinfo:
        split_within_basket(graph)
    assert 'min_basket_size' in str(excinfo.value)


def test_fraction_bounds(small_graph):
    with pytest.raises(ConfigurationError):
        split_within_basket(small_graph, train_frac=1.0)
    with pytest.raises(ConfigurationError):
        split_within_basket(small_graph, val_frac=1.0)


def test_validation_masks_training_items(small_split):
    assert small_split.has_validation
    for b, masked in small_split.masked_validation.items():
        train = small_split.train_graph.items_of_basket(b)
        fit = small_split.fit_graph.items_of_basket(b)
        assert np.isin(masked, train).all()
        assert len(np.intersect1d(fit, masked)) == 0
        np.testing.assert_array_equal(np.union1d(fit, masked), train)

    view = small_split.validation_view()
    assert view.train_graph is small_split.fit_graph
    assert dict(view.heldout).keys() == dict(small_split.masked_validation).keys()
    assert not view.has_validation


def test_validation_does_not_touch_heldout(small_graph):
    plain = split_within_basket(small_graph, seed=9)
    masked = split_within_basket(small_graph, seed=9, val_frac=0.5)
    assert (plain.train_graph.basket_items != masked.train_graph.basket_items).nnz == 0
    for b in plain.heldout:
        np.testing.assert_array_equal(plain.heldout[b], masked.heldout[b])


class TestSubsample:
    def test_identity_fraction(self, small_split):
        assert subsample_training(small_split, 1.0, seed=0) is small_split

    def test_keeps_ceil_of_edges(self, small_split):
        n = small_split.train_graph.basket_items.nnz
        sub = subsample_training(small_split, 0.4, seed=0)
        assert sub.train_graph.basket_items.nnz == math.ceil(0.4 * n - 1e-9)
        assert (sub.train_graph.basket_items > small_split.train_graph.basket_items).nnz == 0

    def test_baskets_without_training_items_leave_evaluation(self):
        graph = random_graph(n_users=3, n_baskets=20, n_items=10, seed=4)
        split = split_within_basket(graph, seed=0)
        sub = subsample_training(split, 0.1, seed=0)
        sizes = sub.train_graph.basket_sizes()
        assert all(sizes[b] > 0 for b in sub.heldout)
        assert len(sub.heldout) == int((sizes > 0).sum())

    def test_fraction_bounds(self, small_split):
        with pytest.raises(ConfigurationError):
            subsample_training(small_split, 0.0, seed=0)


class TestPreparedArtifacts:
    def test_round_trip(self, small_split, tmp_path):
        paths = save_prepared(str(tmp_path), small_split, {'seed': 1})
        assert all(os.path.exists(p) for p in paths.values())
        loaded = load_prepared(str(tmp_path))
        assert loaded.full_graph.fingerprint() == small_split.full_graph.fingerprint()
        for name in ('full_graph', 'train_graph', 'fit_graph'):
            assert (getattr(loaded, name).basket_items != getattr(small_split, name).basket_items).nnz == 0
        assert dict(loaded.heldout).keys() == dict(small_split.heldout).keys()
        for b in small_split.heldout:
            np.testing.assert_array_equal(loaded.heldout[b], small_split.heldout[b])
        for b in small_split.masked_validation:
            np.testing.assert_array_equal(loaded.masked_validation[b], small_split.masked_validation[b])

    def test_missing_artifact(self, tmp_path):
        with pytest.raises(ArtifactNotFoundError) as excinfo:
            load_prepared(str(tmp_path))
        assert 'users.parquet' in str(excinfo.value)


def test_graph_from_index_arrays_deduplicates():
    graph = UbiGraph.from_index_arrays([0], [0, 0, 0], [1, 1, 2], ['u'], ['b'], ['i0', 'i1', 'i2'])
    assert list(graph.items_of_basket(0)) == [1, 2]
