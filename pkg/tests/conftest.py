import numpy as np
import pandas as pd
import pytest

from basconv.datasets import TransactionLog, UbiGraph, build_ubi_graph, split_within_basket
from basconv.utils.config import TrainConfig


def make_log(rows):
    return TransactionLog(pd.DataFrame(rows, columns=['user', 'basket', 'item']))


def random_graph(n_users, n_baskets, n_items, seed, min_size=2, max_size=4):
    """Random graph where every user owns at least one basket and every basket has min_size..max_size items."""
    rng = np.random.default_rng(seed)
    owner = np.concatenate([np.arange(n_users), rng.integers(n_users, size=n_baskets - n_users)])
    baskets, items = [], []
    for b in range(n_baskets):
        size = int(rng.integers(min_size, max_size + 1))
        chosen = rng.choice(n_items, size=size, replace=False)
        baskets.extend([b] * size)
        items.extend(chosen.tolist())
    return UbiGraph.from_index_arrays(owner, baskets, items, [f'u{u}' for u in range(n_users)],
                                      [f'b{b}' for b in range(n_baskets)], [f'i{i}' for i in range(n_items)])


@pytest.fixture
def tiny_log():
    return make_log([
        ('u1', 'b1', 'apple'), ('u1', 'b1', 'milk'), ('u1', 'b1', 'bread'),
        ('u1', 'b2', 'milk'), ('u1', 'b2', 'eggs'), ('u1', 'b2', 'apple'),
        ('u2', 'b3', 'beer'), ('u2', 'b3', 'chips'), ('u2', 'b3', 'salsa'), ('u2', 'b3', 'milk'),
        ('u3', 'b4', 'bread'), ('u3', 'b4', 'eggs'), ('u3', 'b4', 'butter'),
        ('u3', 'b5', 'tea'),
    ])


@pytest.fixture
def tiny_graph(tiny_log):
    return build_ubi_graph(tiny_log, min_basket_size=2)


@pytest.fixture
def small_graph():
    return random_graph(n_users=5, n_baskets=6, n_items=8, seed=3)


@pytest.fixture
def small_split():
    graph = random_graph(n_users=6, n_baskets=12, n_items=15, seed=11, min_size=4, max_size=6)
    return split_within_basket(graph, train_frac=0.6, seed=1, val_frac=0.34)


@pytest.fixture
def small_config():
    return TrainConfig(model_name='basconv', embedding_dim=4, num_layers=2, learning_rate=1e-2, lambda_reg=1e-4,
                       batch_size=16, max_epochs=2, patience=5, seed=7, k=5, eval_batch_size=4)
