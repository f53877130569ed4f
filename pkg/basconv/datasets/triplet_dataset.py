import math
from typing import NamedTuple

import numpy as np
import torch
from torch.utils.data import IterableDataset

from basconv.ops.kernels import RngStream
from basconv.utils.errors import EmptyGraphError

BASKET_LEVEL = 'basket'
USER_LEVEL = 'user'


class Triplet(NamedTuple):
    b: int
    i_pos: int
    j_neg: int


def _contains(csr, rows, cols):
    if len(rows) == 0:
        return np.zeros(0, dtype=bool)
    return np.asarray(csr[rows, cols]).ravel() > 0


def _sample(positives, known, n, rng):
    """
    Rows uniform over rows with at least one positive and one unknown item,
    positives uniform within the row, negatives uniform over items with
    rejection against `known`.
    """
    n_items = positives.shape[1]
    sizes = np.diff(positives.indptr)
    known_sizes = np.diff(known.indptr)
    eligible = np.flatnonzero((sizes > 0) & (known_sizes < n_items))
    if len(eligible) == 0:
        raise EmptyGraphError('No row has both a positive item and a candidate negative item')
    gen = rng.generator
    rows = eligible[gen.integers(len(eligible), size=n)]
    pos = positives.indices[positives.indptr[rows] + gen.integers(sizes[rows])]
    neg = gen.integers(n_items, size=n)
    bad = _contains(known, rows, neg)
    while bad.any():
        neg[bad] = gen.integers(n_items, size=int(bad.sum()))
        bad[bad] = _contains(known, rows[bad], neg[bad])
    return rows.astype(np.int64), pos.astype(np.int64), neg.astype(np.int64)


def sample_triplets(split, n, rng):
    """
    BPR triplets (b, i_pos, j_neg) for partially given baskets. Positives come
    from the training items of b, negatives avoid every known item of b,
    held-out ones included.
    :return: (baskets, positives, negatives) int64 arrays of length n
    """
    return _sample(split.train_graph.basket_items, split.full_graph.basket_items, n, rng)


def sample_user_triplets(split, n, rng):
    """BPR triplets over baskets merged per user: (u, i_pos, j_neg)."""
    return _sample(split.train_graph.user_items, split.full_graph.user_items, n, rng)


def as_triplets(rows, pos, neg):
    return [Triplet(int(b), int(i), int(j)) for b, i, j in zip(rows, pos, neg)]


class TripletDataset(IterableDataset):
    """
    Freshly sampled triplets every epoch, yielded in batches.
    Epoch e draws from RngStream(seed).child(e), so a resumed run continues the same streams.
    """

    def __init__(self, split, batch_size, seed, level=BASKET_LEVEL, start_epoch=0):
        self.split = split
        self.batch_size = batch_size
        self.seed = seed
        self.level = level
        self.epoch = start_epoch
        graph = split.train_graph
        self.n_per_epoch = graph.basket_items.nnz if level == BASKET_LEVEL else graph.user_items.nnz

    def __len__(self):
        return math.ceil(self.n_per_epoch / self.batch_size)

    def __iter__(self):
        rng = RngStream(self.seed).child(self.epoch)
        self.epoch += 1
        sampler = sample_triplets if self.level == BASKET_LEVEL else sample_user_triplets
        rows, pos, neg = sampler(self.split, self.n_per_epoch, rng)
        for start in range(0, self.n_per_epoch, self.batch_size):
            end = start + self.batch_size
            yield {
                'rows': torch.from_numpy(rows[start:end]),
                'pos': torch.from_numpy(pos[start:end]),
                'neg': torch.from_numpy(neg[start:end]),
            }
