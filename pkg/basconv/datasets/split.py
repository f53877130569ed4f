import logging
import math

import numpy as np

from basconv.datasets.types import SplitResult, _binary_csr
from basconv.ops.kernels import RngStream
from basconv.utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

VALIDATION_STREAM = 1
EPS = 1e-9


def _n_keep(n, frac):
    """ceil(n * frac), repaired so both sides keep at least one item."""
    return min(max(math.ceil(n * frac - EPS), 1), n - 1)


def _csr_from_sets(item_sets, shape):
    rows = np.concatenate([np.full(len(items), b, dtype=np.int64) for b, items in item_sets.items()] or [[]])
    cols = np.concatenate([np.asarray(items, dtype=np.int64) for items in item_sets.values()] or [[]])
    return _binary_csr(rows.astype(np.int64), cols.astype(np.int64), shape)


def _split_items(items, frac, rng):
    shuffled = rng.generator.permutation(items)
    n_keep = _n_keep(len(items), frac)
    return np.sort(shuffled[:n_keep]), np.sort(shuffled[n_keep:])


def split_within_basket(graph, train_frac=0.8, seed=42, val_frac=0.0):
    """
    Split the items of every basket into a training and a held-out part.
    :param graph: UbiGraph, every basket with at least two items
    :param train_frac: share of each basket kept for training
    :param seed: seed of the split stream
    :param val_frac: share of each basket's training items masked for validation,
        drawn with a separately seeded stream; 0 disables validation
    :return: SplitResult
    """
    if not 0 < train_frac < 1:
        raise ConfigurationError(f'train_frac must be in (0, 1), got {train_frac}')
    if not 0 <= val_frac < 1:
        raise ConfigurationError(f'val_frac must be in [0, 1), got {val_frac}')
    sizes = graph.basket_sizes()
    if len(sizes) and sizes.min() < 2:
        b = int(np.argmin(sizes))
        raise ConfigurationError(
            'Basket {} has {} item(s) and cannot be split; raise data.min_basket_size to at least 2'.format(
                graph.basket_ids[b], int(sizes[b])))

    rng = RngStream(seed)
    train, heldout = {}, {}
    for b in range(graph.n_baskets):
        train[b], heldout[b] = _split_items(graph.items_of_basket(b), train_frac, rng)

    fit, validation = dict(train), {}
    if val_frac > 0:
        val_rng = rng.child(VALIDATION_STREAM)
        for b in range(graph.n_baskets):
            if len(train[b]) >= 2:
                fit[b], validation[b] = _split_items(train[b], 1.0 - val_frac, val_rng)

    shape = graph.basket_items.shape
    split = SplitResult(
        full_graph=graph,
        train_graph=graph.with_basket_items(_csr_from_sets(train, shape)),
        fit_graph=graph.with_basket_items(_csr_from_sets(fit, shape)),
        heldout=heldout,
        masked_validation=validation,
    )
    logger.info('Split %d baskets: %d training, %d held-out, %d validation edges',
                graph.n_baskets, split.train_graph.basket_items.nnz,
                sum(len(v) for v in heldout.values()), sum(len(v) for v in validation.values()))
    return split


def subsample_training(split, fraction, seed):
    """
    Keep ceil(fraction * |training edges|) training basket-item edges drawn uniformly.
    Held-out sets are unchanged except for baskets left without training items,
    which are dropped from evaluation.
    """
    if not 0 < fraction <= 1:
        raise ConfigurationError(f'fraction must be in (0, 1], got {fraction}')
    if fraction == 1:
        return split

    train = split.train_graph.basket_items
    rows, cols = train.nonzero()
    n_keep = max(math.ceil(fraction * len(rows) - EPS), 1)
    rng = RngStream(seed)
    keep = np.sort(rng.generator.choice(len(rows), size=n_keep, replace=False))
    kept = _binary_csr(rows[keep], cols[keep], train.shape)

    sizes = np.diff(kept.indptr)
    heldout = {b: items for b, items in split.heldout.items() if sizes[b] > 0}
    dropped = len(split.heldout) - len(heldout)
    if dropped:
        logger.warning('%d baskets lost all training items at fraction %.2f and were dropped from evaluation',
                       dropped, fraction)

    # validation items are training items; keep the ones that survived
    validation, fit_sets = {}, {}
    for b in range(train.shape[0]):
        row = kept.indices[kept.indptr[b]:kept.indptr[b + 1]]
        items = split.masked_validation.get(b)
        alive = items[np.isin(items, row)] if items is not None else row[:0]
        if len(alive) and len(row) > len(alive):
            validation[b] = alive
            fit_sets[b] = np.setdiff1d(row, alive)
        else:
            fit_sets[b] = row
    fit = _csr_from_sets(fit_sets, train.shape)

    logger.info('Subsampled training edges at fraction %.2f: %d of %d kept', fraction, n_keep, len(rows))
    return type(split)(
        full_graph=split.full_graph,
        train_graph=split.train_graph.with_basket_items(kept),
        fit_graph=split.train_graph.with_basket_items(fit),
        heldout=heldout,
        masked_validation=validation,
    )
