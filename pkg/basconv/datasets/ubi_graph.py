import logging

import numpy as np
import pandas as pd
import scipy.sparse as sp

from basconv.datasets.types import InteractionMatrix, MatrixKind, Relation, TransactionLog, UbiGraph
from basconv.utils.errors import ConfigurationError, EmptyGraphError

logger = logging.getLogger(__name__)


def build_ubi_graph(log, min_basket_size=1):
    """
    Build the User-Basket-Item graph from a deduplicated transaction log.
    Baskets with fewer than `min_basket_size` distinct items are removed, users and
    items left without edges disappear, and the remaining vertices are numbered by
    first appearance in the filtered log.
    """
    if min_basket_size < 1:
        raise ConfigurationError(f'min_basket_size must be >= 1, got {min_basket_size}')
    records = log.records
    sizes = records.groupby('basket', sort=False)['item'].transform('size')
    kept = records[sizes >= min_basket_size]

    n_users, n_baskets, n_items = log.n_users, log.n_baskets, log.n_items
    if len(kept) == 0:
        raise EmptyGraphError(
            'empty graph: every basket has fewer than {} items; dropped {} baskets, {} users, '
            '{} items ({} records)'.format(min_basket_size, n_baskets, n_users, n_items, len(records)))

    user_codes, user_ids = pd.factorize(kept['user'])
    basket_codes, basket_ids = pd.factorize(kept['basket'])
    item_codes, item_ids = pd.factorize(kept['item'])

    owner = np.empty(len(basket_ids), dtype=np.int64)
    owner[basket_codes] = user_codes

    graph = UbiGraph.from_index_arrays(owner, basket_codes, item_codes, np.asarray(user_ids), np.asarray(basket_ids),
                                       np.asarray(item_ids))
    logger.info('UBI graph: %d users, %d baskets, %d items, %d basket-item edges '
                '(dropped %d baskets, %d users, %d items below min_basket_size=%d)',
                graph.n_users, graph.n_baskets, graph.n_items, graph.basket_items.nnz,
                n_baskets - graph.n_baskets, n_users - graph.n_users, n_items - graph.n_items, min_basket_size)
    return graph


def interaction_matrix(graph, relation):
    """Binary R_ub (|U|x|B|), R_bi (|B|x|I|) or R_ui (|U|x|I|)."""
    try:
        relation = Relation(relation)
    except ValueError:
        raise ConfigurationError(f'Unknown relation {relation!r}, expected one of {[r.value for r in Relation]}')
    matrix = {
        Relation.UB: graph.user_baskets,
        Relation.BI: graph.basket_items,
        Relation.UI: graph.user_items,
    }[relation]
    return InteractionMatrix(matrix.copy(), MatrixKind.BINARY)


def normalize_rows(m):
    """D^-1 R: divide each nonzero row by its sum, zero rows stay zero."""
    sums = np.asarray(m.matrix.sum(axis=1)).ravel()
    inv = np.zeros_like(sums, dtype=np.float64)
    np.divide(1.0, sums, out=inv, where=sums > 0)
    normalized = (sp.diags(inv) @ m.matrix).tocsr()
    normalized.sort_indices()
    return InteractionMatrix(normalized, MatrixKind.ROW_NORMALIZED)


def _histogram(degrees):
    values, counts = np.unique(degrees, return_counts=True)
    return {str(int(v)): int(c) for v, c in zip(values, counts)}


def graph_statistics(graph):
    """Counts, per-vertex averages and degree histograms of a graph."""
    basket_sizes = graph.basket_sizes()
    baskets_per_user = np.diff(graph.user_baskets.indptr)
    item_degrees = np.diff(graph.item_baskets.indptr)
    return {
        'n_users': int(graph.n_users),
        'n_items': int(graph.n_items),
        'n_baskets': int(graph.n_baskets),
        'n_interactions': int(graph.basket_items.nnz),
        'n_user_item_edges': int(graph.user_items.nnz),
        'baskets_per_user': round(float(baskets_per_user.mean()), 4) if graph.n_users else 0.0,
        'items_per_basket': round(float(basket_sizes.mean()), 4) if graph.n_baskets else 0.0,
        'histograms': {
            'basket_size': _histogram(basket_sizes),
            'user_baskets': _histogram(baskets_per_user),
            'item_baskets': _histogram(item_degrees),
        },
    }


def to_transaction_log(graph):
    """Basket-item edges back to raw-id records, baskets and items in index order."""
    basket_idx, item_idx = graph.basket_items.nonzero()
    records = pd.DataFrame({
        'user': graph.user_ids[graph.owner[basket_idx]].astype(str),
        'basket': graph.basket_ids[basket_idx].astype(str),
        'item': graph.item_ids[item_idx].astype(str),
    })
    return TransactionLog(records)


def export_edges(graph, path):
    """One edge per line: type<TAB>src<TAB>dst with raw ids."""
    with open(path, 'w') as f:
        for u, b in graph.edges_ub:
            f.write(f'ub\t{graph.user_ids[u]}\t{graph.basket_ids[b]}\n')
        for b, i in graph.edges_bi:
            f.write(f'bi\t{graph.basket_ids[b]}\t{graph.item_ids[i]}\n')
        for u, i in graph.edges_ui:
            f.write(f'ui\t{graph.user_ids[u]}\t{graph.item_ids[i]}\n')
    return path
