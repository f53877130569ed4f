import logging
import os

import numpy as np
import pandas as pd

from basconv.datasets.types import SplitResult, UbiGraph, _binary_csr
from basconv.utils.errors import ArtifactNotFoundError
from basconv.utils.utils import dump_json

logger = logging.getLogger(__name__)

PREPARED_FILES = ('users.parquet', 'baskets.parquet', 'items.parquet', 'edges.parquet')
SUMMARY_FILE = 'summary.json'

ROLE_TRAIN = 'train'
ROLE_VALIDATION = 'validation'
ROLE_HELDOUT = 'heldout'


def _edge_frame(split):
    frames = []
    fit = split.fit_graph.basket_items
    b, i = fit.nonzero()
    frames.append(pd.DataFrame({'basket': b, 'item': i, 'role': ROLE_TRAIN}))
    for role, sets in ((ROLE_VALIDATION, split.masked_validation), (ROLE_HELDOUT, split.heldout)):
        for basket in sorted(sets):
            items = sets[basket]
            frames.append(pd.DataFrame({'basket': np.full(len(items), basket), 'item': items, 'role': role}))
    edges = pd.concat(frames, ignore_index=True)
    edges = edges.astype({'basket': np.int64, 'item': np.int64, 'role': str})
    return edges.sort_values(['basket', 'role', 'item'], kind='stable').reset_index(drop=True)


def save_prepared(out_dir, split, summary):
    """
    Persist a split as parquet tables plus a JSON summary.
    :return: dict mapping file name to path
    """
    os.makedirs(out_dir, exist_ok=True)
    graph = split.full_graph
    tables = {
        'users.parquet': pd.DataFrame({'user_id': graph.user_ids.astype(str)}),
        'baskets.parquet': pd.DataFrame({'basket_id': graph.basket_ids.astype(str), 'user': graph.owner}),
        'items.parquet': pd.DataFrame({'item_id': graph.item_ids.astype(str)}),
        'edges.parquet': _edge_frame(split),
    }
    paths = {}
    for name, table in tables.items():
        paths[name] = os.path.join(out_dir, name)
        table.to_parquet(paths[name], engine='pyarrow', index=False)
    paths[SUMMARY_FILE] = os.path.join(out_dir, SUMMARY_FILE)
    dump_json(summary, paths[SUMMARY_FILE])
    logger.info('Prepared artifacts are saved at: %s', out_dir)
    return paths


def load_prepared(out_dir):
    for name in PREPARED_FILES:
        path = os.path.join(out_dir, name)
        if not os.path.exists(path):
            raise ArtifactNotFoundError(f'Missing prepared artifact: {path} (run `basconv prepare` first)')
    users = pd.read_parquet(os.path.join(out_dir, 'users.parquet'))
    baskets = pd.read_parquet(os.path.join(out_dir, 'baskets.parquet'))
    items = pd.read_parquet(os.path.join(out_dir, 'items.parquet'))
    edges = pd.read_parquet(os.path.join(out_dir, 'edges.parquet'))

    shape = (len(baskets), len(items))
    full = UbiGraph.from_index_arrays(baskets['user'].to_numpy(), edges['basket'].to_numpy(),
                                      edges['item'].to_numpy(), users['user_id'].to_numpy(),
                                      baskets['basket_id'].to_numpy(), items['item_id'].to_numpy())

    def by_role(*roles):
        return edges[edges['role'].isin(roles)]

    def to_sets(frame):
        return {int(b): np.sort(g['item'].to_numpy(np.int64)) for b, g in frame.groupby('basket', sort=True)}

    train = by_role(ROLE_TRAIN, ROLE_VALIDATION)
    fit = by_role(ROLE_TRAIN)
    return SplitResult(
        full_graph=full,
        train_graph=full.with_basket_items(_binary_csr(train['basket'].to_numpy(), train['item'].to_numpy(), shape)),
        fit_graph=full.with_basket_items(_binary_csr(fit['basket'].to_numpy(), fit['item'].to_numpy(), shape)),
        heldout=to_sets(by_role(ROLE_HELDOUT)),
        masked_validation=to_sets(by_role(ROLE_VALIDATION)),
    )
