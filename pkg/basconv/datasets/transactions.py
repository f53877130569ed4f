import logging
import os

import numpy as np
import pandas as pd

from basconv.datasets.types import RECORD_COLUMNS, TransactionLog
from basconv.utils.errors import ArtifactNotFoundError, ConfigurationError, DataIntegrityError

logger = logging.getLogger(__name__)


def detect_delimiter(path):
    """Tab if the header row contains a tab, comma otherwise."""
    with open(path, 'r') as f:
        header = f.readline()
    return '\t' if '\t' in header else ','


def _read_table(path, columns):
    if not os.path.exists(path):
        raise ArtifactNotFoundError(f'Transaction file does not exist: {path}')
    sep = detect_delimiter(path)
    try:
        df = pd.read_csv(path, sep=sep, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise ConfigurationError(f'{path} has no header row; expected columns {list(columns)}')
    df.columns = [c.strip() for c in df.columns]
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise ConfigurationError(
            'Missing column(s) {} in {}; available: {}'.format(missing, path, list(df.columns)))
    return df


def _from_frame(df, user_col, basket_col, item_col, source):
    records = df[[user_col, basket_col, item_col]].copy()
    records.columns = list(RECORD_COLUMNS)
    n_raw = len(records)

    owners = records.groupby('basket', sort=False)['user'].nunique()
    shared = owners[owners > 1]
    if len(shared) > 0:
        basket = shared.index[0]
        users = sorted(records.loc[records['basket'] == basket, 'user'].unique())
        raise DataIntegrityError(
            'Basket {} appears under {} users {} in {} ({} such baskets)'.format(
                basket, len(users), users, source, len(shared)))

    records = records.drop_duplicates(subset=['basket', 'item'], keep='first').reset_index(drop=True)
    log = TransactionLog(records)
    if len(log) == 0:
        logger.warning('No transactions found in %s', source)
    else:
        logger.info('Loaded %d records from %s (%d duplicates removed): %d users, %d baskets, %d items',
                    len(log), source, n_raw - len(log), log.n_users, log.n_baskets, log.n_items)
    return log


def load_transactions(path, user_col='user_id', basket_col='order_id', item_col='product_id'):
    """
    Read a delimiter-separated transaction file (comma or tab, header row).
    :param path: transaction file
    :param user_col: header name of the user column
    :param basket_col: header name of the basket column
    :param item_col: header name of the item column
    :return: TransactionLog with duplicate (basket, item) rows collapsed, input order kept
    """
    df = _read_table(path, (user_col, basket_col, item_col))
    return _from_frame(df, user_col, basket_col, item_col, path)


def load_instacart(orders_path, order_products_paths):
    """
    Join the public Instacart export: orders.csv (order_id, user_id) with
    order_products__*.csv (order_id, product_id). Rows follow the order_products files.
    """
    if isinstance(order_products_paths, str):
        order_products_paths = [order_products_paths]
    if not order_products_paths:
        raise ConfigurationError('At least one order_products file is required')
    orders = _read_table(orders_path, ('order_id', 'user_id'))[['order_id', 'user_id']]
    parts = [_read_table(p, ('order_id', 'product_id'))[['order_id', 'product_id']] for p in order_products_paths]
    order_products = pd.concat(parts, ignore_index=True)
    logger.info('Joining %d order_products rows with %d orders', len(order_products), len(orders))
    joined = order_products.merge(orders, on='order_id', how='inner')
    dropped = len(order_products) - len(joined)
    if dropped:
        logger.warning('%d order_products rows reference unknown orders and were dropped', dropped)
    return _from_frame(joined, 'user_id', 'order_id', 'product_id', orders_path)


def sample_users(log, n_users, seed):
    """Keep the records of `n_users` users drawn uniformly without replacement."""
    users = log.records['user'].unique()
    if n_users is None or n_users >= len(users):
        return log
    rng = np.random.default_rng(seed)
    chosen = set(rng.choice(users, size=int(n_users), replace=False).tolist())
    records = log.records[log.records['user'].isin(chosen)].reset_index(drop=True)
    logger.info('Sampled %d of %d users (%d records)', len(chosen), len(users), len(records))
    return TransactionLog(records)
