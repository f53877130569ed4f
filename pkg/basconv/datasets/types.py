from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from types import MappingProxyType
from typing import Mapping

import numpy as np
import pandas as pd
import scipy.sparse as sp
import torch

from basconv.ops.kernels import DTYPE
from basconv.utils.utils import sha256_hex

RECORD_COLUMNS = ('user', 'basket', 'item')


class Relation(str, Enum):
    UB = 'ub'
    BI = 'bi'
    UI = 'ui'


class MatrixKind(str, Enum):
    BINARY = 'binary'
    ROW_NORMALIZED = 'row_normalized'


@dataclass(frozen=True, eq=False)
class TransactionLog:
    """Deduplicated (user, basket, item) records in input order, raw ids as strings."""
    records: pd.DataFrame

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records.itertuples(index=False, name=None))

    @property
    def n_users(self):
        return self.records['user'].nunique()

    @property
    def n_baskets(self):
        return self.records['basket'].nunique()

    @property
    def n_items(self):
        return self.records['item'].nunique()


@dataclass(frozen=True, eq=False)
class InteractionMatrix:
    matrix: sp.csr_matrix
    kind: MatrixKind = MatrixKind.BINARY

    @property
    def rows(self):
        return self.matrix.shape[0]

    @property
    def cols(self):
        return self.matrix.shape[1]

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def nnz(self):
        return self.matrix.nnz

    @property
    def T(self):
        return InteractionMatrix(self.matrix.T.tocsr(), self.kind)

    def to_dense(self):
        return self.matrix.toarray()

    @cached_property
    def torch(self):
        coo = self.matrix.tocoo()
        indices = torch.from_numpy(np.vstack([coo.row, coo.col]).astype(np.int64))
        values = torch.from_numpy(coo.data.astype(np.float64))
        return torch.sparse_coo_tensor(indices, values, size=self.matrix.shape, dtype=DTYPE).coalesce()


def _binary_csr(rows, cols, shape):
    m = sp.csr_matrix((np.ones(len(rows), dtype=np.float64), (rows, cols)), shape=shape)
    m.sum_duplicates()
    m.data[:] = 1.0
    m.sort_indices()
    return m


@dataclass(frozen=True, eq=False)
class UbiGraph:
    """
    User-Basket-Item graph over dense indices.
    Basket-item edges are stored; user-basket edges follow from `owner` and
    user-item edges are derived: (u, i) exists iff u owns a basket containing i.
    """
    owner: np.ndarray
    basket_items: sp.csr_matrix
    user_ids: np.ndarray
    basket_ids: np.ndarray
    item_ids: np.ndarray

    @classmethod
    def from_index_arrays(cls, owner, basket_index, item_index, user_ids, basket_ids, item_ids):
        owner = np.asarray(owner, dtype=np.int64)
        basket_items = _binary_csr(np.asarray(basket_index, dtype=np.int64), np.asarray(item_index, dtype=np.int64),
                                   (len(basket_ids), len(item_ids)))
        return cls(owner=owner, basket_items=basket_items, user_ids=np.asarray(user_ids, dtype=object),
                   basket_ids=np.asarray(basket_ids, dtype=object), item_ids=np.asarray(item_ids, dtype=object))

    def with_basket_items(self, basket_items):
        """Same vertex sets and owners, different basket-item edges."""
        return UbiGraph(owner=self.owner, basket_items=basket_items, user_ids=self.user_ids,
                        basket_ids=self.basket_ids, item_ids=self.item_ids)

    @property
    def n_users(self):
        return len(self.user_ids)

    @property
    def n_baskets(self):
        return len(self.basket_ids)

    @property
    def n_items(self):
        return len(self.item_ids)

    @cached_property
    def user_baskets(self):
        return _binary_csr(self.owner, np.arange(self.n_baskets), (self.n_users, self.n_baskets))

    @cached_property
    def user_items(self):
        counts = (self.user_baskets @ self.basket_items).tocsr()
        return _binary_csr(*counts.nonzero(), counts.shape)

    @cached_property
    def item_baskets(self):
        return self.basket_items.T.tocsr()

    @cached_property
    def item_users(self):
        return self.user_items.T.tocsr()

    @property
    def edges_ub(self):
        return np.stack([self.owner, np.arange(self.n_baskets)], axis=1)

    @property
    def edges_bi(self):
        return np.stack(self.basket_items.nonzero(), axis=1)

    @property
    def edges_ui(self):
        return np.stack(self.user_items.nonzero(), axis=1)

    @staticmethod
    def _row(m, r):
        return m.indices[m.indptr[r]:m.indptr[r + 1]]

    def items_of_basket(self, b):
        return self._row(self.basket_items, b)

    def baskets_of_user(self, u):
        return self._row(self.user_baskets, u)

    def items_of_user(self, u):
        return self._row(self.user_items, u)

    def users_of_item(self, i):
        return self._row(self.item_users, i)

    def baskets_of_item(self, i):
        return self._row(self.item_baskets, i)

    def basket_sizes(self):
        return np.diff(self.basket_items.indptr)

    @cached_property
    def user_index(self):
        return {uid: idx for idx, uid in enumerate(self.user_ids)}

    @cached_property
    def basket_index(self):
        return {bid: idx for idx, bid in enumerate(self.basket_ids)}

    @cached_property
    def item_index(self):
        return {iid: idx for idx, iid in enumerate(self.item_ids)}

    def fingerprint(self):
        """Hash of the id maps; equal for a graph and any of its splits."""
        parts = ['\x1f'.join(map(str, ids)) for ids in (self.user_ids, self.basket_ids, self.item_ids)]
        return sha256_hex('\x1e'.join(parts) + '\x1e' + self.owner.tobytes().hex())


@dataclass(frozen=True, eq=False)
class SplitResult:
    """
    Within-basket split. `train_graph` holds the training portion, `fit_graph`
    the training portion minus `masked_validation`, `full_graph` the unsplit graph.
    Item sets are sorted int64 arrays keyed by basket index.
    """
    full_graph: UbiGraph
    train_graph: UbiGraph
    fit_graph: UbiGraph
    heldout: Mapping[int, np.ndarray] = field(default_factory=dict)
    masked_validation: Mapping[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'heldout', MappingProxyType(dict(self.heldout)))
        object.__setattr__(self, 'masked_validation', MappingProxyType(dict(self.masked_validation)))

    @property
    def evaluation_baskets(self):
        return np.array(sorted(self.heldout), dtype=np.int64)

    @property
    def has_validation(self):
        return len(self.masked_validation) > 0

    def validation_view(self):
        """Fit on `fit_graph`, score against the masked validation items."""
        return SplitResult(full_graph=self.full_graph, train_graph=self.fit_graph, fit_graph=self.fit_graph,
                           heldout=self.masked_validation, masked_validation={})
