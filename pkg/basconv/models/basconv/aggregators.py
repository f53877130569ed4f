"""
Heterogeneous aggregators of BasConv in matrix form.

Every interactive term is a degree-normalised neighbour aggregation R~ E
(R~ = D^-1 R, normalised by the degree of the node being updated) combined
with the node's own embedding by a Hadamard product and a shared d x d
transform. Layer l+1 is computed from layer l only.
"""
from dataclasses import dataclass
from typing import List

import numpy as np
import torch
import torch.nn as nn

from basconv.datasets.ubi_graph import interaction_matrix, normalize_rows
from basconv.ops.kernels import DTYPE, activation, add, hadamard, matmul, spmm, xavier_init
from basconv.utils.errors import DimensionError

HADAMARD_FIRST = 'hadamard_first'
TRANSFORM_FIRST = 'transform_first'


@dataclass(frozen=True, eq=False)
class UbiAdjacency:
    """Row-normalised interaction matrices of one graph, one per aggregation direction."""
    ub_by_basket: object  # |B| x |U|, one owner per basket
    ub_by_user: object  # |U| x |B|
    ui_by_user: object  # |U| x |I|
    ui_by_item: object  # |I| x |U|
    bi_by_basket: object  # |B| x |I|
    bi_by_item: object  # |I| x |B|
    owner: torch.Tensor

    @classmethod
    def from_graph(cls, graph):
        r_ub = interaction_matrix(graph, 'ub')
        r_ui = interaction_matrix(graph, 'ui')
        r_bi = interaction_matrix(graph, 'bi')
        return cls(
            ub_by_basket=normalize_rows(r_ub.T),
            ub_by_user=normalize_rows(r_ub),
            ui_by_user=normalize_rows(r_ui),
            ui_by_item=normalize_rows(r_ui.T),
            bi_by_basket=normalize_rows(r_bi),
            bi_by_item=normalize_rows(r_bi.T),
            owner=torch.from_numpy(np.asarray(graph.owner, dtype=np.int64)),
        )

    @property
    def n_users(self):
        return self.ub_by_user.rows

    @property
    def n_baskets(self):
        return self.ub_by_basket.rows

    @property
    def n_items(self):
        return self.bi_by_item.rows


class LayerParams(nn.Module):
    """W_sp (shared by all node types), W_ub, W_ui, W_ib and an optional bias row."""

    def __init__(self, dim, rng, use_bias=False):
        super().__init__()
        self.W_sp = nn.Parameter(xavier_init(dim, dim, rng))
        self.W_ub = nn.Parameter(xavier_init(dim, dim, rng))
        self.W_ui = nn.Parameter(xavier_init(dim, dim, rng))
        self.W_ib = nn.Parameter(xavier_init(dim, dim, rng))
        self.bias = nn.Parameter(xavier_init(1, dim, rng)) if use_bias else None


class BasConvParams(nn.Module):
    """
    Trainable parameters: E_u^(0), E_i^(0) and L LayerParams.
    E_b^(0) is the constant zero matrix and is not a parameter.
    """

    def __init__(self, n_users, n_items, dim, num_layers, rng, activation_kind='sigmoid', use_bias=False,
                 precedence=HADAMARD_FIRST):
        super().__init__()
        self.dim = dim
        self.activation_kind = activation_kind
        self.use_bias = use_bias
        self.precedence = precedence
        self.E_u0 = nn.Parameter(xavier_init(n_users, dim, rng))
        self.E_i0 = nn.Parameter(xavier_init(n_items, dim, rng))
        self.layers = nn.ModuleList([LayerParams(dim, rng, use_bias) for _ in range(num_layers)])

    @property
    def num_layers(self):
        return len(self.layers)

    def parameters_per_layer(self):
        return 4 * self.dim * self.dim + (self.dim if self.use_bias else 0)


@dataclass
class LayerEmbeddings:
    users: List[torch.Tensor]
    baskets: List[torch.Tensor]
    items: List[torch.Tensor]

    @property
    def num_layers(self):
        return len(self.users) - 1


@dataclass
class OutputEmbeddings:
    users: torch.Tensor
    baskets: torch.Tensor
    items: torch.Tensor


def self_propagate(E, W_sp):
    return matmul(E, W_sp)


def interact(neighbor_agg, self_emb, W, precedence=HADAMARD_FIRST):
    """
    (R~E_neighbor (.) E_self) W, the degree normalisation already folded into neighbor_agg.
    transform_first reads the product as E_self (.) (R~E_neighbor W).
    """
    if precedence == HADAMARD_FIRST:
        return matmul(hadamard(neighbor_agg, self_emb), W)
    if precedence == TRANSFORM_FIRST:
        return hadamard(self_emb, matmul(neighbor_agg, W))
    raise ValueError(f'Unknown precedence: {precedence}')


def _activate(h, layer, activation_kind):
    if layer.bias is not None:
        h = h + layer.bias
    return activation(h, activation_kind)


def basket_update(adj, E_u, E_b, E_i, layer, activation_kind='sigmoid', precedence=HADAMARD_FIRST):
    h = add(self_propagate(E_b, layer.W_sp), interact(spmm(adj.ub_by_basket, E_u), E_b, layer.W_ub, precedence))
    h = add(h, interact(spmm(adj.bi_by_basket, E_i), E_b, layer.W_ib, precedence))
    return _activate(h, layer, activation_kind)


def user_update(adj, E_u, E_b, E_i, layer, activation_kind='sigmoid', precedence=HADAMARD_FIRST):
    h = add(self_propagate(E_u, layer.W_sp), interact(spmm(adj.ub_by_user, E_b), E_u, layer.W_ub, precedence))
    h = add(h, interact(spmm(adj.ui_by_user, E_i), E_u, layer.W_ui, precedence))
    return _activate(h, layer, activation_kind)


def item_update(adj, E_u, E_b, E_i, layer, activation_kind='sigmoid', precedence=HADAMARD_FIRST):
    h = add(self_propagate(E_i, layer.W_sp), interact(spmm(adj.ui_by_item, E_u), E_i, layer.W_ui, precedence))
    h = add(h, interact(spmm(adj.bi_by_item, E_b), E_i, layer.W_ib, precedence))
    return _activate(h, layer, activation_kind)


def forward(adj, params):
    """All L+1 layers of user, basket and item embeddings, E_b^(0) = 0."""
    if params.num_layers < 1:
        raise DimensionError('forward needs at least one layer')
    if params.E_u0.shape[0] != adj.n_users or params.E_i0.shape[0] != adj.n_items:
        raise DimensionError('Parameter shapes {} / {} do not match graph with {} users and {} items'.format(
            tuple(params.E_u0.shape), tuple(params.E_i0.shape), adj.n_users, adj.n_items))
    E_u, E_i = params.E_u0, params.E_i0
    E_b = torch.zeros(adj.n_baskets, params.dim, dtype=DTYPE, device=E_u.device)
    layers = LayerEmbeddings([E_u], [E_b], [E_i])
    kwargs = dict(activation_kind=params.activation_kind, precedence=params.precedence)
    for layer in params.layers:
        E_u, E_b, E_i = (user_update(adj, E_u, E_b, E_i, layer, **kwargs),
                         basket_update(adj, E_u, E_b, E_i, layer, **kwargs),
                         item_update(adj, E_u, E_b, E_i, layer, **kwargs))
        layers.users.append(E_u)
        layers.baskets.append(E_b)
        layers.items.append(E_i)
    return layers


def concat_output(layers):
    return OutputEmbeddings(users=torch.cat(layers.users, dim=1), baskets=torch.cat(layers.baskets, dim=1),
                            items=torch.cat(layers.items, dim=1))


def score_pairs(out, owner, baskets, items):
    """y(b, i) = e*_{u_b} . e*_i + e*_b . e*_i for aligned index tensors."""
    owner = torch.as_tensor(owner)
    e_i = out.items[items]
    return (out.users[owner[baskets]] * e_i).sum(dim=1) + (out.baskets[baskets] * e_i).sum(dim=1)


def score(out, owner, b, i):
    if not 0 <= b < out.baskets.shape[0]:
        raise IndexError(f'basket index {b} out of range [0, {out.baskets.shape[0]})')
    if not 0 <= i < out.items.shape[0]:
        raise IndexError(f'item index {i} out of range [0, {out.items.shape[0]})')
    e_i = out.items[i]
    return float(out.users[int(owner[b])] @ e_i + out.baskets[b] @ e_i)


def cold_basket_output(layers, params, user, items):
    """
    Concatenated embedding of a basket that is not a graph node: the basket
    aggregator chain run from E_b^(0) = 0 with the given owner and items.
    An empty basket has no basket term: its output is all zeros.
    """
    items = torch.as_tensor(np.unique(np.asarray(items, dtype=np.int64)))
    e_b = torch.zeros(1, params.dim, dtype=DTYPE)
    if len(items) == 0:
        return torch.zeros(1, params.dim * (params.num_layers + 1), dtype=DTYPE)
    outputs = [e_b]
    for l, layer in enumerate(params.layers):
        e_u = layers.users[l][user].unsqueeze(0)
        item_agg = layers.items[l][items].mean(dim=0, keepdim=True)
        h = self_propagate(e_b, layer.W_sp)
        h = h + interact(e_u, e_b, layer.W_ub, params.precedence)
        h = h + interact(item_agg, e_b, layer.W_ib, params.precedence)
        e_b = _activate(h, layer, params.activation_kind)
        outputs.append(e_b)
    return torch.cat(outputs, dim=1)
