import torch

from basconv.models.base_model import BaseRecommender
from basconv.models.base_model.base_model import INIT_STREAM
from basconv.models.base_model.model_utils import EmbeddingScorer, top_k_frame
from basconv.models.basconv.aggregators import (BasConvParams, UbiAdjacency, cold_basket_output, concat_output,
                                                forward, score_pairs)
from basconv.ops.kernels import RngStream


class BasConv(BaseRecommender):
    """
    Basket-aware graph convolution over the user-basket-item graph.
    Scores y(b, i) = e*_{u_b} . e*_i + e*_b . e*_i from the concatenation of all layers.
    """

    def __init__(self, config, split):
        super(BasConv, self).__init__(config, split)
        graph = split.train_graph
        rng = RngStream(config.seed).child(INIT_STREAM)
        self.params = BasConvParams(graph.n_users, graph.n_items, config.embedding_dim, config.num_layers, rng,
                                    activation_kind=config.activation, use_bias=config.bias_enabled,
                                    precedence=config.precedence)
        self.adj = UbiAdjacency.from_graph(graph)

    def forward(self, adj=None):
        return forward(self.adj if adj is None else adj, self.params)

    def triplet_scores(self, rows, pos, neg):
        out = concat_output(self.forward())
        return score_pairs(out, self.adj.owner, rows, pos), score_pairs(out, self.adj.owner, rows, neg)

    def _adjacency(self, graph):
        if graph is None or graph is self.split.train_graph:
            return self.adj
        return UbiAdjacency.from_graph(graph)

    def output_embeddings(self, graph=None):
        with torch.no_grad():
            return concat_output(self.forward(self._adjacency(graph)))

    def scorer(self, graph=None):
        adj = self._adjacency(graph)
        out = self.output_embeddings(graph)
        return EmbeddingScorer(out.users, out.items, adj.owner, baskets=out.baskets)

    def recommend(self, user, items, k=10, graph=None):
        """
        Top-k items for a basket that is not a graph node, owned by `user` and
        holding `items` (dense indices). Given items are excluded.
        :return: DataFrame with rank, item, score, user_term and basket_term
        """
        with torch.no_grad():
            layers = self.forward(self._adjacency(graph))
            out = concat_output(layers)
            e_b = cold_basket_output(layers, self.params, user, items)
            user_term = (out.users[user] @ out.items.T).numpy()
            basket_term = (e_b @ out.items.T)[0].numpy()
        return top_k_frame(user_term, basket_term, items, k)
