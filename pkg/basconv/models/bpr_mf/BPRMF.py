import numpy as np
import torch
import torch.nn as nn

from basconv.datasets.triplet_dataset import USER_LEVEL
from basconv.models.base_model import BaseRecommender
from basconv.models.base_model.base_model import INIT_STREAM
from basconv.models.base_model.model_utils import EmbeddingScorer, top_k_frame
from basconv.ops.kernels import RngStream, xavier_init


class MFParams(nn.Module):
    def __init__(self, n_users, n_items, dim, rng):
        super().__init__()
        self.E_u = nn.Parameter(xavier_init(n_users, dim, rng))
        self.E_i = nn.Parameter(xavier_init(n_items, dim, rng))


class BPRMF(BaseRecommender):
    """
    Matrix factorisation trained with BPR on user-item interactions merged
    over each user's baskets. A basket is scored through its owner only.
    """
    triplet_level = USER_LEVEL

    def __init__(self, config, split):
        super(BPRMF, self).__init__(config, split)
        graph = split.train_graph
        self.params = MFParams(graph.n_users, graph.n_items, config.embedding_dim,
                               RngStream(config.seed).child(INIT_STREAM))
        self.owner = torch.from_numpy(graph.owner)

    def triplet_scores(self, rows, pos, neg):
        e_u = self.params.E_u[rows]
        return (e_u * self.params.E_i[pos]).sum(dim=1), (e_u * self.params.E_i[neg]).sum(dim=1)

    def scorer(self, graph=None):
        owner = self.owner if graph is None else torch.from_numpy(graph.owner)
        return EmbeddingScorer(self.params.E_u, self.params.E_i, owner)

    def recommend(self, user, items, k=10, graph=None):
        """Owner-only ranking: the basket term of matrix factorisation is zero."""
        with torch.no_grad():
            user_term = (self.params.E_u[user] @ self.params.E_i.T).numpy()
        return top_k_frame(user_term, np.zeros_like(user_term), items, k)
