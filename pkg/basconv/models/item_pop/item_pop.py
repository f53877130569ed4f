import numpy as np

from basconv.models.base_model.model_utils import top_k_frame


class ItemPop:
    """
    Non-learned baseline: items the basket's owner bought most often in training.
    Ties are broken by global training frequency, then by item index.
    """
    kind = 'item_pop'

    def __init__(self, config, split, graph=None):
        self.config = config
        self.split = split
        self.graph = split.train_graph if graph is None else graph
        # number of the user's training baskets containing the item
        self.user_counts = (self.graph.user_baskets @ self.graph.basket_items).tocsr()
        global_counts = np.asarray(self.graph.basket_items.sum(axis=0), dtype=np.float64).ravel()
        # strictly below 1, so it only orders items with equal user counts
        self.tie_break = global_counts / (global_counts.max(initial=0.0) + 1.0)

    def scorer(self, graph=None):
        if graph is None or graph is self.graph:
            return self
        return ItemPop(self.config, self.split, graph)

    def user_scores(self, users):
        return self.user_counts[np.asarray(users, dtype=np.int64)].toarray() + self.tie_break[None, :]

    def basket_scores(self, baskets):
        return self.user_scores(self.graph.owner[np.asarray(baskets, dtype=np.int64)])

    def recommend(self, user, items, k=10, graph=None):
        user_term = self.scorer(graph).user_scores([user])[0]
        return top_k_frame(user_term, np.zeros_like(user_term), items, k)
