import numpy as np
import pandas as pd

from basconv.datasets.types import TransactionLog


def planted_intent_log(n_users=20, n_intents=4, items_per_intent=10, baskets_per_user=4, basket_size=6, seed=0):
    """
    Transactions with planted basket intents: items are partitioned into
    `n_intents` groups and every basket draws its items from a single group.
    Each basket picks its intent uniformly, so a user's history mixes intents.
    """
    rng = np.random.default_rng(seed)
    rows = []
    basket = 0
    for u in range(n_users):
        for _ in range(baskets_per_user):
            intent = int(rng.integers(n_intents))
            items = rng.choice(items_per_intent, size=basket_size, replace=False) + intent * items_per_intent
            rows.extend((f'u{u}', f'b{basket}', f'i{int(i)}') for i in items)
            basket += 1
    return TransactionLog(pd.DataFrame(rows, columns=['user', 'basket', 'item']))


def intent_of(item_id, items_per_intent=10):
    return int(item_id[1:]) // items_per_intent
