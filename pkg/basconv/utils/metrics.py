"""
Top-K ranking of candidate items and Recall / NDCG / HR at K.

A scorer is any object with `basket_scores(baskets) -> (len(baskets), n_items)`
array. Candidates for basket b are all items except b's training items, so the
held-out items of b compete against every item b has not shown.
"""
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from tqdm import tqdm

from basconv.utils.errors import ConfigurationError


@dataclass(frozen=True)
class RankingMetrics:
    recall_at_k: float
    ndcg_at_k: float
    hr_at_k: float
    k: int
    n_baskets: int
    n_skipped: int = 0

    def to_dict(self):
        return {'k': self.k, 'recall': self.recall_at_k, 'ndcg': self.ndcg_at_k, 'hr': self.hr_at_k,
                'n_baskets': self.n_baskets}


@dataclass(frozen=True, eq=False)
class EvaluationResult:
    metrics: RankingMetrics
    per_basket: pd.DataFrame = field(repr=False)


def _check_k(k):
    if k < 1:
        raise ConfigurationError(f'k must be >= 1, got {k}')


def recall_at_k(ranked, heldout, k):
    _check_k(k)
    if len(heldout) == 0:
        raise ValueError('recall is undefined for an empty held-out set')
    hits = np.isin(np.asarray(ranked)[:k], heldout).sum()
    return float(hits) / len(heldout)


def hr_at_k(ranked, heldout, k):
    _check_k(k)
    if len(heldout) == 0:
        raise ValueError('hit ratio is undefined for an empty held-out set')
    return float(np.isin(np.asarray(ranked)[:k], heldout).any())


def ndcg_at_k(ranked, heldout, k):
    """Binary relevance, log2(rank + 1) discount, ideal DCG over min(|heldout|, K) hits."""
    _check_k(k)
    if len(heldout) == 0:
        raise ValueError('NDCG is undefined for an empty held-out set')
    hits = np.isin(np.asarray(ranked)[:k], heldout)
    dcg = sum(1.0 / math.log2(pos + 2) for pos in np.flatnonzero(hits))
    idcg = sum(1.0 / math.log2(pos + 2) for pos in range(min(len(heldout), k)))
    return dcg / idcg


def rank_scores(scores, exclude, k):
    """
    Indices of the K best scores with `exclude` removed. Ties go to the lower item index.
    Returns fewer than K items when fewer candidates exist.
    """
    _check_k(k)
    scores = np.asarray(scores, dtype=np.float64)
    mask = np.ones(len(scores), dtype=bool)
    mask[np.asarray(exclude, dtype=np.int64)] = False
    candidates = np.flatnonzero(mask)
    order = np.argsort(-scores[candidates], kind='stable')
    return candidates[order[:k]]


def rank_items(scorer, split, b, k):
    if b not in split.heldout:
        raise KeyError(f'basket {b} has no held-out items')
    scores = scorer.basket_scores(np.array([b], dtype=np.int64))[0]
    return rank_scores(scores, split.train_graph.items_of_basket(b), k)


def basket_metrics(scorer, split, baskets, k):
    """Per-basket metrics for baskets with non-empty held-out sets."""
    baskets = np.asarray(baskets, dtype=np.int64)
    scores = np.asarray(scorer.basket_scores(baskets))
    rows = []
    for b, row in zip(baskets, scores):
        heldout = split.heldout[int(b)]
        ranked = rank_scores(row, split.train_graph.items_of_basket(int(b)), k)
        rows.append((int(b), len(heldout), recall_at_k(ranked, heldout, k), ndcg_at_k(ranked, heldout, k),
                     hr_at_k(ranked, heldout, k)))
    return rows


def summarize(rows, k, n_skipped=0):
    frame = pd.DataFrame(rows, columns=['basket', 'n_heldout', 'recall', 'ndcg', 'hr'])
    if frame.empty:
        return RankingMetrics(0.0, 0.0, 0.0, k, 0, n_skipped), frame
    metrics = RankingMetrics(recall_at_k=float(frame['recall'].mean()), ndcg_at_k=float(frame['ndcg'].mean()),
                             hr_at_k=float(frame['hr'].mean()), k=k, n_baskets=len(frame), n_skipped=n_skipped)
    return metrics, frame


def evaluate_scorer(scorer, split, k=100, batch_size=256, progress=False):
    """
    Average the metrics over held-out baskets. Baskets with an empty held-out
    set are skipped and counted.
    """
    _check_k(k)
    baskets = split.evaluation_baskets
    non_empty = np.array([b for b in baskets if len(split.heldout[int(b)]) > 0], dtype=np.int64)
    rows = []
    chunks = range(0, len(non_empty), batch_size)
    for start in tqdm(chunks, desc='evaluate', leave=False, disable=not progress):
        rows.extend(basket_metrics(scorer, split, non_empty[start:start + batch_size], k))
    metrics, frame = summarize(rows, k, n_skipped=len(baskets) - len(non_empty))
    return EvaluationResult(metrics=metrics, per_basket=frame)
