from .common_utils import load_prepared, save_prepared
from .split import split_within_basket, subsample_training
from .synthetic import planted_intent_log
from .transactions import load_instacart, load_transactions, sample_users
from .triplet_dataset import Triplet, TripletDataset, as_triplets, sample_triplets, sample_user_triplets
from .types import InteractionMatrix, MatrixKind, Relation, SplitResult, TransactionLog, UbiGraph
from .ubi_graph import (build_ubi_graph, export_edges, graph_statistics, interaction_matrix, normalize_rows,
                        to_transaction_log)

__all__ = [
    'InteractionMatrix', 'MatrixKind', 'Relation', 'SplitResult', 'TransactionLog', 'Triplet', 'TripletDataset',
    'UbiGraph', 'as_triplets', 'build_ubi_graph', 'export_edges', 'graph_statistics', 'interaction_matrix',
    'load_instacart', 'load_prepared', 'load_transactions', 'normalize_rows', 'planted_intent_log',
    'sample_triplets', 'sample_user_triplets', 'sample_users', 'save_prepared', 'split_within_basket',
    'subsample_training', 'to_transaction_log',
]
