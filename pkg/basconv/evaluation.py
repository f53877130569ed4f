"""
Held-out evaluation, the two baselines and the experiment sweeps
(training-data fraction, number of layers, learning rate).
"""
import logging
import os

import pandas as pd

from basconv.datasets.split import subsample_training
from basconv.models import ItemPop
from basconv.ops.kernels import derive_seed
from basconv.train import train
from basconv.utils.config import TrainConfig
from basconv.utils.errors import ConfigurationError
from basconv.utils.metrics import evaluate_scorer
from basconv.utils.utils import ARTIFACT_VERSION, dump_json

logger = logging.getLogger(__name__)

MODEL_LABELS = {'basconv': 'BasConv', 'bpr_mf': 'BPR-MF', 'item_pop': 'ItemPop'}
SWEEP_KINDS = ('fraction', 'layers', 'lr')
METRIC_COLUMNS = ['recall', 'ndcg', 'hr']


def evaluate(model, split, k=100, batch_size=256, per_basket=False, progress=False):
    """
    Recall/NDCG/HR@k over the held-out baskets of `split`, scoring with the
    full training graph. `model` is a trained model, a baseline or any scorer.
    :return: RankingMetrics, or EvaluationResult with per-basket rows when per_basket
    """
    scorer = model.scorer(split.train_graph) if hasattr(model, 'scorer') else model
    result = evaluate_scorer(scorer, split, k=k, batch_size=batch_size, progress=progress)
    logger.info('Recall@%d %.4f  NDCG@%d %.4f  HR@%d %.4f over %d baskets', k, result.metrics.recall_at_k, k,
                result.metrics.ndcg_at_k, k, result.metrics.hr_at_k, result.metrics.n_baskets)
    if result.metrics.n_skipped:
        logger.warning('%d baskets with empty held-out sets were skipped', result.metrics.n_skipped)
    return result if per_basket else result.metrics


def item_pop_baseline(split, config=None):
    config = TrainConfig(model_name='item_pop', max_epochs=0) if config is None else config
    return ItemPop(config, split)


def bpr_mf_baseline(split, config, out_dir=None):
    model, _ = train(split, config.replace(model_name='bpr_mf', num_layers=0), out_dir=out_dir)
    return model


def metrics_record(model_name, metrics, seed, config_hash):
    record = {'model': model_name, 'seed': seed, 'config_hash': config_hash, 'artifact_version': ARTIFACT_VERSION}
    record.update(metrics.to_dict())
    return record


def _fit_and_evaluate(split, config):
    model, history = train(split, config)
    metrics = evaluate(model, split, k=config.k, batch_size=config.eval_batch_size)
    val = [h['val_recall'] for h in history if 'val_recall' in h]
    return {
        'model': config.model_name,
        'recall': metrics.recall_at_k,
        'ndcg': metrics.ndcg_at_k,
        'hr': metrics.hr_at_k,
        'k': metrics.k,
        'n_baskets': metrics.n_baskets,
        'epochs': len(history),
        'best_val_recall': max(val) if val else float('nan'),
    }


def sensitivity_sweep(split, fractions, config, models=('basconv', 'bpr_mf', 'item_pop')):
    """
    Retrain and evaluate every model on training edges subsampled to each fraction.
    The subsample is seeded per fraction; the models keep config.seed, so
    fraction 1.0 reproduces a plain run.
    :return: long-form DataFrame, one row per fraction and model
    """
    if not fractions:
        raise ConfigurationError('fractions must not be empty')
    rows = []
    for fraction in fractions:
        sub = subsample_training(split, fraction, derive_seed(config.seed, round(fraction * 1e6)))
        for name in models:
            logger.info('Fraction %.2f: training %s', fraction, MODEL_LABELS.get(name, name))
            row = _fit_and_evaluate(sub, config.replace(model_name=name))
            rows.append({'sweep': 'fraction', 'fraction': float(fraction), **row})
    return pd.DataFrame(rows)


def layer_sweep(split, layer_counts, config):
    if not layer_counts:
        raise ConfigurationError('layer_counts must not be empty')
    rows = []
    for num_layers in layer_counts:
        logger.info('Training BasConv with %d layer(s)', num_layers)
        row = _fit_and_evaluate(split, config.replace(model_name='basconv', num_layers=int(num_layers)))
        rows.append({'sweep': 'layers', 'num_layers': int(num_layers), **row})
    return pd.DataFrame(rows)


def lr_sweep(split, learning_rates, config):
    """Retrain per learning rate; `best_learning_rate` picks by validation recall."""
    if not learning_rates:
        raise ConfigurationError('learning_rates must not be empty')
    rows = []
    for lr in learning_rates:
        logger.info('Training %s with learning rate %g', MODEL_LABELS.get(config.model_name), lr)
        row = _fit_and_evaluate(split, config.replace(learning_rate=float(lr)))
        rows.append({'sweep': 'lr', 'learning_rate': float(lr), **row})
    return pd.DataFrame(rows)


def best_learning_rate(table):
    scored = table.dropna(subset=['best_val_recall'])
    if scored.empty:
        raise ConfigurationError('No validation recall to select a learning rate by; set data.val_frac > 0')
    return float(scored.loc[scored['best_val_recall'].idxmax(), 'learning_rate'])


def format_table(frame, index_column=None):
    """Aligned text table, metrics in rows of models (or sweep values) and four decimals."""
    frame = frame.copy()
    if 'model' in frame:
        frame['model'] = frame['model'].map(lambda name: MODEL_LABELS.get(name, name))
    if index_column is not None:
        frame = frame.pivot(index=index_column, columns='model', values=METRIC_COLUMNS)
        frame.columns = [f'{model} {metric}' for metric, model in frame.columns]
        return frame.to_string(float_format=lambda v: f'{v:.4f}')
    return frame.to_string(index=False, float_format=lambda v: f'{v:.4f}')


def write_table(frame, out_dir, name, provenance, index_column=None):
    """
    Write `name`.csv (long form), `name`.json (rows) and `name`.txt (aligned table), each with the provenance.
    :return: the aligned table text
    """
    os.makedirs(out_dir, exist_ok=True)
    frame.assign(**provenance).to_csv(os.path.join(out_dir, f'{name}.csv'), index=False, float_format='%.10g')
    dump_json({**provenance, 'rows': frame.to_dict(orient='records')}, os.path.join(out_dir, f'{name}.json'))
    text = format_table(frame, index_column)
    with open(os.path.join(out_dir, f'{name}.txt'), 'w') as f:
        f.write(' '.join(f'{key}={value}' for key, value in sorted(provenance.items())) + '\n')
        f.write(text + '\n')
    return text
