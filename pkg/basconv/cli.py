"""
Command line: prepare, train, evaluate, recommend, sweep and config.

Every subcommand composes the same Hydra config (packaged defaults, --config
file, BASCONV_* environment, global flags, positional overrides) and writes its
outputs under `out_dir` together with the config hash, seed and artifact version.
"""
import argparse
import logging
import os
import sys

import numpy as np
import pandas as pd
import torch
from hydra.errors import HydraException
from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

from basconv.datasets import (build_ubi_graph, export_edges, graph_statistics, load_instacart, load_prepared,
                              load_transactions, sample_users, save_prepared, split_within_basket,
                              to_transaction_log)
from basconv.evaluation import (SWEEP_KINDS, best_learning_rate, evaluate, item_pop_baseline, layer_sweep,
                                lr_sweep, metrics_record, sensitivity_sweep, write_table)
from basconv.models import load_model
from basconv.models.base_model.checkpoint import BEST_CHECKPOINT
from basconv.train import train
from basconv.utils.config import TrainConfig, compose_config, config_hash, default_config_yaml, save_config_as_txt
from basconv.utils.errors import BasConvError, ConfigurationError
from basconv.utils.utils import ARTIFACT_VERSION, dump_json, find_latest_checkpoint, set_seed

logger = logging.getLogger('basconv')

MODELS = ('basconv', 'bpr_mf', 'item_pop')


def provenance(cfg):
    return {'config_hash': config_hash(cfg), 'seed': int(cfg.seed), 'artifact_version': ARTIFACT_VERSION}


def run_dir(cfg, model_name):
    return os.path.join(cfg.out_dir, 'ckpt', model_name)


def cmd_prepare(cfg, args):
    set_seed(cfg.seed, cfg.deterministic)
    data = cfg.data
    if data.instacart_orders:
        log = load_instacart(data.instacart_orders, list(data.instacart_order_products))
    else:
        log = load_transactions(data.path, data.user_col, data.basket_col, data.item_col)
    graph = build_ubi_graph(log, int(data.min_basket_size))
    if data.max_users:
        sampled = sample_users(to_transaction_log(graph), int(data.max_users), int(cfg.seed))
        graph = build_ubi_graph(sampled, int(data.min_basket_size))
    split = split_within_basket(graph, float(data.train_frac), int(cfg.seed), float(data.val_frac))

    statistics = graph_statistics(graph)
    summary = {
        'statistics': statistics,
        'split': {
            'train_edges': int(split.train_graph.basket_items.nnz),
            'fit_edges': int(split.fit_graph.basket_items.nnz),
            'validation_edges': int(sum(len(v) for v in split.masked_validation.values())),
            'heldout_edges': int(sum(len(v) for v in split.heldout.values())),
        },
        **provenance(cfg),
    }
    save_prepared(cfg.out_dir, split, summary)
    save_config_as_txt(cfg, cfg.out_dir)
    if data.export_edges:
        export_edges(graph, os.path.join(cfg.out_dir, 'edges.tsv'))
    print(' '.join(f'{key}={statistics[key]}' for key in
                   ('n_users', 'n_items', 'n_baskets', 'baskets_per_user', 'items_per_basket', 'n_interactions')))


def cmd_train(cfg, args):
    split = load_prepared(cfg.out_dir)
    config = TrainConfig.from_cfg(cfg)
    out_dir = run_dir(cfg, config.model_name)
    resume_from = args.resume or cfg.get('resume_from')
    if resume_from == 'latest':
        resume_from = find_latest_checkpoint(out_dir)
        if resume_from is None:
            raise ConfigurationError(f'No checkpoint to resume from in {out_dir}')
    save_config_as_txt(cfg, out_dir)
    _, history = train(split, config, out_dir=out_dir, resume_from=resume_from, config_hash=config_hash(cfg))
    if history:
        last = history[-1]
        print(f'trained {config.model_name}: {len(history)} epoch(s), last loss {last["loss"]:.6f}, '
              f'checkpoints in {out_dir}')


def _load_trained(cfg, config, split, checkpoint):
    if config.model_name == 'item_pop':
        return item_pop_baseline(split, config)
    path = checkpoint or cfg.get('ckpt_path') or os.path.join(run_dir(cfg, config.model_name), BEST_CHECKPOINT)
    return load_model(path, split)


def cmd_evaluate(cfg, args):
    split = load_prepared(cfg.out_dir)
    config = TrainConfig.from_cfg(cfg)
    model = _load_trained(cfg, config, split, args.checkpoint)
    model_name = model.config.model_name
    result = evaluate(model, split, k=config.k, batch_size=config.eval_batch_size, per_basket=True, progress=True)

    metrics_dir = os.path.join(cfg.out_dir, 'metrics')
    record = metrics_record(model_name, result.metrics, int(cfg.seed), config_hash(cfg))
    dump_json(record, os.path.join(metrics_dir, f'{model_name}.json'))
    result.per_basket.assign(**provenance(cfg)).to_csv(os.path.join(metrics_dir, f'{model_name}_per_basket.csv'),
                                                       index=False, float_format='%.10g')
    frame = pd.DataFrame([{'model': model_name, 'recall': record['recall'], 'ndcg': record['ndcg'],
                           'hr': record['hr']}])
    print(write_table(frame, metrics_dir, f'{model_name}_table', provenance(cfg)))


def cmd_recommend(cfg, args):
    split = load_prepared(cfg.out_dir)
    config = TrainConfig.from_cfg(cfg)
    graph = split.train_graph
    unresolved = [] if args.user in graph.user_index else [f'user:{args.user}']
    unresolved += [f'item:{i}' for i in args.items if i not in graph.item_index]
    if unresolved:
        raise ConfigurationError(f'Unknown ids: {", ".join(unresolved)}')

    model = _load_trained(cfg, config, split, args.checkpoint)
    items = np.array([graph.item_index[i] for i in args.items], dtype=np.int64)
    table = model.recommend(graph.user_index[args.user], items, k=args.k, graph=graph)
    table['item'] = graph.item_ids[table['item'].to_numpy()]
    print(table.to_string(index=False, float_format=lambda v: f'{v:.6f}'))


def cmd_sweep(cfg, args):
    split = load_prepared(cfg.out_dir)
    config = TrainConfig.from_cfg(cfg)
    kind = cfg.sweep.kind
    if kind == 'fraction':
        table = sensitivity_sweep(split, list(cfg.sweep.fractions), config, models=list(cfg.sweep.models))
        index_column = 'fraction'
    elif kind == 'layers':
        table = layer_sweep(split, list(cfg.sweep.layer_counts), config)
        index_column = 'num_layers'
    elif kind == 'lr':
        table = lr_sweep(split, list(cfg.sweep.learning_rates), config)
        index_column = 'learning_rate'
        if split.has_validation:
            logger.info('Best learning rate by validation recall: %g', best_learning_rate(table))
    else:
        raise ConfigurationError(f'Unknown sweep kind: {kind} (choose from {list(SWEEP_KINDS)})')
    print(write_table(table, os.path.join(cfg.out_dir, 'sweeps'), f'{kind}_sweep', provenance(cfg), index_column))


def cmd_config(cfg, args):
    if args.print_defaults:
        print(default_config_yaml(), end='')
    else:
        print(OmegaConf.to_yaml(cfg), end='')


COMMANDS = {
    'prepare': cmd_prepare,
    'train': cmd_train,
    'evaluate': cmd_evaluate,
    'recommend': cmd_recommend,
    'sweep': cmd_sweep,
    'config': cmd_config,
}


def build_parser():
    # global flags are accepted after the subcommand as well; SUPPRESS keeps unset ones out of the namespace
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default=argparse.SUPPRESS, help='YAML config file layered over the defaults')
    common.add_argument('--seed', type=int, default=argparse.SUPPRESS, help='random seed')
    common.add_argument('--out', default=argparse.SUPPRESS, help='output directory')
    common.add_argument('--threads', type=int, default=argparse.SUPPRESS, help='torch intra-op threads')
    common.add_argument('--deterministic', action=argparse.BooleanOptionalAction, default=argparse.SUPPRESS,
                        help='deterministic kernels (default on)')
    common.add_argument('--log-level', default=argparse.SUPPRESS, choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    common.add_argument('overrides', nargs='*', help='config overrides, e.g. method=bpr_mf method.num_layers=2')

    parser = argparse.ArgumentParser(prog='basconv', description='BasConv within-basket recommendation')
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('prepare', parents=[common], help='load transactions, build and split the graph')
    p = sub.add_parser('train', parents=[common], help='train the selected method')
    p.add_argument('--resume', default=None, help="checkpoint to resume from, or 'latest'")
    p = sub.add_parser('evaluate', parents=[common], help='held-out Recall/NDCG/HR@K')
    p.add_argument('--checkpoint', default=None, help='checkpoint (default: the best one of the method)')
    p.add_argument('--model', choices=MODELS, default=None, help='shorthand for method=<model>')
    p.add_argument('--k', type=int, default=None, help='cut-off K (default eval.k = 100)')
    p = sub.add_parser('recommend', parents=[common], help='complete a partially given basket')
    p.add_argument('--checkpoint', default=None)
    p.add_argument('--model', choices=MODELS, default=None)
    p.add_argument('--user', required=True, help='raw user id owning the basket')
    p.add_argument('--items', nargs='*', default=[], help='raw item ids already in the basket')
    p.add_argument('--k', type=int, default=10)
    p = sub.add_parser('sweep', parents=[common], help='training-fraction, layer or learning-rate sweep')
    p.add_argument('--kind', choices=SWEEP_KINDS, default=None)
    p = sub.add_parser('config', parents=[common], help='print the composed or default config')
    p.add_argument('--print-defaults', action='store_true')
    return parser


def load_config(args):
    overrides = list(args.overrides)
    if getattr(args, 'model', None):
        overrides.insert(0, f'method={args.model}')
    if args.command == 'evaluate' and args.k is not None:
        overrides.append(f'eval.k={args.k}')
    if args.command == 'sweep' and args.kind is not None:
        overrides.append(f'sweep.kind={args.kind}')
    flags = {
        'seed': getattr(args, 'seed', None),
        'out_dir': getattr(args, 'out', None),
        'threads': getattr(args, 'threads', None),
        'deterministic': getattr(args, 'deterministic', None),
    }
    return compose_config(overrides, config_file=getattr(args, 'config', None), flags=flags)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(args, 'log_level', 'INFO'),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        cfg = load_config(args)
        torch.set_num_threads(max(int(cfg.threads), 1))
        COMMANDS[args.command](cfg, args)
    except (BasConvError, HydraException, OmegaConfBaseException, ValueError, FileNotFoundError) as e:
        logger.error('%s failed: %s', args.command, e)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
