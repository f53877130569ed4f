import json
import logging
import os

import pandas as pd
import pytest

from basconv.cli import main
from basconv.datasets import planted_intent_log

PREPARED = ('users.parquet', 'baskets.parquet', 'items.parquet', 'edges.parquet', 'summary.json', 'config.yaml')
TRAIN_OVERRIDES = ['method.max_epochs=1', 'method.embedding_dim=4', 'method.num_layers=1', 'method.batch_size=64',
                   'method.learning_rate=1e-3']


@pytest.fixture
def transactions(tmp_path):
    log = planted_intent_log(n_users=12, n_intents=3, items_per_intent=8, baskets_per_user=3, basket_size=5, seed=1)
    frame = log.records.rename(columns={'user': 'user_id', 'basket': 'order_id', 'item': 'product_id'})
    path = tmp_path / 'transactions.csv'
    frame.to_csv(path, index=False)
    return str(path), log


@pytest.fixture
def prepared(tmp_path, transactions):
    out = str(tmp_path / 'run')
    path, _ = transactions
    assert main(['prepare', f'data.path={path}', 'data.min_basket_size=2', 'eval.k=5', '--out', out]) == 0
    return out


def read(path):
    with open(path, 'rb') as f:
        return f.read()


class TestPrepare:
    def test_writes_artifacts(self, prepared, capsys):
        for name in PREPARED:
            assert os.path.exists(os.path.join(prepared, name))
        summary = json.loads(read(os.path.join(prepared, 'summary.json')))
        assert summary['statistics']['n_users'] == 12
        assert summary['statistics']['n_baskets'] == 36
        assert {'config_hash', 'seed', 'artifact_version'} <= set(summary)

    def test_rerun_is_byte_identical(self, prepared, transactions):
        first = {name: read(os.path.join(prepared, name)) for name in PREPARED}
        path, _ = transactions
        assert main(['prepare', f'data.path={path}', 'data.min_basket_size=2', 'eval.k=5', '--out', prepared]) == 0
        assert first == {name: read(os.path.join(prepared, name)) for name in PREPARED}

    def test_empty_graph_fails(self, tmp_path, transactions, caplog):
        path, _ = transactions
        with caplog.at_level(logging.ERROR):
            assert main(['prepare', f'data.path={path}', '--out', str(tmp_path / 'empty')]) == 1
        assert 'empty graph' in caplog.text

    def test_exports_edges(self, tmp_path, transactions):
        path, _ = transactions
        out = str(tmp_path / 'edges')
        assert main(['prepare', f'data.path={path}', 'data.min_basket_size=2', 'data.export_edges=true',
                     '--out', out]) == 0
        assert os.path.exists(os.path.join(out, 'edges.tsv'))


class TestTrainAndEvaluate:
    def test_train_writes_log_and_checkpoint(self, prepared):
        assert main(['train', *TRAIN_OVERRIDES, '--out', prepared]) == 0
        run = os.path.join(prepared, 'ckpt', 'basconv')
        with open(os.path.join(run, 'train_log.jsonl')) as f:
            assert len(f.read().splitlines()) == 1
        assert os.path.exists(os.path.join(run, 'ckpt-epoch1.bcv'))
        assert os.path.exists(os.path.join(run, 'ckpt-best.bcv'))

    def test_resume_latest(self, prepared):
        assert main(['train', *TRAIN_OVERRIDES, '--out', prepared]) == 0
        overrides = [o for o in TRAIN_OVERRIDES if not o.startswith('method.max_epochs')] + ['method.max_epochs=2']
        assert main(['train', *overrides, '--out', prepared, '--resume', 'latest']) == 0
        run = os.path.join(prepared, 'ckpt', 'basconv')
        with open(os.path.join(run, 'train_log.jsonl')) as f:
            assert [json.loads(line)['epoch'] for line in f] == [1, 2]

    def test_learning_rate_outside_grid_warns(self, prepared, caplog):
        overrides = [o for o in TRAIN_OVERRIDES if not o.startswith('method.learning_rate')]
        with caplog.at_level(logging.WARNING):
            assert main(['train', *overrides, 'method.learning_rate=0.01', '--out', prepared]) == 0
        assert 'outside the grid' in caplog.text

    def test_evaluate_writes_metrics(self, prepared):
        assert main(['train', *TRAIN_OVERRIDES, '--out', prepared]) == 0
        assert main(['evaluate', 'eval.k=5', '--out', prepared]) == 0
        record = json.loads(read(os.path.join(prepared, 'metrics', 'basconv.json')))
        assert {'model', 'recall', 'ndcg', 'hr', 'k', 'n_baskets', 'seed', 'config_hash',
                'artifact_version'} <= set(record)
        assert record['k'] == 5
        per_basket = pd.read_csv(os.path.join(prepared, 'metrics', 'basconv_per_basket.csv'))
        assert (per_basket['config_hash'] == record['config_hash']).all()
        assert (per_basket['seed'] == record['seed']).all()
        assert (per_basket['artifact_version'] == record['artifact_version']).all()

    def test_train_log_carries_provenance(self, prepared):
        assert main(['train', *TRAIN_OVERRIDES, '--out', prepared]) == 0
        with open(os.path.join(prepared, 'ckpt', 'basconv', 'train_log.jsonl')) as f:
            record = json.loads(f.readline())
        assert {'config_hash', 'seed', 'artifact_version'} <= set(record)
        assert record['seed'] == 42

    def test_evaluate_rerun_is_byte_identical(self, prepared):
        assert main(['train', *TRAIN_OVERRIDES, '--out', prepared]) == 0
        outputs = ('basconv.json', 'basconv_per_basket.csv', 'basconv_table.json')
        assert main(['evaluate', 'eval.k=5', '--out', prepared]) == 0
        first = {name: read(os.path.join(prepared, 'metrics', name)) for name in outputs}
        assert main(['evaluate', 'eval.k=5', '--out', prepared]) == 0
        assert first == {name: read(os.path.join(prepared, 'metrics', name)) for name in outputs}

    def test_item_pop_needs_no_checkpoint(self, prepared):
        assert main(['evaluate', '--out', prepared, '--model', 'item_pop', '--k', '3']) == 0
        record = json.loads(read(os.path.join(prepared, 'metrics', 'item_pop.json')))
        assert record['model'] == 'item_pop' and record['k'] == 3

    def test_missing_artifacts(self, tmp_path, caplog):
        with caplog.at_level(logging.ERROR):
            assert main(['evaluate', '--out', str(tmp_path / 'nothing')]) == 1
        assert 'users.parquet' in caplog.text

    def test_missing_checkpoint(self, prepared, caplog):
        with caplog.at_level(logging.ERROR):
            assert main(['evaluate', '--out', prepared]) == 1
        assert 'ckpt-best.bcv' in caplog.text

    def test_checkpoint_of_another_graph(self, prepared, transactions, caplog):
        assert main(['train', *TRAIN_OVERRIDES, '--out', prepared]) == 0
        path, _ = transactions
        assert main(['prepare', f'data.path={path}', 'data.min_basket_size=2', 'data.max_users=6',
                     '--out', prepared]) == 0
        with caplog.at_level(logging.ERROR):
            assert main(['evaluate', '--out', prepared]) == 1
        assert 'trained on graph' in caplog.text


class TestRecommend:
    def test_unknown_user(self, prepared, caplog):
        with caplog.at_level(logging.ERROR):
            assert main(['recommend', '--out', prepared, '--model', 'item_pop', '--user', 'nobody']) == 1
        assert 'user:nobody' in caplog.text

    def test_basket_items_are_excluded(self, prepared, transactions, capsys):
        _, log = transactions
        first = log.records[log.records['basket'] == log.records['basket'].iloc[0]]
        user, items = first['user'].iloc[0], list(first['item'])[:2]
        assert main(['train', *TRAIN_OVERRIDES, '--out', prepared]) == 0
        capsys.readouterr()
        assert main(['recommend', '--out', prepared, '--user', user, '--k', '5', '--items', *items]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].split() == ['rank', 'item', 'score', 'user_term', 'basket_term']
        recommended = [line.split()[1] for line in lines[1:]]
        assert len(recommended) == 5
        assert not set(recommended) & set(items)


class TestConfig:
    def test_print_defaults(self, capsys):
        assert main(['config', '--print-defaults']) == 0
        assert 'min_basket_size: 30' in capsys.readouterr().out

    def test_environment_override(self, monkeypatch, capsys):
        monkeypatch.setenv('BASCONV_EVAL__K', '7')
        assert main(['config']) == 0
        out = capsys.readouterr().out
        assert 'k: 7' in out

    def test_flags_override_environment(self, monkeypatch, capsys):
        monkeypatch.setenv('BASCONV_SEED', '3')
        assert main(['config', '--seed', '11']) == 0
        assert 'seed: 11' in capsys.readouterr().out

    def test_unknown_sweep_kind(self):
        with pytest.raises(SystemExit) as excinfo:
            main(['sweep', '--kind', 'bogus'])
        assert excinfo.value.code == 2
