import pandas as pd
import pytest

from basconv.datasets import load_instacart, load_transactions, sample_users
from basconv.datasets.transactions import detect_delimiter
from basconv.utils.errors import ArtifactNotFoundError, ConfigurationError, DataIntegrityError


def write(path, text):
    path.write_text(text)
    return str(path)


class TestLoadTransactions:
    def test_comma_file(self, tmp_path):
        path = write(tmp_path / 'log.csv', 'user_id,order_id,product_id\nu1,b1,i1\nu1,b1,i2\nu2,b2,i1\n')
        log = load_transactions(path)
        assert len(log) == 3
        assert (log.n_users, log.n_baskets, log.n_items) == (2, 2, 2)
        assert list(log)[0] == ('u1', 'b1', 'i1')

    def test_tab_file_and_custom_columns(self, tmp_path):
        path = write(tmp_path / 'log.tsv', 'who\tcart\twhat\nu1\tb1\ti1\nu1\tb1\ti2\n')
        assert detect_delimiter(path) == '\t'
        log = load_transactions(path, user_col='who', basket_col='cart', item_col='what')
        assert list(log.records.columns) == ['user', 'basket', 'item']
        assert len(log) == 2

    def test_duplicates_collapse_and_keep_order(self, tmp_path):
        path = write(tmp_path / 'log.csv',
                     'user_id,order_id,product_id\nu1,b1,i2\nu1,b1,i1\nu1,b1,i2\nu1,b1,i3\n')
        log = load_transactions(path)
        assert list(log.records['item']) == ['i2', 'i1', 'i3']

    def test_basket_under_two_users(self, tmp_path):
        path = write(tmp_path / 'log.csv', 'user_id,order_id,product_id\nu1,b1,i1\nu2,b1,i2\n')
        with pytest.raises(DataIntegrityError) as excinfo:
            load_transactions(path)
        assert 'b1' in str(excinfo.value)

    def test_missing_column(self, tmp_path):
        path = write(tmp_path / 'log.csv', 'user_id,basket,product_id\nu1,b1,i1\n')
        with pytest.raises(ConfigurationError) as excinfo:
            load_transactions(path)
        assert 'order_id' in str(excinfo.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ArtifactNotFoundError):
            load_transactions(str(tmp_path / 'nope.csv'))

    def test_header_only_gives_empty_log(self, tmp_path):
        path = write(tmp_path / 'log.csv', 'user_id,order_id,product_id\n')
        assert len(load_transactions(path)) == 0


def test_load_instacart_joins_orders(tmp_path):
    orders = write(tmp_path / 'orders.csv', 'order_id,user_id,eval_set\n10,7,prior\n11,8,train\n')
    prior = write(tmp_path / 'order_products__prior.csv', 'order_id,product_id,add_to_cart_order\n10,100,1\n10,101,2\n')
    train = write(tmp_path / 'order_products__train.csv', 'order_id,product_id,add_to_cart_order\n11,100,1\n99,5,1\n')
    log = load_instacart(orders, [prior, train])
    # order 99 has no orders.csv row
    assert len(log) == 3
    assert set(log.records['user']) == {'7', '8'}
    assert log.records.loc[log.records['basket'] == '11', 'item'].tolist() == ['100']


def test_sample_users_is_deterministic(tiny_log):
    a = sample_users(tiny_log, 2, seed=5)
    b = sample_users(tiny_log, 2, seed=5)
    assert a.n_users == 2
    pd.testing.assert_frame_equal(a.records, b.records)
    assert sample_users(tiny_log, 10, seed=5) is tiny_log
