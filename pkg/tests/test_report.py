import json

import numpy as np
import pandas as pd
import pytest

from conftest import flip_spec, transfers
from logmarkov.markov import build_model
from logmarkov.oracle import TrajectoryCounts
from logmarkov.report import (
    HYPOTHESIS_WATERMARK,
    counts_frame,
    model_to_dict,
    outcome_label,
    transfer_frame,
    write_json,
    write_table,
)


def test_outcome_label():
    assert outcome_label(frozenset({1, 0}), 1) == '0+1'
    assert outcome_label({2}, 2) == '10'


def test_transfer_frame_layout():
    spec, prep, meas = flip_spec(0.1)
    t = transfers(spec, prep, meas)[0]
    df = transfer_frame(t)
    assert df.columns.tolist() == ['s_out', 's_in', 'pauli', 'gamma', 'weighted_eigen']
    assert len(df) == 4 * 2 * 2
    assert df[['s_out', 's_in', 'pauli']].iloc[:4].values.tolist() == [
        ['0', '0', 'I'], ['0', '0', 'X'], ['0', '0', 'Y'], ['0', '0', 'Z']]
    row = df[(df.s_out == '0') & (df.s_in == '0') & (df.pauli == 'Z')].iloc[0]
    assert row.gamma == pytest.approx(1.0)
    assert row.weighted_eigen == pytest.approx(0.8)


def test_model_dict_watermark():
    spec, prep, meas = flip_spec(0.1)
    t, pt, mt = transfers(spec, prep, meas)
    doc = model_to_dict(build_model(t, [pt], [mt], workers=1), ['zero'], ['z'])
    assert doc['watermark'] == HYPOTHESIS_WATERMARK
    assert not doc['hypothesis_ok']
    assert doc['pairs'] == [['zero', 'z']]
    assert doc['chi']['Z'] == pytest.approx(0.8)
    assert doc['logical_error_rates']['Z'] == pytest.approx(0.1)
    assert doc['c_meas']['z']['X'] == pytest.approx(1.0)

    spec, prep, meas = flip_spec(0.001)
    t, pt, mt = transfers(spec, prep, meas)
    doc = model_to_dict(build_model(t, [pt], [mt], workers=1))
    assert 'watermark' not in doc
    assert list(doc['c_prep']) == ['prep0']


def test_counts_frame():
    counts = TrajectoryCounts(2, np.array([5, 1, 3, 1]), 10, 2 ** 63 + 1)
    df = counts_frame(counts, [frozenset({0, 1}), frozenset({2, 3})])
    assert df.columns.tolist() == ['outcome', 'count', 'shots', 'seed']
    assert df['outcome'].tolist() == ['00+01', '10+11']
    assert df['count'].tolist() == [6, 4]
    assert df['seed'].iloc[0] == str(2 ** 63 + 1)


def test_write_table_formats(tmp_path):
    df = pd.DataFrame({'K': [1, 2], 'value': [0.5, np.float64(0.25)]})
    path = write_table(df, tmp_path / 'series', 'csv')
    assert path.name == 'series.csv'
    assert path.read_text() == 'K,value\n1,0.5\n2,0.25\n'
    path = write_table(df, tmp_path / 'series', 'json')
    assert json.loads(path.read_text()) == [{'K': 1, 'value': 0.5}, {'K': 2, 'value': 0.25}]
    with pytest.raises(ValueError):
        write_table(df, tmp_path / 'series', 'xlsx')


def test_write_json_is_sorted(tmp_path):
    path = write_json({'b': np.float64(1.5), 'a': [np.int64(2), (True, None)]}, tmp_path / 'out.json')
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {'a': [2, [True, None]], 'b': 1.5}
