"""
Report tables

Every report is a pandas DataFrame with fixed column names. Floats are written with the shortest
round-trip representation, so reruns produce byte-identical files.
"""

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from .extraction import CycleTransfer
from .markov import MarkovModel
from .oracle import TrajectoryCounts
from .pauli import BitString, logical_labels

log = logging.getLogger(__name__)

FORMATS = ('csv', 'json')
HYPOTHESIS_WATERMARK = 'hypotheses not satisfied'

TRANSFER_COLUMNS = ['s_out', 's_in', 'pauli', 'gamma', 'weighted_eigen']
COUNTS_COLUMNS = ['outcome', 'count', 'shots', 'seed']


def outcome_label(outcome, n_L: int) -> str:
    """Text form of a POVM element: its basis labels joined by '+', e.g. ``00+01``."""
    return '+'.join(str(BitString(b, n_L)) for b in sorted(outcome))


def transfer_frame(t: CycleTransfer) -> pd.DataFrame:
    """Long-format cycle tables, one row per (s_out, s_in, pauli)."""
    dim = t.dim
    labels = [str(p) for p in logical_labels(t.n_L)]
    grid = np.indices((len(labels), dim, dim)).reshape(3, -1)
    p, s_out, s_in = grid
    syndromes = np.array([str(BitString(s, t.n_S)) for s in range(dim)])
    return pd.DataFrame({
        's_out': syndromes[s_out],
        's_in': syndromes[s_in],
        'pauli': np.array(labels)[p],
        'gamma': t.gamma[s_out, s_in],
        'weighted_eigen': t.weighted[p, s_out, s_in],
    }).sort_values(['s_out', 's_in', 'pauli'], kind='stable').reset_index(drop=True)


def model_to_dict(model: MarkovModel, prep_names=None, meas_names=None) -> dict:
    """JSON-ready description of a model; keys are sorted on output."""
    labels = [str(p) for p in logical_labels(model.n_L)]
    prep_names = prep_names or [f'prep{i}' for i in range(len(model.c_prep))]
    meas_names = meas_names or [f'meas{i}' for i in range(len(model.c_meas))]
    out = {
        'n_L': model.n_L,
        'chi': dict(zip(labels, model.chi.values.tolist())),
        'logical_error_rates': dict(zip(labels, model.logical_error_rates().values.tolist())),
        'c_prep': {name: dict(zip(labels, row.tolist())) for name, row in zip(prep_names, model.c_prep)},
        'c_meas': {name: dict(zip(labels, row.tolist())) for name, row in zip(meas_names, model.c_meas)},
        'pairs': [[prep_names[p], meas_names[m]] for p, m in model.pairs],
        'constants': {
            'f1': model.f1,
            'eps1': model.eps1,
            'eps': model.eps,
            'g_prime': model.g_prime,
            'g_total': model.g_total,
            'op_norm': model.op_norm,
        },
        'criterion': model.criterion,
        'hypothesis_ok': model.hypothesis_ok,
        'reasons': list(model.reasons),
    }
    if not model.hypothesis_ok:
        out['watermark'] = HYPOTHESIS_WATERMARK
    return out


def counts_frame(counts: TrajectoryCounts, outcomes) -> pd.DataFrame:
    """Counts grouped by POVM element, with the CSV columns outcome,count,shots,seed."""
    return pd.DataFrame({
        'outcome': [outcome_label(e, counts.n_L) for e in outcomes],
        'count': counts.grouped(outcomes),
        'shots': counts.shots,
        'seed': str(counts.seed),
    }, columns=COUNTS_COLUMNS)


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def write_json(data: dict, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_plain(data), indent=2, sort_keys=True) + '\n', encoding='utf-8')
    return path


def write_table(df: pd.DataFrame, path: str | Path, fmt: str = 'csv') -> Path:
    """Write a report table as CSV or as a JSON list of records.

    Args:
        df: Table to write; the index is not written.
        path: Target path without suffix; ``.csv`` or ``.json`` is appended.
        fmt: ``'csv'`` or ``'json'``.

    Returns:
        The written path.
    """
    if fmt not in FORMATS:
        raise ValueError(f'unknown format {fmt!r}, expected one of {FORMATS}')
    path = Path(path).with_suffix(f'.{fmt}')
    if fmt == 'csv':
        df.to_csv(path, index=False, lineterminator='\n')
    else:
        path.write_text(json.dumps(_plain(df.to_dict(orient='records')), indent=2) + '\n', encoding='utf-8')
    log.info('wrote %s (%d rows)', path, len(df))
    return path
