import json

import pytest

from logmarkov.cycle import LinearCode, RepetitionCode, TableCode, validate_spec
from logmarkov.errors import ValidationError
from logmarkov.spec_io import bundled_spec_path, load_spec, parse_spec


def bundled_doc():
    return json.loads(bundled_spec_path().read_text(encoding='utf-8'))


def test_bundled_spec_loads():
    loaded = load_spec()
    spec = loaded.cycle
    assert spec.layout.widths == (1, 1, 0, 3)
    assert isinstance(spec.code, RepetitionCode)
    assert validate_spec(spec) == []
    assert loaded.absorb_first_cycle
    assert loaded.warnings == []
    assert [p.name for p in loaded.settings.preps] == ['zero', 'plus']
    assert loaded.settings.pairs == [(0, 0), (1, 0)]
    assert loaded.settings.preps[1].sigma['X'] == 1.0
    assert loaded.settings.preps[1].sigma['Z'] == 0.0
    assert loaded.settings.meas[0].readout.n_out == 2
    assert str(spec.decoder.correction(1)) == 'X'


def test_json_syntax_error_reports_position(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{\n  "layout": {"nL": 1,,}\n}\n')
    with pytest.raises(ValidationError, match='line 2 column'):
        load_spec(path)


@pytest.mark.parametrize('edit, where', [
    (lambda d: d['noise'][1].update(prob='high'), 'noise[1].prob'),
    (lambda d: d['noise'][2].update(prob=1.5), 'noise[2].prob'),
    (lambda d: d['noise'][0].update(pauli='Q|I||III'), 'noise[0].pauli'),
    (lambda d: d['layout'].pop('nS'), 'layout'),
    (lambda d: d['layout'].update(nL='1'), 'layout.nL'),
    (lambda d: d['code'].update(type='surface'), 'code.type'),
    (lambda d: d.update(s_star='01'), 's_star'),
    (lambda d: d['preps'][0]['noise'][0].update(pauli='I|I|I'), 'preps[0].noise[0].pauli'),
    (lambda d: d['meas'][0]['readout'].update(type='parity'), 'meas[0].readout.type'),
    (lambda d: d.update(pairs=[[0]]), 'pairs[0]'),
])
def test_field_paths_in_errors(edit, where):
    doc = bundled_doc()
    edit(doc)
    with pytest.raises(ValidationError) as info:
        parse_spec(doc)
    assert info.value.path == where


def test_unnormalized_noise_is_left_to_validation():
    doc = bundled_doc()
    doc['noise'][0]['prob'] = 0.5
    loaded = parse_spec(doc)
    assert any(i.startswith('noise: probabilities sum') for i in validate_spec(loaded.cycle))


def test_even_repetition_count_warns():
    doc = bundled_doc()
    doc['layout']['nO'] = 2
    doc['code']['repeats'] = 2
    doc['noise'] = [{'pauli': 'I|I||II', 'prob': 1.0}]
    loaded = parse_spec(doc)
    assert isinstance(loaded.cycle.code, LinearCode)
    assert len(loaded.warnings) == 1
    assert 'randomize_syndrome' in loaded.warnings[0]
    doc['randomize_syndrome'] = True
    assert 'randomize_syndrome' not in parse_spec(doc).warnings[0]


def test_linear_and_table_codes():
    doc = bundled_doc()
    doc['code'] = {'type': 'linear', 'generator': ['1', '1', '1']}
    code = parse_spec(doc).cycle.code
    assert isinstance(code, LinearCode)
    assert code.encode(1) == 0b111 and code.decode(0b110) == 1
    doc['code'] = {
        'type': 'table',
        'encode': {'0': '000', '1': '111'},
        'decode': {format(b, '03b'): '1' if b.bit_count() > 1 else '0' for b in range(8)},
    }
    code = parse_spec(doc).cycle.code
    assert isinstance(code, TableCode)
    assert code.round_trip_ok()
    assert code.decode(0b011) == 1


def test_defaults():
    doc = {
        'layout': {'nL': 1, 'nS': 1, 'nO': 1},
        'code': {'type': 'repetition', 'repeats': 1},
        'noise': [{'pauli': 'I|I||I', 'prob': 1.0}],
    }
    loaded = parse_spec(doc)
    assert loaded.cycle.layout.n_A == 0
    assert loaded.cycle.s_star.value == 0
    assert not loaded.cycle.randomize_syndrome
    assert loaded.absorb_first_cycle
    assert loaded.settings.preps[0].sigma['Z'] == 1.0
    assert loaded.settings.meas[0].povm == [frozenset({0}), frozenset({1})]
