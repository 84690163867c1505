"""
JSON spec loading

Schema (all bitstrings are text over {0,1}, leftmost character = qubit 1):

    {
      "layout": {"nL": 1, "nS": 1, "nA": 0, "nO": 3},
      "s_star": "0",
      "code": {"type": "repetition", "repeats": 3}
            | {"type": "linear", "generator": ["1", "1", "1"]}        (rows of G, n_S bits each)
            | {"type": "table", "encode": {"0": "000", ...}, "decode": {"000": "0", ...}},
      "decoder": {"1": "X"},
      "noise": [{"pauli": "X|I||III", "prob": 0.001}, ...],
      "randomize_syndrome": false,
      "absorb_first_cycle": true,
      "preps": [{"name": "zero", "state": "0" | {"expectations": {"Z": 1}}, "noise": [...]}],
      "meas": [{"name": "z", "readout": {"type": "direct", "repeats": 1, "correct": true},
                "noise": [...], "povm": [["0"], ["1"]]}],
      "pairs": [[0, 0]]
    }
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .cycle import (
    DecoderTable,
    ExperimentSettings,
    MeasSpec,
    PrepSpec,
    QecCycleSpec,
    RegisterLayout,
    RepetitionCode,
    SyndromeCode,
    TableCode,
    basis_expectations,
    build_linear_code,
    direct_readout,
    povm_elements,
)
from .errors import LogMarkovError, ValidationError
from .pauli import BitString, PauliChannel, PauliEigenTable, PauliLabel, table_index

log = logging.getLogger(__name__)

BUNDLED = 'repetition3.json'


@dataclass
class LoadedSpec:
    """A parsed spec file."""

    cycle: QecCycleSpec
    settings: ExperimentSettings
    absorb_first_cycle: bool = True
    warnings: list[str] = field(default_factory=list)
    source: str = '<dict>'


def bundled_spec_path() -> Path:
    return Path(str(resources.files('logmarkov') / 'specs' / BUNDLED))


def _get(doc: dict, key: str, path: str, default: Any = ...):
    if not isinstance(doc, dict):
        raise ValidationError('expected an object', path)
    if key not in doc:
        if default is ...:
            raise ValidationError(f'missing field {key!r}', path)
        return default
    return doc[key]


def _int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f'expected an integer, got {value!r}', path)
    return value


def _bits(value, width: int, path: str) -> int:
    if not isinstance(value, str):
        raise ValidationError(f'expected a bitstring, got {value!r}', path)
    try:
        return BitString.parse(value, width).value
    except LogMarkovError as exc:
        raise ValidationError(str(exc), path) from exc


def _channel(terms, layout: tuple[int, ...], path: str) -> PauliChannel:
    if not isinstance(terms, list) or not terms:
        raise ValidationError('expected a non-empty list of {pauli, prob} terms', path)
    pairs = []
    for i, term in enumerate(terms):
        where = f'{path}[{i}]'
        text = _get(term, 'pauli', where)
        prob = _get(term, 'prob', where)
        if isinstance(prob, bool) or not isinstance(prob, (int, float)):
            raise ValidationError(f'expected a number, got {prob!r}', f'{where}.prob')
        if not 0.0 <= prob <= 1.0:
            raise ValidationError(f'probability {prob} outside [0, 1]', f'{where}.prob')
        try:
            pairs.append((PauliLabel.parse(text, layout), float(prob)))
        except LogMarkovError as exc:
            raise ValidationError(str(exc), f'{where}.pauli') from exc
    try:
        return PauliChannel.from_terms(layout, pairs)
    except LogMarkovError as exc:
        raise ValidationError(str(exc), path) from exc


def _code(doc: dict, layout: RegisterLayout, warnings: list[str], randomize: bool) -> SyndromeCode:
    kind = _get(doc, 'type', 'code')
    try:
        if kind == 'repetition':
            repeats = _int(_get(doc, 'repeats', 'code'), 'code.repeats')
            if repeats % 2 == 0:
                msg = (f'repetition count {repeats} is even: decoding symmetry is not guaranteed, '
                       'loaded as a minimum-weight linear code')
                if not randomize:
                    msg += '; consider setting randomize_syndrome'
                warnings.append(msg)
                log.warning(msg)
                g = np.kron(np.eye(layout.n_S, dtype=np.uint8), np.ones((repeats, 1), dtype=np.uint8))
                return build_linear_code(g)
            return RepetitionCode(layout.n_S, repeats)
        if kind == 'linear':
            rows = _get(doc, 'generator', 'code')
            if not isinstance(rows, list):
                raise ValidationError('expected a list of bitstring rows', 'code.generator')
            shifts = np.arange(layout.n_S - 1, -1, -1)
            g = [(_bits(r, layout.n_S, f'code.generator[{i}]') >> shifts) & 1 for i, r in enumerate(rows)]
            return build_linear_code(np.array(g, dtype=np.uint8).reshape(len(rows), layout.n_S))
        if kind == 'table':
            enc_map = _get(doc, 'encode', 'code')
            dec_map = _get(doc, 'decode', 'code')
            encode = np.zeros(1 << layout.n_S, dtype=np.int64)
            decode = np.zeros(1 << layout.n_O, dtype=np.int64)
            if len(enc_map) != encode.size:
                raise ValidationError(f'needs {encode.size} entries', 'code.encode')
            if len(dec_map) != decode.size:
                raise ValidationError(f'needs {decode.size} entries', 'code.decode')
            for k, v in enc_map.items():
                encode[_bits(k, layout.n_S, f'code.encode.{k}')] = _bits(v, layout.n_O, f'code.encode.{k}')
            for k, v in dec_map.items():
                decode[_bits(k, layout.n_O, f'code.decode.{k}')] = _bits(v, layout.n_S, f'code.decode.{k}')
            return TableCode(layout.n_S, layout.n_O, encode, decode)
    except ValidationError as exc:
        if exc.path:
            raise
        raise ValidationError(str(exc), 'code') from exc
    except LogMarkovError as exc:
        raise ValidationError(str(exc), 'code') from exc
    raise ValidationError(f'unknown code type {kind!r}', 'code.type')


def _sigma(state, n_L: int, path: str) -> PauliEigenTable:
    if isinstance(state, str):
        return basis_expectations(_bits(state, n_L, path), n_L)
    expectations = _get(state, 'expectations', path)
    values = np.zeros(4 ** n_L)
    values[0] = 1.0
    for text, value in expectations.items():
        try:
            p = PauliLabel.parse(text, (n_L,))
        except LogMarkovError as exc:
            raise ValidationError(str(exc), f'{path}.expectations') from exc
        values[table_index(p.x, p.z, n_L)] = float(value)
    return PauliEigenTable(n_L, values)


def _prep(doc: dict, i: int, layout: RegisterLayout) -> PrepSpec:
    path = f'preps[{i}]'
    name = str(_get(doc, 'name', path, f'prep{i}'))
    sigma = _sigma(_get(doc, 'state', path, '0' * layout.n_L), layout.n_L, f'{path}.state')
    lay = (layout.n_L, layout.n_S)
    terms = _get(doc, 'noise', path, None)
    noise = PauliChannel.identity(lay) if terms is None else _channel(terms, lay, f'{path}.noise')
    return PrepSpec(name, sigma, noise)


def _meas(doc: dict, i: int, layout: RegisterLayout, decoder: DecoderTable, s_star: int) -> MeasSpec:
    path = f'meas[{i}]'
    name = str(_get(doc, 'name', path, f'meas{i}'))
    ro_doc = _get(doc, 'readout', path, {'type': 'direct'})
    if _get(ro_doc, 'type', f'{path}.readout', 'direct') != 'direct':
        raise ValidationError(f'unknown readout type {ro_doc.get("type")!r}', f'{path}.readout.type')
    repeats = _int(_get(ro_doc, 'repeats', f'{path}.readout', 1), f'{path}.readout.repeats')
    correct = bool(_get(ro_doc, 'correct', f'{path}.readout', False))
    try:
        readout = direct_readout(layout.n_L, layout.n_S, repeats, correct, decoder, s_star)
    except LogMarkovError as exc:
        raise ValidationError(str(exc), f'{path}.readout') from exc
    lay = (layout.n_L, layout.n_S, layout.n_A, readout.n_out)
    terms = _get(doc, 'noise', path, None)
    noise = PauliChannel.identity(lay) if terms is None else _channel(terms, lay, f'{path}.noise')
    povm_doc = _get(doc, 'povm', path, None)
    try:
        povm = [] if povm_doc is None else povm_elements(povm_doc, layout.n_L)
    except LogMarkovError as exc:
        raise ValidationError(str(exc), f'{path}.povm') from exc
    return MeasSpec(name, readout, noise, povm)


def parse_spec(doc: dict, source: str = '<dict>') -> LoadedSpec:
    """Build a cycle spec and experiment settings from a parsed JSON document.

    Raises:
        ValidationError: With the field path of the first malformed entry.
    """
    warnings: list[str] = []
    lay = _get(doc, 'layout', '')
    try:
        layout = RegisterLayout(
            _int(_get(lay, 'nL', 'layout'), 'layout.nL'),
            _int(_get(lay, 'nS', 'layout'), 'layout.nS'),
            _int(_get(lay, 'nA', 'layout', 0), 'layout.nA'),
            _int(_get(lay, 'nO', 'layout'), 'layout.nO'),
        )
    except ValidationError:
        raise
    except LogMarkovError as exc:
        raise ValidationError(str(exc), 'layout') from exc
    s_star = _bits(_get(doc, 's_star', '', '0' * layout.n_S), layout.n_S, 's_star')
    randomize = bool(_get(doc, 'randomize_syndrome', '', False))
    code = _code(_get(doc, 'code', ''), layout, warnings, randomize)
    dec_doc = _get(doc, 'decoder', '', {})
    try:
        decoder = DecoderTable.from_mapping(layout.n_L, layout.n_S, dec_doc)
    except LogMarkovError as exc:
        raise ValidationError(str(exc), 'decoder') from exc
    noise = _channel(_get(doc, 'noise', ''), layout.widths, 'noise')
    cycle = QecCycleSpec(layout, code, decoder, BitString(s_star, layout.n_S), noise, randomize)

    preps = [_prep(p, i, layout) for i, p in enumerate(_get(doc, 'preps', '', [{}]))]
    meas = [_meas(m, i, layout, decoder, s_star) for i, m in enumerate(_get(doc, 'meas', '', [{}]))]
    pairs_doc = _get(doc, 'pairs', '', None)
    if pairs_doc is None:
        settings = ExperimentSettings.all_pairs(preps, meas)
    else:
        pairs = []
        for i, pm in enumerate(pairs_doc):
            if not isinstance(pm, list) or len(pm) != 2:
                raise ValidationError('expected [prep, meas]', f'pairs[{i}]')
            pairs.append((_int(pm[0], f'pairs[{i}][0]'), _int(pm[1], f'pairs[{i}][1]')))
        settings = ExperimentSettings(preps, meas, pairs)
    absorb = bool(_get(doc, 'absorb_first_cycle', '', True))
    return LoadedSpec(cycle, settings, absorb, warnings, source)


def load_spec(path: str | Path | None = None) -> LoadedSpec:
    """Read and parse a JSON spec file; ``None`` loads the bundled example.

    Raises:
        ValidationError: On JSON syntax errors (with line and column) or schema errors.
    """
    path = bundled_spec_path() if path is None else Path(path)
    text = path.read_text(encoding='utf-8')
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f'line {exc.lineno} column {exc.colno}: {exc.msg}', str(path)) from exc
    log.info('loaded spec %s', path)
    return parse_spec(doc, str(path))
