import numpy as np
import pytest

from logmarkov.cycle import (
    DecoderTable,
    MeasSpec,
    PrepSpec,
    QecCycleSpec,
    RegisterLayout,
    RepetitionCode,
    TableCode,
    direct_readout,
)
from logmarkov.extraction import absorb_cycle_into_prep, cycle_transfer, meas_transfer, prep_transfer
from logmarkov.pauli import BitString, PauliChannel, PauliLabel


def random_channel(rng, layout, n_terms=6, strength=0.01):
    """Identity plus ``n_terms`` random Pauli terms with total probability ``strength``."""
    layout = tuple(layout)
    n = sum(layout)
    weights = rng.random(n_terms)
    weights *= strength / weights.sum()
    terms = {}
    for w in weights:
        label = PauliLabel(int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n)), layout)
        terms[label] = terms.get(label, 0.0) + w
    ident = PauliLabel.identity(layout)
    terms[ident] = 1.0 - sum(p for lab, p in terms.items() if lab != ident)
    return PauliChannel(layout, terms)


def random_decoder(rng, n_L, n_S):
    size = 1 << n_S
    cx = rng.integers(0, 1 << n_L, size)
    cz = rng.integers(0, 1 << n_L, size)
    cx[0] = cz[0] = 0
    return DecoderTable(n_L, n_S, cx, cz)


def random_table_code(rng, n_S, n_O):
    """Arbitrary code with D(E(s)) = s and otherwise random decoding."""
    encode = rng.choice(1 << n_O, size=1 << n_S, replace=False)
    decode = rng.integers(0, 1 << n_S, 1 << n_O)
    decode[encode] = np.arange(1 << n_S)
    return TableCode(n_S, n_O, encode, decode)


def random_spec(rng, n_L, n_S, *, randomize=False, strength=0.01, n_terms=6, code='repetition'):
    if code == 'repetition':
        syn = RepetitionCode(n_S, int(rng.choice([1, 3])) if n_S <= 2 else 1)
    else:
        syn = random_table_code(rng, n_S, n_S + int(rng.integers(1, 3)))
    layout = RegisterLayout(n_L, n_S, 0, syn.n_O)
    s_star = BitString(int(rng.integers(0, 1 << n_S)), n_S)
    noise = random_channel(rng, layout.widths, n_terms, strength)
    return QecCycleSpec(layout, syn, random_decoder(rng, n_L, n_S), s_star, noise, randomize)


def random_prep(rng, spec, strength=0.01):
    n_L, n_S = spec.layout.n_L, spec.layout.n_S
    label = BitString(int(rng.integers(0, 1 << n_L)), n_L)
    return PrepSpec.from_basis('prep', label, random_channel(rng, (n_L, n_S), 3, strength))


def random_meas(rng, spec, strength=0.01, correct=True):
    n_L, n_S = spec.layout.n_L, spec.layout.n_S
    ro = direct_readout(n_L, n_S, 1, correct, spec.decoder, spec.s_star.value)
    return MeasSpec('meas', ro, random_channel(rng, (n_L, n_S, 0, ro.n_out), 3, strength))


def flip_spec(q):
    """One logical qubit, one syndrome bit, logical X with probability q and nothing else."""
    layout = RegisterLayout(1, 1, 0, 1)
    terms = {PauliLabel.identity(layout.widths): 1.0 - q}
    if q:
        terms[PauliLabel.parse('X|I||I', layout.widths)] = q
    noise = PauliChannel(layout.widths, terms)
    spec = QecCycleSpec(layout, RepetitionCode(1, 1), DecoderTable.identity(1, 1), BitString(0, 1), noise)
    prep = PrepSpec.from_basis('zero', 0, PauliChannel.identity((1, 1)))
    meas = MeasSpec('z', direct_readout(1, 1), PauliChannel.identity((1, 1, 0, 2)))
    return spec, prep, meas


def transfers(spec, prep, meas, absorb=False):
    t = cycle_transfer(spec, workers=1)
    pt = prep_transfer(prep, spec.s_star.value, spec.decoder)
    if absorb:
        pt = absorb_cycle_into_prep(pt, t)
    return t, pt, meas_transfer(meas, spec.s_star.value, spec.decoder)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
