"""Property sweeps over randomized cycles: model bounds, SMIP conditions and the norm inequalities."""

import math
import time

import numpy as np
import pytest

from conftest import flip_spec, random_channel, random_meas, random_prep, random_spec, transfers
from logmarkov.cycle import DecoderTable, QecCycleSpec, RegisterLayout, RepetitionCode, check_decoding_symmetry
from logmarkov.extraction import check_smip, cycle_transfer, randomized_cycle_transfer, single_cycle_channel
from logmarkov.fit import fit_decay
from logmarkov.markov import (
    analyze_pauli,
    build_model,
    exact_eigenvalue_general,
    exact_eigenvalue_series,
    lambda1_first_order_report,
    outcome_probability,
    pauli_diag_probability_bound,
    perturbation_norms,
    theorem_constants,
    transfer_matrix,
)
from logmarkov.pauli import BitString, PauliChannel, channel_table, dense_superoperator

KS = list(range(1, 31))


def random_randomized_case(rng):
    n_L = int(rng.integers(1, 3))
    n_S = int(rng.integers(1, 5))
    spec = random_spec(rng, n_L, n_S, randomize=True, strength=0.002, code='table')
    prep, meas = random_prep(rng, spec, 0.002), random_meas(rng, spec, 0.002)
    return spec, prep, meas


def test_model_bounds_on_randomized_cycles(rng):
    start = time.perf_counter()
    checked = 0
    for _ in range(50):
        spec, prep, meas = random_randomized_case(rng)
        t, pt, mt = transfers(spec, prep, meas, absorb=True)
        model = build_model(t, [pt], [mt], workers=1)
        assert model.eps1 <= 1 / 64
        assert model.hypothesis_ok, model.reasons
        exact = exact_eigenvalue_series(t, pt, mt, KS)
        for j, k in enumerate(KS):
            predicted = model.predict_eigenvalues(0, 0, k)
            assert np.all(np.abs(exact[j] - predicted) <= model.bound(k) + 1e-12)
            for e in meas.povm:
                want = outcome_probability(exact[j], prep.sigma, e)
                got = outcome_probability(predicted, prep.sigma, e)
                assert abs(want - got) <= model.probability_bound(k) + 1e-12
        checked += 1
    assert checked == 50
    assert time.perf_counter() - start < 60.0


def test_measured_eigenvalue_gaps_bound_probabilities(rng):
    for _ in range(20):
        spec, prep, meas = random_randomized_case(rng)
        t, pt, mt = transfers(spec, prep, meas, absorb=True)
        model = build_model(t, [pt], [mt], workers=1)
        exact = exact_eigenvalue_series(t, pt, mt, KS)
        for j, k in enumerate(KS):
            predicted = model.predict_eigenvalues(0, 0, k)
            bound = pauli_diag_probability_bound(exact[j] - predicted, 2 ** t.n_L)
            assert bound <= model.probability_bound(k) + 1e-11
            for e in meas.povm:
                want = outcome_probability(exact[j], prep.sigma, e)
                got = outcome_probability(predicted, prep.sigma, e)
                assert abs(want - got) <= bound + 1e-12


def test_decoding_symmetry_gives_smip(rng):
    symmetric = 0
    for i in range(40):
        code = 'repetition' if i % 2 else 'table'
        spec = random_spec(rng, 1, int(rng.integers(1, 4)), strength=0.1, code=code)
        if check_decoding_symmetry(spec.code):
            symmetric += 1
            assert check_smip(cycle_transfer(spec, workers=1), 1e-12)
    assert symmetric >= 20


def test_randomization_gives_smip(rng):
    for _ in range(20):
        spec = random_spec(rng, int(rng.integers(1, 3)), int(rng.integers(1, 4)), strength=0.2, code='table')
        assert check_smip(randomized_cycle_transfer(spec, workers=1), 1e-12)


def noisy_cycles(rng, count=10):
    for _ in range(count):
        spec = random_spec(rng, int(rng.integers(1, 3)), int(rng.integers(1, 4)), randomize=True,
                           strength=0.01, code='table')
        yield cycle_transfer(spec, workers=1)


def test_perturbation_norm_bound(rng):
    for t in noisy_cycles(rng):
        for p in range(4 ** t.n_L):
            quad, fro, op = perturbation_norms(transfer_matrix(t, p))
            assert op <= math.sqrt(max(quad, 0.0)) + 1e-9
            assert op <= fro + 1e-9


@pytest.mark.parametrize('n', [1, 2, 3])
def test_pauli_channel_norm_is_largest_eigenvalue(rng, n):
    for _ in range(5):
        ch = random_channel(rng, (n,), 6, 0.6)
        dense = np.linalg.norm(dense_superoperator(ch), 2)
        assert dense == pytest.approx(np.abs(channel_table(ch).values).max(), abs=1e-10)


def test_residual_and_geometric_sum(rng):
    for t in noisy_cycles(rng):
        eps1 = 1.0 - sum(single_cycle_channel(t).values) / 4 ** t.n_L
        window = max(theorem_constants(eps1)[0], 1e-9)
        for p in range(4 ** t.n_L):
            a = analyze_pauli(t, p, window)
            tm = transfer_matrix(t, p)
            residual = tm.T - a.lam * np.outer(a.v, a.v)
            assert a.residual_norm <= (1 + math.sqrt(2)) * window
            np.testing.assert_allclose(residual @ a.v, 0.0, atol=1e-10)
            assert np.linalg.norm(a.f_vec) <= 1 / (1 - a.residual_norm / a.lam) + 1e-9


def test_single_cycle_eigenvalues_are_close_to_one(rng):
    for t in noisy_cycles(rng):
        lam1 = single_cycle_channel(t).values
        eps1 = 1.0 - lam1.mean()
        assert np.all(lam1 >= 1 - 2 * eps1 - 1e-12)


def test_dominant_eigenvalue_localization(rng):
    for t in noisy_cycles(rng):
        model = build_model(t, [], [], workers=1)
        assert np.all(model.chi.values >= 1 - 2 * math.sqrt(model.eps1) - 1e-12)


def test_fit_recovers_flip_rate():
    q = 0.004
    spec, prep, meas = flip_spec(q)
    t, pt, mt = transfers(spec, prep, meas)
    series = [exact_eigenvalue_general(t, pt, mt, 'Z', k) for k in KS]
    assert fit_decay(KS, series).chi == pytest.approx(1 - 2 * q, abs=1e-6)


def detected_error_cycle(t, b=0.1):
    """Two syndrome bits with a nonlinear decoder; a detected error with probability b and one
    damaging term with probability t whose effect depends on the incoming syndrome."""
    layout = RegisterLayout(1, 2, 0, 2)
    noise = PauliChannel.from_terms(layout.widths, [
        ('I|II||II', 1 - b - t),
        ('Z|XI||II', b),
        ('I|IX||IX', t),
    ])
    decoder = DecoderTable.from_mapping(1, 2, {'01': 'X', '10': 'Z', '11': 'X'})
    return QecCycleSpec(layout, RepetitionCode(2, 1), decoder, BitString(0, 2), noise)


@pytest.mark.parametrize('t', [1e-3, 4e-3])
def test_lambda1_gap_closed_form(t):
    b = 0.1
    report = lambda1_first_order_report(cycle_transfer(detected_error_cycle(t, b), workers=1))
    assert report.loc['X', 'lambda1'] == pytest.approx(1 - 2 * t * b, abs=1e-14)
    assert report.loc['X', 'chi'] == pytest.approx((1 + math.sqrt(1 - 8 * t * b)) / 2, abs=1e-13)


def test_lambda1_gap_is_second_order():
    gaps = [lambda1_first_order_report(cycle_transfer(detected_error_cycle(t), workers=1))['gap'].max()
            for t in (1e-3, 2e-3)]
    assert gaps[0] > 0
    assert 3.5 <= gaps[1] / gaps[0] <= 4.5
