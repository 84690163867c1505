import numpy as np
import pytest

from conftest import flip_spec, random_meas, random_prep, random_spec, transfers
from logmarkov.errors import ValidationError
from logmarkov.markov import exact_eigenvalue_table, exact_probability
from logmarkov.oracle import (
    eigen_table_to_channel,
    path_sum_channel,
    path_sum_exact,
    shard_seed,
    splitmix64,
    trajectory_sample,
)
from logmarkov.pauli import PauliEigenTable, PauliLabel


def test_splitmix64_reference_value():
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert shard_seed(7, 3) == splitmix64(10)
    assert shard_seed(2 ** 64 - 1, 1) == splitmix64(0)


def test_eigen_table_to_channel():
    p = 0.1
    ch = eigen_table_to_channel(PauliEigenTable(1, [1.0, 1.0, 1 - 2 * p, 1 - 2 * p]))
    assert ch.terms[PauliLabel.parse('I')] == pytest.approx(1 - p)
    assert ch.terms[PauliLabel.parse('X')] == pytest.approx(p)
    assert ch.total() == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        eigen_table_to_channel(PauliEigenTable(1, [1.0, -1.0, -1.0, -1.0]))


@pytest.mark.parametrize('q', [0.0, 0.01, 0.2])
def test_path_sum_flip_model(q):
    spec, prep, meas = flip_spec(q)
    t, pt, mt = transfers(spec, prep, meas)
    outcomes = [frozenset({0}), frozenset({1})]
    for k in (0, 1, 6):
        probs = path_sum_exact(t, pt, mt, k, prep.sigma, outcomes)
        decay = (1 - 2 * q) ** k
        np.testing.assert_allclose(probs, [(1 + decay) / 2, (1 - decay) / 2], atol=1e-14)
        assert path_sum_channel(t, pt, mt, k)['Z'] == pytest.approx(decay, abs=1e-14)


def test_path_sum_matches_eigenvalue_propagation(rng):
    for n_L, n_S, randomize in [(1, 1, False), (1, 2, True), (2, 2, False), (2, 1, True)]:
        code = 'table' if randomize else 'repetition'
        spec = random_spec(rng, n_L, n_S, randomize=randomize, strength=0.05, code=code)
        prep, meas = random_prep(rng, spec, 0.02), random_meas(rng, spec, 0.02)
        t, pt, mt = transfers(spec, prep, meas)
        for k in range(0, 11, 2):
            np.testing.assert_allclose(path_sum_channel(t, pt, mt, k).values,
                                       exact_eigenvalue_table(t, pt, mt, k).values, atol=1e-10)
        probs = path_sum_exact(t, pt, mt, 4, prep.sigma, meas.povm)
        assert probs.sum() == pytest.approx(1.0)
        for e, prob in zip(meas.povm, probs):
            assert prob == pytest.approx(exact_probability(t, pt, mt, 4, prep.sigma, e), abs=1e-10)


def test_sampler_noiseless():
    spec, prep, meas = flip_spec(0.0)
    counts = trajectory_sample(spec, prep, meas, 10, 1000, seed=1, workers=1)
    assert counts.counts.tolist() == [1000, 0]
    assert counts.frequencies().tolist() == [1.0, 0.0]


def test_sampler_flip_model_statistics():
    q, k, shots = 0.1, 5, 100_000
    spec, prep, meas = flip_spec(q)
    counts = trajectory_sample(spec, prep, meas, k, shots, seed=11, workers=2)
    p1 = (1 - (1 - 2 * q) ** k) / 2
    assert abs(counts.counts[1] - shots * p1) <= 5 * np.sqrt(shots * p1 * (1 - p1))


def test_sampler_matches_exact_probabilities(rng):
    shots = 40_000
    for randomize in (False, True):
        code = 'table' if randomize else 'repetition'
        spec = random_spec(rng, 1, 2, randomize=randomize, strength=0.08, code=code)
        prep, meas = random_prep(rng, spec, 0.05), random_meas(rng, spec, 0.05)
        t, pt, mt = transfers(spec, prep, meas)
        counts = trajectory_sample(spec, prep, meas, 3, shots, seed=5, workers=1)
        grouped = counts.grouped(meas.povm)
        for e, n in zip(meas.povm, grouped):
            p = exact_probability(t, pt, mt, 3, prep.sigma, e)
            assert abs(n - shots * p) <= 5 * np.sqrt(shots * p * (1 - p)) + 1e-9


def test_sampler_is_independent_of_thread_count(rng):
    spec = random_spec(rng, 1, 2, strength=0.1)
    prep, meas = random_prep(rng, spec, 0.05), random_meas(rng, spec, 0.05)
    one = trajectory_sample(spec, prep, meas, 4, 20_000, seed=99, workers=1)
    many = trajectory_sample(spec, prep, meas, 4, 20_000, seed=99, workers=4)
    np.testing.assert_array_equal(one.counts, many.counts)
    other = trajectory_sample(spec, prep, meas, 4, 20_000, seed=100, workers=1)
    assert other.counts.sum() == 20_000


def test_deferred_corrections_give_identical_counts(rng):
    spec = random_spec(rng, 2, 2, strength=0.1)
    prep, meas = random_prep(rng, spec, 0.05), random_meas(rng, spec, 0.05)
    now = trajectory_sample(spec, prep, meas, 6, 10_000, seed=3, workers=1)
    later = trajectory_sample(spec, prep, meas, 6, 10_000, seed=3, defer_corrections=True, workers=1)
    np.testing.assert_array_equal(now.counts, later.counts)


def test_sampler_rejects_empty_runs():
    spec, prep, meas = flip_spec(0.0)
    with pytest.raises(ValueError):
        trajectory_sample(spec, prep, meas, 1, 0)
