from unittest import mock

import numpy as np
import pandas as pd
import pytest

from logmarkov.errors import ValidationError
from logmarkov.fit import fit_decay, fit_direct, fit_frame


def test_exact_exponential():
    k = np.arange(1, 21)
    fit = fit_decay(k, 0.7 * 0.9 ** k)
    assert fit.method == 'wls-log'
    assert fit.chi == pytest.approx(0.9, abs=1e-6)
    assert fit.amplitude == pytest.approx(0.7, abs=1e-6)
    assert fit.rms < 1e-10


def test_negative_series_keeps_sign():
    k = np.arange(0, 10)
    fit = fit_decay(k, -0.5 * 0.8 ** k)
    assert fit.amplitude == pytest.approx(-0.5)
    assert fit.chi == pytest.approx(0.8)


def test_constant_series():
    fit = fit_decay([1, 2, 3, 4], [0.6, 0.6, 0.6, 0.6])
    assert fit.chi == pytest.approx(1.0, abs=1e-9)
    assert fit.amplitude == pytest.approx(0.6)


def test_sign_alternating_data_uses_direct_fit():
    k = np.arange(1, 8)
    values = 0.9 ** k
    values[3] = -1e-3
    fit = fit_decay(k, values)
    assert fit.method == 'bounded-scalar'
    assert 0 < fit.chi <= 1
    assert np.isnan(fit.chi_stderr)


def test_zero_value_uses_direct_fit():
    fit = fit_decay([0, 1, 2], [1.0, 0.5, 0.0])
    assert fit.method == 'bounded-scalar'
    assert 0 < fit.chi <= 1


def test_fallback_when_log_fit_is_rejected():
    k = np.arange(1, 11)
    with mock.patch('logmarkov.fit.fit_log_linear', side_effect=ValidationError('boom')):
        fit = fit_decay(k, 0.95 ** k)
    assert fit.method == 'bounded-scalar'
    assert fit.chi == pytest.approx(0.95, abs=1e-6)
    assert fit.amplitude == pytest.approx(1.0, abs=1e-5)


def test_direct_fit_prefers_no_decay():
    fit = fit_direct(np.arange(5.0), np.full(5, 0.3), np.ones(5))
    assert fit.chi == 1.0
    assert fit.amplitude == pytest.approx(0.3)


def test_input_checks():
    with pytest.raises(ValidationError):
        fit_decay([1], [0.5])
    with pytest.raises(ValidationError):
        fit_decay([1, 2], [0.5])


def test_fit_frame():
    df = pd.DataFrame({'K': range(1, 11), 'value': 0.99 ** np.arange(1, 11)})
    fit = fit_frame(df)
    assert fit.chi == pytest.approx(0.99)
    assert set(fit.as_dict()) == {'A', 'chi', 'chi_stderr', 'rms', 'method'}
    with pytest.raises(ValidationError, match='value'):
        fit_frame(df.rename(columns={'value': 'v'}))


def test_noisy_series_within_stderr():
    rng = np.random.default_rng(8)
    k = np.arange(1, 31)
    values = 0.97 ** k * np.exp(rng.normal(0, 0.002, k.size))
    fit = fit_decay(k, values)
    assert abs(fit.chi - 0.97) <= 4 * fit.chi_stderr


@pytest.mark.parametrize('values, where', [
    (['0.5', 'abc', '0.2'], 'value'),
    ([0.5, np.nan, 0.2], 'value'),
    ([0.5, np.inf, 0.2], 'value'),
])
def test_rejects_non_finite_values(values, where):
    with pytest.raises(ValidationError) as info:
        fit_decay([1, 2, 3], values)
    assert info.value.path == where


def test_rejects_bad_weights_and_counts():
    with pytest.raises(ValidationError) as info:
        fit_decay([1, 2, 3], [0.5, 0.3, 0.2], [1.0, np.nan, 1.0])
    assert info.value.path == 'weight'
    with pytest.raises(ValidationError) as info:
        fit_decay([1, None, 3], [0.5, 0.3, 0.2])
    assert info.value.path == 'K'
    with pytest.raises(ValidationError, match='length'):
        fit_decay([1, 2, 3], [0.5, 0.3, 0.2], [1.0, 1.0])
