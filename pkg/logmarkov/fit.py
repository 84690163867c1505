"""Single-exponential decay fits value ~ A * chi^K for memory-experiment series."""

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
import statsmodels.api as sm
from scipy.optimize import minimize_scalar

from .errors import ValidationError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecayFit:
    """Fitted amplitude and decay with the method that produced them."""

    amplitude: float
    chi: float
    chi_stderr: float
    rms: float
    method: str

    def as_dict(self) -> dict:
        return {
            'A': self.amplitude,
            'chi': self.chi,
            'chi_stderr': self.chi_stderr,
            'rms': self.rms,
            'method': self.method,
        }


def _rms(k, values, amplitude, chi) -> float:
    return float(np.sqrt(np.mean((values - amplitude * chi ** k) ** 2)))


def _finite(name: str, data) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f'not numeric: {exc}', name) from exc
    bad = np.flatnonzero(~np.isfinite(arr))
    if len(bad):
        raise ValidationError(f'missing or non-finite entries at rows {bad.tolist()}', name)
    return arr


def fit_log_linear(k: np.ndarray, values: np.ndarray, weights: np.ndarray) -> DecayFit:
    """Weighted least squares of log|value| against K.

    Raises:
        ValidationError: On zeros or mixed signs.
    """
    signs = np.sign(values)
    if np.any(signs == 0) or np.any(signs != signs[0]):
        raise ValidationError('log-linear fit needs non-zero values of one sign')
    X = sm.add_constant(k.astype(float), has_constant='add')
    res = sm.WLS(np.log(np.abs(values)), X, weights=weights).fit()
    intercept, slope = res.params
    amplitude = float(signs[0] * math.exp(intercept))
    chi = math.exp(slope)
    stderr = float(chi * res.bse[1]) if np.isfinite(res.bse[1]) else math.nan
    return DecayFit(amplitude, chi, stderr, _rms(k, values, amplitude, chi), 'wls-log')


def fit_direct(k: np.ndarray, values: np.ndarray, weights: np.ndarray) -> DecayFit:
    """Bounded scalar search over chi in (0, 1] with the least-squares amplitude for each chi."""

    def amplitude(chi):
        basis = chi ** k
        denom = float(np.sum(weights * basis ** 2))
        return float(np.sum(weights * values * basis) / denom) if denom > 0 else 0.0

    def loss(chi):
        return float(np.sum(weights * (values - amplitude(chi) * chi ** k) ** 2))

    res = minimize_scalar(loss, bounds=(1e-12, 1.0), method='bounded', options={'xatol': 1e-12})
    chi = float(res.x)
    if loss(1.0) <= res.fun:
        chi = 1.0
    amp = amplitude(chi)
    return DecayFit(amp, chi, math.nan, _rms(k, values, amp, chi), 'bounded-scalar')


def fit_decay(k, values, weights=None) -> DecayFit:
    """Fit value ~ A * chi^K.

    Uses the log-linear WLS fit when the data are non-zero and of one sign, and falls
    back to the direct bounded fit otherwise.

    Args:
        k: Cycle counts.
        values: Pauli expectations or success probabilities.
        weights: Optional per-point weights.

    Returns:
        The fit.

    Raises:
        ValidationError: On non-numeric, missing or non-finite entries, or mismatched lengths.
    """
    k = _finite('K', k)
    values = _finite('value', values)
    if k.shape != values.shape or k.size < 2:
        raise ValidationError('need at least two (K, value) points of matching length')
    weights = np.ones_like(values) if weights is None else _finite('weight', weights)
    if weights.shape != values.shape:
        raise ValidationError('weights must match the values in length')
    try:
        return fit_log_linear(k, values, weights)
    except ValidationError:
        log.warning('log-linear fit not applicable (non-positive or sign-alternating data), using direct fit')
        return fit_direct(k, values, weights)


def fit_frame(df: pd.DataFrame) -> DecayFit:
    """Fit a DataFrame with columns ``K``, ``value`` and optionally ``weight``."""
    missing = {'K', 'value'} - set(df.columns)
    if missing:
        raise ValidationError(f'missing columns {sorted(missing)}')
    weights = df['weight'].to_numpy() if 'weight' in df.columns else None
    return fit_decay(df['K'].to_numpy(), df['value'].to_numpy(), weights)
