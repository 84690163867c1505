"""
Markov builder - transfer matrices, dominant eigenpairs and the approximate logical model

For each logical Pauli P the syndrome-space transfer matrix T_P = sqrt(S) F_P sqrt(S) is split as
lambda_P v v^T + E', and the exact eigenvalue after K cycles is approximated by
C_prep * C_meas * lambda_P^K with an error of at most G' eps^K.
"""

from __future__ import annotations

import concurrent.futures
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd

from . import config
from .errors import CapacityError, HypothesisViolation
from .extraction import CycleTransfer, MeasTransfer, PrepTransfer, entanglement_fidelity, single_cycle_channel
from .linalg import frobenius_norm, operator_norm, spectrum
from .pauli import PauliEigenTable, PauliLabel, table_index, table_xz

log = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


def pauli_index(p: PauliLabel | str | int, n_L: int) -> int:
    """Table position of a logical Pauli given as label, text or index."""
    if isinstance(p, str):
        p = PauliLabel.parse(p, (n_L,))
    if isinstance(p, PauliLabel):
        return table_index(p.x, p.z, n_L)
    return int(p)


@dataclass(frozen=True)
class TransferMatrix:
    """F_P, T_P and the syndrome marginal they are built from."""

    pauli: int
    F: np.ndarray
    T: np.ndarray
    sigma: np.ndarray

    @property
    def sqrt_sigma(self) -> np.ndarray:
        return np.sqrt(self.sigma)


@dataclass
class EigenAnalysis:
    """Dominant eigenpair of one transfer matrix and the pieces derived from it."""

    pauli: int
    lam: float
    v: np.ndarray
    residual_norm: float
    f_vec: np.ndarray
    window: float
    in_window: bool = True
    reason: str = ''


@dataclass
class MarkovModel:
    """Approximate logical Markovian model.

    Attributes:
        n_L: Logical qubits.
        chi: Per-Pauli decay eigenvalues.
        c_prep: Shape (n_preps, 4^n_L).
        c_meas: Shape (n_meas, 4^n_L).
        pairs: (prep, meas) index pairs the model covers.
        eps1, eps, g_prime, g_total, f1: Bound constants.
        op_norm: Largest ||T_P - |sqrt g><sqrt g| ||_op over P.
        criterion: ``'fidelity'`` or ``'opnorm'``.
        hypothesis_ok: Whether every construction hypothesis holds.
        reasons: Failed hypotheses, empty when ``hypothesis_ok``.
    """

    n_L: int
    chi: PauliEigenTable
    c_prep: np.ndarray
    c_meas: np.ndarray
    pairs: list[tuple[int, int]]
    eps1: float
    eps: float
    g_prime: float
    g_total: float
    f1: float
    op_norm: float
    criterion: str
    hypothesis_ok: bool
    reasons: list[str] = field(default_factory=list)
    analyses: list[EigenAnalysis] = field(default_factory=list, repr=False)

    def predict_eigenvalues(self, prep: int, meas: int, k: int) -> np.ndarray:
        """C_prep * C_meas * chi^K for every logical Pauli."""
        return self.c_prep[prep] * self.c_meas[meas] * self.chi.values ** k

    def logical_error_rates(self) -> PauliEigenTable:
        """Effective per-cycle flip probability (1 - chi_P) / 2."""
        return PauliEigenTable(self.n_L, (1.0 - self.chi.values) / 2.0)

    def bound(self, k: int) -> float:
        return self.g_prime * self.eps ** k

    def probability_bound(self, k: int) -> float:
        return self.g_total * self.eps ** k


def theorem_constants(eps1: float, op_norm: float | None = None) -> tuple[float, float]:
    """Closed-form ``(eps, g_prime)``.

    Args:
        eps1: Single-cycle logical infidelity 1 - f1.
        op_norm: Known ||2 sqrt(S) E_P sqrt(S)||_op bound. When given, it replaces the
            fidelity criterion: eps = (1 + sqrt 2) op_norm.

    Returns:
        eps and G'. G' is infinite when its denominator is not positive.
    """
    if op_norm is None:
        root = math.sqrt(max(eps1, 0.0))
        eps = 2.0 * (1.0 + SQRT2) * root
        floor = 1.0 - 2.0 * root
    else:
        eps = (1.0 + SQRT2) * op_norm
        floor = 1.0 - op_norm
    denom = 1.0 - eps / floor if floor > 0 else 0.0
    g_prime = 1.0 + 1.0 / denom if denom > 0 else math.inf
    return eps, g_prime


def transfer_matrix(t: CycleTransfer, p: PauliLabel | str | int) -> TransferMatrix:
    """Build F_P and T_P; F is 1 on rows where the marginal vanishes.

    Raises:
        HypothesisViolation: Without SMIP.
    """
    gamma = t.require_smip()
    idx = pauli_index(p, t.n_L)
    if t.dim > config.MAX_TRANSFER_DIM:
        raise CapacityError(f'transfer matrix dimension {t.dim} exceeds {config.MAX_TRANSFER_DIM}')
    with np.errstate(divide='ignore', invalid='ignore'):
        F = np.where(gamma[:, None] > 0, t.weighted[idx] / gamma[:, None], 1.0)
    root = np.sqrt(gamma)
    T = root[:, None] * F * root[None, :]
    return TransferMatrix(idx, F, T, gamma)


def perturbation_norms(tm: TransferMatrix) -> tuple[float, float, float]:
    """Return gamma^T E gamma, ||sqrt(S) E sqrt(S)||_F and ||sqrt(S) E sqrt(S)||_op with E = (N - F) / 2."""
    E = (1.0 - tm.F) / 2.0
    root = tm.sqrt_sigma
    scaled = root[:, None] * E * root[None, :]
    return float(tm.sigma @ E @ tm.sigma), frobenius_norm(scaled), operator_norm(scaled)


def dominant_eigenpair(tm: TransferMatrix, eps_window: float, strict: bool = True) -> tuple[float, np.ndarray, str]:
    """Select the unique real eigenvalue with |1 - lambda| <= eps_window.

    Args:
        tm: Transfer matrix.
        eps_window: Half-width of the window around 1.
        strict: Raise when the window does not hold exactly one real eigenvalue. Otherwise
            fall back to the real eigenvalue with the largest real part.

    Returns:
        ``(lambda, v, reason)`` with v a unit vector, <sqrt g|v> >= 0, and ``reason`` empty
        unless the fallback was used.

    Raises:
        HypothesisViolation: In strict mode, for zero, multiple or complex window eigenvalues.
    """
    vals, vecs = spectrum(tm.T)
    hits = np.flatnonzero(np.abs(1.0 - vals) <= eps_window)
    reason = ''
    if len(hits) == 1 and abs(vals[hits[0]].imag) <= config.EIGVEC_TOL:
        pick = int(hits[0])
    else:
        if not len(hits):
            reason = f'no eigenvalue within {eps_window:.3g} of 1'
        elif len(hits) > 1:
            reason = f'{len(hits)} eigenvalues within {eps_window:.3g} of 1'
        else:
            reason = f'complex eigenvalue {vals[hits[0]]:.6g} within {eps_window:.3g} of 1'
        if strict:
            raise HypothesisViolation(f'pauli index {tm.pauli}: {reason}')
        real = np.flatnonzero(np.abs(vals.imag) <= config.EIGVEC_TOL)
        if not len(real):
            raise HypothesisViolation(f'pauli index {tm.pauli}: no real eigenvalue')
        pick = int(real[np.argmax(vals[real].real)])
        log.warning('pauli index %d: %s; using lambda=%.6g', tm.pauli, reason, vals[pick].real)
    lam = float(vals[pick].real)
    v = np.real(vecs[:, pick])
    v = v / np.linalg.norm(v)
    if tm.sqrt_sigma @ v < 0:
        v = -v
    return lam, v, reason


def residual_and_f(tm: TransferMatrix, lam: float, v: np.ndarray) -> tuple[float, np.ndarray]:
    """Residual E' = T - lambda v v^T and the geometric-sum vector f.

    Returns:
        ``(||E'||_op, f)`` with f solving (I - E'^T / lambda) f = v.

    Raises:
        HypothesisViolation: When lambda is zero or the solve is singular.
    """
    residual = tm.T - lam * np.outer(v, v)
    norm = operator_norm(residual)
    if lam == 0.0:
        raise HypothesisViolation('dominant eigenvalue is zero')
    try:
        f_vec = np.linalg.solve(np.eye(len(v)) - residual.T / lam, v)
    except np.linalg.LinAlgError as exc:
        raise HypothesisViolation(f'geometric-sum solve failed: {exc}') from exc
    if not np.all(np.isfinite(f_vec)):
        raise HypothesisViolation('geometric-sum solve produced non-finite values')
    return norm, f_vec


def analyze_pauli(t: CycleTransfer, p: int, eps_window: float, strict: bool = True) -> EigenAnalysis:
    tm = transfer_matrix(t, p)
    lam, v, reason = dominant_eigenpair(tm, eps_window, strict)
    norm, f_vec = residual_and_f(tm, lam, v)
    return EigenAnalysis(tm.pauli, lam, v, norm, f_vec, eps_window, not reason, reason)


def exact_eigenvalue(t: CycleTransfer, pt: PrepTransfer, mt: MeasTransfer, p: PauliLabel | str | int, k: int) -> float:
    """m^T sqrt(S) T^K sqrt(S) p for one logical Pauli; exact when gamma_prep equals the marginal."""
    if k < 0:
        raise ValueError(f'K must be non-negative, got {k}')
    tm = transfer_matrix(t, p)
    root = tm.sqrt_sigma
    vec = root * pt.eigen[:, tm.pauli]
    for _ in range(k):
        vec = tm.T @ vec
    return float((root * mt.eigen[:, tm.pauli]) @ vec)


def exact_eigenvalue_table(t: CycleTransfer, pt: PrepTransfer, mt: MeasTransfer, k: int) -> PauliEigenTable:
    """Exact total eigenvalues m^T W^K (gamma_prep * p) for every Pauli; no SMIP needed."""
    if k < 0:
        raise ValueError(f'K must be non-negative, got {k}')
    vec = pt.weighted
    for _ in range(k):
        vec = np.einsum('pij,jp->ip', t.weighted, vec)
    return PauliEigenTable(t.n_L, np.einsum('sp,sp->p', mt.eigen, vec))


def exact_eigenvalue_series(t: CycleTransfer, pt: PrepTransfer, mt: MeasTransfer, ks: Sequence[int]) -> np.ndarray:
    """Exact eigenvalue tables for several K, shape (len(ks), 4^n_L), sharing the matrix powers."""
    wanted = sorted(set(ks))
    out = {}
    vec = pt.weighted
    k = 0
    for target in wanted:
        while k < target:
            vec = np.einsum('pij,jp->ip', t.weighted, vec)
            k += 1
        out[target] = np.einsum('sp,sp->p', mt.eigen, vec)
    return np.array([out[k] for k in ks])


def exact_eigenvalue_general(t: CycleTransfer, pt: PrepTransfer, mt: MeasTransfer, p, k: int) -> float:
    """Exact total eigenvalue of one Pauli, valid for any gamma_prep."""
    return exact_eigenvalue_table(t, pt, mt, k)[pauli_index(p, t.n_L)]


def prep_requirement_ok(t: CycleTransfer, pt: PrepTransfer, tol: float = config.SMIP_TOL) -> bool:
    return t.marginal is not None and bool(np.max(np.abs(pt.gamma - t.marginal)) <= tol)


def build_model(
    t: CycleTransfer,
    preps: Sequence[PrepTransfer],
    meas: Sequence[MeasTransfer],
    pairs: Sequence[tuple[int, int]] | None = None,
    *,
    eps_window: float | None = None,
    criterion: str = 'fidelity',
    strict: bool = False,
    tol: float = config.SMIP_TOL,
    workers: int | None = None,
) -> MarkovModel:
    """Assemble the approximate logical Markovian model.

    Args:
        t: Cycle tables with SMIP.
        preps: Prep transfers, one per preparation.
        meas: Measurement transfers, one per measurement.
        pairs: Settings to cover; defaults to all combinations.
        eps_window: Eigenvalue window; defaults to eps, floored at ``EPS_WINDOW_FLOOR``.
        criterion: ``'fidelity'`` uses eps1 <= 1/64; ``'opnorm'`` uses the measured
            perturbation norm <= 1/4.
        strict: Propagate eigenpair selection failures instead of falling back.
        tol: Tolerance of the prep requirement.
        workers: Thread cap for the per-Pauli analyses.

    Returns:
        The model; ``hypothesis_ok`` and ``reasons`` record which conditions hold.

    Raises:
        HypothesisViolation: Without SMIP, or in strict mode on eigenpair failures.
    """
    if criterion not in ('fidelity', 'opnorm'):
        raise ValueError(f'unknown criterion {criterion!r}')
    gamma = t.require_smip()
    n_L = t.n_L
    size = 4 ** n_L
    if pairs is None:
        pairs = [(p, m) for p in range(len(preps)) for m in range(len(meas))]
    pairs = [tuple(pm) for pm in pairs]

    f1 = entanglement_fidelity(single_cycle_channel(t))
    eps1 = max(0.0, 1.0 - f1)
    rank_one = np.outer(np.sqrt(gamma), np.sqrt(gamma))
    op_norm = max(operator_norm(transfer_matrix(t, p).T - rank_one) for p in range(size))
    if criterion == 'opnorm':
        eps, g_prime = theorem_constants(eps1, op_norm)
        limit_ok = op_norm <= config.OPNORM_LIMIT
        limit_reason = f'perturbation norm {op_norm:.6g} > 1/4'
    else:
        eps, g_prime = theorem_constants(eps1)
        limit_ok = eps1 <= config.EPS1_LIMIT
        limit_reason = f'eps1 = {eps1:.6g} > 1/64'
    window = eps_window if eps_window is not None else max(eps, config.EPS_WINDOW_FLOOR)

    with concurrent.futures.ThreadPoolExecutor(max_workers=config.max_workers(workers)) as executor:
        analyses = list(executor.map(lambda p: analyze_pauli(t, p, window, strict), range(size)))

    reasons = []
    if not limit_ok:
        reasons.append(limit_reason)
    for a in analyses:
        if not a.in_window:
            reasons.append(f'eigenvalue window for pauli index {a.pauli}: {a.reason}')
    for i, pt in enumerate(preps):
        if not prep_requirement_ok(t, pt, tol):
            reasons.append(f'prep {i}: initial syndrome distribution differs from the cycle marginal')

    root = np.sqrt(gamma)
    chi = np.array([a.lam for a in analyses])
    c_meas = np.zeros((len(meas), size))
    c_prep = np.zeros((len(preps), size))
    for a in analyses:
        for j, mt in enumerate(meas):
            c_meas[j, a.pauli] = (root * mt.eigen[:, a.pauli]) @ a.v
        for i, pt in enumerate(preps):
            c_prep[i, a.pauli] = a.f_vec @ (root * pt.eigen[:, a.pauli])

    model = MarkovModel(
        n_L=n_L,
        chi=PauliEigenTable(n_L, chi),
        c_prep=c_prep,
        c_meas=c_meas,
        pairs=list(pairs),
        eps1=eps1,
        eps=eps,
        g_prime=g_prime,
        g_total=g_prime * math.sqrt(2 ** n_L),
        f1=f1,
        op_norm=op_norm,
        criterion=criterion,
        hypothesis_ok=not reasons,
        reasons=reasons,
        analyses=analyses,
    )
    if reasons:
        log.warning('model hypotheses not satisfied: %s', '; '.join(reasons))
    log.info('built model: f1=%.12g eps1=%.3g eps=%.3g G\'=%.6g', f1, eps1, eps, g_prime)
    return model


def pauli_outcome_traces(outcome: frozenset[int] | set[int], n_L: int) -> np.ndarray:
    """tr(E_e P) for every table Pauli; zero unless P is Z-type."""
    xs, zs = table_xz(n_L)
    b = np.fromiter(outcome, dtype=np.int64)
    signs = 1.0 - 2.0 * (np.bitwise_count(b[:, None] & zs[None, :]) & 1)
    return np.where(xs == 0, signs.sum(axis=0), 0.0)


def outcome_probability(eigenvalues: np.ndarray, sigma: PauliEigenTable, outcome) -> float:
    """D^-1 sum_P tr(E_e P) lambda_P tr(P sigma)."""
    n_L = sigma.n
    traces = pauli_outcome_traces(outcome, n_L)
    return float(np.sum(traces * eigenvalues * sigma.values) / 2 ** n_L)


def predict_probability(model: MarkovModel, setting: tuple[int, int], k: int, outcome, sigma: PauliEigenTable) -> float:
    """Model prediction of the probability of ``outcome`` after K cycles."""
    p, m = setting
    return outcome_probability(model.predict_eigenvalues(p, m, k), sigma, outcome)


def exact_probability(t: CycleTransfer, pt: PrepTransfer, mt: MeasTransfer, k: int, sigma: PauliEigenTable, outcome):
    """True probability of ``outcome`` after K cycles, through the exact eigenvalues."""
    return outcome_probability(exact_eigenvalue_table(t, pt, mt, k).values, sigma, outcome)


def pauli_diag_probability_bound(eig_errors: Sequence[float] | np.ndarray, dim: int) -> float:
    """Probability-level error sqrt(D) max_P |eps_P| implied by per-Pauli eigenvalue errors."""
    errs = np.abs(np.asarray(eig_errors, dtype=float))
    return float(math.sqrt(dim) * errs.max()) if errs.size else 0.0


def lambda1_first_order_report(t: CycleTransfer, model: MarkovModel | None = None, window: float | None = None):
    """Compare lambda_1,P = gamma^T F_P gamma with the dominant eigenvalue chi_P.

    Returns:
        DataFrame indexed by Pauli with columns lambda1, chi, gap.
    """
    lam1 = single_cycle_channel(t)
    if model is not None:
        chi = model.chi.values
    else:
        if window is None:
            eps, _ = theorem_constants(1.0 - entanglement_fidelity(lam1))
            window = max(eps, config.EPS_WINDOW_FLOOR)
        chi = np.array([analyze_pauli(t, p, window, strict=False).lam for p in range(4 ** t.n_L)])
    df = pd.DataFrame({'lambda1': lam1.values, 'chi': chi}, index=pd.Index(lam1.labels(), name='pauli'))
    df['gap'] = (df['lambda1'] - df['chi']).abs()
    return df
