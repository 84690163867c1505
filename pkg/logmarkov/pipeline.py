"""
Analysis pipelines behind the CLI subcommands

extract -> build model -> verify bounds, and trajectory sampling against the exact path sum.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd

from . import config
from .cycle import check_decoding_symmetry, validate_spec
from .errors import CapacityError, HypothesisViolation
from .extraction import (
    CycleTransfer,
    MeasTransfer,
    PrepTransfer,
    absorb_cycle_into_prep,
    cycle_transfer,
    meas_transfer,
    prep_transfer,
)
from .markov import (
    MarkovModel,
    build_model,
    exact_eigenvalue_series,
    outcome_probability,
    pauli_diag_probability_bound,
)
from .oracle import path_sum_exact, trajectory_sample
from .pauli import logical_labels
from .report import HYPOTHESIS_WATERMARK, counts_frame, outcome_label
from .spec_io import LoadedSpec

log = logging.getLogger(__name__)


@dataclass
class Transfers:
    """Extracted tables for one loaded spec.

    Attributes:
        cycle: Cycle tables.
        preps: Prep tables used by the model, with the first cycle folded in when requested.
        raw_preps: Prep tables exactly as specified.
        meas: Measurement tables.
        absorbed: Whether ``preps`` include one absorbed cycle.
    """

    cycle: CycleTransfer
    preps: list[PrepTransfer]
    raw_preps: list[PrepTransfer]
    meas: list[MeasTransfer]
    absorbed: bool = False


@dataclass
class VerificationReport:
    eigen: pd.DataFrame
    probability: pd.DataFrame
    summary: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return bool(self.eigen['pass'].all() and self.probability['pass'].all())


def check_spec(loaded: LoadedSpec) -> list[str]:
    """Every issue of a loaded spec: conventions, normalization and settings."""
    issues = validate_spec(loaded.cycle) + loaded.settings.issues()
    if not issues and not loaded.cycle.randomize_syndrome:
        try:
            if not check_decoding_symmetry(loaded.cycle.code):
                issues.append('code: decoding symmetry fails; set randomize_syndrome for SMIP')
        except CapacityError as exc:
            log.warning('decoding symmetry not checked: %s', exc)
    return issues


def extract(loaded: LoadedSpec, workers: int | None = None) -> Transfers:
    """Run the cycle, prep and measurement extractions of a spec."""
    spec = loaded.cycle
    s_star = spec.s_star.value
    t = cycle_transfer(spec, workers=workers)
    raw = [prep_transfer(p, s_star, spec.decoder) for p in loaded.settings.preps]
    meas = [meas_transfer(m, s_star, spec.decoder) for m in loaded.settings.meas]
    absorb = loaded.absorb_first_cycle and t.smip
    preps = [absorb_cycle_into_prep(pt, t) for pt in raw] if absorb else raw
    log.info('extracted %d preps, %d measurements (first cycle absorbed: %s)', len(raw), len(meas), absorb)
    return Transfers(t, preps, raw, meas, absorb)


def analyze(
    loaded: LoadedSpec,
    *,
    criterion: str = 'fidelity',
    strict: bool = False,
    workers: int | None = None,
) -> tuple[Transfers, MarkovModel]:
    """Extract the tables of a spec and build its approximate Markovian model.

    Raises:
        HypothesisViolation: Without SMIP, or in strict mode on eigenpair failures.
    """
    tr = extract(loaded, workers)
    if not tr.cycle.smip:
        raise HypothesisViolation('SMIP fails: syndrome marginal depends on the input syndrome; '
                                  'enable randomize_syndrome')
    model = build_model(tr.cycle, tr.preps, tr.meas, loaded.settings.pairs,
                        criterion=criterion, strict=strict, workers=workers)
    return tr, model


def summary(loaded: LoadedSpec, tr: Transfers, model: MarkovModel) -> dict:
    try:
        symmetric = check_decoding_symmetry(loaded.cycle.code)
    except CapacityError:
        symmetric = None
    out = {
        'f1': model.f1,
        'eps1': model.eps1,
        'eps': model.eps,
        'g_prime': model.g_prime,
        'g_total': model.g_total,
        'op_norm': model.op_norm,
        'criterion': model.criterion,
        'smip': tr.cycle.smip,
        'randomized': tr.cycle.randomized,
        'decoding_symmetry': symmetric,
        'first_cycle_absorbed': tr.absorbed,
        'hypothesis_ok': model.hypothesis_ok,
        'reasons': list(model.reasons),
    }
    if not model.hypothesis_ok:
        out['watermark'] = HYPOTHESIS_WATERMARK
    return out


def verify(
    loaded: LoadedSpec,
    tr: Transfers,
    model: MarkovModel,
    ks: Sequence[int],
    tol: float = config.NORM_TOL,
) -> VerificationReport:
    """Compare the model against the exact eigenvalues and outcome probabilities.

    A cell passes when gap <= bound + tol; ``within_bound`` keeps the raw comparison. Probability
    rows also carry ``measured_bound``, the bound implied by the measured eigenvalue gaps at that K.

    Args:
        loaded: The spec, for preparation states and POVMs.
        tr: Extracted tables.
        model: Model built from ``tr``.
        ks: Cycle counts to sweep.
        tol: Absolute floating-point floor added to each bound.

    Returns:
        Eigenvalue and probability tables plus the model summary.
    """
    ks = list(ks)
    labels = [str(p) for p in logical_labels(model.n_L)]
    bounds = np.array([model.bound(k) for k in ks])
    pbounds = np.array([model.probability_bound(k) for k in ks])
    eigen_parts, prob_rows = [], []
    for p, m in loaded.settings.pairs:
        prep, meas = loaded.settings.preps[p], loaded.settings.meas[m]
        exact = exact_eigenvalue_series(tr.cycle, tr.preps[p], tr.meas[m], ks)
        predicted = np.array([model.predict_eigenvalues(p, m, k) for k in ks])
        gap = np.abs(exact - predicted)
        eigen_parts.append(pd.DataFrame({
            'prep': prep.name,
            'meas': meas.name,
            'pauli': np.tile(labels, len(ks)),
            'K': np.repeat(ks, len(labels)),
            'exact': exact.ravel(),
            'model': predicted.ravel(),
            'gap': gap.ravel(),
            'bound': np.repeat(bounds, len(labels)),
        }))
        for j, k in enumerate(ks):
            measured = pauli_diag_probability_bound(gap[j], 2 ** model.n_L)
            for e in meas.povm:
                want = outcome_probability(exact[j], prep.sigma, e)
                got = outcome_probability(predicted[j], prep.sigma, e)
                prob_rows.append({
                    'prep': prep.name,
                    'meas': meas.name,
                    'outcome': outcome_label(e, model.n_L),
                    'K': k,
                    'exact': want,
                    'model': got,
                    'gap': abs(want - got),
                    'bound': pbounds[j],
                    'measured_bound': measured,
                })
    eigen = pd.concat(eigen_parts, ignore_index=True)
    prob = pd.DataFrame(prob_rows, columns=[
        'prep', 'meas', 'outcome', 'K', 'exact', 'model', 'gap', 'bound', 'measured_bound'])
    for df in (eigen, prob):
        df['within_bound'] = df['gap'] <= df['bound']
        df['pass'] = df['gap'] <= df['bound'] + tol
    report = VerificationReport(eigen, prob, summary(loaded, tr, model))
    report.summary['all_pass'] = report.all_pass
    report.summary['tol'] = tol
    failed = int((~eigen['pass']).sum() + (~prob['pass']).sum())
    if failed:
        log.warning('%d verification cells exceed their bound', failed)
    return report


def simulate(
    loaded: LoadedSpec,
    ks: Sequence[int],
    shots: int,
    seed: int = config.DEFAULT_SEED,
    *,
    defer_corrections: bool = False,
    workers: int | None = None,
) -> pd.DataFrame:
    """Monte-Carlo counts per (setting, K, outcome) with the exact path-sum probability alongside.

    K counts raw noisy cycles after the specified preparation; no cycle is absorbed.
    """
    tr = extract(loaded, workers)
    frames = []
    for p, m in loaded.settings.pairs:
        prep, meas = loaded.settings.preps[p], loaded.settings.meas[m]
        for k in ks:
            counts = trajectory_sample(loaded.cycle, prep, meas, k, shots, seed,
                                       defer_corrections=defer_corrections, workers=workers)
            df = counts_frame(counts, meas.povm)
            df['exact'] = path_sum_exact(tr.cycle, tr.raw_preps[p], tr.meas[m], k, prep.sigma, meas.povm)
            df.insert(0, 'K', k)
            df.insert(0, 'meas', meas.name)
            df.insert(0, 'prep', prep.name)
            frames.append(df)
    out = pd.concat(frames, ignore_index=True)
    p_hat = out['exact']
    sd = np.sqrt(shots * p_hat * (1.0 - p_hat))
    diff = out['count'] - shots * p_hat
    degenerate = np.where(np.abs(diff) > 0.5, np.inf, 0.0)
    out['z'] = np.where(sd > 0, diff / np.where(sd > 0, sd, 1.0), degenerate)
    return out
