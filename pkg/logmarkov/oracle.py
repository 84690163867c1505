"""
Independent oracles - exact path sum over explicit channels and Monte-Carlo trajectories

The path sum never multiplies eigenvalues: it inverts each conditional eigen table to an explicit
Pauli mixture and propagates the joint (logical frame, syndrome) distribution by XOR convolution.
The sampler draws raw noise terms and runs the decoder, with no reference to the extracted tables.
"""

from __future__ import annotations

import concurrent.futures
import logging
from dataclasses import dataclass

import numpy as np

from . import config
from .cycle import MeasSpec, PrepSpec, QecCycleSpec, basis_distribution
from .errors import CapacityError, ValidationError
from .extraction import CycleTransfer, MeasTransfer, PrepTransfer
from .pauli import (
    PauliChannel,
    PauliEigenTable,
    PauliLabel,
    compose_index,
    sign_matrix,
    table_xz,
    walsh_hadamard_eigenvalues,
)

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One step of the SplitMix64 mixer on a 64-bit integer."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def shard_seed(seed: int, shard: int) -> int:
    return splitmix64((seed + shard) & MASK64)


def channel_probabilities(values: np.ndarray, n: int) -> np.ndarray:
    """Invert eigen tables (last axis) to mixture probabilities.

    Raises:
        ValidationError: If any probability is below -NEG_PROB_TOL.
    """
    probs = np.asarray(values, dtype=float) @ sign_matrix(n) / 4 ** n
    worst = probs.min() if probs.size else 0.0
    if worst < -config.NEG_PROB_TOL:
        raise ValidationError(f'eigen table is not a Pauli channel (probability {worst:.3g})')
    probs = np.clip(probs, 0.0, None)
    total = probs.sum(axis=-1, keepdims=True)
    return np.divide(probs, total, out=np.zeros_like(probs), where=total > 0)


def eigen_table_to_channel(table: PauliEigenTable) -> PauliChannel:
    """Explicit Pauli channel with the given eigenvalues."""
    probs = channel_probabilities(table.values, table.n)
    xs, zs = table_xz(table.n)
    layout = (table.n,)
    return PauliChannel(layout, {PauliLabel(int(x), int(z), layout): p for x, z, p in zip(xs, zs, probs)})


def _joint_after_cycles(t: CycleTransfer, pt: PrepTransfer, k: int) -> np.ndarray:
    """Joint weights w[s, l] over syndrome and accumulated corrected-frame Pauli after K cycles."""
    n_L = t.n_L
    size = 4 ** n_L
    if size * t.dim > config.MAX_JOINT_STATES:
        raise CapacityError(f'joint state space {size * t.dim} exceeds {config.MAX_JOINT_STATES}')
    compose = compose_index(n_L)
    w = pt.gamma[:, None] * channel_probabilities(pt.eigen, n_L)
    if k:
        cells = channel_probabilities(t.conditional().transpose(1, 2, 0), n_L)
        for _ in range(k):
            w = np.einsum('irc,oic,oi->or', w[:, compose], cells, t.gamma)
    return w


def _total_channel(t: CycleTransfer, pt: PrepTransfer, mt: MeasTransfer, k: int) -> np.ndarray:
    w = _joint_after_cycles(t, pt, k)
    meas = channel_probabilities(mt.eigen, t.n_L)
    return np.einsum('src,sc->r', w[:, compose_index(t.n_L)], meas)


def path_sum_channel(t: CycleTransfer, pt: PrepTransfer, mt: MeasTransfer, k: int) -> PauliEigenTable:
    """Eigenvalues of the total logical channel after K cycles, from the explicit path sum."""
    return PauliEigenTable(t.n_L, walsh_hadamard_eigenvalues(_total_channel(t, pt, mt, k), t.n_L))


def path_sum_exact(
    t: CycleTransfer,
    pt: PrepTransfer,
    mt: MeasTransfer,
    k: int,
    sigma: PauliEigenTable,
    outcomes: list[frozenset[int]],
) -> np.ndarray:
    """Outcome probabilities after K cycles by dynamic programming over explicit channels.

    Args:
        t: Cycle tables.
        pt: Preparation tables.
        mt: Measurement tables.
        k: Number of cycles.
        sigma: Pauli expectations of the ideal logical state.
        outcomes: POVM elements as sets of basis labels.

    Returns:
        One probability per outcome.
    """
    total = _total_channel(t, pt, mt, k)
    diag = basis_distribution(sigma)
    xs, _ = table_xz(t.n_L)
    b = np.arange(1 << t.n_L, dtype=np.int64)
    out = np.zeros(len(outcomes))
    for j, e in enumerate(outcomes):
        member = np.zeros(1 << t.n_L, dtype=bool)
        member[list(e)] = True
        hits = member[b[None, :] ^ xs[:, None]]
        out[j] = total @ (hits @ diag)
    return out


@dataclass(frozen=True)
class TrajectoryCounts:
    """Outcome counts per logical basis label."""

    n_L: int
    counts: np.ndarray
    shots: int
    seed: int

    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots

    def grouped(self, outcomes: list[frozenset[int]]) -> np.ndarray:
        return np.array([self.counts[list(e)].sum() for e in outcomes], dtype=np.int64)


class _Sampler:
    """Cumulative table over the terms of one channel, split per register."""

    def __init__(self, ch: PauliChannel):
        self.x, _, probs = ch.register_arrays()
        self.cdf = np.cumsum(probs) / probs.sum()

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        idx = np.searchsorted(self.cdf, rng.random(n), side='right')
        return np.minimum(idx, len(self.cdf) - 1)


def _run_shard(spec, prep, meas, k, n, seed, defer):
    rng = np.random.default_rng(seed)
    code, dim, s_star = spec.code, spec.layout.n_syndromes, spec.s_star.value
    cx = spec.decoder.cx
    diag = basis_distribution(prep.sigma)
    cdf = np.cumsum(diag) / diag.sum()
    basis = np.minimum(np.searchsorted(cdf, rng.random(n), side='right'), len(cdf) - 1)

    draw = _Sampler(prep.noise)
    idx = draw.draw(rng, n)
    frame = draw.x[0][idx].copy()
    s = s_star ^ draw.x[1][idx]
    pending = np.zeros(n, dtype=np.int64)

    noise = _Sampler(spec.noise)
    for _ in range(k):
        idx = noise.draw(rng, n)
        theta = noise.x[3][idx]
        if spec.randomize_syndrome:
            r = rng.integers(0, dim, n)
            sig = s ^ r
            m = code.decode_array(code.encode_array(sig) ^ theta)
            err = r ^ m ^ s_star
            s = sig ^ noise.x[1][idx] ^ s_star ^ m
        else:
            m = code.decode_array(code.encode_array(s) ^ theta)
            err = m ^ s_star
            s = s ^ noise.x[1][idx] ^ s_star ^ m
        frame ^= noise.x[0][idx]
        if defer:
            pending ^= cx[err]
        else:
            frame ^= cx[err]
    frame ^= pending

    ro = meas.readout
    draw = _Sampler(meas.noise)
    idx = draw.draw(rng, n)
    theta = ro.encode(basis ^ frame ^ draw.x[0][idx], s ^ draw.x[1][idx]) ^ draw.x[3][idx]
    outcome = ro.decode(theta)
    return np.bincount(outcome, minlength=1 << ro.n_L)


def trajectory_sample(
    spec: QecCycleSpec,
    prep: PrepSpec,
    meas: MeasSpec,
    k: int,
    shots: int,
    seed: int = config.DEFAULT_SEED,
    *,
    defer_corrections: bool = False,
    workers: int | None = None,
) -> TrajectoryCounts:
    """Monte-Carlo realization of prep, K noisy cycles and the logical measurement.

    Shots are split into fixed-size shards seeded by splitmix64(seed + shard), so the counts do
    not depend on the number of worker threads.

    Args:
        spec: Cycle spec with raw noise and decoder.
        prep: Preparation; the ideal basis state is drawn from the diagonal of sigma_L.
        meas: Measurement.
        k: Number of cycles.
        shots: Number of trajectories.
        seed: 64-bit base seed.
        defer_corrections: Track corrections in a classical frame and apply them only at readout.
        workers: Thread cap.

    Returns:
        Outcome counts per logical basis label.
    """
    if shots < 1:
        raise ValueError(f'shots must be positive, got {shots}')
    for ch in (prep.noise, spec.noise, meas.noise):
        ch.require_normalized()
    sizes = [min(config.SHARD_SIZE, shots - i) for i in range(0, shots, config.SHARD_SIZE)]

    def run(item):
        shard, n = item
        return _run_shard(spec, prep, meas, k, n, shard_seed(seed, shard), defer_corrections)

    with concurrent.futures.ThreadPoolExecutor(max_workers=config.max_workers(workers)) as executor:
        parts = list(executor.map(run, enumerate(sizes)))
    counts = np.sum(parts, axis=0).astype(np.int64)
    log.debug('sampled %d shots over %d shards, K=%d', shots, len(sizes), k)
    return TrajectoryCounts(meas.readout.n_L, counts, shots, seed)
