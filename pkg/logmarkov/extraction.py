"""
Exact extraction of the syndrome Markov process and the conditional logical channels

Every noise term is pushed through one cycle for all input syndromes at once. Results are kept
as gamma-weighted Pauli eigenvalues W_P[s_out, s_in] in the corrected frame, where the frame
correction for true syndrome s is the decoder entry for s + s*.
"""

from __future__ import annotations

import concurrent.futures
import logging
from dataclasses import dataclass

import numpy as np

from . import config
from .cycle import DecoderTable, MeasSpec, PrepSpec, QecCycleSpec, require_valid
from .errors import CapacityError, HypothesisViolation, UnsupportedSpecError
from .pauli import PauliEigenTable, sign_rows

log = logging.getLogger(__name__)

TERM_CHUNK = 256


@dataclass(frozen=True)
class CycleTransfer:
    """Exhaustive per-cycle tables.

    Attributes:
        n_L: Logical qubits.
        n_S: Syndrome qubits.
        s_star: Packed default syndrome.
        gamma: Transition matrix, entry (s_out, s_in); columns sum to 1.
        weighted: Shape (4^n_L, 2^n_S, 2^n_S); W_P[s_out, s_in] = gamma * corrected eigenvalue.
        smip: Whether the gamma columns agree within tolerance.
        marginal: Common column of gamma when ``smip`` holds, else None.
        randomized: Whether syndrome randomization was applied.
    """

    n_L: int
    n_S: int
    s_star: int
    gamma: np.ndarray
    weighted: np.ndarray
    smip: bool
    marginal: np.ndarray | None
    randomized: bool = False

    @property
    def dim(self) -> int:
        return 1 << self.n_S

    def require_smip(self) -> np.ndarray:
        if not self.smip or self.marginal is None:
            raise HypothesisViolation('syndrome marginal depends on the input syndrome (no SMIP)')
        return self.marginal

    def conditional(self) -> np.ndarray:
        """Corrected-frame eigenvalues W / gamma, identity where gamma vanishes."""
        with np.errstate(divide='ignore', invalid='ignore'):
            out = np.where(self.gamma > 0, self.weighted / self.gamma, 1.0)
        return out


@dataclass(frozen=True)
class PrepTransfer:
    """Syndrome distribution after preparation and corrected-frame eigen tables per s0.

    Attributes:
        gamma: Probability of each initial syndrome s0.
        eigen: Shape (2^n_S, 4^n_L); identity rows where gamma vanishes.
    """

    n_L: int
    gamma: np.ndarray
    eigen: np.ndarray

    @property
    def weighted(self) -> np.ndarray:
        return self.gamma[:, None] * self.eigen

    def table(self, s0: int) -> PauliEigenTable:
        return PauliEigenTable(self.n_L, self.eigen[s0])


@dataclass(frozen=True)
class MeasTransfer:
    """Corrected-frame measurement channels per syndrome.

    Attributes:
        eigen: Shape (2^n_S, 4^n_L), eigenvalues of Lambda~meas_s.
        flips: Shape (2^n_S, 2^n_L), probability of logical bit flip x' given s.
    """

    n_L: int
    eigen: np.ndarray
    flips: np.ndarray

    def table(self, s: int) -> PauliEigenTable:
        return PauliEigenTable(self.n_L, self.eigen[s])


def _check_capacity(n_L: int, n_S: int):
    cells = (4 ** n_L) * (1 << n_S) ** 2
    if n_S > config.MAX_NS or cells > config.MAX_TABLE_CELLS:
        raise CapacityError(f'transfer tables for n_L={n_L}, n_S={n_S} exceed the cap')


def _chunks(n: int):
    return [slice(i, min(i + TERM_CHUNK, n)) for i in range(0, n, TERM_CHUNK)]


def _reduce(parts, n_L: int, n_S: int) -> tuple[np.ndarray, np.ndarray]:
    dim = 1 << n_S
    gamma = np.zeros((dim, dim))
    weighted = np.zeros((4 ** n_L, dim, dim))
    for g, w in parts:
        gamma += g
        weighted += w
    return gamma, weighted


def _map_chunks(fn, n_terms: int, workers: int | None):
    chunks = _chunks(n_terms)
    if len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with concurrent.futures.ThreadPoolExecutor(max_workers=config.max_workers(workers)) as executor:
        return list(executor.map(fn, chunks))


def check_smip(t: CycleTransfer, tol: float = config.SMIP_TOL) -> bool:
    """True iff every row of gamma is constant across input syndromes within ``tol``."""
    spread = t.gamma.max(axis=1) - t.gamma.min(axis=1)
    return bool(spread.max() <= tol)


def _finish(n_L, n_S, s_star, gamma, weighted, randomized, tol) -> CycleTransfer:
    spread = gamma.max(axis=1) - gamma.min(axis=1)
    smip = bool(spread.max() <= tol)
    marginal = gamma.mean(axis=1) if smip else None
    if not smip:
        log.info('cycle transfer lacks SMIP, max column spread %.3g', spread.max())
    return CycleTransfer(n_L, n_S, s_star, gamma, weighted, smip, marginal, randomized)


def cycle_transfer(spec: QecCycleSpec, tol: float = config.SMIP_TOL, workers: int | None = None) -> CycleTransfer:
    """Extract gamma and the corrected-frame weighted eigenvalues of one cycle.

    Delegates to :func:`randomized_cycle_transfer` when the spec asks for syndrome
    randomization.

    Args:
        spec: A valid cycle spec.
        tol: SMIP tolerance.
        workers: Thread cap; defaults to ``config.max_workers()``.

    Returns:
        The transfer tables.
    """
    require_valid(spec)
    if spec.randomize_syndrome:
        return randomized_cycle_transfer(spec, tol, workers)
    n_L, n_S = spec.layout.n_L, spec.layout.n_S
    _check_capacity(n_L, n_S)
    dim = 1 << n_S
    s_star = spec.s_star.value
    xs, zs, probs = spec.noise.register_arrays()
    cx, cz = spec.decoder.cx, spec.decoder.cz
    tcx, tcz = spec.decoder.frame(s_star)
    s_in = np.arange(dim, dtype=np.int64)
    encoded = spec.code.encode_array(s_in)

    def run(chunk: slice):
        gamma = np.zeros((dim, dim))
        weighted = np.zeros((4 ** n_L, dim, dim))
        for t in range(chunk.start, chunk.stop):
            mu = probs[t]
            s_meas = spec.code.decode_array(encoded ^ xs[3][t])
            s_out = s_in ^ xs[1][t] ^ s_star ^ s_meas
            err = s_meas ^ s_star
            net_x = tcx[s_out] ^ cx[err] ^ xs[0][t] ^ tcx[s_in]
            net_z = tcz[s_out] ^ cz[err] ^ zs[0][t] ^ tcz[s_in]
            gamma[s_out, s_in] += mu
            weighted[:, s_out, s_in] += mu * sign_rows(net_x, net_z, n_L).T
        return gamma, weighted

    gamma, weighted = _reduce(_map_chunks(run, len(probs), workers), n_L, n_S)
    log.debug('cycle transfer: %d terms, %d syndromes', len(probs), dim)
    return _finish(n_L, n_S, s_star, gamma, weighted, False, tol)


def randomized_cycle_transfer(
    spec: QecCycleSpec, tol: float = config.SMIP_TOL, workers: int | None = None
) -> CycleTransfer:
    """Extract the cycle tables averaged over a uniformly random syndrome offset.

    For offset state sigma the readout sees D(E(sigma) + theta'); the output syndrome no
    longer depends on s_in, so the resulting gamma always has identical columns.
    """
    require_valid(spec)
    n_L, n_S = spec.layout.n_L, spec.layout.n_S
    _check_capacity(n_L, n_S)
    dim = 1 << n_S
    weight = 1.0 / dim
    s_star = spec.s_star.value
    xs, zs, probs = spec.noise.register_arrays()
    cx, cz = spec.decoder.cx, spec.decoder.cz
    tcx, tcz = spec.decoder.frame(s_star)
    s_in = np.arange(dim, dtype=np.int64)
    encoded = spec.code.encode_array(s_in)

    def run(chunk: slice):
        gamma = np.zeros((dim, dim))
        weighted = np.zeros((4 ** n_L, dim, dim))
        for t in range(chunk.start, chunk.stop):
            mu = probs[t] * weight
            meas = spec.code.decode_array(encoded ^ xs[3][t])
            for sigma in range(dim):
                m = int(meas[sigma])
                s_out = sigma ^ int(xs[1][t]) ^ s_star ^ m
                err = s_in ^ sigma ^ m ^ s_star
                net_x = tcx[s_out] ^ cx[err] ^ xs[0][t] ^ tcx[s_in]
                net_z = tcz[s_out] ^ cz[err] ^ zs[0][t] ^ tcz[s_in]
                gamma[s_out, :] += mu
                weighted[:, s_out, :] += mu * sign_rows(net_x, net_z, n_L).T
        return gamma, weighted

    gamma, weighted = _reduce(_map_chunks(run, len(probs), workers), n_L, n_S)
    log.debug('randomized cycle transfer: %d terms, %d syndromes', len(probs), dim)
    return _finish(n_L, n_S, s_star, gamma, weighted, True, tol)


def prep_transfer(prep: PrepSpec, s_star: int, decoder: DecoderTable) -> PrepTransfer:
    """Initial syndrome distribution and corrected-frame prep channels.

    Args:
        prep: Preparation with noise over (L, S).
        s_star: Packed default syndrome.
        decoder: Supplies the frame corrections.

    Returns:
        gamma_prep over s0 and one eigen table per s0.
    """
    prep.noise.require_normalized()
    n_L, n_S = prep.noise.layout
    dim = 1 << n_S
    xs, zs, probs = prep.noise.register_arrays()
    tcx, tcz = decoder.frame(s_star)
    s0 = xs[1] ^ s_star
    gamma = np.zeros(dim)
    weighted = np.zeros((dim, 4 ** n_L))
    np.add.at(gamma, s0, probs)
    np.add.at(weighted, s0, probs[:, None] * sign_rows(xs[0] ^ tcx[s0], zs[0] ^ tcz[s0], n_L))
    with np.errstate(divide='ignore', invalid='ignore'):
        eigen = np.where(gamma[:, None] > 0, weighted / gamma[:, None], 1.0)
    return PrepTransfer(n_L, gamma, eigen)


def meas_transfer(
    meas: MeasSpec, s_star: int, decoder: DecoderTable, seed: int = config.DEFAULT_SEED
) -> MeasTransfer:
    """Corrected-frame measurement channels, one per syndrome at readout.

    The outcome for logical bits x_L and term (P_l, P_s, P_a, P_o) is
    D_M(E_M(x_L + x(P_l), s + x(P_s)) + x(P_o)); the flip x' = outcome + x_L must not depend
    on x_L, which is checked at x_L = 0 and at one nonzero x_L drawn from ``seed``.

    Raises:
        UnsupportedSpecError: If the flip depends on x_L.
    """
    meas.noise.require_normalized()
    ro = meas.readout
    n_L, n_S = ro.n_L, ro.n_S
    dim = 1 << n_S
    xs, _, probs = meas.noise.register_arrays()
    shape = (len(probs), dim)
    s = np.broadcast_to(np.arange(dim, dtype=np.int64)[None, :], shape)

    def flips(x_L: int) -> np.ndarray:
        logical = np.broadcast_to((x_L ^ xs[0])[:, None], shape)
        theta = ro.encode(logical, s ^ xs[1][:, None]) ^ xs[3][:, None]
        return ro.decode(theta) ^ x_L

    base = flips(0)
    if n_L:
        probe = int(np.random.default_rng(seed).integers(1, 1 << n_L))
        if not np.array_equal(base, flips(probe)):
            raise UnsupportedSpecError(f'measurement {meas.name}: logical flip depends on x_L')
    q = np.zeros((dim, 1 << n_L))
    np.add.at(q, (s, base), np.broadcast_to(probs[:, None], shape))
    xflip = sign_rows(np.arange(1 << n_L), np.zeros(1 << n_L, dtype=np.int64), n_L)
    tcx, tcz = decoder.frame(s_star)
    eigen = (q @ xflip) * sign_rows(tcx, tcz, n_L)
    return MeasTransfer(n_L, eigen, q)


def single_cycle_channel(t: CycleTransfer) -> PauliEigenTable:
    """Eigenvalues of the syndrome-averaged corrected cycle channel, sum_ij W_P[i, j] gamma_j."""
    gamma = t.require_smip()
    return PauliEigenTable(t.n_L, np.einsum('pij,j->p', t.weighted, gamma))


def entanglement_fidelity(table: PauliEigenTable) -> float:
    """Entanglement fidelity D^-2 sum_P lambda_P of a Pauli-diagonal channel."""
    return float(table.values.sum() / 4 ** table.n)


def absorb_cycle_into_prep(pt: PrepTransfer, t: CycleTransfer) -> PrepTransfer:
    """Fold one noisy cycle into the preparation so that gamma_prep equals the cycle marginal."""
    marginal = t.require_smip()
    weighted = np.einsum('pij,jp->ip', t.weighted, pt.weighted)
    with np.errstate(divide='ignore', invalid='ignore'):
        eigen = np.where(marginal[:, None] > 0, weighted / marginal[:, None], 1.0)
    return PrepTransfer(pt.n_L, marginal.copy(), eigen)
