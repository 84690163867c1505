"""
QEC cycle specifications in the Clifford frame

Holds the register layout, syndrome encode/decode maps, decoder tables, state-preparation and
logical-measurement specs, and the checks that tie them together. Bitstrings are packed integers
with qubit 1 as the most significant bit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from . import config
from .errors import CapacityError, DimensionError, ValidationError
from .pauli import BitString, PauliChannel, PauliEigenTable, PauliLabel, table_xz

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit counts of the logical, syndrome, ancilla and outcome registers."""

    n_L: int
    n_S: int
    n_A: int = 0
    n_O: int = 0

    def __post_init__(self):
        if min(self.n_L, self.n_S, self.n_A, self.n_O) < 0:
            raise DimensionError(f'negative register size in {self.widths}')

    @property
    def widths(self) -> tuple[int, int, int, int]:
        return (self.n_L, self.n_S, self.n_A, self.n_O)

    @property
    def n_syndromes(self) -> int:
        return 1 << self.n_S

    def issues(self) -> list[str]:
        out = []
        if self.n_L < 1:
            out.append('layout: n_L must be at least 1')
        if self.n_S < 1:
            out.append('layout: n_S must be at least 1')
        if self.n_O < self.n_S:
            out.append(f'layout: n_O={self.n_O} smaller than n_S={self.n_S}')
        if self.n_S > config.MAX_NS:
            out.append(f'layout: n_S={self.n_S} exceeds cap {config.MAX_NS}')
        if self.n_O > config.MAX_NO:
            out.append(f'layout: n_O={self.n_O} exceeds cap {config.MAX_NO}')
        return out


# --- syndrome codes --------------------------------------------------------------------------------


class SyndromeCode:
    """Encoder E: S-bitstrings -> O-bitstrings and decoder D: O-bitstrings -> S-bitstrings.

    Subclasses implement the vectorized ``encode_array`` and ``decode_array``; the scalar
    forms are derived from them.
    """

    kind = 'abstract'

    def __init__(self, n_S: int, n_O: int):
        self.n_S = n_S
        self.n_O = n_O

    def encode_array(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def decode_array(self, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def encode(self, s: int | BitString) -> int:
        if isinstance(s, BitString):
            if s.width != self.n_S:
                raise DimensionError(f'syndrome width {s.width}, expected {self.n_S}')
            s = s.value
        return int(self.encode_array(np.array([s], dtype=np.int64))[0])

    def decode(self, theta: int | BitString) -> int:
        if isinstance(theta, BitString):
            if theta.width != self.n_O:
                raise DimensionError(f'outcome width {theta.width}, expected {self.n_O}')
            theta = theta.value
        return int(self.decode_array(np.array([theta], dtype=np.int64))[0])

    def round_trip_ok(self) -> bool:
        s = np.arange(1 << self.n_S, dtype=np.int64)
        return bool(np.array_equal(self.decode_array(self.encode_array(s)), s))

    def __repr__(self) -> str:
        return f'{type(self).__name__}(n_S={self.n_S}, n_O={self.n_O})'


class TableCode(SyndromeCode):
    """Code given by explicit truth tables for E (length 2^n_S) and D (length 2^n_O)."""

    kind = 'table'

    def __init__(self, n_S: int, n_O: int, encode: Iterable[int], decode: Iterable[int]):
        super().__init__(n_S, n_O)
        self.encode_table = np.asarray(list(encode), dtype=np.int64)
        self.decode_table = np.asarray(list(decode), dtype=np.int64)
        if self.encode_table.shape != (1 << n_S,):
            raise DimensionError(f'encode table needs {1 << n_S} entries, got {self.encode_table.size}')
        if self.decode_table.shape != (1 << n_O,):
            raise DimensionError(f'decode table needs {1 << n_O} entries, got {self.decode_table.size}')
        if self.encode_table.size and (self.encode_table.min() < 0 or self.encode_table.max() >> n_O):
            raise DimensionError('encode table values exceed n_O bits')
        if self.decode_table.size and (self.decode_table.min() < 0 or self.decode_table.max() >> n_S):
            raise DimensionError('decode table values exceed n_S bits')

    @classmethod
    def identity(cls, n: int) -> TableCode:
        r = np.arange(1 << n)
        return cls(n, n, r, r)

    def encode_array(self, s):
        return self.encode_table[np.asarray(s, dtype=np.int64)]

    def decode_array(self, theta):
        return self.decode_table[np.asarray(theta, dtype=np.int64)]


class RepetitionCode(SyndromeCode):
    """Per-bit r-fold repetition with blockwise majority decoding.

    The block of syndrome bit 1 is leftmost: E(10) = 111000 for r = 3.
    """

    kind = 'repetition'

    def __init__(self, n_S: int, repeats: int):
        if repeats < 1 or repeats % 2 == 0:
            raise ValidationError(
                f'repetition count {repeats} must be odd for majority decoding; '
                'use a linear code with randomize_syndrome for even counts'
            )
        super().__init__(n_S, n_S * repeats)
        self.repeats = repeats

    def encode_array(self, s):
        s = np.asarray(s, dtype=np.int64)
        r, block = self.repeats, (1 << self.repeats) - 1
        out = np.zeros_like(s)
        for i in range(self.n_S):
            shift = self.n_S - 1 - i
            out |= ((s >> shift) & 1) * (block << (shift * r))
        return out

    def decode_array(self, theta):
        theta = np.asarray(theta, dtype=np.int64)
        r, block = self.repeats, (1 << self.repeats) - 1
        out = np.zeros_like(theta)
        for i in range(self.n_S):
            shift = self.n_S - 1 - i
            ones = np.bitwise_count((theta >> (shift * r)) & block).astype(np.int64)
            out |= (ones > r // 2).astype(np.int64) << shift
        return out

    def generator(self) -> np.ndarray:
        return np.kron(np.eye(self.n_S, dtype=np.uint8), np.ones((self.repeats, 1), dtype=np.uint8))


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of packed row vectors."""
    basis: list[int] = []
    for row in rows:
        for b in basis:
            row = min(row, row ^ b)
        if row:
            basis.append(row)
    return len(basis)


class LinearCode(SyndromeCode):
    """E(s) = G s over GF(2); D is minimum-weight decoding, ties to the smallest s.

    Decoded values are cached per queried theta, so only outcomes that the noise
    support can reach are ever materialized.
    """

    kind = 'linear'

    def __init__(self, generator: np.ndarray):
        g = np.asarray(generator, dtype=np.uint8) % 2
        if g.ndim != 2:
            raise DimensionError(f'generator must be 2-D, got shape {g.shape}')
        n_O, n_S = g.shape
        super().__init__(n_S, n_O)
        self.generator_matrix = g
        cols = [int(''.join(str(b) for b in g[:, j]), 2) if n_O else 0 for j in range(n_S)]
        if gf2_rank(cols) < n_S:
            raise ValidationError(f'generator matrix of shape {g.shape} is not full column rank')
        self._columns = cols
        s = np.arange(1 << n_S, dtype=np.int64)
        words = np.zeros_like(s)
        for j, col in enumerate(cols):
            words ^= ((s >> (n_S - 1 - j)) & 1) * col
        self.codewords = words
        self._cache: dict[int, int] = {}

    def encode_array(self, s):
        return self.codewords[np.asarray(s, dtype=np.int64)]

    def _fill(self, thetas: np.ndarray):
        chunk = max(1, config.MAX_ENUMERATION // max(1, self.codewords.size))
        for start in range(0, thetas.size, chunk):
            part = thetas[start:start + chunk]
            dist = np.bitwise_count(part[:, None] ^ self.codewords[None, :])
            best = np.argmin(dist, axis=1)
            self._cache.update(zip(part.tolist(), best.tolist()))

    def decode_array(self, theta):
        theta = np.asarray(theta, dtype=np.int64)
        uniq, inverse = np.unique(theta, return_inverse=True)
        missing = np.array([t for t in uniq.tolist() if t not in self._cache], dtype=np.int64)
        if missing.size:
            self._fill(missing)
        decoded = np.array([self._cache[t] for t in uniq.tolist()], dtype=np.int64)
        return decoded[inverse].reshape(theta.shape)


def build_linear_code(generator: np.ndarray | Iterable[Iterable[int]]) -> LinearCode:
    """Build a linear syndrome code with minimum-weight decoding.

    Args:
        generator: n_O x n_S binary matrix.

    Returns:
        The code.

    Raises:
        ValidationError: If the generator is rank deficient.
    """
    g = np.asarray(generator, dtype=np.uint8)
    if g.shape[0] > config.MAX_NO:
        raise CapacityError(f'n_O={g.shape[0]} exceeds cap {config.MAX_NO}')
    return LinearCode(g)


def check_decoding_symmetry(code: SyndromeCode) -> bool:
    """Exhaustively check D(E(s) + t) = s + D(t) for all s and t.

    Raises:
        CapacityError: If 2^(n_S + n_O) exceeds the enumeration cap.
    """
    if (1 << (code.n_S + code.n_O)) > config.MAX_ENUMERATION:
        raise CapacityError(f'decoding symmetry check needs 2^{code.n_S + code.n_O} evaluations')
    thetas = np.arange(1 << code.n_O, dtype=np.int64)
    base = code.decode_array(thetas)
    words = code.encode_array(np.arange(1 << code.n_S, dtype=np.int64))
    for s, word in enumerate(words.tolist()):
        if not np.array_equal(code.decode_array(thetas ^ word), base ^ s):
            log.debug('decoding symmetry fails at s=%d', s)
            return False
    return True


# --- decoder tables --------------------------------------------------------------------------------


@dataclass(frozen=True)
class DecoderTable:
    """Logical correction per error syndrome, stored as packed X and Z arrays over L."""

    n_L: int
    n_S: int
    cx: np.ndarray
    cz: np.ndarray

    def __post_init__(self):
        cx = np.asarray(self.cx, dtype=np.int64)
        cz = np.asarray(self.cz, dtype=np.int64)
        size = 1 << self.n_S
        if cx.shape != (size,) or cz.shape != (size,):
            raise DimensionError(f'decoder table needs {size} entries')
        if (cx >> self.n_L).any() or (cz >> self.n_L).any():
            raise DimensionError(f'decoder corrections exceed {self.n_L} logical qubits')
        cx.flags.writeable = False
        cz.flags.writeable = False
        object.__setattr__(self, 'cx', cx)
        object.__setattr__(self, 'cz', cz)

    @classmethod
    def identity(cls, n_L: int, n_S: int) -> DecoderTable:
        size = 1 << n_S
        return cls(n_L, n_S, np.zeros(size, dtype=np.int64), np.zeros(size, dtype=np.int64))

    @classmethod
    def from_mapping(cls, n_L: int, n_S: int, mapping: Mapping[str | int | BitString, str | PauliLabel]):
        """Build from ``{error syndrome: correction}``; missing syndromes get the identity."""
        cx = np.zeros(1 << n_S, dtype=np.int64)
        cz = np.zeros(1 << n_S, dtype=np.int64)
        for key, value in mapping.items():
            if isinstance(key, str):
                key = BitString.parse(key, n_S)
            if isinstance(key, BitString):
                if key.width != n_S:
                    raise DimensionError(f'decoder key width {key.width}, expected {n_S}')
                key = key.value
            if isinstance(value, str):
                value = PauliLabel.parse(value, (n_L,))
            if value.width != n_L:
                raise DimensionError(f'correction {value} is not on {n_L} logical qubits')
            cx[key], cz[key] = value.x, value.z
        return cls(n_L, n_S, cx, cz)

    def correction(self, s_err: int | BitString) -> PauliLabel:
        if isinstance(s_err, BitString):
            s_err = s_err.value
        return PauliLabel(int(self.cx[s_err]), int(self.cz[s_err]), (self.n_L,))

    def frame(self, s_star: int) -> tuple[np.ndarray, np.ndarray]:
        """Frame-change corrections indexed by true syndrome: entry s is decoder[s + s*]."""
        idx = np.arange(1 << self.n_S, dtype=np.int64) ^ s_star
        return self.cx[idx], self.cz[idx]


# --- cycle, preparation and measurement specs ------------------------------------------------------


@dataclass(frozen=True)
class QecCycleSpec:
    """Everything that defines one noisy QEC cycle."""

    layout: RegisterLayout
    code: SyndromeCode
    decoder: DecoderTable
    s_star: BitString
    noise: PauliChannel
    randomize_syndrome: bool = False


def basis_expectations(label: int | BitString, n_L: int) -> PauliEigenTable:
    """Pauli expectations tr(P sigma) of the computational basis state ``label``."""
    if isinstance(label, BitString):
        if label.width != n_L:
            raise DimensionError(f'basis label width {label.width}, expected {n_L}')
        label = label.value
    xs, zs = table_xz(n_L)
    parity = np.bitwise_count(zs & label) & 1
    values = np.where(xs == 0, 1.0 - 2.0 * parity, 0.0)
    return PauliEigenTable(n_L, values)


def basis_distribution(sigma: PauliEigenTable) -> np.ndarray:
    """Diagonal of sigma_L in the computational basis, from its Z-type expectations."""
    n = sigma.n
    xs, zs = table_xz(n)
    ztype = xs == 0
    b = np.arange(1 << n, dtype=np.int64)
    signs = 1.0 - 2.0 * (np.bitwise_count(b[:, None] & zs[ztype][None, :]) & 1)
    diag = signs @ sigma.values[ztype] / (1 << n)
    return np.clip(diag, 0.0, None)


@dataclass(frozen=True)
class PrepSpec:
    """Noisy logical state preparation: ideal sigma_L followed by noise on L and S."""

    name: str
    sigma: PauliEigenTable
    noise: PauliChannel

    @classmethod
    def from_basis(cls, name: str, label: int | BitString, noise: PauliChannel) -> PrepSpec:
        return cls(name, basis_expectations(label, noise.layout[0]), noise)

    @classmethod
    def from_expectations(cls, name: str, table: PauliEigenTable, noise: PauliChannel) -> PrepSpec:
        return cls(name, table, noise)

    @property
    def n_L(self) -> int:
        return self.sigma.n

    def issues(self) -> list[str]:
        out = []
        if abs(self.sigma.values[0] - 1.0) > config.NORM_TOL:
            out.append(f'prep {self.name}: expectation at identity is {self.sigma.values[0]}, not 1')
        if np.any(np.abs(self.sigma.values) > 1 + config.NORM_TOL):
            out.append(f'prep {self.name}: Pauli expectations outside [-1, 1]')
        if len(self.noise.layout) != 2 or self.noise.layout[0] != self.sigma.n:
            out.append(f'prep {self.name}: noise layout {self.noise.layout} is not (n_L, n_S)')
        if not self.noise.is_normalized():
            out.append(f'prep {self.name}: noise probabilities sum to {self.noise.total():.15g}')
        return out

    def basis_distribution(self) -> np.ndarray:
        return basis_distribution(self.sigma)


@dataclass(frozen=True)
class Readout:
    """Destructive readout Clifford pair: E_M(x_L, s) -> theta and D_M(theta) -> x_L."""

    n_L: int
    n_S: int
    n_out: int
    encode: Callable[[np.ndarray, np.ndarray], np.ndarray]
    decode: Callable[[np.ndarray], np.ndarray]
    description: str = 'custom'


def direct_readout(
    n_L: int,
    n_S: int,
    repeats: int = 1,
    correct: bool = False,
    decoder: DecoderTable | None = None,
    s_star: int = 0,
) -> Readout:
    """Build the standard transversal readout.

    E_M copies each logical bit ``repeats`` times and appends the syndrome bits; D_M takes
    the blockwise majority. With ``correct`` the X-part of the frame correction for the read
    syndrome is applied to the decoded value.

    Args:
        n_L: Logical qubits.
        n_S: Syndrome qubits.
        repeats: Odd repetition of each logical bit.
        correct: Fold the final correction into the readout.
        decoder: Required when ``correct`` is set.
        s_star: Default syndrome, packed.

    Returns:
        The readout pair with n_out = repeats * n_L + n_S.
    """
    if repeats < 1 or repeats % 2 == 0:
        raise ValidationError(f'readout repeats {repeats} must be odd')
    if correct and decoder is None:
        raise ValidationError('readout correction needs a decoder table')
    rep = RepetitionCode(n_L, repeats)
    s_mask = (1 << n_S) - 1

    def encode(x, s):
        return (rep.encode_array(x) << n_S) | np.asarray(s, dtype=np.int64)

    def decode(theta):
        theta = np.asarray(theta, dtype=np.int64)
        x = rep.decode_array(theta >> n_S)
        if correct:
            x = x ^ decoder.cx[(theta & s_mask) ^ s_star]
        return x

    desc = f'direct(repeats={repeats}, correct={correct})'
    return Readout(n_L, n_S, repeats * n_L + n_S, encode, decode, desc)


def povm_elements(partition: Iterable[Iterable[int | str]], n_L: int) -> list[frozenset[int]]:
    """Turn a partition of logical basis labels into POVM elements.

    Args:
        partition: Groups of basis labels, as ints or bitstring text.
        n_L: Logical qubits.

    Returns:
        One frozenset of packed labels per element.

    Raises:
        ValidationError: If the groups overlap, miss labels or go out of range.
    """
    out: list[frozenset[int]] = []
    seen: set[int] = set()
    for group in partition:
        element = set()
        for b in group:
            b = BitString.parse(b, n_L).value if isinstance(b, str) else int(b)
            if not 0 <= b < (1 << n_L):
                raise ValidationError(f'basis label {b} out of range for {n_L} logical qubits')
            if b in seen or b in element:
                raise ValidationError(f'basis label {b} appears twice in the partition')
            element.add(b)
        if not element:
            raise ValidationError('empty POVM element')
        seen |= element
        out.append(frozenset(element))
    if len(seen) != 1 << n_L:
        raise ValidationError(f'partition covers {len(seen)} of {1 << n_L} basis labels')
    return out


@dataclass(frozen=True)
class MeasSpec:
    """Noisy destructive computational-basis logical measurement."""

    name: str
    readout: Readout
    noise: PauliChannel
    povm: list[frozenset[int]] = field(default_factory=list)

    def __post_init__(self):
        if not self.povm:
            object.__setattr__(self, 'povm', povm_elements([[b] for b in range(1 << self.readout.n_L)],
                                                           self.readout.n_L))

    def issues(self) -> list[str]:
        out = []
        lay = self.noise.layout
        if len(lay) != 4 or lay[0] != self.readout.n_L or lay[1] != self.readout.n_S or lay[3] != self.readout.n_out:
            out.append(f'meas {self.name}: noise layout {lay} does not match readout '
                       f'(n_L={self.readout.n_L}, n_S={self.readout.n_S}, n_out={self.readout.n_out})')
        if not self.noise.is_normalized():
            out.append(f'meas {self.name}: noise probabilities sum to {self.noise.total():.15g}')
        return out


@dataclass(frozen=True)
class ExperimentSettings:
    """Preparations, measurements and the (prep, meas) index pairs that are run."""

    preps: list[PrepSpec]
    meas: list[MeasSpec]
    pairs: list[tuple[int, int]]

    @classmethod
    def all_pairs(cls, preps: list[PrepSpec], meas: list[MeasSpec]) -> ExperimentSettings:
        return cls(preps, meas, [(p, m) for p in range(len(preps)) for m in range(len(meas))])

    def issues(self) -> list[str]:
        out = []
        if not self.pairs:
            out.append('settings: no (prep, meas) pairs')
        for p, m in self.pairs:
            if not (0 <= p < len(self.preps) and 0 <= m < len(self.meas)):
                out.append(f'settings: pair ({p}, {m}) out of range')
        for prep in self.preps:
            out.extend(prep.issues())
        for meas in self.meas:
            out.extend(meas.issues())
        return out


def validate_spec(spec: QecCycleSpec) -> list[str]:
    """Collect every convention violation of a cycle spec.

    Returns:
        Human-readable issues; an empty list means the spec is valid.
    """
    issues = spec.layout.issues()
    lay = spec.layout
    if spec.code.n_S != lay.n_S or spec.code.n_O != lay.n_O:
        issues.append(f'code: widths (n_S={spec.code.n_S}, n_O={spec.code.n_O}) do not match layout')
    elif lay.n_S <= config.MAX_NS and not spec.code.round_trip_ok():
        issues.append('code: D(E(s)) != s for some syndrome')
    if spec.decoder.n_L != lay.n_L or spec.decoder.n_S != lay.n_S:
        issues.append('decoder: widths do not match layout')
    elif spec.decoder.cx[0] or spec.decoder.cz[0]:
        issues.append(f'decoder: trivial syndrome maps to {spec.decoder.correction(0)}, not identity')
    if spec.s_star.width != lay.n_S:
        issues.append(f's_star: width {spec.s_star.width}, expected {lay.n_S}')
    if spec.noise.layout != lay.widths:
        issues.append(f'noise: layout {spec.noise.layout} does not match {lay.widths}')
    if not spec.noise.is_normalized():
        issues.append(f'noise: probabilities sum to {spec.noise.total():.15g}, not 1')
    return issues


def require_valid(spec: QecCycleSpec) -> QecCycleSpec:
    issues = validate_spec(spec)
    if issues:
        raise ValidationError('; '.join(issues))
    return spec


def build_repetition_cycle(
    n_S: int,
    repeats: int,
    s_star: BitString | str | int,
    decoder: DecoderTable,
    noise: PauliChannel,
    randomize_syndrome: bool = False,
) -> QecCycleSpec:
    """Build a cycle whose syndrome is read out with an r-fold repetition code.

    The register layout is taken from ``noise``, whose O register must hold r * n_S bits.

    Raises:
        ValidationError: For even ``repeats`` or a layout mismatch.
    """
    code = RepetitionCode(n_S, repeats)
    n_L, ns, n_A, n_O = noise.layout
    if ns != n_S or n_O != n_S * repeats:
        raise ValidationError(f'noise layout {noise.layout} does not fit n_S={n_S}, repeats={repeats}')
    if isinstance(s_star, str):
        s_star = BitString.parse(s_star, n_S)
    elif isinstance(s_star, int):
        s_star = BitString(s_star, n_S)
    spec = QecCycleSpec(RegisterLayout(n_L, n_S, n_A, n_O), code, decoder, s_star, noise, randomize_syndrome)
    log.debug('built repetition cycle n_S=%d r=%d', n_S, repeats)
    return spec
